"""Inner products over SL(2,C) against radial weights, on factored rules.

The polar product rules keep nodes as pairs ``g = x * exp(iY)``; band-limited
evaluations then factor through ``D^j(g) = D^j(x) D^j(exp(iY))``, which turns
the double sum into small matrix contractions instead of materializing every
node.
"""

from __future__ import annotations

import numpy as np

from .algebra import QuadratureRuleKC
from .wigner import BandLimited, wigner_matrix


def _factored_values(f: BandLimited, dx: dict, ey: dict) -> np.ndarray:
    """f(x_q * exp(iY_p)) for all node pairs, shape (n_x, n_y)."""
    some = next(iter(dx.values()))
    vals = 0.0
    for two_j, c in f.blocks.items():
        vals = vals + np.einsum(
            "ab,xac,ycb->xy", c, dx[two_j], ey[two_j], optimize=True
        )
    if np.isscalar(vals) or np.ndim(vals) == 0:
        vals = np.zeros((some.shape[0], 1), dtype=complex)
    return vals


def _rep_tables(rule: QuadratureRuleKC, spins: set[int]):
    dx = {two_j: wigner_matrix(two_j / 2.0, rule.k_rule.nodes) for two_j in spins}
    ey = {two_j: wigner_matrix(two_j / 2.0, rule.fiber_nodes) for two_j in spins}
    return dx, ey


def hl2_inner(
    F1: BandLimited,
    F2: BandLimited,
    rule: QuadratureRuleKC,
    radial_weight,
    radial_symbol=None,
) -> complex:
    """integral of conj(F1) F2 * weight(|Y|) [* symbol(|Y|)] over the rule.

    ``radial_weight`` is the density against Haar measure (e.g. the
    fiber-invariant heat kernel profile); ``radial_symbol`` optionally
    multiplies in a radial Toeplitz symbol.
    """
    spins = set(F1.blocks) | set(F2.blocks)
    dx, ey = _rep_tables(rule, spins)
    v1 = _factored_values(F1, dx, ey)
    v2 = _factored_values(F2, dx, ey)
    wy = rule.fiber_weights * np.asarray(radial_weight(rule.radii), dtype=float)
    if radial_symbol is not None:
        wy = wy * np.asarray(radial_symbol(rule.radii), dtype=complex)
    return complex(
        np.einsum("x,y,xy->", rule.k_rule.weights, wy, np.conj(v1) * v2)
    )


def hl2_inner_pointwise(
    F1: BandLimited,
    F2: BandLimited,
    rule: QuadratureRuleKC,
    radial_weight,
    symbol,
    chunk: int = 16,
) -> complex:
    """Same integral with a general pointwise symbol(g), chunked over K-nodes."""
    spins = set(F1.blocks) | set(F2.blocks)
    dx, ey = _rep_tables(rule, spins)
    v1 = _factored_values(F1, dx, ey)
    v2 = _factored_values(F2, dx, ey)
    wy = rule.fiber_weights * np.asarray(radial_weight(rule.radii), dtype=float)
    kn, kw = rule.k_rule.nodes, rule.k_rule.weights
    fnodes = rule.fiber_nodes
    total = 0.0 + 0.0j
    for start in range(0, len(kw), chunk):
        g = np.einsum("xab,ybc->xyac", kn[start:start + chunk], fnodes)
        sym = np.asarray(symbol(g), dtype=complex)
        band = np.conj(v1[start:start + chunk]) * v2[start:start + chunk]
        total += np.einsum("x,y,xy,xy->", kw[start:start + chunk], wy, sym, band)
    return complex(total)
