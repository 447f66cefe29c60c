"""Lie-algebra / Lie-group arithmetic for SU(2) and SL(2,C), plus quadrature.

Conventions used throughout the package:

* the orthonormal basis of su(2) is ``X_k = -(i/2) sigma_k`` with the inner
  product ``<X, Y> = -2 tr(XY)``;
* a vector ``y`` in R^3 stands for ``Y = sum_k y_k X_k``, and ``|Y| = |y|``;
* under this metric SU(2) is the 3-sphere of radius 2 (the geodesic
  ``exp(s X_3)`` closes at ``s = 4 pi``), hence ``Vol(K) = 16 pi^2``;
* the Haar measure on K used everywhere has total mass ``VOL_K``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffTooSmall, NonInvertible

VOL_K = 16.0 * np.pi**2  # Riemannian volume of SU(2) as the radius-2 sphere

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# X_k = -(i/2) sigma_k, orthonormal for <X,Y> = -2 tr(XY)
BASIS = -0.5j * PAULI

IDENTITY2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class AlgebraVector:
    """Element of su(2) in the orthonormal basis {X_1, X_2, X_3}."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))
        if self.coords.shape != (3,):
            raise ValueError("AlgebraVector needs exactly 3 coordinates")

    @property
    def matrix(self) -> np.ndarray:
        """The 2x2 anti-Hermitian matrix sum_k y_k X_k."""
        return np.einsum("k,kab->ab", self.coords, BASIS)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        return AlgebraVector(self.coords + other.coords)

    def __rmul__(self, scale: float) -> "AlgebraVector":
        return AlgebraVector(scale * self.coords)


def algebra_inner(a: AlgebraVector, b: AlgebraVector) -> float:
    """<A, B> = -2 tr(AB); coincides with the Euclidean dot of coordinates."""
    return float(np.dot(a.coords, b.coords))


# ---------------------------------------------------------------------------
# exponentials
# ---------------------------------------------------------------------------

def expm_traceless(m: np.ndarray) -> np.ndarray:
    """exp of traceless 2x2 matrices, vectorized over leading axes.

    Uses ``M^2 = -det(M) I``: with ``mu = sqrt(-det M)``,
    ``exp(M) = cosh(mu) I + sinhc(mu) M``.
    """
    m = np.asarray(m, dtype=complex)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    mu = np.sqrt(-det + 0j)
    c = np.cosh(mu)
    # sinh(mu)/mu with a series fallback near 0
    small = np.abs(mu) < 1e-6
    mu_safe = np.where(small, 1.0, mu)
    s = np.where(small, 1.0 + mu**2 / 6.0, np.sinh(mu_safe) / mu_safe)
    out = np.zeros(m.shape, dtype=complex)
    out[..., 0, 0] = c + s * m[..., 0, 0]
    out[..., 0, 1] = s * m[..., 0, 1]
    out[..., 1, 0] = s * m[..., 1, 0]
    out[..., 1, 1] = c + s * m[..., 1, 1]
    return out


def exp_algebra(y, scale: float = 1.0) -> np.ndarray:
    """exp(scale * Y) in SU(2) for Y in su(2).

    ``y`` may be an AlgebraVector or a (..., 3) real coordinate array; the
    result has shape (..., 2, 2).
    """
    if isinstance(y, AlgebraVector):
        y = y.coords
    y = np.asarray(y, dtype=float) * scale
    m = np.einsum("...k,kab->...ab", y, BASIS)
    return expm_traceless(m)


def exp_complex(z) -> np.ndarray:
    """exp(sum_k z_k X_k) in SL(2,C) for complex coordinates z (..., 3)."""
    z = np.asarray(z, dtype=complex)
    m = np.einsum("...k,kab->...ab", z, BASIS)
    return expm_traceless(m)


def random_su2(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Haar-random SU(2) elements via normalized Gaussian quaternions."""
    size = (4,) if n is None else (n, 4)
    q = rng.standard_normal(size)
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    a = q[..., 0] + 1j * q[..., 3]
    b = q[..., 2] + 1j * q[..., 1]
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -np.conj(b)
    out[..., 1, 1] = np.conj(a)
    return out


# ---------------------------------------------------------------------------
# polar decomposition and the adjoint action
# ---------------------------------------------------------------------------

def vector_from_su2_matrix(m: np.ndarray) -> np.ndarray:
    """Coordinates y_k of a (near) su(2) matrix, via y_k = i tr(M sigma_k)."""
    m = np.asarray(m, dtype=complex)
    y = np.stack(
        [1j * np.einsum("...ab,ba->...", m, PAULI[k]) for k in range(3)],
        axis=-1,
    )
    return np.real(y)


def polar_radius(g: np.ndarray) -> np.ndarray:
    """|Y| in the decomposition g = x exp(iY), from tr(g^dag g) = 2 cosh|Y|."""
    g = np.asarray(g, dtype=complex)
    t = np.einsum("...ab,...ab->...", np.conj(g), g).real
    return np.arccosh(np.maximum(t / 2.0, 1.0))


def polar_decompose(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor g in SL(2,C) as x exp(iY) with x in SU(2), Y in su(2).

    Returns ``(x, y)`` where ``y`` are the coordinates of Y.  Works on a
    single matrix or a stack (..., 2, 2); ``iY`` is Hermitian so the positive
    square root of ``g^dag g`` determines the factorization globally (no
    branch restriction is needed).
    """
    g = np.asarray(g, dtype=complex)
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    if np.any(np.abs(det) < 1e-12):
        raise NonInvertible("polar_decompose: numerically singular input")
    # g^dag g = exp(2iY) = exp(y . sigma), eigenvalues e^{+-|y|}
    a = np.conj(np.swapaxes(g, -1, -2)) @ g
    cosh_r = np.einsum("...aa->...", a).real / 2.0
    r = np.arccosh(np.maximum(cosh_r, 1.0))
    # traceless part: a - cosh(r) I = sinh(r) (unit . sigma)
    dev = a.copy()
    dev[..., 0, 0] -= cosh_r
    dev[..., 1, 1] -= cosh_r
    vec = np.stack(
        [0.5 * np.einsum("...ab,ba->...", dev, PAULI[k]).real for k in range(3)],
        axis=-1,
    )
    sinh_r = np.sinh(r)
    small = sinh_r < 1e-12
    scale = np.where(small, 1.0, r / np.where(small, 1.0, sinh_r))
    y = scale[..., None] * vec  # for r ~ 0, vec itself is first-order exact
    x = g @ exp_complex(-1j * y)
    return x, y


def ad_action(x: np.ndarray, y) -> np.ndarray:
    """Coordinates of Ad_x Y = x Y x^{-1} for x in SU(2); norm preserving."""
    if isinstance(y, AlgebraVector):
        y = y.coords
    y = np.asarray(y, dtype=float)
    m = np.einsum("...k,kab->...ab", y, BASIS)
    xm = np.asarray(x) @ m @ np.conj(np.swapaxes(np.asarray(x), -1, -2))
    return vector_from_su2_matrix(xm)


# ---------------------------------------------------------------------------
# quadrature on K
# ---------------------------------------------------------------------------

@dataclass
class QuadratureRuleK:
    """Euler-angle product rule on SU(2) with total mass Vol(K).

    Exact (to roundoff) on any band-limited integrand whose total spin does
    not exceed ``total_two_j / 2``: the two uniform angle rules kill every
    nonzero half-integer frequency below the aliasing threshold and the
    Gauss-Legendre rule handles the remaining polynomial in cos(beta).
    """

    nodes: np.ndarray  # (N, 2, 2) complex
    weights: np.ndarray  # (N,) positive
    total_two_j: int

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """sum_q w_q * values[..., q]."""
        return np.einsum("q,...q->...", self.weights, values)


def haar_rule(total_two_j: int) -> QuadratureRuleK:
    """Quadrature exact on band-limited functions of total spin <= total_two_j/2."""
    j_tot = total_two_j / 2.0
    n_angle = int(total_two_j + 2)  # aliasing threshold is total_two_j + 1
    n_beta = int(np.ceil(j_tot)) + 1  # GL exact to degree 2 n - 1 >= 2 j_tot
    alphas = 4.0 * np.pi * np.arange(n_angle) / n_angle
    gammas = alphas
    xs, wb = np.polynomial.legendre.leggauss(n_beta)
    betas = np.arccos(xs)

    # x(alpha, beta, gamma) = e^{alpha X3} e^{beta X2} e^{gamma X3}
    ea = exp_algebra(np.stack([np.zeros_like(alphas)] * 2 + [alphas], axis=-1))
    eb = exp_algebra(np.stack([np.zeros_like(betas), betas, np.zeros_like(betas)], axis=-1))
    eg = ea
    nodes = np.einsum("aij,bjk,ckl->abcil", ea, eb, eg).reshape(-1, 2, 2)
    w_angle = 4.0 * np.pi / n_angle
    # double cover of the (alpha, gamma) torus: halve the product weight
    weights = 0.5 * w_angle * w_angle * np.einsum("a,b,c->abc", np.ones(n_angle), wb, np.ones(n_angle)).reshape(-1)
    return QuadratureRuleK(nodes=nodes, weights=weights, total_two_j=total_two_j)


def haar_quadrature_K(two_jmax: int) -> QuadratureRuleK:
    """Rule exact on products of two matrix entries with spin <= two_jmax/2."""
    if two_jmax > 24:
        raise ValueError("spin cutoff is j = 12")
    return haar_rule(2 * two_jmax)


# ---------------------------------------------------------------------------
# quadrature on K_C in polar coordinates
# ---------------------------------------------------------------------------

def radial_jacobian(r: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """J(r) = (sinh(beta r)/beta)^2, the radial density of Haar measure.

    The full polar Haar measure is ``dg = c_J J(r) dr dS(u) dx`` with
    ``c_J = 1`` under this package's normalizations (pinned by calibration,
    see :mod:`su2quant.heat`).
    """
    r = np.asarray(r, dtype=float)
    return (np.sinh(beta * r) / beta) ** 2


@dataclass
class QuadratureRuleKC:
    """Product rule for integrals over SL(2,C) in polar coordinates.

    Nodes are kept factored as ``g = x * exp(i r u . X)`` with ``x`` running
    over a Haar rule on K and ``(r, u)`` over a radial x spherical grid; the
    fiber weights already include the radial Jacobian.
    """

    k_rule: QuadratureRuleK
    radii: np.ndarray  # (M,) repeated per direction
    directions: np.ndarray  # (M, 3) unit vectors
    fiber_weights: np.ndarray  # (M,) includes J(r) and dr dS(u)
    cutoff: float
    beta: float = 1.0
    _fiber_nodes: np.ndarray | None = field(default=None, repr=False)

    @property
    def fiber_nodes(self) -> np.ndarray:
        """exp(i r u . X) for every fiber node, shape (M, 2, 2)."""
        if self._fiber_nodes is None:
            y = self.radii[:, None] * self.directions
            self._fiber_nodes = exp_complex(1j * y)
        return self._fiber_nodes

    @property
    def n_nodes(self) -> int:
        return len(self.k_rule.weights) * len(self.fiber_weights)

    def integrate_radial(self, f_of_r) -> float:
        """Integrate a function of the polar radius alone over K_C."""
        vals = np.asarray(f_of_r(self.radii), dtype=float)
        return float(np.sum(self.k_rule.weights) * np.dot(self.fiber_weights, vals))

    def integrate(self, fn, chunk: int = 32) -> complex:
        """Integrate a generic pointwise function fn(g) with g (..., 2, 2)."""
        total = 0.0 + 0.0j
        fw = self.fiber_weights
        fnodes = self.fiber_nodes
        kn, kw = self.k_rule.nodes, self.k_rule.weights
        for start in range(0, len(kw), chunk):
            x = kn[start:start + chunk]
            g = np.einsum("xab,ybc->xyac", x, fnodes)
            vals = fn(g)
            total += np.einsum("x,y,xy->", kw[start:start + chunk], fw, vals)
        return complex(total)


def kc_quadrature(
    R: float,
    k_two_jmax: int = 1,
    n_r: int = 48,
    n_theta: int = 16,
    n_phi: int = 16,
    beta: float = 1.0,
    t_tail: float | None = None,
) -> QuadratureRuleKC:
    """Polar-coordinate product rule on SL(2,C) with radial cutoff R.

    ``t_tail`` enables the Gaussian-tail check: a CutoffTooSmall warning is
    issued when the mass of ``(r/sinh r) e^{-r^2/t} J(r)`` beyond R exceeds
    1e-10 of the total.
    """
    if R <= 0:
        raise ValueError("radial cutoff R must be positive")
    k_rule = haar_quadrature_K(k_two_jmax)
    # radial Gauss-Legendre on [0, R]
    xs, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * R * (xs + 1.0)
    wr = 0.5 * R * wr
    # sphere: GL in cos(theta) x uniform phi
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    st = np.sqrt(1.0 - ct**2)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * np.pi / n_phi
    u = np.stack(
        [
            np.outer(st, np.cos(phi)),
            np.outer(st, np.sin(phi)),
            np.outer(ct, np.ones(n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    wu = (wt[:, None] * wphi * np.ones(n_phi)).reshape(-1)

    radii = np.repeat(r, len(wu))
    dirs = np.tile(u, (n_r, 1))
    fw = np.repeat(wr * radial_jacobian(r, beta), len(wu)) * np.tile(wu, n_r)

    if t_tail is not None:
        # tail of r sinh(r) e^{-r^2/t} past R, vs. the full integral
        tail_grid = R + np.linspace(0.0, 10.0 * np.sqrt(t_tail), 2001)
        integ = tail_grid * np.sinh(beta * tail_grid) / beta**2 * np.exp(-tail_grid**2 / t_tail)
        tail = np.trapezoid(integ, tail_grid)
        total = (t_tail / 4.0) * np.sqrt(np.pi * t_tail) * np.exp(t_tail / 4.0)
        if tail > 1e-10 * total:
            warnings.warn(
                f"radial cutoff R={R} leaves a relative Gaussian tail of {tail / total:.2e}",
                CutoffTooSmall,
            )
    return QuadratureRuleKC(
        k_rule=k_rule,
        radii=radii,
        directions=dirs,
        fiber_weights=fw,
        cutoff=R,
        beta=beta,
    )


def default_cutoff(t: float) -> float:
    """Default radial truncation for time-t Gaussian weights."""
    return max(4.0 * np.sqrt(t), 3.0)
