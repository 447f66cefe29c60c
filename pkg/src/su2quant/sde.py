"""Brownian paths in su(2) and the Ito maps onto SU(2) and SL(2,C).

The driving noise lives in the algebra; the group-valued path solves the
Stratonovich equation dg = g o dZ and is realized by the geometric Euler
scheme g_{k+1} = g_k exp(dZ_k) with the exact 2x2 exponential per step.
Time horizon is fixed to 1; the (s, t) dependence is carried entirely by
the increment variances.

Endpoint laws produced here:

* real path, variance s: the heat kernel measure rho_s on K;
* complex path Z = A + iB with Var(A) = s - t/2, Var(B) = t/2: the
  two-parameter measure mu_{s,t} on SL(2,C);
* the slice A = 0 (s = t/2): the subelliptic kernel mu_{t/2,t}.

Reductions are deterministic and independent of the worker count: paths are
organized in a fixed number of blocks, each block owns a generator derived
from the master seed by its block index, and block results are combined in
block order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algebra import ad_action, exp_algebra, exp_complex
from .wigner import character

DEFAULT_N_BLOCKS = 40
REPROJECT_EVERY = 64


@dataclass
class BrownianPath:
    """A single algebra-valued path on [0, 1] with n_steps increments."""

    increments: np.ndarray  # (n_steps, 3)
    sigma_sq: float
    seed: int | None = None

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps


@dataclass
class EndpointSample:
    value: np.ndarray  # (2, 2)
    weight: complex = 1.0
    seed: int | None = None
    n_steps: int = 0


def sample_path(sigma_sq: float, n_steps: int, seed: int) -> BrownianPath:
    if sigma_sq < 0:
        raise ValueError("variance must be nonnegative")
    if n_steps < 1:
        raise ValueError("need at least one step")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(sigma_sq / n_steps)
    inc = scale * rng.standard_normal((n_steps, 3))
    return BrownianPath(increments=inc, sigma_sq=sigma_sq, seed=seed)


def _project_su2(g: np.ndarray) -> np.ndarray:
    """Pull near-unitary matrices back onto SU(2).

    One Newton step toward the unitary polar factor, then determinant
    normalization; drift per step is O(eps) so one step suffices.
    """
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1]
    inv[..., 0, 1] = -g[..., 0, 1]
    inv[..., 1, 0] = -g[..., 1, 0]
    inv[..., 1, 1] = g[..., 0, 0]
    inv /= det[..., None, None]
    g = 0.5 * (g + np.conj(np.swapaxes(inv, -1, -2)))
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    return g / np.sqrt(det)[..., None, None]


def _project_sl2c(g: np.ndarray) -> np.ndarray:
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    return g / np.sqrt(det)[..., None, None]


def ito_map_K(path: BrownianPath, return_states: bool = False):
    """Endpoint (or full state sequence) of dx = x o dA on SU(2).

    The returned states have length n_steps + 1 and start at the identity;
    states[k] is the solution at time k * dt.
    """
    x = np.eye(2, dtype=complex)
    states = [x]
    for k, da in enumerate(path.increments):
        x = x @ exp_algebra(da)
        if (k + 1) % REPROJECT_EVERY == 0:
            x = _project_su2(x)
        if return_states:
            states.append(x)
    if return_states:
        return np.array(states)
    return EndpointSample(value=x, seed=path.seed, n_steps=path.n_steps)


def ito_map_KC(a: BrownianPath, b: BrownianPath) -> EndpointSample:
    """Endpoint of dg = g o d(A + iB) on SL(2,C)."""
    if a.n_steps != b.n_steps:
        raise ValueError("paths must share the step grid")
    g = np.eye(2, dtype=complex)
    for k in range(a.n_steps):
        g = g @ exp_complex(a.increments[k] + 1j * b.increments[k])
        if (k + 1) % REPROJECT_EVERY == 0:
            g = _project_sl2c(g)
    return EndpointSample(value=g, seed=a.seed, n_steps=a.n_steps)


def rotated_path(b: BrownianPath, a: BrownianPath) -> BrownianPath:
    """The path B' with dB'_k = Ad_{theta(A)_k} dB_k (left-point rule).

    Ad is an isometry, so B' has the same increment variances as B; in the
    limit its law is again Brownian, which is what makes the pathwise
    factorization identity work.
    """
    if a.n_steps != b.n_steps:
        raise ValueError("paths must share the step grid")
    states = ito_map_K(a, return_states=True)
    inc = ad_action(states[:-1], b.increments)
    return BrownianPath(increments=inc, sigma_sq=b.sigma_sq, seed=b.seed)


def pathwise_identity_residual(a: BrownianPath, b: BrownianPath) -> float:
    """Frobenius distance between theta_C(A+iB)_1 and theta_C(iB^{theta(A)})_1 theta(A)_1.

    Both sides are computed from the same increments at the same
    discretization; the residual measures only the discretization error of
    the factorization identity.
    """
    lhs = ito_map_KC(a, b).value
    zero = BrownianPath(
        increments=np.zeros_like(a.increments), sigma_sq=0.0, seed=a.seed
    )
    b_rot = rotated_path(b, a)
    rhs = ito_map_KC(zero, b_rot).value @ ito_map_K(a).value
    return float(np.linalg.norm(lhs - rhs))


# ---------------------------------------------------------------------------
# vectorized endpoint ensembles
# ---------------------------------------------------------------------------

def _block_rng(master_seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(block,))
    )


def _simulate_block(
    rng: np.random.Generator,
    n: int,
    n_steps: int,
    var_a: float,
    var_b: float,
    with_real: bool,
):
    """Endpoints of n complex paths; optionally also the real-part endpoints.

    The real and imaginary increments are drawn per step (not pre-allocated)
    to keep the memory footprint independent of n_steps.
    """
    dt = 1.0 / n_steps
    sa = np.sqrt(var_a * dt)
    sb = np.sqrt(var_b * dt)
    g = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
    x = g.copy() if with_real else None
    for k in range(n_steps):
        da = sa * rng.standard_normal((n, 3)) if var_a > 0 else 0.0
        db = sb * rng.standard_normal((n, 3)) if var_b > 0 else 0.0
        dz = np.asarray(da, dtype=complex) + 1j * db
        if np.ndim(dz) == 0:
            dz = np.zeros((n, 3), dtype=complex)
        g = g @ exp_complex(dz)
        if with_real:
            x = x @ exp_algebra(np.asarray(da) if var_a > 0 else np.zeros((n, 3)))
        if (k + 1) % REPROJECT_EVERY == 0:
            g = _project_sl2c(g)
            if with_real:
                x = _project_su2(x)
    return (g, x) if with_real else (g, None)


@dataclass
class EndpointEnsemble:
    """Endpoints of many independent paths, organized in seeded blocks."""

    values: np.ndarray  # (n_paths, 2, 2)
    n_blocks: int
    n_steps: int
    master_seed: int
    var_a: float
    var_b: float
    real_values: np.ndarray | None = None  # theta(A)_1 companions

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def block_views(self) -> list[np.ndarray]:
        return np.array_split(self.values, self.n_blocks)

    def block_statistic(self, per_path: np.ndarray):
        """Mean and block-based standard error of a per-path statistic."""
        blocks = np.array(
            [np.mean(b, axis=0) for b in np.array_split(per_path, self.n_blocks)]
        )
        mean = np.mean(blocks, axis=0)
        stderr = np.std(blocks, axis=0, ddof=1) / np.sqrt(self.n_blocks)
        return mean, stderr


def endpoint_ensemble_KC(
    s: float,
    t: float,
    n_paths: int,
    n_steps: int,
    master_seed: int,
    workers: int = 1,
    n_blocks: int = DEFAULT_N_BLOCKS,
    with_real: bool = False,
) -> EndpointEnsemble:
    """Sample mu_{s,t} endpoints; s = t/2 gives the subelliptic kernel.

    The block decomposition and per-block seeds depend only on
    (master_seed, n_paths, n_blocks, n_steps), never on the worker count.
    """
    var_a = s - t / 2.0
    var_b = t / 2.0
    if var_a < -1e-12 or var_b < 0:
        raise ValueError("need s >= t/2 and t >= 0")
    var_a = max(var_a, 0.0)
    sizes = [len(idx) for idx in np.array_split(np.arange(n_paths), n_blocks)]

    def run_block(i: int):
        return _simulate_block(
            _block_rng(master_seed, i), sizes[i], n_steps, var_a, var_b, with_real
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, range(n_blocks)))
    else:
        results = [run_block(i) for i in range(n_blocks)]
    values = np.concatenate([r[0] for r in results])
    real = np.concatenate([r[1] for r in results]) if with_real else None
    return EndpointEnsemble(
        values=values,
        n_blocks=n_blocks,
        n_steps=n_steps,
        master_seed=master_seed,
        var_a=var_a,
        var_b=var_b,
        real_values=real,
    )


def endpoint_ensemble_K(
    s: float,
    n_paths: int,
    n_steps: int,
    master_seed: int,
    workers: int = 1,
    n_blocks: int = DEFAULT_N_BLOCKS,
) -> EndpointEnsemble:
    """Sample rho_s endpoints on SU(2)."""
    ens = endpoint_ensemble_KC(
        s + 0.0,
        0.0,
        n_paths,
        n_steps,
        master_seed,
        workers=workers,
        n_blocks=n_blocks,
    )
    # var_b = 0 so the endpoints are already in SU(2) up to drift
    ens.values = _project_su2(ens.values)
    return ens


def character_moment(ens: EndpointEnsemble, j):
    """(mean, stderr) of chi_j over the ensemble endpoints."""
    vals = character(j, ens.values)
    return ens.block_statistic(np.real(vals))


def expected_character_K(s: float, j) -> float:
    """E[chi_j(theta(A)_1)] = (2j+1) e^{-s c_j / 2}."""
    c = float(j) * (float(j) + 1.0)
    return (2.0 * float(j) + 1.0) * np.exp(-s * c / 2.0)


def expected_character_KC(s: float, t: float, j) -> float:
    """E[chi_j(theta_C(A+iB)_1)] = (2j+1) e^{-(s-t) c_j / 2}.

    The complex generator acts on the continued chi_j through
    sum X_k^2 -> -c_j and sum (JX_k)^2 -> +c_j, so the variances combine to
    (s - t/2) - t/2 = s - t.  At the subelliptic slice s = t/2 this grows
    like e^{+t c_j / 4}.
    """
    c = float(j) * (float(j) + 1.0)
    return (2.0 * float(j) + 1.0) * np.exp(-(s - t) * c / 2.0)
