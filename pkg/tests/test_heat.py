import numpy as np
import pytest

from su2quant.algebra import (
    VOL_K,
    default_cutoff,
    exp_complex,
    haar_rule,
    kc_quadrature,
    random_su2,
)
from su2quant.errors import IllConditioned, TruncationError
from su2quant.heat import (
    HeatKernelK,
    calibrate_nu,
    choose_two_jmax,
    heat_flow,
    nu,
    nu_normalization,
    nu_radial,
    rho,
    rho_tail_bound,
)
from su2quant.wigner import BandLimited


def test_rho_mass_one():
    rule = haar_rule(30)
    kern = HeatKernelK.build(0.5, tol=1e-12)
    vals = kern.on_traces(np.einsum("qaa->q", rule.nodes).real)
    assert rule.integrate(vals) == pytest.approx(1.0, abs=1e-10)


def test_rho_positive_on_K():
    # positivity holds up to the truncation certificate; far from the
    # identity the kernel is smaller than any attainable tail bound
    rng = np.random.default_rng(0)
    kern = HeatKernelK.build(0.3, tol=1e-12)
    vals = kern.on_traces(np.einsum("qaa->q", random_su2(rng, 500)).real)
    assert np.all(vals > -1e-12)
    assert np.max(vals) > 0.1


def test_rho_projects_band_limited():
    # int rho_t(x g^{-1}) f(g) dg = (e^{t Delta/2} f)(x), exact for entries
    rng = np.random.default_rng(1)
    t = 0.4
    f = BandLimited({2: rng.standard_normal((3, 3))})
    rule = haar_rule(2 * choose_two_jmax(t, 0.0, 1e-11) + 4)
    kern = HeatKernelK.build(t, tol=1e-11)
    x = random_su2(rng, 3)
    inv = np.conj(np.swapaxes(rule.nodes, -1, -2))
    tr = np.einsum("pab,qba->pq", x, inv).real
    smoothed = kern.on_traces(tr) @ (rule.weights * f(rule.nodes))
    expect = f.heat(t, sign=-1.0)(x)
    np.testing.assert_allclose(smoothed, expect, atol=1e-9)


def test_tail_bound_certificate_monotone():
    assert rho_tail_bound(0.5, 0.0, 10) < rho_tail_bound(0.5, 0.0, 6)
    assert rho_tail_bound(0.5, 1.0, 10) > rho_tail_bound(0.5, 0.0, 10)


def test_rho_raises_past_certificate():
    g = exp_complex(1j * np.array([[0.0, 0.0, 6.0]]))
    with pytest.raises(TruncationError):
        rho(0.05, g, two_jmax=4, tol=1e-8)


def test_rho_on_fiber_positive_continuation():
    g = exp_complex(1j * np.array([[0.0, 0.0, 0.8]]))
    vals, tail = rho(0.5, g, tol=1e-9)
    assert tail < 1e-9
    assert vals[0].real > 0
    assert abs(vals[0].imag) < 1e-12


def test_nu_constants():
    t = 0.7
    assert nu_normalization(t) == pytest.approx(
        (np.pi * t) ** -1.5 * np.exp(-t / 4.0), rel=1e-13
    )
    g = exp_complex(1j * np.array([0.0, 0.3, 0.4]))
    assert complex(nu(t, g)).real == pytest.approx(float(nu_radial(t, 0.5)), rel=1e-12)


def test_nu_mass_identity():
    t = 0.5
    rule = kc_quadrature(default_cutoff(t) + 1.0, n_r=64)
    mass = rule.integrate_radial(lambda r: nu_radial(t, r))
    assert mass == pytest.approx(VOL_K, rel=1e-12)


def test_shared_pass_class_evaluations():
    from su2quant.heat import convolve_on_traces

    rng = np.random.default_rng(3)
    ka = HeatKernelK.build(0.3, tol=1e-12)
    kb = HeatKernelK.build(0.7, tol=1e-12)
    tr = rng.uniform(-2.0, 2.0, size=(6, 40))
    a, b = ka.pair_on_traces(kb, tr)
    np.testing.assert_allclose(a, ka.on_traces(tr), atol=1e-14)
    np.testing.assert_allclose(b, kb.on_traces(tr), atol=1e-14)
    w = rng.standard_normal(40)
    ca, cb = convolve_on_traces(tr, [(ka, w), (kb, w)])
    np.testing.assert_allclose(ca, ka.on_traces(tr) @ w, atol=1e-12)
    np.testing.assert_allclose(cb, kb.on_traces(tr) @ w, atol=1e-12)


def test_heat_flow_forward_backward_roundtrip():
    rng = np.random.default_rng(2)
    f = BandLimited({1: rng.standard_normal((2, 2)), 3: rng.standard_normal((4, 4))})
    out = heat_flow(0.4, heat_flow(0.4, f, "forward"), "backward")
    for k, c in f.blocks.items():
        np.testing.assert_allclose(out.blocks[k], c, atol=1e-13)


def test_heat_flow_backward_guard():
    f = BandLimited({24: np.ones((25, 25))})
    with pytest.raises(IllConditioned):
        heat_flow(1.0, f, "backward")


def test_heat_flow_rejects_bad_args():
    f = BandLimited.constant(1.0)
    with pytest.raises(ValueError):
        heat_flow(-0.1, f)
    with pytest.raises(ValueError):
        heat_flow(0.1, f, "sideways")


@pytest.mark.parametrize("t", [0.2, 1.0])
def test_calibration_recovers_geometry(t):
    rec = calibrate_nu(t)
    assert rec.beta == pytest.approx(1.0, abs=1e-6)
    assert rec.normalization == pytest.approx(rec.analytic_normalization, rel=1e-6)
    assert abs(rec.mass_residual) < 1e-10
    assert abs(rec.unitarity_residuals["spin_one"]) < 1e-7


@pytest.mark.slow
def test_subelliptic_radial_marginal_matches_nu():
    """KS check: polar radii of mu_{t/2,t} follow the radial law of nu_t/Vol.

    Conjugation invariance of the subelliptic endpoint law kills every
    spin j >= 1/2 component of its K-dependence, which forces the radial
    marginal to coincide with that of the normalized fiber-invariant kernel.
    """
    from scipy.stats import ks_2samp

    from su2quant.algebra import polar_radius
    from su2quant.sde import endpoint_ensemble_KC

    t = 0.5
    ens = endpoint_ensemble_KC(t / 2.0, t, 40000, 400, 314)
    radii = polar_radius(ens.values)
    # draw from the reference density r^2 * (sinh r / r) ... via rejection
    rng = np.random.default_rng(9)
    R = default_cutoff(t) + 1.0
    grid = np.linspace(1e-6, R, 4000)
    dens = nu_radial(t, grid) * (np.sinh(grid)) ** 2
    cdf = np.cumsum(dens)
    cdf /= cdf[-1]
    ref = np.interp(rng.uniform(size=40000), cdf, grid)
    stat, p = ks_2samp(radii, ref)
    assert p > 0.001, f"KS p={p}, stat={stat}"
