import numpy as np
import pytest

from su2quant.algebra import default_cutoff, kc_quadrature
from su2quant.errors import IllConditioned, ParameterDomain
from su2quant.heat import nu_radial
from su2quant.hl2 import hl2_inner
from su2quant.transform import (
    TransformedPair,
    adjoint_inversion_oracle,
    inverse_C,
    range_norm_sq_C,
    transform_B,
    transform_C,
)
from su2quant.wigner import BandLimited, HolomorphicObservable, character


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def _rule(t, k_two_jmax=2):
    return kc_quadrature(default_cutoff(t) + 1.5, k_two_jmax=k_two_jmax, n_r=64)


def test_constant_is_fixed():
    F = transform_C(0.7, BandLimited.constant(2.5))
    assert F.at_identity() == pytest.approx(2.5)


def test_character_is_eigenfunction():
    # C_t chi_1 = e^{-t} chi_1 since c_1 = 2
    t = 0.3
    F = transform_C(t, BandLimited.character_fn(1.0))
    y = np.array([[0.1, -0.2, 0.4]])
    from su2quant.algebra import exp_complex

    g = exp_complex(1j * y)
    np.testing.assert_allclose(
        F(g), np.exp(-t) * character(1.0, g), atol=1e-12
    )


def test_unitarity_on_quadrature(rng):
    t = 0.5
    rule = _rule(t)
    f1 = BandLimited({1: rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))})
    f2 = BandLimited({1: rng.standard_normal((2, 2))})
    F1, F2 = transform_C(t, f1), transform_C(t, f2)
    lhs = hl2_inner(F1, F2, rule, lambda r: nu_radial(t, r))
    from su2quant.wigner import inner_product_K

    assert lhs == pytest.approx(inner_product_K(f1, f2), abs=1e-8)
    assert range_norm_sq_C(t, F1, rule) == pytest.approx(f1.norm_sq(), rel=1e-10)


def test_transform_B_same_coefficients_and_domain(rng):
    f = BandLimited({1: rng.standard_normal((2, 2))})
    Fc = transform_C(0.5, f)
    for s in (0.3, 1.0, 5.0):
        Fb = transform_B(s, 0.5, f)
        np.testing.assert_allclose(Fb.blocks[1], Fc.blocks[1])
    with pytest.raises(ParameterDomain):
        transform_B(0.25, 0.5, f)
    with pytest.raises(ParameterDomain):
        transform_B(1.0, -0.5, f)


def test_inverse_roundtrip(rng):
    t = 0.4
    f = BandLimited(
        {k: rng.standard_normal((k + 1, k + 1)) + 1j * rng.standard_normal((k + 1, k + 1))
         for k in (1, 2, 6)}
    )
    back = inverse_C(t, transform_C(t, f))
    for k, c in f.blocks.items():
        np.testing.assert_allclose(back.blocks[k], c, atol=1e-12)


def test_inverse_guard():
    F = HolomorphicObservable({24: np.ones((25, 25))})
    with pytest.raises(IllConditioned):
        inverse_C(2.0, F)


def test_adjoint_inversion_oracle(rng):
    t = 0.5
    rule = _rule(t, k_two_jmax=2)
    f = BandLimited({1: rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))})
    rec = adjoint_inversion_oracle(t, transform_C(t, f), rule, two_jmax=2)
    np.testing.assert_allclose(rec.blocks[1], f.blocks[1], atol=1e-4)


def test_adjoint_oracle_R_stability(rng):
    # doubling the radial cutoff moves the recovered block by < 1e-6
    t = 0.5
    f = BandLimited({1: rng.standard_normal((2, 2))})
    F = transform_C(t, f)
    r1 = adjoint_inversion_oracle(t, F, _rule(t), two_jmax=1)
    big = kc_quadrature(default_cutoff(t) + 3.0, k_two_jmax=1, n_r=96)
    r2 = adjoint_inversion_oracle(t, F, big, two_jmax=1)
    assert np.max(np.abs(r1.blocks[1] - r2.blocks[1])) < 1e-6


def test_intertwining_with_derivatives(rng):
    # C_t(A f) = A_C(C_t f) exactly on coefficients
    from su2quant.diffop import LeftInvariantOperator, complexify_apply

    t = 0.6
    f = BandLimited({2: rng.standard_normal((3, 3))})
    a = LeftInvariantOperator([(1.0, (1, 3)), (-0.5j, (2,)), (2.0, (3, 3, 1, 2))])
    lhs = transform_C(t, a.apply(f))
    rhs = complexify_apply(a, transform_C(t, f))
    np.testing.assert_allclose(lhs.blocks[2], rhs.blocks[2], atol=1e-12)


def test_transformed_pair_B_norm(rng):
    # ||f||^2 against rho_s dx via the smoothed |f|^2 at the identity
    from su2quant.algebra import haar_rule
    from su2quant.heat import HeatKernelK

    s, t = 1.0, 0.5
    f = BandLimited({1: rng.standard_normal((2, 2))})
    pair = TransformedPair.make_B(s, t, f)
    rule = haar_rule(20)
    kern = HeatKernelK.build(s, tol=1e-12)
    dens = kern.on_traces(np.einsum("qaa->q", rule.nodes).real)
    quad = rule.integrate(np.abs(f(rule.nodes)) ** 2 * dens)
    assert pair.domain_norm_sq() == pytest.approx(float(quad), rel=1e-9)
