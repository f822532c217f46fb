import math

import numpy as np
import pytest
import sympy as sp

from isingqei import (FockStateSpec, Model, SpacetimePoint, TwoBumpParams,
                      TwoParticleAmplitude, expectation_point,
                      expectation_profile, kernel_diag, kernel_offdiag,
                      make_two_bump, spatial_energy_integral, total_energy)
from isingqei.energy_density import HERMITICITY_TOL, _product_integral

ORIGIN = SpacetimePoint(0.0, 0.0)


# --------------------------------------------------------------------------
# Kernels
# --------------------------------------------------------------------------

def test_kernel_diag_at_zero(ising, free):
    assert kernel_diag(ising, 0.0, 0.0) == pytest.approx(1.0 / (2 * math.pi))
    assert kernel_diag(free, 0.0, 0.0) == pytest.approx(1.0 / (2 * math.pi))


def test_kernel_diag_models_agree_on_diagonal(ising, free):
    for th in (-1.2, 0.0, 2.4):
        assert kernel_diag(ising, th, th) == pytest.approx(kernel_diag(free, th, th))


def test_kernel_diag_opposite_rapidities(ising, free):
    s = 0.9
    assert kernel_diag(ising, s, -s) == pytest.approx(math.cosh(s) / (2 * math.pi))
    assert kernel_diag(free, s, -s) == pytest.approx(1.0 / (2 * math.pi))


def test_kernel_offdiag_vanishes_on_diagonal(ising, free):
    p = SpacetimePoint(0.4, -0.2)
    assert kernel_offdiag(free, 0.0, 0.0, p) == 0
    assert kernel_offdiag(ising, 1.7, 1.7, p) == 0


def test_kernel_offdiag_modulus_relation(ising, free):
    rng = np.random.default_rng(11)
    p = SpacetimePoint(0.3, 0.8)
    for th, et in rng.uniform(-2, 2, size=(10, 2)):
        ratio = abs(kernel_offdiag(ising, th, et, p))
        expected = abs(math.sinh(0.5 * (th - et))) * abs(kernel_offdiag(free, th, et, p))
        assert ratio == pytest.approx(expected, rel=1e-12)


def test_kernel_analytic_continuation_symbolic():
    """Continuing one argument by i*pi in the creation-creation kernels must
    reproduce the creation-annihilation kernels, and continuing both must give
    the reversed-argument conjugate; checked once symbolically."""
    th, et, t, x = sp.symbols("theta eta t x", real=True)
    mu = sp.Symbol("mu", positive=True)

    def momentum_phase(z1, z2):
        energy = mu * (sp.cosh(z1) + sp.cosh(z2))
        momentum = mu * (sp.sinh(z1) + sp.sinh(z2))
        return sp.exp(sp.I * (energy * t - momentum * x))

    def f_plus(z1, z2):
        return (-mu ** 2 / (2 * sp.pi) * sp.sinh((z1 + z2) / 2) ** 2
                * momentum_phase(z1, z2))

    def f_minus(z1, z2):
        return sp.I * sp.sinh((z1 - z2) / 2) * f_plus(z1, z2)

    diag_phase = sp.exp(sp.I * (mu * (sp.cosh(th) - sp.cosh(et)) * t
                                - mu * (sp.sinh(th) - sp.sinh(et)) * x))
    target_plus = mu ** 2 / (2 * sp.pi) * sp.cosh((th + et) / 2) ** 2 * diag_phase
    target_minus = target_plus * sp.cosh((th - et) / 2)

    assert sp.simplify(sp.expand_trig(
        f_plus(th, et + sp.I * sp.pi) - target_plus).rewrite(sp.exp)) == 0
    assert sp.simplify(sp.expand_trig(
        f_minus(th, et + sp.I * sp.pi) - target_minus).rewrite(sp.exp)) == 0
    # annihilation-annihilation kernel: reversed-argument conjugate
    for f in (f_plus, f_minus):
        diff = (f(th + sp.I * sp.pi, et + sp.I * sp.pi)
                - sp.conjugate(f(et, th)))
        assert sp.simplify(sp.expand_trig(diff).rewrite(sp.exp)) == 0


def test_kernel_diag_matches_continuation_numerically(ising, free, cfg):
    rng = np.random.default_rng(5)
    p = SpacetimePoint(0.0, 0.0)
    for model in (ising, free):
        for th, et in rng.uniform(-2, 2, size=(6, 2)):
            z2 = et + 1j * math.pi
            f_plus = (-model.mu ** 2 / (2 * math.pi)
                      * np.sinh(0.5 * (th + z2)) ** 2)
            cont = 1j * np.sinh(0.5 * (th - z2)) * f_plus if model.is_ising else f_plus
            assert kernel_diag(model, th, et) == pytest.approx(cont.real, rel=1e-12)
            assert abs(cont.imag) < 1e-12 * abs(cont.real)


# --------------------------------------------------------------------------
# Expectation values
# --------------------------------------------------------------------------

def test_vacuum_expectation_is_zero(ising, cfg):
    val = expectation_point(ising, FockStateSpec.vacuum(), ORIGIN, cfg)
    assert val.value == 0.0 and val.error == 0.0 and val.converged


def test_fig1_origin_negative(ising, fig1_state, cfg):
    val = expectation_point(ising, fig1_state, ORIGIN, cfg)
    assert val.converged
    assert val.value < -1.0  # the dip is deep, not marginal


def test_free_one_particle_positive(free, fig1_state, cfg):
    for t in (-2.0, -0.3, 0.0, 1.1):
        for x in (0.0, 0.8):
            val = expectation_point(free, fig1_state, SpacetimePoint(t, x), cfg)
            assert val.value >= -val.error


def test_rank_path_matches_double_quadrature(ising, free, fig1_packet, cfg):
    for model in (ising, free):
        for t, x in ((0.0, 0.0), (0.45, 0.0), (0.8, -0.3)):
            p = SpacetimePoint(t, x)
            fast = _product_integral(model, fig1_packet, 1, p, cfg)
            slow = _product_integral(model, fig1_packet, 1, p, cfg, force_2d=True)
            tol = 10 * (fast.error_estimate + slow.error_estimate) + 1e-12
            assert abs(fast.value - np.real(slow.value)) <= tol


def test_free_additivity_exact(free, fig1_packet, cfg):
    line = [SpacetimePoint(t, 0.0) for t in (-1.0, 0.0, 0.4, 2.0)]
    p1 = expectation_profile(free, FockStateSpec.product(1, fig1_packet), line, cfg)
    p3 = expectation_profile(free, FockStateSpec.product(3, fig1_packet), line, cfg)
    assert np.array_equal(3.0 * p1.values(), p3.values())


def test_ising_nonadditive(ising, fig1_packet, cfg):
    v1 = expectation_point(ising, FockStateSpec.product(1, fig1_packet), ORIGIN, cfg)
    v2 = expectation_point(ising, FockStateSpec.product(2, fig1_packet), ORIGIN, cfg)
    gap = abs(v2.value - 2.0 * v1.value)
    assert gap > 10.0 * (v2.error + 2.0 * v1.error)
    assert gap > 1.0


def test_hermiticity_residual_small(ising, fig1_packet, cfg):
    res = _product_integral(ising, fig1_packet, 2, SpacetimePoint(0.2, 0.1), cfg)
    value = complex(res.value)
    assert abs(value.imag) < HERMITICITY_TOL * (abs(value.real) + 1.0)


def test_translation_covariance(ising, fig1_packet, cfg):
    t, x = 0.9, 0.6
    direct = expectation_point(ising, FockStateSpec.product(1, fig1_packet),
                               SpacetimePoint(t, x), cfg)
    phased = fig1_packet.with_spatial_phase(x, ising.momentum)
    absorbed = expectation_point(ising, FockStateSpec.product(1, phased),
                                 SpacetimePoint(t, 0.0), cfg)
    assert direct.value == pytest.approx(absorbed.value, abs=1e-10)


def test_profile_shape_fig1(ising, fig1_state, cfg):
    """n=1 profile along t in [-10, 10]: a negative dip near t=0 only."""
    ts = [-10.0, -5.0, -1.0, -0.5, 0.0, 0.5, 1.0, 5.0, 10.0]
    prof = expectation_profile(ising, fig1_state,
                               [SpacetimePoint(t, 0.0) for t in ts], cfg)
    values = prof.values()
    assert np.all([v.converged for _, v in prof.points])
    assert values[ts.index(0.0)] < -1.0
    assert values.min() == values[ts.index(0.0)]


def test_total_energy_additive(ising, free, fig1_packet, cfg):
    for model in (ising, free):
        e1 = total_energy(model, FockStateSpec.product(1, fig1_packet), cfg)
        e4 = total_energy(model, FockStateSpec.product(4, fig1_packet), cfg)
        assert e4 == pytest.approx(4.0 * e1, rel=1e-12)
        assert e1 > model.mu  # rest mass is a lower bound


def test_total_energy_concentrated_packet(ising, gaussian_profile, cfg):
    wf = make_two_bump(TwoBumpParams(0.05), gaussian_profile, cfg)
    energy = total_energy(ising, FockStateSpec.product(1, wf), cfg)
    assert energy == pytest.approx(ising.mu, rel=1e-3)


def test_total_energy_vacuum(ising, cfg):
    assert total_energy(ising, FockStateSpec.vacuum(), cfg) == 0.0


# --------------------------------------------------------------------------
# Superpositions
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def pair_states(cfg, gaussian_profile):
    u = make_two_bump(TwoBumpParams(0.5), gaussian_profile, cfg)
    v = make_two_bump(TwoBumpParams(0.4, 0.6, 1.2), gaussian_profile, cfg)
    return u, v


def test_superposition_energy_and_density(ising, free, pair_states, cfg):
    u, v = pair_states
    for model in (ising, free):
        pair = TwoParticleAmplitude(u, v, model.statistics_sign, 0.6, cfg)
        state = FockStateSpec.superposition(0.8, pair)
        val = expectation_point(model, state, ORIGIN, cfg)
        assert val.converged
        assert val.imag_residual < HERMITICITY_TOL * (abs(val.value) + 1.0)
        energy = total_energy(model, state, cfg)
        # two-particle sector with weight 0.36, each particle above rest mass
        assert energy > 0.36 * 2.0 * model.mu * 0.99


def test_superposition_cross_term_active(free, pair_states, cfg):
    """The vacuum component changes the density, so the creation-creation
    term must contribute (pure two-particle state as reference)."""
    u, v = pair_states
    pair_mixed = TwoParticleAmplitude(u, v, +1, math.sqrt(0.5), cfg)
    mixed = FockStateSpec.superposition(math.sqrt(0.5), pair_mixed)
    pair_pure = TwoParticleAmplitude(u, v, +1, 1.0, cfg)
    pure = FockStateSpec.superposition(0.0, pair_pure)
    v_mixed = expectation_point(free, mixed, ORIGIN, cfg)
    v_pure = expectation_point(free, pure, ORIGIN, cfg)
    assert abs(v_mixed.value - 0.5 * v_pure.value) > 1e-3


def test_superposition_can_go_negative_free(free, pair_states, cfg):
    """Superpositions of vacuum and two-particle states can have negative
    energy density even in the free model.  The creation-creation term is
    linear in the two-particle weight, so a small admixture with the right
    phase undercuts the quadratic positive term."""
    u, v = pair_states
    weight = 0.1
    pair = TwoParticleAmplitude(u, v, +1, weight, cfg)
    c0_mag = math.sqrt(1.0 - weight ** 2)
    values = []
    for phase in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False):
        state = FockStateSpec.superposition(c0_mag * np.exp(1j * phase), pair)
        values.append(expectation_point(free, state, ORIGIN, cfg).value)
    assert min(values) < 0.0


# --------------------------------------------------------------------------
# Spatial integral
# --------------------------------------------------------------------------

def test_spatial_integral_matches_total_energy_n1(ising, free, tame_packet, cfg):
    state = FockStateSpec.product(1, tame_packet)
    for model in (ising, free):
        res = spatial_energy_integral(model, state, cfg)
        assert res.value == pytest.approx(total_energy(model, state, cfg), rel=1e-6)


def test_spatial_integral_ising_tail_extrapolation(ising, tame_packet, cfg):
    state = FockStateSpec.product(2, tame_packet)
    windowed = spatial_energy_integral(ising, state, cfg)
    total = total_energy(ising, state, cfg)
    # finite window must miss part of the 1/x^2 tail of the interacting state
    assert windowed.value < total * (1.0 - 1e-3)
    corrected = spatial_energy_integral(ising, state, cfg, tail_extrapolation=True)
    assert corrected.value == pytest.approx(total, rel=1e-4)
