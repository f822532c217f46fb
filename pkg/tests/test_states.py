import math

import numpy as np
import pytest

from isingqei import (BumpProfile, FockStateSpec, Model, TwoBumpParams,
                      TwoParticleAmplitude, delta_limit_wavefunction,
                      integrate_1d, integrate_2d, l_factor, make_two_bump)

# For the raw Gaussian exp(-theta^2): int h^2 = sqrt(pi/2), so the norm
# constant of the single unit-width bump is (2/pi)^(1/4).
SINGLE_BUMP_NORM = (2.0 / math.pi) ** 0.25


def test_norm_constant_single_gaussian(cfg, gaussian_profile):
    wf = make_two_bump(TwoBumpParams(alpha=1.0), gaussian_profile, cfg)
    assert wf.norm_constant == pytest.approx(SINGLE_BUMP_NORM, rel=1e-10)


def test_normalization_contract(cfg, gaussian_profile):
    for params in (TwoBumpParams(1.0), TwoBumpParams(0.5, -0.04, 5.0),
                   TwoBumpParams(0.17, 0.9, 2.3)):
        wf = make_two_bump(params, gaussian_profile, cfg)
        assert wf.norm_squared() == pytest.approx(1.0, rel=1e-9)


def test_non_overlapping_bumps_norm(cfg, gaussian_profile):
    alpha = 0.7
    wf = make_two_bump(TwoBumpParams(alpha, 1.0, 9.0), gaussian_profile, cfg)
    h_sq = integrate_1d(lambda th: (np.exp(-(th / alpha) ** 2) / alpha) ** 2,
                        -8.0, 8.0, cfg).value
    assert wf.norm_constant ** 2 == pytest.approx(1.0 / (2.0 * h_sq), rel=1e-9)


def test_rescaled_profile_leaves_packet_unchanged(cfg, gaussian_profile):
    scaled = BumpProfile(raw=lambda th: 3.0 * np.exp(-np.asarray(th) ** 2),
                         integral=3.0 * math.sqrt(math.pi), gaussian_scale=1.0)
    a = make_two_bump(TwoBumpParams(0.5, -0.04, 5.0), gaussian_profile, cfg)
    b = make_two_bump(TwoBumpParams(0.5, -0.04, 5.0), scaled, cfg)
    th = np.linspace(-3.0, 7.0, 41)
    assert np.max(np.abs(a(th) - b(th))) < 1e-12


def test_boundary_amplitude_below_kernel_growth(cfg, gaussian_profile, fig1_packet):
    limit = 1e-12 * math.exp(-2.0 * fig1_packet.theta_max)
    assert fig1_packet.boundary_abs < limit * 1e3  # margin folded into the cutoff


def test_cdf_matches_quadrature(cfg, fig1_packet):
    for th in (-1.0, 0.3, 2.5, 6.0):
        direct = integrate_1d(lambda s: np.abs(fig1_packet(s)) ** 2,
                              -fig1_packet.theta_max, th, cfg,
                              initial_panels=128).value
        assert fig1_packet.mass_below(th) == pytest.approx(direct, abs=1e-10)


def test_cdf_of_generic_profile(cfg):
    flat_top = BumpProfile.from_callable(
        lambda th: 1.0 / np.cosh(np.asarray(th, dtype=float)) ** 2, cfg,
        label="sech2")
    wf = make_two_bump(TwoBumpParams(0.8, 0.5, 1.0), flat_top, cfg)
    assert wf.norm_squared() == pytest.approx(1.0, rel=1e-8)
    values = wf.mass_below(np.linspace(-wf.theta_max, wf.theta_max, 300))
    assert np.all(np.diff(values) >= -1e-12)
    assert values[-1] == pytest.approx(1.0, abs=1e-6)


def test_degenerate_profile_rejected(cfg):
    with pytest.raises(ValueError):
        BumpProfile.from_callable(lambda th: np.zeros_like(np.asarray(th)), cfg)


def test_invalid_params():
    with pytest.raises(ValueError):
        TwoBumpParams(alpha=0.0)
    with pytest.raises(ValueError):
        TwoBumpParams(alpha=1.0, beta=math.inf)


def test_l_factor_coincident(fig1_packet):
    assert l_factor(fig1_packet, 1.3, 1.3) == pytest.approx(1.0, abs=1e-12)


def test_l_factor_opposite_sides(fig1_packet):
    span = fig1_packet.theta_max
    assert l_factor(fig1_packet, -span, span) == pytest.approx(-1.0, abs=1e-9)


def test_l_factor_median_to_infinity(cfg, gaussian_profile):
    symmetric = make_two_bump(TwoBumpParams(1.0), gaussian_profile, cfg)
    val = l_factor(symmetric, 0.0, symmetric.theta_max)
    assert val == pytest.approx(0.0, abs=1e-9)


def test_l_factor_symmetry_and_bounds(fig1_packet):
    rng = np.random.default_rng(7)
    pts = rng.uniform(-8, 8, size=(40, 2))
    for th, et in pts:
        a = l_factor(fig1_packet, th, et)
        assert a == l_factor(fig1_packet, et, th)
        assert -1.0 - 1e-12 <= a <= 1.0 + 1e-12


def test_l_factor_monotone_in_separation(cfg, gaussian_profile):
    wf = make_two_bump(TwoBumpParams(1.0), gaussian_profile, cfg)
    median = 0.0
    seps = np.linspace(0.0, 6.0, 25)
    vals = [l_factor(wf, median, median + s) for s in seps]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_delta_limit_atoms():
    assert delta_limit_wavefunction(5.0, 0.0).atoms == ((0.0, 1.0),)
    assert delta_limit_wavefunction(0.0, 0.3).atoms == ((0.0, 1.3),)
    assert delta_limit_wavefunction(5.0, -0.04).atoms == ((0.0, 1.0), (5.0, -0.04))


def test_two_particle_amplitude_norm_and_symmetry(cfg, gaussian_profile):
    u = make_two_bump(TwoBumpParams(0.5), gaussian_profile, cfg)
    v = make_two_bump(TwoBumpParams(0.4, 0.6, 1.2), gaussian_profile, cfg)
    span = max(u.theta_max, v.theta_max)
    rng = np.random.default_rng(3)
    th, et = rng.uniform(-2, 2, 8), rng.uniform(-2, 2, 8)
    for sign in (+1, -1):
        pair = TwoParticleAmplitude(u, v, sign, weight=0.6, cfg=cfg)
        swapped = pair(et, th)
        assert np.allclose(pair(th, et), sign * swapped)
        norm = integrate_2d(lambda a, b: np.abs(pair(a, b)) ** 2,
                            ((-span, span), (-span, span)), cfg,
                            initial_grid=(24, 24))
        assert norm.value == pytest.approx(0.36, rel=1e-8)


def test_antisymmetric_pair_rejects_identical_packets(cfg, gaussian_profile):
    u = make_two_bump(TwoBumpParams(0.5), gaussian_profile, cfg)
    with pytest.raises(ValueError):
        TwoParticleAmplitude(u, u, -1, weight=0.5, cfg=cfg)


def test_superposition_weights_enforced(cfg, gaussian_profile):
    u = make_two_bump(TwoBumpParams(0.5), gaussian_profile, cfg)
    v = make_two_bump(TwoBumpParams(0.4, 0.6, 1.2), gaussian_profile, cfg)
    pair = TwoParticleAmplitude(u, v, +1, weight=0.6, cfg=cfg)
    with pytest.raises(ValueError):
        FockStateSpec.superposition(c0=0.9, pair=pair)  # 0.81 + 0.36 != 1
    state = FockStateSpec.superposition(c0=0.8, pair=pair)
    assert state.kind == "superposition"


def test_product_state_validation(fig1_packet):
    with pytest.raises(ValueError):
        FockStateSpec.product(0, fig1_packet)


def test_spatial_phase_preserves_density(cfg, fig1_packet, ising):
    phased = fig1_packet.with_spatial_phase(0.7, ising.momentum)
    th = np.linspace(-3, 7, 31)
    assert np.allclose(np.abs(phased(th)), np.abs(fig1_packet(th)))
    assert np.allclose(phased.mass_below(th), fig1_packet.mass_below(th))
