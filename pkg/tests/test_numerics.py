import math

import numpy as np
import pytest

from isingqei import (QuadratureConfig, SmearingFunction, cumulative_table,
                      find_root, fourier_transform, integrate_1d, integrate_2d)

SQRT_PI = 1.7724538509055159
TWO_SINH_1 = 2.3504023872876028
CUBIC_ROOT = 2.0 + math.sqrt(5.0)  # c^3 - 5c^2 + 3c + 1 factors (c-1)(c^2-4c-1)


def test_constant(cfg):
    res = integrate_1d(lambda x: np.ones_like(x), 0.0, 1.0, cfg)
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-13)


def test_cosh_antideriv(cfg):
    res = integrate_1d(np.cosh, -1.0, 1.0, cfg)
    assert res.value == pytest.approx(TWO_SINH_1, rel=1e-12)


def test_gaussian(cfg):
    res = integrate_1d(lambda x: np.exp(-x * x), -7.0, 7.0, cfg)
    assert res.converged
    assert abs(res.value / SQRT_PI - 1.0) < 1e-10


def test_linearity(cfg):
    f = lambda x: np.exp(-x * x)
    g = np.cosh
    a, b = 2.5, -0.7
    combined = integrate_1d(lambda x: a * f(x) + b * g(x), -1.0, 2.0, cfg)
    separate = (a * integrate_1d(f, -1.0, 2.0, cfg).value
                + b * integrate_1d(g, -1.0, 2.0, cfg).value)
    tol = combined.error_estimate + abs(a) * 1e-12 + abs(b) * 1e-12 + 1e-12
    assert abs(combined.value - separate) <= tol + 1e-10


def test_grid_refinement_stability():
    f = lambda x: np.exp(-x * x) * np.cos(3 * x)
    coarse = integrate_1d(f, -6.0, 6.0, QuadratureConfig(grid_points=12))
    fine = integrate_1d(f, -6.0, 6.0, QuadratureConfig(grid_points=24))
    assert coarse.converged and fine.converged
    assert abs(coarse.value - fine.value) <= coarse.error_estimate + 1e-12


def test_narrow_spike_not_missed(cfg):
    res = integrate_1d(lambda x: np.exp(-((x - 3.0) / 0.05) ** 2), -10.0, 10.0,
                       cfg, initial_panels=16)
    assert res.converged
    assert res.value == pytest.approx(0.05 * SQRT_PI, rel=1e-9)


def test_invalid_bounds(cfg):
    with pytest.raises(ValueError):
        integrate_1d(np.cosh, 1.0, -1.0, cfg)
    with pytest.raises(ValueError):
        integrate_1d(np.cosh, 0.0, math.inf, cfg)


def test_2d_constant(cfg):
    res = integrate_2d(lambda x, y: np.ones_like(x), ((0, 1), (0, 1)), cfg)
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_2d_gaussian_product(cfg):
    res = integrate_2d(lambda x, y: np.exp(-x * x) * np.exp(-y * y),
                       ((-6, 6), (-6, 6)), cfg)
    assert res.converged
    assert res.value == pytest.approx(math.pi, rel=1e-10)


def test_2d_antisymmetric(cfg):
    res = integrate_2d(lambda x, y: np.sign(x - y), ((-2, 2), (-2, 2)), cfg)
    assert abs(res.value) < 1e-10


def test_fourier_zero_frequency(cfg, default_bump):
    direct = integrate_1d(default_bump, -1.0, 1.0, cfg).value
    assert fourier_transform(default_bump, 0.0, cfg) == pytest.approx(direct, rel=1e-12)
    assert abs(fourier_transform(default_bump, 0.0, cfg).imag) < 1e-14


def test_fourier_conjugate_symmetry(cfg, default_bump):
    for w in (0.3, 2.0, 17.5):
        plus = fourier_transform(default_bump, w, cfg)
        minus = fourier_transform(default_bump, -w, cfg)
        assert plus == pytest.approx(np.conj(minus), abs=1e-12)


def test_fourier_envelope_decay(cfg, default_bump):
    """|g~| of the standard bump decays below 1e-8 of its peak, with a
    decreasing envelope over successive frequency bands."""
    ref = abs(fourier_transform(default_bump, 0.0, cfg))
    bands = [(50, 150), (150, 300), (300, 450)]
    maxima = []
    for lo, hi in bands:
        ws = np.linspace(lo, hi, 121)
        vals = np.abs(fourier_transform(default_bump, ws, cfg))
        maxima.append(float(vals.max()))
    assert maxima[0] > maxima[1] > maxima[2]
    assert maxima[2] < 1e-8 * ref


def test_fourier_array_matches_scalar(cfg, default_bump):
    ws = np.array([-3.0, 0.5, 11.0])
    batch = fourier_transform(default_bump, ws, cfg)
    for w, v in zip(ws, batch):
        assert v == pytest.approx(fourier_transform(default_bump, float(w), cfg),
                                  abs=1e-12)


def test_cumulative_zero(cfg):
    table = cumulative_table(lambda x: np.zeros_like(x), np.linspace(0, 1, 11), cfg)
    assert table.total == 0.0
    assert table(0.5) == 0.0


def test_cumulative_gaussian_median(cfg):
    table = cumulative_table(lambda x: np.exp(-x * x) / SQRT_PI,
                             np.linspace(-8, 8, 2001), cfg)
    assert table(0.0) == pytest.approx(0.5, abs=1e-10)
    assert table.total == pytest.approx(1.0, abs=1e-10)
    values = table(np.linspace(-8, 8, 500))
    assert np.all(np.diff(values) >= 0)


def test_cumulative_rejects_negative(cfg):
    with pytest.raises(ValueError):
        cumulative_table(lambda x: -np.ones_like(x), np.linspace(0, 1, 5), cfg)


def test_root_linear():
    assert find_root(lambda x: x - 1.0, (0.0, 2.0)) == pytest.approx(1.0, abs=1e-12)


def test_root_cubic():
    root = find_root(lambda c: c ** 3 - 5 * c ** 2 + 3 * c + 1, (3.0, 6.0))
    assert root == pytest.approx(CUBIC_ROOT, abs=1e-10)


def test_root_negativity_threshold():
    root = find_root(lambda g: (1 + math.cosh(g)) ** 3 - 8 * math.cosh(g) ** 2,
                     (1.0, 3.0))
    assert root == pytest.approx(math.acosh(CUBIC_ROOT), abs=1e-10)


def test_root_invalid_bracket():
    with pytest.raises(ValueError):
        find_root(lambda x: x * x + 1.0, (-1.0, 1.0))


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(grid_points=1)
    with pytest.raises(ValueError):
        QuadratureConfig(rapidity_cutoff=0.0)


def test_nonconvergence_is_flagged():
    """A sampled feature that max_depth cannot resolve is never reported as
    converged; the error estimate stays honestly large."""
    cfg = QuadratureConfig(max_depth=1, panel_budget=64)
    res = integrate_1d(lambda x: np.exp(-((x - 0.37) / 0.05) ** 2),
                       -10.0, 10.0, cfg, initial_panels=8)
    assert not res.converged
    exact = 0.05 * SQRT_PI
    assert abs(res.value - exact) <= 10.0 * max(res.error_estimate, 1e-15)
