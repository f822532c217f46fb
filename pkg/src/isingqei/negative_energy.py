"""Negativity analysis of the one-particle Ising energy density at the origin.

For the two-bump packet the energy density at the origin is the quadratic
form

    (mu^2/2pi) c^2 (I + J beta + K beta^2)

in the relative amplitude beta, with coefficients given by double integrals
of the scaled profile against shifted cosh kernels.  All module outputs are
reported in units of mu^2/2pi (the analysis is mass independent); callers
that want physical values apply the prefactor themselves.

The form turns negative for some beta exactly when J^2 > 4 I K.  In the
pointlike limit alpha -> 0 the coefficients reduce to

    I -> 1,   J -> 2 cosh^3(gamma/2),   K -> cosh^2(gamma),

and the discriminant condition becomes (1 + cosh gamma)^3 > 8 cosh^2 gamma,
which holds above a unique threshold separation gamma* = arccosh(2 + sqrt 5).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureConfig, find_root, integrate_1d, integrate_2d
from .states import BumpProfile, TwoBumpParams

__all__ = [
    "IJK",
    "ScanRow",
    "ScanResult",
    "ijk_integrals",
    "limit_ijk",
    "energy_at_origin",
    "optimal_beta",
    "negativity_condition",
    "gamma_threshold",
    "scan",
]


@dataclass(frozen=True)
class IJK:
    """Coefficients of the beta-quadratic; alpha = 0 encodes the delta limit."""

    i_val: float
    j_val: float
    k_val: float
    alpha: float
    gamma: float
    error: float = 0.0
    converged: bool = True

    def __post_init__(self) -> None:
        if self.i_val <= 0 or self.k_val <= 0:
            raise ValueError("I and K are integrals of positive functions")


@dataclass(frozen=True)
class ScanRow:
    alpha: float
    gamma: float
    beta_opt: float
    min_value: float
    negative: bool
    error: float
    ok: bool


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]
    gamma_star: float


def _ijk_domain(alpha: float, profile: BumpProfile) -> float:
    """Half width where the profile tail beats the exp(2*alpha*w) kernel growth."""
    w = 6.0
    for _ in range(8):
        w = profile.decay_half_width(1e-14 * math.exp(-2.0 * alpha * w))
    return alpha * w


def _kernel_moment(alpha: float, profile: BumpProfile, shift_sum: float,
                   shift_diff: float, cfg: QuadratureConfig):
    """∫∫ h_a(th) h_a(et) cosh^2((th+et+shift_sum)/2) cosh((th-et+shift_diff)/2)."""
    span = _ijk_domain(alpha, profile)

    def integrand(theta, eta):
        h = profile.h(theta / alpha) * profile.h(eta / alpha) / alpha ** 2
        return (h * np.cosh(0.5 * (theta + eta + shift_sum)) ** 2
                * np.cosh(0.5 * (theta - eta + shift_diff)))

    grid = int(np.clip(math.ceil(8.0 * span / alpha), 12, 40))
    return integrate_2d(integrand, ((-span, span), (-span, span)), cfg,
                        initial_grid=(grid, grid))


def ijk_integrals(alpha: float, gamma: float, profile: BumpProfile,
                  cfg: QuadratureConfig) -> IJK:
    """The three quadratic-form coefficients by direct double quadrature."""
    if alpha <= 0:
        raise ValueError("alpha must be positive (alpha = 0 is limit_ijk)")
    res_i = _kernel_moment(alpha, profile, 0.0, 0.0, cfg)
    res_j = _kernel_moment(alpha, profile, gamma, gamma, cfg)
    res_k = _kernel_moment(alpha, profile, 2.0 * gamma, 0.0, cfg)
    return IJK(i_val=float(np.real(res_i.value)),
               j_val=2.0 * float(np.real(res_j.value)),
               k_val=float(np.real(res_k.value)),
               alpha=alpha, gamma=gamma,
               error=(res_i.error_estimate + 2.0 * res_j.error_estimate
                      + res_k.error_estimate),
               converged=res_i.converged and res_j.converged and res_k.converged)


def limit_ijk(gamma: float) -> IJK:
    """Closed-form pointlike limit of the coefficients."""
    return IJK(i_val=1.0, j_val=2.0 * math.cosh(0.5 * gamma) ** 3,
               k_val=math.cosh(gamma) ** 2, alpha=0.0, gamma=gamma)


def energy_at_origin(alpha: float, beta: float, gamma: float,
                     profile: BumpProfile, cfg: QuadratureConfig) -> float:
    """Origin energy density of the two-bump packet, in units of mu^2/2pi.

    The normalization c^2 is computed numerically; multiplied by mu^2/2pi
    this must reproduce the independent double-integral evaluation of the
    expectation value, which the test suite enforces.
    """
    ijk = ijk_integrals(alpha, gamma, profile, cfg)
    return _normalization(alpha, beta, gamma, profile, cfg) * _quadratic(ijk, beta)


def _normalization(alpha: float, beta: float, gamma: float,
                   profile: BumpProfile, cfg: QuadratureConfig) -> float:
    span = _ijk_domain(alpha, profile) + abs(gamma)

    def density(theta):
        return (profile.h(theta / alpha) / alpha
                + beta * profile.h((theta - gamma) / alpha) / alpha) ** 2

    res = integrate_1d(density, -span, span, cfg,
                       initial_panels=int(np.clip(8.0 * span / alpha, 16, 256)))
    nsq = float(np.real(res.value))
    if nsq <= 0:
        raise ValueError("degenerate packet: the two bumps cancel")
    return 1.0 / nsq


def _quadratic(ijk: IJK, beta: float) -> float:
    return ijk.i_val + ijk.j_val * beta + ijk.k_val * beta ** 2


def optimal_beta(ijk: IJK) -> float:
    """Vertex of the upward parabola, beta* = -J / (2K)."""
    return -ijk.j_val / (2.0 * ijk.k_val)


def negativity_condition(ijk: IJK) -> bool:
    """True when the quadratic has two real zeros, i.e. J^2 > 4 I K."""
    return ijk.j_val * ijk.j_val > 4.0 * ijk.i_val * ijk.k_val


def gamma_threshold(tol: float = 1e-12) -> float:
    """Unique gamma > 0 where (1 + cosh gamma)^3 = 8 cosh^2 gamma.

    Below it no beta makes the pointlike-limit energy negative; the root is
    arccosh(2 + sqrt 5) since the condition factors through
    (c - 1)(c^2 - 4c - 1) with c = cosh gamma.
    """
    return find_root(lambda g: (1.0 + math.cosh(g)) ** 3 - 8.0 * math.cosh(g) ** 2,
                     (1.0, 3.0), tol)


def scan(alphas, gammas, profile: BumpProfile, cfg: QuadratureConfig) -> ScanResult:
    """Grid scan of the minimized quadratic over (alpha, gamma).

    ``min_value`` is c^2 (4IK - J^2) / (4K) in units of mu^2/2pi; at gamma = 0
    the symmetry J = 2I, K = I makes it vanish identically, so the boundary
    rows are exactly non-negative.  Rows where quadrature fails are recorded
    with ``ok=False`` and the scan continues.
    """
    rows = []
    for alpha in sorted(alphas):
        if alpha <= 0:
            raise ValueError("scan requires positive alpha values")
        for gamma in sorted(gammas):
            try:
                ijk = ijk_integrals(alpha, gamma, profile, cfg)
                beta_star = optimal_beta(ijk)
                disc = 4.0 * ijk.i_val * ijk.k_val - ijk.j_val * ijk.j_val
                if disc == 0.0:
                    # Boundary case (gamma = 0): beta* cancels the packet and
                    # the minimized form vanishes identically.
                    min_val = 0.0
                else:
                    min_val = (_normalization(alpha, beta_star, gamma, profile, cfg)
                               * disc / (4.0 * ijk.k_val))
                rows.append(ScanRow(alpha, gamma, beta_star, min_val,
                                    min_val < 0.0, ijk.error, ijk.converged))
            except (ValueError, RuntimeError):
                rows.append(ScanRow(alpha, gamma, float("nan"), float("nan"),
                                    False, float("nan"), False))
    return ScanResult(rows=tuple(rows), gamma_star=gamma_threshold())
