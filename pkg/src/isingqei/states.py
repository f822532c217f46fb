"""Rapidity-space wave packets and the scattering weight they induce.

The central object is the two-bump family

    phi(theta) = c * (h_a(theta) + beta * h_a(theta - gamma)),
    h_a(theta) = h(theta / alpha) / alpha,

built from a nonnegative rapidly decaying profile ``h`` (a Gaussian by
default) and normalized so that ``∫ |phi|^2 = 1``.  A wave function carries
its own rapidity cutoff, chosen so that the packet tail still beats the
``exp(2*theta)`` growth of the energy-density kernels, plus a cumulative
distribution of |phi|^2 from which the sign-sign scattering weight

    L(theta, eta) = ∫ |phi(lam)|^2 sign(theta - lam) sign(eta - lam) dlam

is evaluated in closed form as ``1 - 2*(C(max) - C(min))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erf

from .numerics import QuadratureConfig, cumulative_table, integrate_1d

__all__ = [
    "BumpProfile",
    "TwoBumpParams",
    "WaveFunction",
    "TwoParticleAmplitude",
    "FockStateSpec",
    "DeltaLimitState",
    "make_two_bump",
    "l_factor",
    "delta_limit_wavefunction",
]

# Relative size of the kernel-amplified packet tail at the cutoff.
TRUNCATION_TOL = 1e-12
_CUTOFF_MARGIN = 1.0


@dataclass(frozen=True)
class BumpProfile:
    """Nonnegative rapidly decaying profile, rescaled internally to unit mass.

    ``raw`` is kept as supplied (normalization constants are reported with
    respect to it); ``h`` divides out the integral so that ``∫ h = 1``, which
    the delta-limit formulas of the negativity analysis rely on.
    """

    raw: Callable[[np.ndarray], np.ndarray]
    integral: float
    gaussian_scale: float | None = None  # raw = amp * exp(-(theta/scale)^2)
    label: str = "custom"

    @classmethod
    def gaussian(cls) -> "BumpProfile":
        """The default profile ``h(theta) = exp(-theta^2)``."""
        return cls(raw=lambda th: np.exp(-np.asarray(th, dtype=float) ** 2),
                   integral=math.sqrt(math.pi), gaussian_scale=1.0, label="gaussian")

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray],
                      cfg: QuadratureConfig, half_width: float = 12.0,
                      label: str = "custom") -> "BumpProfile":
        """Wrap a user profile, measuring its integral numerically."""
        probe = np.asarray(fn(np.linspace(-half_width, half_width, 4001)))
        if np.min(probe) < -1e-12 * max(1.0, float(np.max(np.abs(probe)))):
            raise ValueError("bump profile must be nonnegative")
        res = integrate_1d(lambda th: np.asarray(fn(th), dtype=float),
                           -half_width, half_width, cfg, initial_panels=64)
        if res.value <= 0:
            raise ValueError("bump profile integrates to zero")
        return cls(raw=fn, integral=float(res.value), label=label)

    def h(self, theta):
        return np.asarray(self.raw(theta)) / self.integral

    def decay_half_width(self, rel: float) -> float:
        """Half width W with ``raw(±W) <= rel * max(raw)``."""
        if self.gaussian_scale is not None:
            return self.gaussian_scale * math.sqrt(max(1.0, -math.log(rel)))
        peak = 0.0
        for hi in (50.0, 100.0, 200.0, 400.0):
            grid = np.linspace(0.0, hi, int(40 * hi) + 1)
            vals = np.asarray(self.raw(grid)) + np.asarray(self.raw(-grid))
            peak = max(peak, float(np.max(vals)))
            below = np.flatnonzero(vals <= rel * peak)
            if below.size and grid[below[0]] < hi:
                return float(grid[below[0]])
        raise ValueError("profile decays too slowly to dominate the "
                         "exp(2*theta) kernel growth")


@dataclass(frozen=True)
class TwoBumpParams:
    """Width scale, relative amplitude and rapidity separation of the bumps."""

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not (np.isfinite(self.beta) and np.isfinite(self.gamma)):
            raise ValueError("beta and gamma must be finite")


class WaveFunction:
    """Normalized rapidity wave packet on ``[-theta_max, theta_max]``.

    Quadratures evaluate the closed-form expression directly; the stored grid
    and samples exist for the |phi|^2 cumulative table and diagnostics, so no
    interpolation error enters double integrals.
    """

    def __init__(self, evaluator: Callable[[np.ndarray], np.ndarray],
                 theta_max: float, norm_constant: float,
                 cdf: Callable[[np.ndarray], np.ndarray],
                 feature_scale: float, cfg: QuadratureConfig,
                 label: str = "wavefunction", grid_size: int = 1025):
        self._eval = evaluator
        self.theta_max = float(theta_max)
        self.norm_constant = float(norm_constant)
        self._cdf = cdf
        self.feature_scale = float(feature_scale)
        self.label = label
        self.grid = np.linspace(-self.theta_max, self.theta_max, grid_size)
        self.values = np.asarray(evaluator(self.grid))
        self._cfg = cfg

    def __call__(self, theta):
        return self._eval(np.asarray(theta, dtype=float))

    def mass_below(self, theta):
        """Cumulative probability ``∫_{-inf}^{theta} |phi|^2``, clipped to [0, 1]."""
        return np.clip(self._cdf(np.asarray(theta, dtype=float)), 0.0, 1.0)

    @property
    def boundary_abs(self) -> float:
        edge = np.array([-self.theta_max, self.theta_max])
        return float(np.max(np.abs(self._eval(edge))))

    def norm_squared(self, cfg: QuadratureConfig | None = None) -> float:
        cfg = cfg or self._cfg
        res = integrate_1d(lambda th: np.abs(self._eval(th)) ** 2,
                           -self.theta_max, self.theta_max, cfg,
                           initial_panels=self.initial_panels_1d())
        return float(res.value)

    def initial_panels_1d(self) -> int:
        """Starting subdivision fine enough that packets are not stepped over."""
        return int(np.clip(2 * self.theta_max / (0.5 * self.feature_scale), 16, 256))

    def with_spatial_phase(self, x: float, momentum: Callable[[np.ndarray], np.ndarray]
                           ) -> "WaveFunction":
        """Packet with phases ``exp(i p1(theta) x)`` absorbed into the values.

        Expectation values of the energy density at ``(t, x)`` coincide with
        those of the phased packet at ``(t, 0)``; |phi|^2 and the cumulative
        table are untouched.
        """
        base = self._eval
        phased = lambda th: base(th) * np.exp(1j * momentum(np.asarray(th, dtype=float)) * x)
        return WaveFunction(phased, self.theta_max, self.norm_constant, self._cdf,
                            self.feature_scale, self._cfg,
                            label=f"{self.label}, x-phase {x}", grid_size=len(self.grid))


def _cutoff(params: TwoBumpParams, profile: BumpProfile) -> float:
    """Cutoff where the packet envelope still dominates exp(2*theta) growth."""
    theta = abs(params.gamma) + _CUTOFF_MARGIN
    for _ in range(8):
        w = profile.decay_half_width(TRUNCATION_TOL * math.exp(-2.0 * theta))
        theta_new = abs(params.gamma) + params.alpha * w + _CUTOFF_MARGIN
        if abs(theta_new - theta) < 1e-3:
            theta = theta_new
            break
        theta = theta_new
    return theta


def make_two_bump(params: TwoBumpParams, profile: BumpProfile,
                  cfg: QuadratureConfig) -> WaveFunction:
    """Build the normalized two-bump packet for the given parameters.

    The reported ``norm_constant`` refers to the profile exactly as supplied
    (rescaling h by a positive constant rescales c inversely and leaves the
    packet itself unchanged).
    """
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    theta_max = _cutoff(params, profile)

    def unnormalized(th):
        th = np.asarray(th, dtype=float)
        return (np.asarray(profile.raw(th / alpha))
                + beta * np.asarray(profile.raw((th - gamma) / alpha))) / alpha

    norm_res = integrate_1d(lambda th: unnormalized(th) ** 2,
                            -theta_max, theta_max, cfg,
                            initial_panels=int(np.clip(4 * theta_max / alpha, 16, 256)))
    nsq = float(norm_res.value)
    if not (nsq > 0 and np.isfinite(nsq)):
        raise ValueError("degenerate wave packet: |phi|^2 integrates to zero")
    c = 1.0 / math.sqrt(nsq)
    evaluator = lambda th: c * unnormalized(th)

    if profile.gaussian_scale is not None:
        cdf = _gaussian_two_bump_cdf(profile, alpha, beta, gamma, c)
    else:
        dense = np.linspace(-theta_max, theta_max, 8193)
        table = cumulative_table(lambda th: np.abs(evaluator(th)) ** 2, dense, cfg)
        cdf = table
    return WaveFunction(evaluator, theta_max, c, cdf, feature_scale=alpha, cfg=cfg,
                        label=f"two-bump(alpha={alpha}, beta={beta}, gamma={gamma}, "
                              f"h={profile.label})")


def _gaussian_two_bump_cdf(profile: BumpProfile, alpha, beta, gamma, c):
    """Exact |phi|^2 antiderivative for Gaussian profiles, in terms of erf.

    With raw(theta) = A exp(-(theta/s)^2), every term of |phi|^2 is again a
    Gaussian, so the cumulative distribution is a three-term erf sum.
    """
    s = profile.gaussian_scale * alpha  # width of each scaled bump
    amp = float(profile.raw(np.zeros(1))[0])  # raw peak height A
    a2 = (amp / alpha) ** 2
    coef = c * c * a2 * s * math.sqrt(math.pi / 2.0)
    cross_weight = math.exp(-gamma * gamma / (2.0 * s * s))

    def cdf(th):
        th = np.asarray(th, dtype=float)
        z0 = erf(math.sqrt(2.0) * th / s)
        zg = erf(math.sqrt(2.0) * (th - gamma) / s)
        zc = erf(math.sqrt(2.0) * (th - 0.5 * gamma) / s)
        return coef * 0.5 * ((1.0 + z0) + beta * beta * (1.0 + zg)
                             + 2.0 * beta * cross_weight * (1.0 + zc))

    return cdf


def l_factor(phi: WaveFunction, theta, eta):
    """Scattering weight ``∫ |phi|^2 sign(theta-lam) sign(eta-lam) dlam``.

    Evaluated through the cumulative table as ``1 - 2*(C(hi) - C(lo))``; the
    value of sign(0) is irrelevant for the integral and is fixed to 0.
    """
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    hi = phi.mass_below(np.maximum(theta, eta))
    lo = phi.mass_below(np.minimum(theta, eta))
    out = 1.0 - 2.0 * (hi - lo)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DeltaLimitState:
    """Formal two-atom idealization of the packet in the alpha -> 0 limit."""

    atoms: tuple[tuple[float, float], ...]  # (position, weight)


def delta_limit_wavefunction(gamma: float, beta: float) -> DeltaLimitState:
    """Point-mass description used only by the closed-form limit formulas."""
    if beta == 0.0:
        return DeltaLimitState(atoms=((0.0, 1.0),))
    if gamma == 0.0:
        return DeltaLimitState(atoms=((0.0, 1.0 + beta),))
    return DeltaLimitState(atoms=((0.0, 1.0), (float(gamma), float(beta))))


class TwoParticleAmplitude:
    """(Anti)symmetrized two-particle amplitude built from packets u and v.

        f2(theta, eta) = N * (u(theta) v(eta) + sign * v(theta) u(eta))

    with sign = +1 on the symmetric and -1 on the antisymmetric Fock space,
    scaled so that the L2 norm of f2 equals ``weight``.
    """

    def __init__(self, u: WaveFunction, v: WaveFunction, sign: int,
                 weight: float, cfg: QuadratureConfig):
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        if not 0.0 < weight <= 1.0:
            raise ValueError("two-particle weight must lie in (0, 1]")
        self.u, self.v, self.sign, self.weight = u, v, sign, float(weight)
        self.theta_max = max(u.theta_max, v.theta_max)
        self.feature_scale = min(u.feature_scale, v.feature_scale)
        span = self.theta_max
        overlap = integrate_1d(lambda th: np.conj(u(th)) * v(th), -span, span,
                               cfg, initial_panels=u.initial_panels_1d())
        self.uv = complex(overlap.value)
        gram = 2.0 * (1.0 + sign * abs(self.uv) ** 2)
        if gram <= 1e-14:
            raise ValueError("degenerate antisymmetric pair: u and v coincide")
        self.norm_factor = self.weight / math.sqrt(gram)

    def __call__(self, theta, eta):
        return self.norm_factor * (self.u(theta) * self.v(eta)
                                   + self.sign * self.v(theta) * self.u(eta))

    def contract(self, theta, eta):
        """Single contraction ``∫ conj(f2(theta, lam)) f2(eta, lam) dlam``."""
        n2 = self.norm_factor ** 2
        uu = np.conj(self.u(theta)) * self.u(eta)
        vv = np.conj(self.v(theta)) * self.v(eta)
        uv = np.conj(self.u(theta)) * self.v(eta)
        vu = np.conj(self.v(theta)) * self.u(eta)
        return n2 * (uu + vv + self.sign * (uv * np.conj(self.uv) + vu * self.uv))


@dataclass(frozen=True)
class FockStateSpec:
    """Product state ``n`` copies of one packet, or vacuum + two-particle mix.

    Exactly one of the two shapes is populated:

    * product: ``n >= 1`` and ``wavefunction`` set;
    * superposition: ``c0`` and (unless purely vacuum) ``pair`` set, with
      ``|c0|^2 + weight^2 = 1`` enforced at construction.
    """

    kind: str
    n: int = 0
    wavefunction: WaveFunction | None = None
    c0: complex = 0.0
    pair: TwoParticleAmplitude | None = None
    label: str = field(default="", compare=False)

    @classmethod
    def product(cls, n: int, phi: WaveFunction) -> "FockStateSpec":
        if n < 1:
            raise ValueError("product states need n >= 1")
        return cls(kind="product", n=int(n), wavefunction=phi,
                   label=f"product(n={n}, {phi.label})")

    @classmethod
    def vacuum(cls) -> "FockStateSpec":
        return cls(kind="superposition", c0=1.0, pair=None, label="vacuum")

    @classmethod
    def superposition(cls, c0: complex, pair: TwoParticleAmplitude | None
                      ) -> "FockStateSpec":
        w2 = 0.0 if pair is None else pair.weight ** 2
        if abs(abs(c0) ** 2 + w2 - 1.0) > 1e-9:
            raise ValueError("superposition weights must satisfy |c0|^2 + |f2|^2 = 1")
        label = "vacuum" if pair is None else (
            f"superposition(c0={c0}, pair[{pair.u.label} | {pair.v.label}], "
            f"weight={pair.weight})")
        return cls(kind="superposition", c0=complex(c0), pair=pair, label=label)
