"""Expectation values of the energy density at time-space points.

Both models share the quadratic-form expansion of the normal-ordered energy
density in creation/annihilation operators.  At real rapidities the
creation-creation kernel is

    F_free(theta, eta, x)  = -(mu^2/2pi) sinh^2((theta+eta)/2) e^{i(p(theta)+p(eta)) . x}
    F_ising(theta, eta, x) = i sinh((theta-eta)/2) F_free(theta, eta, x)

and continuing one argument by i*pi (so that sinh(z + i*pi/2) = i cosh z)
turns the creation-annihilation kernel into the positive combination

    (mu^2/2pi) cosh^2((theta+eta)/2) [Ising: * cosh((theta-eta)/2)]

times translation phases; the annihilation-annihilation kernel is the
argument-reversed complex conjugate of the creation-creation one.  Product
states of n identical packets acquire the scattering weight L(theta,eta)^(n-1)
in the interacting model, which is what breaks additivity there.

Conventions: p(theta) = mu*(cosh theta, sinh theta) and p . x = E t - p1 x.
Only the relative consistency of this signature is observable; flipping it
reflects time-dependent profiles through t -> -t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .numerics import IntegrationResult, QuadratureConfig, integrate_1d, integrate_2d
from .states import FockStateSpec, WaveFunction, l_factor

__all__ = [
    "Model",
    "ModelKind",
    "SpacetimePoint",
    "DensityValue",
    "EnergyDensityProfile",
    "HermiticityError",
    "kernel_diag",
    "kernel_offdiag",
    "expectation_point",
    "expectation_profile",
    "total_energy",
    "spatial_energy_integral",
]

# Expectation values of a self-adjoint density must be real; a larger
# imaginary residual on a converged quadrature means a kernel sign bug.
HERMITICITY_TOL = 1e-8


class HermiticityError(RuntimeError):
    """Raised when a converged expectation value has a complex residue."""


class ModelKind(Enum):
    FREE_BOSON = "free"
    ISING = "ising"


@dataclass(frozen=True)
class Model:
    """Model selector (free Bose field vs. Ising) together with the mass."""

    kind: ModelKind
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ValueError("mass must be positive")

    @classmethod
    def free_boson(cls, mu: float = 1.0) -> "Model":
        return cls(ModelKind.FREE_BOSON, mu)

    @classmethod
    def ising(cls, mu: float = 1.0) -> "Model":
        return cls(ModelKind.ISING, mu)

    @property
    def is_ising(self) -> bool:
        return self.kind is ModelKind.ISING

    @property
    def statistics_sign(self) -> int:
        """+1 for the symmetric Fock space, -1 for the antisymmetric one."""
        return -1 if self.is_ising else +1

    def energy(self, theta):
        return self.mu * np.cosh(theta)

    def momentum(self, theta):
        return self.mu * np.sinh(theta)


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.t) and np.isfinite(self.x)):
            raise ValueError("spacetime point must be finite")


@dataclass(frozen=True)
class DensityValue:
    """One expectation value with its honest quadrature error."""

    value: float
    error: float
    imag_residual: float
    converged: bool


@dataclass(frozen=True)
class EnergyDensityProfile:
    points: tuple[tuple[SpacetimePoint, DensityValue], ...]

    def ts(self) -> np.ndarray:
        return np.array([p.t for p, _ in self.points])

    def values(self) -> np.ndarray:
        return np.array([v.value for _, v in self.points])

    def errors(self) -> np.ndarray:
        return np.array([v.error for _, v in self.points])


def kernel_diag(model: Model, theta, eta):
    """Creation-annihilation kernel at real rapidities, phases stripped."""
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    out = model.mu ** 2 / (2.0 * math.pi) * np.cosh(0.5 * (theta + eta)) ** 2
    if model.is_ising:
        out = out * np.cosh(0.5 * (theta - eta))
    return out if np.ndim(out) else float(out)


def kernel_offdiag(model: Model, theta, eta, point: SpacetimePoint):
    """Creation-creation kernel at real rapidities, translation phases included.

    The annihilation-annihilation kernel is ``conj(kernel_offdiag(eta, theta))``.
    """
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    energy_sum = model.energy(theta) + model.energy(eta)
    momentum_sum = model.momentum(theta) + model.momentum(eta)
    phase = np.exp(1j * (energy_sum * point.t - momentum_sum * point.x))
    f_free = -model.mu ** 2 / (2.0 * math.pi) * np.sinh(0.5 * (theta + eta)) ** 2 * phase
    if model.is_ising:
        f_free = 1j * np.sinh(0.5 * (theta - eta)) * f_free
    return f_free if np.ndim(f_free) else complex(f_free)


def _translation_phase(model: Model, theta, eta, point: SpacetimePoint):
    d_energy = model.energy(theta) - model.energy(eta)
    d_momentum = model.momentum(theta) - model.momentum(eta)
    return np.exp(1j * (d_energy * point.t - d_momentum * point.x))


def _initial_grid(theta_max: float, feature_scale: float) -> tuple[int, int]:
    n = int(np.clip(math.ceil(4.0 * theta_max / feature_scale), 12, 44))
    return (n, n)


def _product_integral(model: Model, phi: WaveFunction, n: int,
                      point: SpacetimePoint, cfg: QuadratureConfig,
                      weight=None, force_2d: bool = False) -> IntegrationResult:
    """Double rapidity integral for a product state, without the factor n.

    ``weight`` optionally replaces the translation phase by an arbitrary
    vectorized factor of (theta, eta); the smeared and windowed evaluations
    reuse this hook.  Pure translation phases factorize, so whenever the
    scattering weight is absent (free field, or a single particle) the
    integral separates into rank-one products of 1d integrals; the genuinely
    coupled cases run the adaptive double quadrature.
    """
    span = phi.theta_max
    power = n - 1 if model.is_ising else 0
    if weight is None and power == 0 and not force_2d:
        return _rank_separated_integral(model, phi, point, cfg)

    def integrand(theta, eta):
        out = np.conj(phi(theta)) * phi(eta) * kernel_diag(model, theta, eta)
        if power:
            out = out * l_factor(phi, theta, eta) ** power
        if weight is None:
            out = out * _translation_phase(model, theta, eta, point)
        else:
            out = out * weight(theta, eta)
        return out

    return integrate_2d(integrand, ((-span, span), (-span, span)), cfg,
                        initial_grid=_initial_grid(span, phi.feature_scale))


def _rank_separated_integral(model: Model, phi: WaveFunction,
                             point: SpacetimePoint,
                             cfg: QuadratureConfig) -> IntegrationResult:
    """Scattering-free double integral, separated into 1d moments.

    With m(theta) = phi(theta) exp(-i (E t - p1 x)) the free kernel gives

        (mu^2/4pi) (|M[1]|^2 + |M[cosh]|^2 + |M[sinh]|^2),

    manifestly nonnegative, while the Ising kernel splits through
    product-to-sum identities into half- and three-half-rapidity moments:

        (mu^2/2pi) [ (|M[ch/2]|^2 - |M[sh/2]|^2) / 2
                     + Re(conj(M[c3h/2]) M[ch/2] + conj(M[s3h/2]) M[sh/2]) / 2 ]

    Both combinations are exactly real, so no hermiticity residual arises on
    this path.
    """
    span = phi.theta_max

    def moments(theta):
        m = phi(theta) * np.exp(-1j * (model.energy(theta) * point.t
                                       - model.momentum(theta) * point.x))
        if model.is_ising:
            comps = (np.cosh(0.5 * theta), np.sinh(0.5 * theta),
                     np.cosh(1.5 * theta), np.sinh(1.5 * theta))
        else:
            comps = (np.ones_like(theta), np.cosh(theta), np.sinh(theta))
        return np.stack([m * c for c in comps], axis=-1)

    osc = (abs(point.t) + abs(point.x)) * model.mu * math.cosh(span)
    init = int(np.clip(max(4.0 * span / phi.feature_scale,
                           0.5 * span * osc / math.pi), 16, 1024))
    res = integrate_1d(moments, -span, span, cfg, initial_panels=init)
    m = np.asarray(res.value)
    eps = res.error_estimate
    if model.is_ising:
        value = (0.5 * (abs(m[0]) ** 2 - abs(m[1]) ** 2)
                 + 0.5 * (np.conj(m[2]) * m[0] + np.conj(m[3]) * m[1]).real)
        scale = model.mu ** 2 / (2.0 * math.pi)
        deriv = np.abs(m[0]) + np.abs(m[1]) + 0.5 * (np.abs(m[2]) + np.abs(m[3]))
        error = scale * (deriv * eps + 2.0 * eps ** 2)
    else:
        value = float(np.sum(np.abs(m) ** 2))
        scale = model.mu ** 2 / (4.0 * math.pi)
        error = scale * (2.0 * float(np.sum(np.abs(m))) * eps + 3.0 * eps ** 2)
    return IntegrationResult(scale * float(value), error, res.converged, res.panels)


def _superposition_integrals(model: Model, state: FockStateSpec,
                             point: SpacetimePoint, cfg: QuadratureConfig,
                             diag_weight=None, cross_weight=None):
    """The a†a and a†a† double integrals of a vacuum + two-particle state."""
    pair = state.pair
    span = pair.theta_max
    grid = _initial_grid(span, pair.feature_scale)
    box = ((-span, span), (-span, span))

    def diag_integrand(theta, eta):
        out = kernel_diag(model, theta, eta) * pair.contract(theta, eta)
        if diag_weight is None:
            out = out * _translation_phase(model, theta, eta, point)
        else:
            out = out * diag_weight(theta, eta)
        return out

    def cross_integrand(theta, eta):
        if cross_weight is None:
            out = kernel_offdiag(model, theta, eta, point)
        else:
            out = kernel_offdiag(model, theta, eta, SpacetimePoint(0.0, point.x))
            out = out * cross_weight(theta, eta)
        return out * np.conj(pair(theta, eta))

    diag = integrate_2d(diag_integrand, box, cfg, initial_grid=grid)
    cross = integrate_2d(cross_integrand, box, cfg, initial_grid=grid)
    return diag, cross


def _check_hermiticity(model: Model, value: float, residual: float,
                       converged: bool) -> None:
    if converged and residual > HERMITICITY_TOL * (abs(value) + model.mu ** 2):
        raise HermiticityError(
            f"imaginary residual {residual:.3e} on expectation value {value:.6e}")


def expectation_point(model: Model, state: FockStateSpec, point: SpacetimePoint,
                      cfg: QuadratureConfig) -> DensityValue:
    """Energy density expectation ``<T00(t, x)>`` in the given state.

    Product states of n packets integrate the packet bilinear against the
    creation-annihilation kernel, with the scattering weight L^(n-1) in the
    Ising model (L == 1 for the free field, where the density is therefore
    exactly additive in n).  Superpositions of the vacuum and a two-particle
    state add twice the real part of the creation-creation term.
    """
    if state.kind == "product":
        res = _product_integral(model, state.wavefunction, state.n, point, cfg)
        raw = complex(res.value)
        value = state.n * raw.real
        residual = state.n * abs(raw.imag)
        error = state.n * res.error_estimate
        _check_hermiticity(model, value, residual, res.converged)
        return DensityValue(value, error, residual, res.converged)

    if state.pair is None:  # pure vacuum: normal ordering annihilates it
        return DensityValue(0.0, 0.0, 0.0, True)
    diag, cross = _superposition_integrals(model, state, point, cfg)
    diag_val = complex(diag.value)
    cross_contrib = math.sqrt(2.0) * (state.c0 * complex(cross.value)).real
    value = 2.0 * diag_val.real + cross_contrib
    residual = 2.0 * abs(diag_val.imag)
    error = 2.0 * diag.error_estimate + math.sqrt(2.0) * cross.error_estimate
    converged = diag.converged and cross.converged
    _check_hermiticity(model, value, residual, converged)
    return DensityValue(value, error, residual, converged)


def expectation_profile(model: Model, state: FockStateSpec,
                        line: Sequence[SpacetimePoint],
                        cfg: QuadratureConfig) -> EnergyDensityProfile:
    """Pointwise expectation values along a spacetime line, errors retained."""
    points = tuple((p, expectation_point(model, state, p, cfg)) for p in line)
    return EnergyDensityProfile(points)


def total_energy(model: Model, state: FockStateSpec,
                 cfg: QuadratureConfig) -> float:
    """Expectation of the Hamiltonian, additive in the particle number."""
    if state.kind == "product":
        phi = state.wavefunction
        res = integrate_1d(
            lambda th: np.abs(phi(th)) ** 2 * model.energy(th),
            -phi.theta_max, phi.theta_max, cfg,
            initial_panels=phi.initial_panels_1d())
        return state.n * float(np.real(res.value))
    if state.pair is None:
        return 0.0
    pair = state.pair
    span = pair.theta_max

    def integrand(theta, eta):
        return (model.energy(theta) + model.energy(eta)) * np.abs(pair(theta, eta)) ** 2

    res = integrate_2d(integrand, ((-span, span), (-span, span)), cfg,
                       initial_grid=_initial_grid(span, pair.feature_scale))
    return float(np.real(res.value))


class _PlateauWindow:
    """Even C-infinity window: 1 on [-plateau, plateau], 0 beyond plateau+rolloff."""

    def __init__(self, plateau: float, rolloff: float):
        if plateau <= 0 or rolloff <= 0:
            raise ValueError("plateau and rolloff must be positive")
        self.plateau = plateau
        self.rolloff = rolloff
        self.support = (-(plateau + rolloff), plateau + rolloff)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = (self.plateau + self.rolloff - np.abs(x)) / self.rolloff
        s = np.clip(s, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            f = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
            fc = np.where(s < 1.0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
        return f / (f + fc)


def spatial_energy_integral(model: Model, state: FockStateSpec,
                            cfg: QuadratureConfig, plateau: float = 10.0,
                            rolloff: float = 5.0,
                            tail_extrapolation: bool = False) -> IntegrationResult:
    """Windowed spatial integral ``∫ w(x) <T00(0, x)> dx`` at fixed time zero.

    ``w`` is a smooth plateau window that equals one across the wave packet;
    doing the x integral first turns the translation phases into the window's
    Fourier transform, which decays fast in p1(theta) - p1(eta) and keeps the
    remaining double integral smooth.  For windows that capture the packet
    the result equals the total energy.

    The scattering weight of Ising multi-particle states produces a genuine
    1/x^2 tail of the energy density (the sign-sign kernel has a crease on
    the rapidity diagonal), so any finite window misses an O(1/window) slice
    of the energy there.  ``tail_extrapolation`` removes it by evaluating
    three window sizes and eliminating the 1/X and 1/X^3 terms.
    """
    if tail_extrapolation:
        return _tail_extrapolated_spatial_integral(model, state, cfg,
                                                   plateau, rolloff)
    from .qei import _DecayingFourier  # shared Fourier-with-cutoff helper

    window = _PlateauWindow(plateau, rolloff)
    what = _DecayingFourier(window, cfg)

    def weight(theta, eta):
        return what(model.momentum(theta) - model.momentum(eta))

    if state.kind == "product":
        res = _product_integral(model, state.wavefunction, state.n,
                                SpacetimePoint(0.0, 0.0), cfg, weight=weight)
        return IntegrationResult(state.n * float(np.real(res.value)),
                                 state.n * res.error_estimate,
                                 res.converged, res.panels)
    if state.pair is None:
        return IntegrationResult(0.0, 0.0, True, 0)

    def cross_weight(theta, eta):
        return what(model.momentum(theta) + model.momentum(eta))

    diag, cross = _superposition_integrals(
        model, state, SpacetimePoint(0.0, 0.0), cfg,
        diag_weight=weight, cross_weight=cross_weight)
    value = 2.0 * float(np.real(complex(diag.value)))
    value += math.sqrt(2.0) * (state.c0 * complex(cross.value)).real
    error = 2.0 * diag.error_estimate + math.sqrt(2.0) * cross.error_estimate
    return IntegrationResult(value, error, diag.converged and cross.converged,
                             diag.panels + cross.panels)


def _tail_extrapolated_spatial_integral(model: Model, state: FockStateSpec,
                                        cfg: QuadratureConfig, plateau: float,
                                        rolloff: float) -> IntegrationResult:
    """Eliminate the 1/X (and 1/X^3) window tail by three scaled windows."""
    results = [spatial_energy_integral(model, state, cfg, plateau * lam,
                                       rolloff * lam) for lam in (1.0, 2.0, 4.0)]
    values = np.array([r.value for r in results])
    errors = np.array([r.error_estimate for r in results])
    h = np.array([1.0, 0.5, 0.25])
    system = np.stack([np.ones(3), h, h ** 3], axis=1)
    inv = np.linalg.inv(system)
    extrapolated = float(inv[0] @ values)
    linear = 2.0 * values[1] - values[0]
    error = float(np.abs(inv[0]) @ errors) + abs(extrapolated - linear) / 8.0
    return IntegrationResult(extrapolated, error,
                             all(r.converged for r in results),
                             sum(r.panels for r in results))
