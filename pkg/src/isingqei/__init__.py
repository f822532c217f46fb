"""Energy densities and quantum energy inequality bounds in 1+1 dimensions.

The package covers the free massive scalar field and the massive Ising model:
rapidity-space wave packets, pointwise and smeared energy-density expectation
values, the negativity analysis of one-particle states, and verification of
the state-independent lower bound on time-averaged energy densities.
"""
from .energy_density import (DensityValue, EnergyDensityProfile, HermiticityError,
                             Model, ModelKind, SpacetimePoint, expectation_point,
                             expectation_profile, kernel_diag, kernel_offdiag,
                             spatial_energy_integral, total_energy)
from .negative_energy import (IJK, ScanResult, ScanRow, energy_at_origin,
                              gamma_threshold, ijk_integrals, limit_ijk,
                              negativity_condition, optimal_beta, scan)
from .numerics import (CumulativeTable, IntegrationResult, QuadratureConfig,
                       cumulative_table, find_root, fourier_transform,
                       integrate_1d, integrate_2d)
from .qei import (BoundResult, QeiReport, RouteMismatchError, SmearingFunction,
                  TruncationError, conformal_sharp_bound, fm_identity_residual,
                  massless_limit_rhs, q_function, qei_rhs, qei_rhs_oracle_ising,
                  smeared_lhs, verification_suite, verify)
from .states import (BumpProfile, DeltaLimitState, FockStateSpec,
                     TwoBumpParams, TwoParticleAmplitude, WaveFunction,
                     delta_limit_wavefunction, l_factor, make_two_bump)

__version__ = "0.1.0"

__all__ = [
    "BoundResult", "BumpProfile", "CumulativeTable", "DeltaLimitState",
    "DensityValue", "EnergyDensityProfile", "FockStateSpec", "HermiticityError",
    "IJK", "IntegrationResult", "Model", "ModelKind", "QeiReport",
    "QuadratureConfig", "RouteMismatchError", "ScanResult", "ScanRow",
    "SmearingFunction", "SpacetimePoint", "TruncationError", "TwoBumpParams",
    "TwoParticleAmplitude", "WaveFunction", "conformal_sharp_bound",
    "cumulative_table", "delta_limit_wavefunction", "energy_at_origin",
    "expectation_point", "expectation_profile", "find_root",
    "fm_identity_residual", "fourier_transform", "gamma_threshold",
    "ijk_integrals", "integrate_1d", "integrate_2d", "kernel_diag",
    "kernel_offdiag", "l_factor", "limit_ijk", "make_two_bump",
    "massless_limit_rhs", "negativity_condition", "optimal_beta", "q_function",
    "qei_rhs", "qei_rhs_oracle_ising", "scan", "smeared_lhs",
    "spatial_energy_integral", "total_energy", "verification_suite", "verify",
]
