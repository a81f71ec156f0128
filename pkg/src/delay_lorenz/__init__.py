"""Stability and Hopf bifurcation of single-delay Lorenz-type systems."""

from .model import (
    PRESETS,
    DelayVariant,
    Equilibrium,
    EquilibriumKind,
    State,
    SystemParams,
    ValidityReport,
    equilibria,
    rhs,
    unified_params,
    validate_params,
)
from .spectral import (
    HopfReport,
    QuasiPolynomial,
    Stability,
    classify_delay,
    hopf_report,
    quasi_polynomial,
)
from .dde import HistorySpec, Trajectory, integrate, integrate_ode
from .diagnostics import Behavior, BehaviorReport, classify_trajectory, estimate_period, sweep_amplitude

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "Behavior",
    "BehaviorReport",
    "DelayVariant",
    "Equilibrium",
    "EquilibriumKind",
    "HistorySpec",
    "HopfReport",
    "QuasiPolynomial",
    "Stability",
    "State",
    "SystemParams",
    "Trajectory",
    "ValidityReport",
    "classify_delay",
    "classify_trajectory",
    "equilibria",
    "estimate_period",
    "hopf_report",
    "integrate",
    "integrate_ode",
    "quasi_polynomial",
    "rhs",
    "sweep_amplitude",
    "unified_params",
    "validate_params",
]
