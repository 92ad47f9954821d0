"""Finite-time many-particle quantum Otto engines with a Calogero-Sutherland working medium."""

from .cycle import (
    CyclePerformance,
    Driving,
    OttoCycleSpec,
    StrokeLedger,
    efficiency,
    heat_positivity,
    performance,
    stroke_ledger,
    work_out,
)
from .dynamics import (
    FrequencyProtocol,
    NonadiabaticFactor,
    ProtocolKind,
    omega_at,
    q_factor_husimi,
    q_factor_scale_invariant,
    q_factor_stroke,
    q_factor_sudden,
    solve_ermakov,
)
from .errors import DomainError, IntegrationError, NotAnEngineError, OptimizationError
from .optimize import (
    OptimizationResult,
    closed_form_optimum,
    efficiency_band_largeN,
    lambda_critical,
    maximize_work,
    solve_cubic_adiabatic,
    solve_quintic_largeN,
)
from .supremacy import (
    Convention,
    RatioPoint,
    SweepSpec,
    locate_critical_a,
    ratios_at_optima,
    ratios_same_resources,
    sweep,
)
from .thermo import (
    BathSpec,
    EnergyDecomposition,
    MediumSpec,
    Regime,
    RegimeTag,
    classify_regime,
    dilog,
    log_partition,
    mean_energy,
    mean_energy_asymptotic,
    mu,
)

__version__ = "0.1.0"

__all__ = [
    "BathSpec",
    "Convention",
    "CyclePerformance",
    "DomainError",
    "Driving",
    "EnergyDecomposition",
    "FrequencyProtocol",
    "IntegrationError",
    "MediumSpec",
    "NonadiabaticFactor",
    "NotAnEngineError",
    "OptimizationError",
    "OptimizationResult",
    "OttoCycleSpec",
    "ProtocolKind",
    "RatioPoint",
    "Regime",
    "RegimeTag",
    "StrokeLedger",
    "SweepSpec",
    "classify_regime",
    "closed_form_optimum",
    "dilog",
    "efficiency",
    "efficiency_band_largeN",
    "heat_positivity",
    "lambda_critical",
    "locate_critical_a",
    "log_partition",
    "maximize_work",
    "mean_energy",
    "mean_energy_asymptotic",
    "mu",
    "omega_at",
    "performance",
    "q_factor_husimi",
    "q_factor_scale_invariant",
    "q_factor_stroke",
    "q_factor_sudden",
    "ratios_at_optima",
    "ratios_same_resources",
    "solve_cubic_adiabatic",
    "solve_ermakov",
    "solve_quintic_largeN",
    "stroke_ledger",
    "sweep",
    "work_out",
]
