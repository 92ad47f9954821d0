"""Four-stroke quantum Otto cycle: stroke ledger, work, efficiency and power.

States: A (thermal, beta_c, omega1) -> B (after compression to omega2)
-> C (thermal, beta_h, omega2) -> D (after expansion back to omega1).
Isochores are ideal relaxations; their durations are plain inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

from . import dynamics
from .dynamics import FrequencyProtocol, NonadiabaticFactor, q_factor_sudden, smoothstep
from .errors import DomainError, NotAnEngineError
from .thermo import BathSpec, MediumSpec, mean_energy


class Driving(enum.Enum):
    ADIABATIC = "adiabatic"
    SUDDEN = "sudden"
    RAMP = "ramp"


@dataclass(frozen=True)
class OttoCycleSpec:
    """Operating point of the engine.

    For ``Driving.RAMP`` both unitary strokes last ``ramp_time`` and the
    expansion mirrors the compression in time. ``stroke_times`` overrides the
    default ``(tau_u, 1, tau_u, 1)`` where ``tau_u`` is ``ramp_time`` for
    ramps and 0 otherwise.
    """

    omega1: float
    omega2: float
    beta_c: float
    beta_h: float
    medium: MediumSpec
    driving: Driving = Driving.SUDDEN
    ramp_time: float | None = None
    isochore_times: tuple[float, float] = (1.0, 1.0)
    stroke_times: tuple[float, float, float, float] | None = None
    ramp_shape: Callable[[float], float] = field(default=smoothstep, compare=False)
    rel_tol: float = dynamics.DEFAULT_REL_TOL
    abs_tol: float = dynamics.DEFAULT_ABS_TOL

    def __post_init__(self):
        if not (self.omega2 > self.omega1 > 0):
            raise DomainError("need omega2 > omega1 > 0")
        if not (self.beta_c > self.beta_h > 0):
            raise DomainError("need beta_c > beta_h > 0")
        if self.driving is Driving.RAMP and not (self.ramp_time and self.ramp_time > 0):
            raise DomainError("ramp driving needs a positive ramp_time")
        times = self.stroke_times if self.stroke_times is not None else self.isochore_times
        if any(t < 0 for t in times):
            raise DomainError("stroke times must be non-negative")

    @classmethod
    def from_ratios(
        cls,
        x: float,
        a: float,
        beta_c: float,
        medium: MediumSpec,
        driving: Driving = Driving.SUDDEN,
        omega1: float = 1.0,
        **kwargs,
    ) -> "OttoCycleSpec":
        """Build a spec from ``x = omega1/omega2`` and ``a = beta_h/beta_c``."""
        if not (0 < x < 1 and 0 < a < 1):
            raise DomainError("x and a must lie in (0, 1)")
        return cls(omega1, omega1 / x, beta_c, a * beta_c, medium, driving, **kwargs)

    @property
    def x(self) -> float:
        return self.omega1 / self.omega2

    @property
    def a(self) -> float:
        return self.beta_h / self.beta_c

    @property
    def sigma_c(self) -> float:
        return self.medium.n_particles * self.beta_c * self.omega1

    @property
    def sigma_h(self) -> float:
        return self.medium.n_particles * self.beta_h * self.omega2

    @property
    def cycle_times(self) -> tuple[float, float, float, float]:
        if self.stroke_times is not None:
            return tuple(self.stroke_times)
        unitary = self.ramp_time if self.driving is Driving.RAMP else 0.0
        return (unitary, self.isochore_times[0], unitary, self.isochore_times[1])

    def with_ratio(self, x: float) -> "OttoCycleSpec":
        """Same spec with omega2 = omega1 / x; omega1 and both temperatures stay fixed."""
        return replace(self, omega2=self.omega1 / x)

    def with_medium(self, medium: MediumSpec) -> "OttoCycleSpec":
        return replace(self, medium=medium)

    def compression(self) -> FrequencyProtocol:
        if self.driving is Driving.SUDDEN:
            return FrequencyProtocol.sudden(self.omega1, self.omega2)
        if self.driving is Driving.RAMP:
            return FrequencyProtocol.ramp(self.omega1, self.omega2, self.ramp_time, self.ramp_shape)
        raise DomainError("adiabatic strokes have no finite protocol")

    def expansion(self) -> FrequencyProtocol:
        return self.compression().reversed()


@dataclass(frozen=True)
class StrokeLedger:
    energy_A: float
    energy_B: float
    energy_C: float
    energy_D: float
    W1: float
    Q2: float
    W3: float
    Q4: float
    q_ab: NonadiabaticFactor
    q_cd: NonadiabaticFactor
    # -(W1 + W3), summed as thermal plus ground-state parts (see stroke_ledger)
    work_out: float


@dataclass(frozen=True)
class CyclePerformance:
    ledger: StrokeLedger
    total_work_out: float
    efficiency: float  # nan when Q2 <= 0
    power: float
    eta_otto: float
    eta_nad_bound: float
    q2_positive: bool
    engine_valid: bool


def nonadiabatic_factors(spec: OttoCycleSpec) -> tuple[NonadiabaticFactor, NonadiabaticFactor]:
    """Factors for compression (A->B) and expansion (C->D)."""
    if spec.driving is Driving.ADIABATIC:
        return dynamics.ADIABATIC, dynamics.ADIABATIC
    if spec.driving is Driving.SUDDEN:
        q = q_factor_sudden(spec.omega1, spec.omega2)
        return q, q
    q_ab = dynamics.q_factor_stroke(spec.compression(), spec.rel_tol, spec.abs_tol)
    q_cd = dynamics.q_factor_stroke(spec.expansion(), spec.rel_tol, spec.abs_tol)
    return q_ab, q_cd


def stroke_ledger(spec: OttoCycleSpec) -> StrokeLedger:
    """Energies at A-D and the work/heat of each stroke (first law closes exactly)."""
    q_ab, q_cd = nonadiabatic_factors(spec)
    x = spec.x
    dec_a = mean_energy(spec.medium, BathSpec(spec.beta_c, spec.omega1))
    dec_c = mean_energy(spec.medium, BathSpec(spec.beta_h, spec.omega2))
    e_a, e_c = dec_a.total, dec_c.total
    e_b = q_ab.value * (spec.omega2 / spec.omega1) * e_a
    e_d = q_cd.value * (spec.omega1 / spec.omega2) * e_c
    # The ground energy scales with omega, so its share of the work and of Q2
    # is proportional to (1 - Q*) and vanishes exactly for adiabatic strokes.
    # Summing it separately keeps adiabatic results bit-identical across lambda.
    e0 = dec_a.ground
    ground_work = e0 * ((1 - q_cd.value) + (1 - q_ab.value) / x)
    thermal_work = dec_a.thermal * (1 - q_ab.value / x) + dec_c.thermal * (1 - q_cd.value * x)
    q2 = (dec_c.thermal - q_ab.value * dec_a.thermal / x) + e0 * (1 - q_ab.value) / x
    return StrokeLedger(
        energy_A=e_a,
        energy_B=e_b,
        energy_C=e_c,
        energy_D=e_d,
        W1=e_b - e_a,
        Q2=q2,
        W3=e_d - e_c,
        Q4=e_a - e_d,
        q_ab=q_ab,
        q_cd=q_cd,
        work_out=thermal_work + ground_work,
    )


def efficiency(ledger: StrokeLedger, spec: OttoCycleSpec | None = None) -> float:
    """Output work per heat drawn from the hot bath."""
    if not ledger.Q2 > 0:
        raise NotAnEngineError("Q2 > 0", ledger.Q2)
    return ledger.work_out / ledger.Q2


def efficiency_closed_form(ledger: StrokeLedger, spec: OttoCycleSpec) -> float:
    """Same efficiency written through x and the nonadiabatic factors alone."""
    if not ledger.Q2 > 0:
        raise NotAnEngineError("Q2 > 0", ledger.Q2)
    x = spec.x
    e_a, e_c = ledger.energy_A, ledger.energy_C
    q_ab, q_cd = ledger.q_ab.value, ledger.q_cd.value
    return 1 - x * (q_cd * e_c - e_a / x) / (e_c - q_ab * e_a / x)


def power(work_out: float, spec: OttoCycleSpec) -> float:
    total = sum(spec.cycle_times)
    if not total > 0:
        raise DomainError("total cycle time must be positive")
    return work_out / total


def performance(spec: OttoCycleSpec) -> CyclePerformance:
    """Full ledger plus work, efficiency, power, bounds and validity flags."""
    ledger = stroke_ledger(spec)
    work = ledger.work_out
    q2_positive = ledger.Q2 > 0
    eta = efficiency(ledger) if q2_positive else float("nan")
    total_time = sum(spec.cycle_times)
    return CyclePerformance(
        ledger=ledger,
        total_work_out=work,
        efficiency=eta,
        power=work / total_time if total_time > 0 else float("nan"),
        eta_otto=1 - spec.x,
        eta_nad_bound=1 - ledger.q_cd.value * spec.x,
        q2_positive=q2_positive,
        engine_valid=bool(q2_positive and work > 0),
    )


def work_out(spec: OttoCycleSpec) -> float:
    return stroke_ledger(spec).work_out


@dataclass(frozen=True)
class HeatFlags:
    adiabatic_ok: bool
    sudden_necessary_ok: bool


def heat_positivity(x: float, a: float, driving: Driving = Driving.SUDDEN) -> HeatFlags:
    """Necessary conditions for positive heat intake on the hot isochore.

    ``a <= x`` is necessary for any driving. Under a sudden quench,
    ``a / x > 2 x`` additionally forces Q2 < 0 (useful for small x).
    """
    if not (0 < x < 1 and 0 < a < 1):
        raise DomainError("x and a must lie in (0, 1)")
    adiabatic_ok = a <= x
    sudden_ok = a / x <= 2 * x
    if driving is Driving.ADIABATIC:
        return HeatFlags(adiabatic_ok, True)
    return HeatFlags(adiabatic_ok, sudden_ok)


__all__ = [
    "CyclePerformance",
    "Driving",
    "HeatFlags",
    "OttoCycleSpec",
    "StrokeLedger",
    "efficiency",
    "efficiency_closed_form",
    "heat_positivity",
    "nonadiabatic_factors",
    "performance",
    "power",
    "stroke_ledger",
    "work_out",
]
