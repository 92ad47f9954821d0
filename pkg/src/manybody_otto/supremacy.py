"""Many-particle engine versus an ensemble of N single-particle engines.

``r = W_many / (N W_single)`` compares output work (and power, since both
engines share stroke times) and ``rho = eta_many / eta_single`` compares
efficiencies. The single-particle reference runs at the same a, beta_c,
omega1 and stroke times; its coupling slot is inert because the interaction
term vanishes at N = 1.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import dynamics
from .cycle import CyclePerformance, Driving, OttoCycleSpec, performance
from .errors import DomainError, IntegrationError, NotAnEngineError, OptimizationError
from .optimize import maximize_work
from .thermo import MediumSpec, mu

MODEL_IDENTITY_TOL = 1e-12
UNITY_TOL = 1e-12

_POINT_ERRORS = (DomainError, IntegrationError, NotAnEngineError, OptimizationError, ArithmeticError)


class Convention(enum.Enum):
    AT_RESPECTIVE_OPTIMA = "at_respective_optima"
    SAME_RESOURCES = "same_resources"


@dataclass(frozen=True)
class RatioPoint:
    a: float
    n_particles: int
    coupling: float
    sigma_c: float
    driving: Driving
    convention: Convention
    r: float
    rho: float
    x_opt_many: float
    x_opt_single: float
    valid: bool
    flags: tuple[str, ...] = ()
    many: CyclePerformance | None = field(default=None, compare=False, repr=False)
    single: CyclePerformance | None = field(default=None, compare=False, repr=False)
    sigma_h: float = math.nan

    @property
    def work(self) -> float:
        return self.many.total_work_out if self.many else math.nan

    @property
    def efficiency(self) -> float:
        return self.many.efficiency if self.many else math.nan

    @property
    def power(self) -> float:
        return self.many.power if self.many else math.nan

    @property
    def q2_positive(self) -> bool:
        return bool(self.many and self.many.q2_positive)

    @property
    def engine_valid(self) -> bool:
        return bool(self.many and self.many.engine_valid)


AXES = ("lambda", "n", "sigma_c", "a")


@dataclass(frozen=True)
class SweepSpec:
    """Parameter grid for a sweep.

    Output is row-major over ``order`` (last axis fastest). When ``beta_c`` is
    given, sigma_c is not a free axis: each point uses ``sigma_c = N beta_c omega1``.
    """

    a_values: tuple[float, ...]
    n_values: tuple[int, ...] = (200,)
    lambda_values: tuple[float, ...] = (0.0,)
    sigma_c_values: tuple[float, ...] | None = (2.0,)
    driving: Driving = Driving.SUDDEN
    convention: Convention = Convention.AT_RESPECTIVE_OPTIMA
    x: float | None = None
    beta_c: float | None = None
    omega1: float = 1.0
    ramp_time: float | None = None
    isochore_times: tuple[float, float] = (1.0, 1.0)
    rel_tol: float = dynamics.DEFAULT_REL_TOL
    abs_tol: float = dynamics.DEFAULT_ABS_TOL
    order: tuple[str, ...] = AXES

    def __post_init__(self):
        object.__setattr__(self, "a_values", tuple(float(v) for v in self.a_values))
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "lambda_values", tuple(float(v) for v in self.lambda_values))
        if self.sigma_c_values is not None:
            object.__setattr__(self, "sigma_c_values", tuple(float(v) for v in self.sigma_c_values))
        if sorted(self.order) != sorted(AXES):
            raise DomainError(f"order must be a permutation of {AXES}")
        if (self.beta_c is None) == (self.sigma_c_values is None):
            raise DomainError("give exactly one of sigma_c_values or beta_c")
        grids = [self.a_values, self.n_values, self.lambda_values]
        if self.sigma_c_values is not None:
            grids.append(self.sigma_c_values)
        if any(len(g) == 0 for g in grids):
            raise DomainError("sweep grids must be nonempty")
        if any(not 0 < a < 1 for a in self.a_values):
            raise DomainError("a values must lie in (0, 1)")
        if any(n < 1 for n in self.n_values):
            raise DomainError("N values must be >= 1")
        if any(lam < 0 for lam in self.lambda_values):
            raise DomainError("lambda values must be >= 0")
        if self.sigma_c_values is not None and any(s <= 0 for s in self.sigma_c_values):
            raise DomainError("sigma_c values must be positive")
        if self.beta_c is not None and not self.beta_c > 0:
            raise DomainError("beta_c must be positive")
        if not self.omega1 > 0:
            raise DomainError("omega1 must be positive")
        if self.convention is Convention.SAME_RESOURCES and not (self.x is not None and 0 < self.x < 1):
            raise DomainError("same-resources convention needs x in (0, 1)")
        if self.driving is Driving.RAMP and not (self.ramp_time and self.ramp_time > 0):
            raise DomainError("ramp driving needs a positive ramp_time")

    def points(self) -> list[tuple[float, int, float, float]]:
        """``(a, N, lambda, sigma_c)`` tuples in declared order."""
        sigma_axis = self.sigma_c_values if self.sigma_c_values is not None else (None,)
        axes = {"a": self.a_values, "n": self.n_values, "lambda": self.lambda_values, "sigma_c": sigma_axis}
        out = []
        for combo in itertools.product(*(axes[name] for name in self.order)):
            values = dict(zip(self.order, combo))
            sigma_c = values["sigma_c"]
            if sigma_c is None:
                sigma_c = values["n"] * self.beta_c * self.omega1
            out.append((values["a"], values["n"], values["lambda"], sigma_c))
        return out


def _template(a: float, medium: MediumSpec, sigma_c: float, driving: Driving, omega1: float, ramp_time, **cycle_kwargs):
    if not sigma_c > 0:
        raise DomainError("sigma_c must be positive")
    if not 0 < a < 1:
        raise DomainError("a must lie in (0, 1)")
    beta_c = sigma_c / (medium.n_particles * omega1)
    # placeholder omega2; every consumer sets x explicitly
    return OttoCycleSpec(omega1, 2 * omega1, beta_c, a * beta_c, medium, driving, ramp_time=ramp_time, **cycle_kwargs)


def _ratio(num: float, den: float) -> float:
    return num / den if den != 0 else math.nan


def _invalid(a, medium, sigma_c, driving, convention, flags, x_many=math.nan, x_single=math.nan):
    return RatioPoint(
        a, medium.n_particles, medium.coupling, sigma_c, driving, convention,
        math.nan, math.nan, x_many, x_single, False, tuple(flags),
    )


def ratios_at_optima(
    a: float,
    medium: MediumSpec,
    sigma_c: float,
    driving: Driving = Driving.SUDDEN,
    *,
    omega1: float = 1.0,
    ramp_time: float | None = None,
    **cycle_kwargs,
) -> RatioPoint:
    """Ratios with x optimised separately for the N-particle and single-particle media.

    Extra keyword arguments (isochore_times, rel_tol, ...) go to OttoCycleSpec.
    """
    convention = Convention.AT_RESPECTIVE_OPTIMA
    template = _template(a, medium, sigma_c, driving, omega1, ramp_time, **cycle_kwargs)
    flags = []
    results = {}
    for label, m in (("many", medium), ("single", medium.single())):
        try:
            results[label] = maximize_work(template.with_medium(m))
        except OptimizationError:
            flags.append(f"{label}_no_engine")
            results[label] = None
        else:
            if results[label].at_boundary:
                flags.append(f"{label}_at_validity_boundary")
    many, single = results["many"], results["single"]
    if many is None or single is None:
        return _invalid(
            a, medium, sigma_c, driving, convention, flags,
            many.x_opt if many else math.nan, single.x_opt if single else math.nan,
        )
    n = medium.n_particles
    r = _ratio(many.work_opt, n * single.work_opt)
    rho = _ratio(many.efficiency_at_opt, single.efficiency_at_opt)
    valid = many.performance.engine_valid and single.performance.engine_valid and r > 0 and rho > 0
    return RatioPoint(
        a, n, medium.coupling, sigma_c, driving, convention, r, rho,
        many.x_opt, single.x_opt, bool(valid), tuple(flags),
        many.performance, single.performance,
        sigma_h=n * template.beta_h * omega1 / many.x_opt,
    )


def ratios_same_resources(
    x: float,
    a: float,
    medium: MediumSpec,
    sigma_c: float,
    driving: Driving = Driving.SUDDEN,
    *,
    omega1: float = 1.0,
    ramp_time: float | None = None,
    **cycle_kwargs,
) -> RatioPoint:
    """Ratios with both media run at the same x.

    Inside the intermediate window (sigma_c, sigma_h >= 1 and both below N/10)
    the ratios of the intermediate-model energies are also checked against
    the temperature-rescaling identities; a mismatch is flagged.
    """
    convention = Convention.SAME_RESOURCES
    if not 0 < x < 1:
        raise DomainError("x must lie in (0, 1)")
    spec = _template(a, medium, sigma_c, driving, omega1, ramp_time, **cycle_kwargs).with_ratio(x)
    many = performance(spec)
    single = performance(spec.with_medium(medium.single()))
    flags = []
    if not many.engine_valid:
        flags.append("many_not_engine")
    if not single.engine_valid:
        flags.append("single_not_engine")
    n = medium.n_particles
    sigma_h = spec.sigma_h
    if flags:
        point = _invalid(a, medium, sigma_c, driving, convention, flags, x, x)
        return RatioPoint(**{**point.__dict__, "many": many, "single": single, "sigma_h": sigma_h})

    if 1 <= sigma_c <= n / 10 and 1 <= sigma_h <= n / 10:
        check = intermediate_model_ratios(x, a, medium, sigma_c, driving, q_factors=(many.ledger.q_ab.value, many.ledger.q_cd.value))
        if not (
            math.isclose(check.r_direct, check.r_identity, rel_tol=MODEL_IDENTITY_TOL, abs_tol=MODEL_IDENTITY_TOL)
            and math.isclose(check.rho_direct, check.rho_identity, rel_tol=MODEL_IDENTITY_TOL, abs_tol=MODEL_IDENTITY_TOL)
        ):
            flags.append("model_identity_mismatch")
        else:
            flags.append("model_identity_checked")

    r = _ratio(many.total_work_out, n * single.total_work_out)
    rho = _ratio(many.efficiency, single.efficiency)
    return RatioPoint(
        a, n, medium.coupling, sigma_c, driving, convention, r, rho, x, x,
        bool(r > 0 and rho > 0), tuple(flags), many, single, sigma_h=sigma_h,
    )


# --- intermediate-regime model --------------------------------------------


def _work_eff_from_energies(e_a: float, e_c: float, x: float, q_ab: float, q_cd: float) -> tuple[float, float]:
    work = e_a * (1 - q_ab / x) + e_c * (1 - q_cd * x)
    q2 = e_c - q_ab * e_a / x
    return work, work / q2 if q2 > 0 else math.nan


def _q_pair(x: float, driving: Driving) -> tuple[float, float]:
    if driving is Driving.ADIABATIC:
        return 1.0, 1.0
    if driving is Driving.SUDDEN:
        q = dynamics.q_factor_sudden(1.0, 1.0 / x).value
        return q, q
    raise DomainError("pass q_factors explicitly for ramp driving")


def classical_single_work(x: float, a: float, beta_c: float, driving: Driving = Driving.SUDDEN, q_factors=None) -> float:
    """Single-particle work with classical energies E = 1/beta."""
    q_ab, q_cd = q_factors or _q_pair(x, driving)
    return _work_eff_from_energies(1 / beta_c, 1 / (a * beta_c), x, q_ab, q_cd)[0]


def classical_single_efficiency(x: float, a: float, driving: Driving = Driving.SUDDEN, q_factors=None) -> float:
    q_ab, q_cd = q_factors or _q_pair(x, driving)
    return _work_eff_from_energies(1.0, 1.0 / a, x, q_ab, q_cd)[1]


@dataclass(frozen=True)
class ModelRatios:
    r_direct: float
    rho_direct: float
    r_identity: float
    rho_identity: float
    f_lambda: float


def intermediate_model_ratios(
    x: float,
    a: float,
    medium: MediumSpec,
    sigma_c: float,
    driving: Driving = Driving.SUDDEN,
    *,
    q_factors: tuple[float, float] | None = None,
) -> ModelRatios:
    """Same-resource ratios from intermediate-model energies E = (N/beta) mu(sigma),
    computed directly and through the rescaled temperature ratio a * f_lambda."""
    n = medium.n_particles
    lam = medium.coupling
    beta_c = 1.0  # the ratios do not depend on the overall temperature scale
    sigma_h = sigma_c * a / x
    mu_c, mu_h = mu(lam, sigma_c), mu(lam, sigma_h)
    q_ab, q_cd = q_factors or _q_pair(x, driving)
    w_many, eta_many = _work_eff_from_energies(n * mu_c / beta_c, n * mu_h / (a * beta_c), x, q_ab, q_cd)
    w_single = classical_single_work(x, a, beta_c, driving, (q_ab, q_cd))
    eta_single = classical_single_efficiency(x, a, driving, (q_ab, q_cd))
    f = mu_c / mu_h
    r_identity = mu_c * classical_single_work(x, a * f, beta_c, driving, (q_ab, q_cd)) / w_single
    rho_identity = classical_single_efficiency(x, a * f, driving, (q_ab, q_cd)) / eta_single
    return ModelRatios(w_many / (n * w_single), eta_many / eta_single, r_identity, rho_identity, f)


# --- sweeps ----------------------------------------------------------------


def _evaluate(args) -> RatioPoint:
    spec, (a, n, lam, sigma_c) = args
    medium = MediumSpec(n, lam)
    kwargs = dict(
        omega1=spec.omega1,
        ramp_time=spec.ramp_time,
        isochore_times=spec.isochore_times,
        rel_tol=spec.rel_tol,
        abs_tol=spec.abs_tol,
    )
    try:
        if spec.convention is Convention.SAME_RESOURCES:
            return ratios_same_resources(spec.x, a, medium, sigma_c, spec.driving, **kwargs)
        return ratios_at_optima(a, medium, sigma_c, spec.driving, **kwargs)
    except _POINT_ERRORS as exc:
        x = spec.x if spec.x is not None else math.nan
        return _invalid(a, medium, sigma_c, spec.driving, spec.convention, [f"error:{type(exc).__name__}:{exc}"], x, x)


def sweep(spec: SweepSpec, workers: int | None = 1) -> list[RatioPoint]:
    """Evaluate every grid point; results come back in declared grid order.

    ``workers=None`` uses the machine's CPU count. Failures are recorded in
    the point's flags and never abort the sweep.
    """
    tasks = [(spec, p) for p in spec.points()]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_evaluate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# --- critical temperature ratio -------------------------------------------


@dataclass(frozen=True)
class CriticalA:
    """Root of r(a) = 1, or ``a_star=None`` with ``side`` telling where r stays."""

    a_star: float | None
    bracket: tuple[float, float] | None
    side: str | None = None  # "above", "below" or "unity" when there is no crossing


def locate_critical_a(
    medium: MediumSpec,
    sigma_c: float,
    driving: Driving = Driving.SUDDEN,
    *,
    lo: float = 0.05,
    hi: float = 0.95,
    tol: float = 1e-3,
    scan_points: int = 19,
) -> CriticalA:
    """Locate where r(a) crosses 1 on (lo, hi) by a scan followed by bisection."""

    def excess(a: float) -> float:
        p = ratios_at_optima(a, medium, sigma_c, driving)
        return p.r - 1 if p.valid else math.nan

    grid = [lo + (hi - lo) * i / (scan_points - 1) for i in range(scan_points)]
    values = [(a, excess(a)) for a in grid]
    values = [(a, v) for a, v in values if not math.isnan(v)]
    if not values:
        raise DomainError("r(a) is not evaluable anywhere on the scan grid")
    if all(abs(v) <= UNITY_TOL for _, v in values):
        return CriticalA(None, None, "unity")
    for (a0, v0), (a1, v1) in zip(values, values[1:]):
        if v0 * v1 < 0:
            left, right, v_left = a0, a1, v0
            while right - left > tol:
                mid = 0.5 * (left + right)
                v_mid = excess(mid)
                if math.isnan(v_mid):
                    break
                if (v_mid < 0) == (v_left < 0):
                    left, v_left = mid, v_mid
                else:
                    right = mid
            return CriticalA(0.5 * (left + right), (left, right))
    side = "above" if all(v >= 0 for _, v in values) else "below"
    return CriticalA(None, None, side)


__all__ = [
    "AXES",
    "Convention",
    "CriticalA",
    "ModelRatios",
    "RatioPoint",
    "SweepSpec",
    "classical_single_efficiency",
    "classical_single_work",
    "intermediate_model_ratios",
    "locate_critical_a",
    "ratios_at_optima",
    "ratios_same_resources",
    "sweep",
]
