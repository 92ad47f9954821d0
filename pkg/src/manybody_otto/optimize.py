"""Work maximisation over the frequency ratio x = omega1/omega2, plus closed-form optima.

The numerical route holds omega1, beta_c, beta_h, N and lambda fixed and
searches x with a golden-section search inside the engine-valid region.
The closed forms are the asymptotic optima for each temperature regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .cycle import CyclePerformance, Driving, OttoCycleSpec, performance
from .errors import DomainError, OptimizationError
from .thermo import MediumSpec, Regime, RegimeTag, mu

INV_PHI = (math.sqrt(5) - 1) / 2
DEFAULT_BRACKET = (0.02, 0.995)
DEFAULT_X_TOL = 1e-8


@dataclass(frozen=True)
class OptimizationResult:
    x_opt: float
    work_opt: float
    efficiency_at_opt: float
    power_opt: float
    method: str
    evaluations: int
    bracket: tuple[float, float]
    at_boundary: bool = False
    performance: CyclePerformance | None = None


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_X_TOL
) -> tuple[float, float, int]:
    """Maximise a unimodal ``f`` on [lo, hi]; returns ``(x, f(x), evaluations)``."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    evals = 2
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
        evals += 1
    x = 0.5 * (lo + hi)
    return x, f(x), evals + 1


def _validity_edge(valid: Callable[[float], bool], good: float, bad: float, tol: float) -> float:
    """Bisect between a valid point and an invalid one; returns the valid side."""
    while abs(bad - good) > tol:
        mid = 0.5 * (good + bad)
        if valid(mid):
            good = mid
        else:
            bad = mid
    return good


def maximize_work(
    template: OttoCycleSpec,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    *,
    tol: float = DEFAULT_X_TOL,
    scan_points: int = 96,
) -> OptimizationResult:
    """Maximise the output work over x, holding everything but omega2 fixed.

    A coarse scan locates the best engine-valid grid point (Q2 > 0 and
    W > 0); the valid interval around it is refined by bisection and the
    golden-section search runs inside that interval.
    """
    lo, hi = bracket
    if not 0 < lo < hi < 1:
        raise DomainError("bracket must satisfy 0 < lo < hi < 1")

    evaluations = 0
    cache: dict[float, CyclePerformance] = {}

    def perf(x: float) -> CyclePerformance:
        nonlocal evaluations
        if x not in cache:
            evaluations += 1
            cache[x] = performance(template.with_ratio(x))
        return cache[x]

    def valid(x: float) -> bool:
        return perf(x).engine_valid

    grid = np.linspace(lo, hi, scan_points)
    flags = [valid(x) for x in grid]
    if not any(flags):
        raise OptimizationError(
            "no engine-valid point in bracket",
            {
                "lo": {"x": lo, "q2_positive": perf(lo).q2_positive, "work_positive": perf(lo).total_work_out > 0},
                "hi": {"x": hi, "q2_positive": perf(hi).q2_positive, "work_positive": perf(hi).total_work_out > 0},
            },
        )
    works = [perf(x).total_work_out if ok else -math.inf for x, ok in zip(grid, flags)]
    best = int(np.argmax(works))

    left, right = max(best - 1, 0), min(best + 1, scan_points - 1)
    search_lo, search_hi = grid[left], grid[right]
    if not flags[left]:
        search_lo = _validity_edge(valid, grid[best], grid[left], tol)
    if not flags[right]:
        search_hi = _validity_edge(valid, grid[best], grid[right], tol)

    def objective(x: float) -> float:
        p = perf(x)
        return p.total_work_out if p.engine_valid else -math.inf

    x_opt, _, _ = golden_section_max(objective, search_lo, search_hi, tol)
    if not valid(x_opt):
        x_opt = grid[best]
    p = perf(x_opt)
    edge_tol = 10 * tol
    at_boundary = (
        (not flags[left] and x_opt - search_lo <= edge_tol)
        or (not flags[right] and search_hi - x_opt <= edge_tol)
        or (best in (0, scan_points - 1) and abs(x_opt - grid[best]) <= edge_tol)
    )
    return OptimizationResult(
        x_opt=float(x_opt),
        work_opt=p.total_work_out,
        efficiency_at_opt=p.efficiency,
        power_opt=p.power,
        method="golden_section",
        evaluations=evaluations,
        bracket=(float(search_lo), float(search_hi)),
        at_boundary=bool(at_boundary),
        performance=p,
    )


class ClosedFormOptimum(NamedTuple):
    x_opt: float
    work: float
    efficiency: float


def _ratio_efficiency(root_alpha: float) -> float:
    return (1 - root_alpha) / (2 + root_alpha)


def closed_form_optimum(
    driving: Driving,
    regime,
    medium: MediumSpec,
    a: float,
    sigma_c: float,
    beta_h_omega1: float | None = None,
    omega1: float = 1.0,
) -> ClosedFormOptimum:
    """Asymptotic optimum ``(x_opt, work, efficiency)`` for a driving mode and regime.

    ``regime`` refers to the cold bath (sigma_c = N beta_c omega1); the hot
    bath is assumed hot (sigma_h << 1). ``beta_h_omega1`` defaults to
    ``a * sigma_c / N`` and is what the very-low-temperature forms use.
    """
    if not (0 < a < 1 and sigma_c > 0 and omega1 > 0):
        raise DomainError("need 0 < a < 1, sigma_c > 0 and omega1 > 0")
    kind = regime.kind if isinstance(regime, RegimeTag) else Regime(regime)
    n = medium.n_particles
    lam = medium.coupling
    g = medium.g_n
    beta_c = sigma_c / (n * omega1)
    if beta_h_omega1 is None:
        beta_h_omega1 = a * sigma_c / n
    beta_h = beta_h_omega1 / omega1
    sqa = math.sqrt(a)

    if driving is Driving.SUDDEN:
        if kind in (Regime.HIGH_T, Regime.CLASSICAL) and n == 1:
            s2 = sigma_c**2 if kind is Regime.HIGH_T else 0.0
            x = a**0.25 * (1 + s2 / 48)
            work = ((1 - sqa) ** 2 / (2 * a) + (-1 + sqa + a - a**1.5) / (24 * sqa) * s2) / beta_c
            eta = _ratio_efficiency(sqa) - (3 - 2 * a**1.5) * sqa / (24 * (2 + sqa) ** 2) * s2
            return ClosedFormOptimum(x, work, eta)
        if kind in (Regime.HIGH_T, Regime.CLASSICAL):
            s = sigma_c if kind is Regime.HIGH_T else 0.0
            x = a**0.25 * (1 + s * g * (lam - 0.5) / 8)
            work = n / beta_c * (
                (1 - sqa) ** 2 / (2 * a)
                + (1 - sqa) / (4 * sqa) * (1 - a**0.25) * (0.5 - lam) * g * s
            )
            eta = _ratio_efficiency(sqa) + (3 - 2 * a**0.75) * sqa / (4 * (2 + sqa) ** 2) * (0.5 - lam) * g * s
            return ClosedFormOptimum(x, work, eta)
        if kind is Regime.VERY_LOW_T:
            alpha = medium.kappa**2 * beta_h_omega1 / 2
            root = math.sqrt(alpha)
            return ClosedFormOptimum(alpha**0.25, n / (2 * beta_h) * (1 - root) ** 2, _ratio_efficiency(root))
        if kind is Regime.INTERMEDIATE:
            alpha = a * mu(lam, sigma_c)
            root = math.sqrt(alpha)
            return ClosedFormOptimum(alpha**0.25, n / (2 * beta_h) * (1 - root) ** 2, _ratio_efficiency(root))

    elif driving is Driving.ADIABATIC:
        if kind is Regime.VERY_LOW_T:
            alpha = beta_h_omega1 * (n + 1) / 4
        elif kind in (Regime.HIGH_T, Regime.CLASSICAL):
            alpha = a
        elif kind is Regime.INTERMEDIATE:
            alpha = a * mu(0.5, sigma_c)
        else:
            alpha = None
        if alpha is not None:
            root = math.sqrt(alpha)
            return ClosedFormOptimum(root, n / beta_h * (1 - root) ** 2, 1 - root)

    raise DomainError(f"no closed-form optimum for driving={driving.value}, regime={kind.value}")


def _safeguarded_root(p, dp, lo: float, hi: float, tol: float = 1e-15, max_iter: int = 200) -> float:
    """Newton iteration that falls back to bisection whenever it leaves the bracket."""
    f_lo, f_hi = p(lo), p(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        raise ArithmeticError("no sign change in bracket")
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = p(x)
        if fx == 0:
            return x
        if (fx < 0) == (f_lo < 0):
            lo, f_lo = x, fx
        else:
            hi = x
        d = dp(x)
        step_ok = d != 0
        if step_ok:
            x_new = x - fx / d
            step_ok = lo < x_new < hi
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def solve_quintic_largeN(a: float) -> float:
    """Root in (0, 1] of 3x^5 - x^3 - 2a^2, the large-N sudden-quench optimum."""
    if not 0.05 < a <= 1:
        raise DomainError("a must lie in (0.05, 1]")
    root = _safeguarded_root(
        lambda x: 3 * x**5 - x**3 - 2 * a * a,
        lambda x: 15 * x**4 - 3 * x**2,
        0.0,
        1.0,
    )
    return root


class CubicSolution(NamedTuple):
    root: float
    estimate: float
    efficiency: float


def solve_cubic_adiabatic(a: float) -> CubicSolution:
    """Root of 2x^3 - x^2 - a^2 (large-N adiabatic optimum), its expansion about a = 1
    and the Otto efficiency at that expansion."""
    if not 0.05 < a <= 1:
        raise DomainError("a must lie in (0.05, 1]")
    root = _safeguarded_root(
        lambda x: 2 * x**3 - x**2 - a * a,
        lambda x: 6 * x**2 - 2 * x,
        0.5,
        1.0,
    )
    estimate = 1 + (a - 1) / 2 - (a - 1) ** 2 / 16
    eff = (9 - 10 * a + a * a) / 16
    return CubicSolution(root, estimate, eff)


def band_efficiency(a: float, s: float) -> float:
    """Large-N sudden-quench efficiency at the estimated optimum x = a^s."""
    return (1 - a ** (2 * s)) * (1 - a ** (2 - 3 * s)) / (2 - a ** (2 - 3 * s) - a ** (2 - s))


def efficiency_band_largeN(a: float) -> tuple[float, float]:
    """(lower, upper) efficiency estimates at s = 1/4 and s = 1/3."""
    if not 0 < a < 1:
        raise DomainError("a must lie in (0, 1)")
    return band_efficiency(a, 0.25), band_efficiency(a, 1 / 3)


def lambda_critical(sigma_c: float) -> float:
    """Coupling below which the thermal energy dominates the interaction shift."""
    if not sigma_c > 0:
        raise DomainError("sigma_c must be positive")
    return math.pi**2 / (3 * sigma_c**2)


def large_n_work_sudden(x: float, a: float, beta_c: float, omega1: float = 1.0) -> float:
    """N-independent sudden-quench work for 1 << sigma << N (ideal bosons)."""
    return math.pi**2 / (12 * beta_c**2 * omega1) * ((x * x - 1) / (x * x) + (1 - x * x) * x / (a * a))


def large_n_work_adiabatic(x: float, a: float, beta_c: float, omega1: float = 1.0) -> float:
    return math.pi**2 / (6 * beta_c**2 * omega1) * ((x - 1) / x + (1 - x) * x / (a * a))


__all__ = [
    "ClosedFormOptimum",
    "CubicSolution",
    "OptimizationResult",
    "band_efficiency",
    "closed_form_optimum",
    "efficiency_band_largeN",
    "golden_section_max",
    "lambda_critical",
    "large_n_work_adiabatic",
    "large_n_work_sudden",
    "maximize_work",
    "solve_cubic_adiabatic",
    "solve_quintic_largeN",
]
