"""Equilibrium thermodynamics of the harmonically trapped Calogero-Sutherland gas.

Units: hbar = m = 1, energies in units of the reference trap frequency.
The spectrum is linear, ``E = (N w / 2)(1 + lam (N - 1)) + w * sum_j j n_j``,
so the canonical partition function is a finite product over modes
``k = 1..N``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Regime thresholds on sigma = N * beta * omega
SIGMA_HIGH_T_CUT = 0.1
SIGMA_VERY_LOW_T_FACTOR = 10.0
SIGMA_INTERMEDIATE_MARGIN = 10.0

MU_SERIES_CUTOFF = 1e-4

PI2_6 = math.pi**2 / 6


@dataclass(frozen=True)
class MediumSpec:
    """Working medium: ``n_particles`` bosons with inverse-square coupling ``coupling`` (lambda)."""

    n_particles: int
    coupling: float = 0.0

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise DomainError("n_particles must be an integer >= 1")
        if not self.coupling >= 0:
            raise DomainError("coupling must be >= 0")

    @property
    def g_n(self) -> float:
        """(N - 1) / N."""
        return (self.n_particles - 1) / self.n_particles

    @property
    def kappa(self) -> float:
        """sqrt(1 + (N - 1) lambda)."""
        return math.sqrt(1 + (self.n_particles - 1) * self.coupling)

    def ground_energy(self, omega: float) -> float:
        n = self.n_particles
        return 0.5 * n * omega * (1 + self.coupling * (n - 1))

    def single(self) -> "MediumSpec":
        """One-particle medium with the same coupling (the coupling is inert at N = 1)."""
        return MediumSpec(1, self.coupling)


@dataclass(frozen=True)
class BathSpec:
    """Inverse temperature ``beta`` (units 1/omega_1) seen at trap frequency ``omega``."""

    beta: float
    omega: float

    def __post_init__(self):
        if not (self.beta > 0 and self.omega > 0):
            raise DomainError("beta and omega must be positive")

    def sigma(self, medium: MediumSpec) -> float:
        return medium.n_particles * self.beta * self.omega


@dataclass(frozen=True)
class EnergyDecomposition:
    ground: float
    thermal: float

    @property
    def total(self) -> float:
        return self.ground + self.thermal


class Regime(enum.Enum):
    VERY_LOW_T = "very_low_t"
    HIGH_T = "high_t"
    INTERMEDIATE = "intermediate"
    CLASSICAL = "classical"
    # between the asymptotic windows; only exact evaluation applies
    CROSSOVER = "crossover"


@dataclass(frozen=True)
class RegimeTag:
    kind: Regime
    sigma: float


def _modes(medium: MediumSpec) -> np.ndarray:
    return np.arange(1, medium.n_particles + 1, dtype=float)


def log_partition(medium: MediumSpec, bath: BathSpec) -> float:
    """ln Z of the N-particle gas at (beta, omega)."""
    x = bath.beta * bath.omega * _modes(medium)
    # ln(1 - e^{-x}) without cancellation for small x
    return float(-bath.beta * medium.ground_energy(bath.omega) - np.sum(np.log(-np.expm1(-x))))


def mean_energy(medium: MediumSpec, bath: BathSpec) -> EnergyDecomposition:
    """Mean energy split into the ground-state shift and the thermal part."""
    k = _modes(medium)
    with np.errstate(over="ignore"):
        thermal = np.sum(k * bath.omega / np.expm1(bath.beta * bath.omega * k))
    return EnergyDecomposition(medium.ground_energy(bath.omega), float(thermal))


def energy(medium: MediumSpec, beta: float, omega: float) -> float:
    """Shorthand for ``mean_energy(medium, BathSpec(beta, omega)).total``."""
    return mean_energy(medium, BathSpec(beta, omega)).total


def thermal_energy(medium: MediumSpec, beta: float, omega: float) -> float:
    return mean_energy(medium, BathSpec(beta, omega)).thermal


def dilog(z: float) -> float:
    """Real dilogarithm Li2(z) for 0 <= z <= 1."""
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"dilog needs 0 <= z <= 1, got {z}")
    if z == 1.0:
        return PI2_6
    if z > 0.5:
        return PI2_6 - math.log(z) * math.log1p(-z) - dilog(1.0 - z)
    total = 0.0
    power = z
    j = 1
    while power > 0.0:
        term = power / (j * j)
        total += term
        if term < 1e-17 * total:
            break
        j += 1
        power *= z
    return total


def bose_integral(sigma: float) -> float:
    """Integral of s / (e^s - 1) over [0, sigma], via the dilogarithm."""
    if sigma < MU_SERIES_CUTOFF:
        return sigma * (1 - sigma / 4 + sigma**2 / 36)
    return PI2_6 + sigma * math.log(-math.expm1(-sigma)) - dilog(math.exp(-sigma))


def mu(coupling: float, sigma: float) -> float:
    """Relative deviation of the mean energy from its classical value N / beta.

    ``mu_lambda(sigma) = bose_integral(sigma) / sigma + lambda * sigma / 2``.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if sigma < MU_SERIES_CUTOFF:
        base = 1 - sigma / 4 + sigma**2 / 36
    else:
        base = bose_integral(sigma) / sigma
    return base + coupling * sigma / 2


def classify_regime(medium: MediumSpec, bath: BathSpec) -> RegimeTag:
    sigma = bath.sigma(medium)
    n = medium.n_particles
    if sigma >= SIGMA_VERY_LOW_T_FACTOR * n:
        kind = Regime.VERY_LOW_T
    elif sigma <= SIGMA_HIGH_T_CUT:
        kind = Regime.HIGH_T
    elif sigma <= n / SIGMA_INTERMEDIATE_MARGIN:
        kind = Regime.INTERMEDIATE
    else:
        kind = Regime.CROSSOVER
    return RegimeTag(kind, sigma)


def _regime_kind(regime) -> Regime:
    if isinstance(regime, RegimeTag):
        return regime.kind
    return Regime(regime)


def mean_energy_asymptotic(medium: MediumSpec, bath: BathSpec, regime) -> float:
    """Closed-form estimate of the mean energy in one temperature regime.

    ``CLASSICAL`` is the leading term of the high-temperature expansion and is
    accepted wherever ``HIGH_T`` is.
    """
    kind = _regime_kind(regime)
    actual = classify_regime(medium, bath)
    allowed = {actual.kind}
    if actual.kind is Regime.HIGH_T:
        allowed.add(Regime.CLASSICAL)
    if kind is Regime.CROSSOVER or kind not in allowed:
        raise DomainError(
            f"regime {kind.value} does not apply at sigma = {actual.sigma:.6g}, "
            f"N = {medium.n_particles} (classified {actual.kind.value})"
        )

    n = medium.n_particles
    beta = bath.beta
    sigma = actual.sigma
    if kind is Regime.VERY_LOW_T:
        return medium.ground_energy(bath.omega)
    if kind is Regime.CLASSICAL:
        return n / beta
    if kind is Regime.HIGH_T:
        first = 0.5 * sigma * medium.g_n * (medium.coupling - 0.5)
        second = sigma**2 * (n + 1) * (2 * n + 1) / (72 * n**2)
        return n / beta * (1 + first + second)
    return n / beta * mu(medium.coupling, sigma)


def high_t_next_order(medium: MediumSpec, bath: BathSpec) -> float:
    """Magnitude of the first term dropped by the high-temperature expansion."""
    n = medium.n_particles
    sigma = bath.sigma(medium)
    return sigma**3 * (n + 1) ** 2 / (2880 * n * bath.beta)


__all__ = [
    "BathSpec",
    "EnergyDecomposition",
    "MediumSpec",
    "Regime",
    "RegimeTag",
    "bose_integral",
    "classify_regime",
    "dilog",
    "energy",
    "high_t_next_order",
    "log_partition",
    "mean_energy",
    "mean_energy_asymptotic",
    "mu",
    "thermal_energy",
]
