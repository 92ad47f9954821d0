"""Trap-frequency protocols, Ermakov scaling dynamics and the nonadiabatic factor.

The scaling factor ``b(t)`` is never integrated directly. Instead the two
fundamental solutions ``G1``, ``G2`` of the classical oscillator
``x'' + omega(t)**2 x = 0`` are integrated and ``b`` is rebuilt from them
with the Pinney formula ``b = sqrt(G1**2 + omega0**2 G2**2)``. The Wronskian
``G1' G2 - G1 G2'`` stays at -1 for the exact flow and serves as an error
monitor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .integrate import dormand_prince, hermite_interpolate

DEFAULT_REL_TOL = 1e-10
DEFAULT_ABS_TOL = 1e-12


def smoothstep(u: float) -> float:
    """Cubic smoothstep ``3u^2 - 2u^3``: monotone on [0, 1], flat at both ends."""
    return u * u * (3.0 - 2.0 * u)


class ProtocolKind(enum.Enum):
    CONSTANT = "constant"
    SUDDEN_QUENCH = "sudden"
    SMOOTH_RAMP = "ramp"


@dataclass(frozen=True)
class FrequencyProtocol:
    """Trap-frequency schedule for one unitary stroke.

    ``ramp_shape`` maps the normalised time ``t/duration`` in [0, 1] onto
    [0, 1] monotonically with ``s(0) = 0`` and ``s(1) = 1``.
    """

    kind: ProtocolKind
    omega_start: float
    omega_end: float
    duration: float = 0.0
    ramp_shape: Callable[[float], float] = smoothstep

    def __post_init__(self):
        if not (self.omega_start > 0 and self.omega_end > 0):
            raise DomainError("trap frequencies must be positive")
        if not self.duration >= 0:
            raise DomainError("duration must be non-negative")
        if self.kind is ProtocolKind.CONSTANT and self.omega_start != self.omega_end:
            raise DomainError("a constant protocol needs omega_start == omega_end")
        if self.kind is ProtocolKind.SUDDEN_QUENCH and self.duration != 0:
            raise DomainError("a sudden quench has zero duration")
        if self.kind is ProtocolKind.SMOOTH_RAMP and self.duration <= 0:
            raise DomainError("a smooth ramp needs a positive duration")

    @classmethod
    def constant(cls, omega: float, duration: float) -> "FrequencyProtocol":
        return cls(ProtocolKind.CONSTANT, omega, omega, duration)

    @classmethod
    def sudden(cls, omega_i: float, omega_f: float) -> "FrequencyProtocol":
        return cls(ProtocolKind.SUDDEN_QUENCH, omega_i, omega_f, 0.0)

    @classmethod
    def ramp(
        cls,
        omega_start: float,
        omega_end: float,
        duration: float,
        shape: Callable[[float], float] = smoothstep,
    ) -> "FrequencyProtocol":
        return cls(ProtocolKind.SMOOTH_RAMP, omega_start, omega_end, duration, shape)

    def reversed(self) -> "FrequencyProtocol":
        """Time-mirrored protocol: runs from ``omega_end`` back to ``omega_start``."""
        if self.kind is not ProtocolKind.SMOOTH_RAMP:
            return FrequencyProtocol(self.kind, self.omega_end, self.omega_start, self.duration)
        shape = self.ramp_shape
        return FrequencyProtocol(
            self.kind,
            self.omega_end,
            self.omega_start,
            self.duration,
            lambda u: 1.0 - shape(1.0 - u),
        )

    def __call__(self, t: float) -> float:
        return omega_at(self, t)


def omega_at(protocol: FrequencyProtocol, t: float) -> float:
    """Trap frequency of ``protocol`` at time ``t``."""
    slack = 1e-12 * max(protocol.duration, 1.0)
    if not (-slack <= t <= protocol.duration + slack):
        raise DomainError(f"t = {t} outside [0, {protocol.duration}]")
    if protocol.kind is ProtocolKind.CONSTANT:
        return protocol.omega_start
    if protocol.kind is ProtocolKind.SUDDEN_QUENCH:
        return protocol.omega_end
    u = min(max(t / protocol.duration, 0.0), 1.0)
    return protocol.omega_start + (protocol.omega_end - protocol.omega_start) * protocol.ramp_shape(u)


class Provenance(enum.Enum):
    ADIABATIC_UNITY = "adiabatic"
    SUDDEN_CLOSED_FORM = "sudden"
    NUMERICAL = "numerical"


@dataclass(frozen=True)
class NonadiabaticFactor:
    """Ratio of the nonadiabatic to the adiabatic mean energy (always >= 1)."""

    value: float
    provenance: Provenance

    def __float__(self) -> float:
        return float(self.value)


ADIABATIC = NonadiabaticFactor(1.0, Provenance.ADIABATIC_UNITY)


@dataclass(frozen=True, eq=False)
class ErmakovTrajectory:
    """Fundamental solutions and scaling factor sampled on an adaptive time grid."""

    omega0: float
    protocol: FrequencyProtocol
    t: np.ndarray
    g1: np.ndarray
    dg1: np.ndarray
    g2: np.ndarray
    dg2: np.ndarray
    b: np.ndarray
    db: np.ndarray

    @property
    def wronskian(self) -> np.ndarray:
        return self.dg1 * self.g2 - self.g1 * self.dg2

    def omega(self, t: float) -> float:
        return omega_at(self.protocol, t)

    def fundamental_at(self, t: float) -> tuple[float, float, float, float]:
        """``(G1, G1', G2, G2')`` at ``t``; exact on grid points, cubic Hermite between."""
        if not (self.t[0] <= t <= self.t[-1]):
            raise DomainError(f"t = {t} outside trajectory [0, {self.t[-1]}]")
        i = int(np.searchsorted(self.t, t))
        if i < len(self.t) and self.t[i] == t:
            return self.g1[i], self.dg1[i], self.g2[i], self.dg2[i]
        w2 = np.array([omega_at(self.protocol, s) ** 2 for s in self.t])
        g1 = hermite_interpolate(self.t, self.g1, self.dg1, t)
        dg1 = hermite_interpolate(self.t, self.dg1, -w2 * self.g1, t)
        g2 = hermite_interpolate(self.t, self.g2, self.dg2, t)
        dg2 = hermite_interpolate(self.t, self.dg2, -w2 * self.g2, t)
        return g1, dg1, g2, dg2

    def scaling_at(self, t: float) -> tuple[float, float]:
        """``(b, b')`` at ``t`` rebuilt from the fundamental solutions."""
        g1, dg1, g2, dg2 = self.fundamental_at(t)
        return _pinney(self.omega0, g1, dg1, g2, dg2)


def _pinney(omega0, g1, dg1, g2, dg2):
    b = np.sqrt(g1 * g1 + omega0 * omega0 * g2 * g2)
    db = (g1 * dg1 + omega0 * omega0 * g2 * dg2) / b
    return b, db


def solve_ermakov(
    protocol: FrequencyProtocol,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    *,
    omega0: float | None = None,
    t_eval: Sequence[float] | None = None,
) -> ErmakovTrajectory:
    """Integrate the fundamental-solution system for one stroke.

    ``omega0`` defaults to the protocol's initial frequency. Passing a
    different value describes evolution that starts right after a quench
    from ``omega0``. Times listed in ``t_eval`` are forced onto the grid.
    """
    if protocol.kind is ProtocolKind.SUDDEN_QUENCH:
        raise DomainError("a sudden quench has no trajectory; use q_factor_sudden")
    for tol in (rel_tol, abs_tol):
        if not 0 < tol <= 1e-2:
            raise DomainError("tolerances must lie in (0, 1e-2]")
    w0 = protocol.omega_start if omega0 is None else float(omega0)
    if w0 <= 0:
        raise DomainError("omega0 must be positive")

    if protocol.kind is ProtocolKind.CONSTANT:
        w_const = protocol.omega_start ** 2

        def rhs(t, y):
            return np.array([y[1], -w_const * y[0], y[3], -w_const * y[2]])

    else:
        start, delta, shape, tau = (
            protocol.omega_start,
            protocol.omega_end - protocol.omega_start,
            protocol.ramp_shape,
            protocol.duration,
        )

        def rhs(t, y):
            u = t / tau
            u = 0.0 if u < 0.0 else (1.0 if u > 1.0 else u)
            w = start + delta * shape(u)
            w2 = w * w
            return np.array([y[1], -w2 * y[0], y[3], -w2 * y[2]])

    t, y, _ = dormand_prince(
        rhs, (0.0, protocol.duration), (1.0, 0.0, 0.0, 1.0), rel_tol, abs_tol, t_eval
    )
    g1, dg1, g2, dg2 = (np.ascontiguousarray(y[:, i]) for i in range(4))
    b, db = _pinney(w0, g1, dg1, g2, dg2)
    arrays = (t, g1, dg1, g2, dg2, b, db)
    for arr in arrays:
        arr.setflags(write=False)
    return ErmakovTrajectory(w0, protocol, *arrays)


def post_quench_trajectory(
    omega_i: float,
    omega_f: float,
    duration: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    t_eval: Sequence[float] | None = None,
) -> ErmakovTrajectory:
    """Evolution at constant ``omega_f`` of a state prepared at ``omega_i``."""
    return solve_ermakov(
        FrequencyProtocol.constant(omega_f, duration),
        rel_tol,
        abs_tol,
        omega0=omega_i,
        t_eval=t_eval,
    )


def _resolve_omega(traj: ErmakovTrajectory, omega_t: float | None, t: float) -> float:
    return traj.omega(t) if omega_t is None else float(omega_t)


def q_factor_scale_invariant(
    traj: ErmakovTrajectory, omega_t: float | None, t: float
) -> NonadiabaticFactor:
    """Nonadiabatic factor from the scaling factor and its derivative.

    ``omega_t`` is the trap frequency at ``t``; ``None`` reads it from the
    trajectory's protocol.
    """
    w = _resolve_omega(traj, omega_t, t)
    b, db = traj.scaling_at(t)
    w0 = traj.omega0
    b_ad2 = w0 / w
    value = b_ad2 * (0.5 / b**2 + (w * b) ** 2 / (2 * w0**2) + db**2 / (2 * w0**2))
    return NonadiabaticFactor(float(value), Provenance.NUMERICAL)


def q_factor_husimi(
    traj: ErmakovTrajectory, omega_t: float | None, t: float
) -> NonadiabaticFactor:
    """Husimi's form of the nonadiabatic factor, built from G1 and G2 directly."""
    w = _resolve_omega(traj, omega_t, t)
    g1, dg1, g2, dg2 = traj.fundamental_at(t)
    w0 = traj.omega0
    value = ((dg1**2 + (w * g1) ** 2) + w0**2 * (dg2**2 + (w * g2) ** 2)) / (2 * w0 * w)
    return NonadiabaticFactor(float(value), Provenance.NUMERICAL)


def q_factor_sudden(omega_i: float, omega_f: float) -> NonadiabaticFactor:
    """Closed-form factor of an instantaneous quench; symmetric in its arguments."""
    if not (omega_i > 0 and omega_f > 0):
        raise DomainError("trap frequencies must be positive")
    value = (omega_i**2 + omega_f**2) / (2 * omega_i * omega_f)
    return NonadiabaticFactor(value, Provenance.SUDDEN_CLOSED_FORM)


def q_factor_stroke(
    protocol: FrequencyProtocol,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> NonadiabaticFactor:
    """Nonadiabatic factor at the end of a stroke, whatever its protocol kind."""
    if protocol.kind is ProtocolKind.SUDDEN_QUENCH:
        return q_factor_sudden(protocol.omega_start, protocol.omega_end)
    traj = solve_ermakov(protocol, rel_tol, abs_tol)
    return q_factor_scale_invariant(traj, protocol.omega_end, protocol.duration)


def ermakov_residual(traj: ErmakovTrajectory) -> np.ndarray:
    """``b'' + omega^2 b - omega0^2 / b^3`` at interior samples by central differences.

    Meaningful only on a fine, uniform grid (pass ``t_eval`` to the solver).
    """
    t, b = traj.t, traj.b
    h_left = t[1:-1] - t[:-2]
    h_right = t[2:] - t[1:-1]
    d2b = 2 * (
        (b[2:] - b[1:-1]) / h_right - (b[1:-1] - b[:-2]) / h_left
    ) / (h_left + h_right)
    w = np.array([traj.omega(s) for s in t[1:-1]])
    return d2b + w**2 * b[1:-1] - traj.omega0**2 / b[1:-1] ** 3


__all__ = [
    "ADIABATIC",
    "DEFAULT_ABS_TOL",
    "DEFAULT_REL_TOL",
    "ErmakovTrajectory",
    "FrequencyProtocol",
    "NonadiabaticFactor",
    "ProtocolKind",
    "Provenance",
    "ermakov_residual",
    "omega_at",
    "post_quench_trajectory",
    "q_factor_husimi",
    "q_factor_scale_invariant",
    "q_factor_stroke",
    "q_factor_sudden",
    "smoothstep",
    "solve_ermakov",
]

