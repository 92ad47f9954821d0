"""Exception types raised by the engine calculator."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class IntegrationError(RuntimeError):
    """The adaptive integrator could not meet its tolerance."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t = {time:.17g})")
        self.time = time


class NotAnEngineError(ValueError):
    """The cycle does not absorb heat from the hot bath, so no efficiency exists."""

    def __init__(self, condition: str, value: float):
        super().__init__(f"not an engine: {condition} violated (value = {value:.6g})")
        self.condition = condition
        self.value = value


class OptimizationError(RuntimeError):
    """No engine-valid operating point was found inside the search bracket."""

    def __init__(self, message: str, flags: dict):
        super().__init__(f"{message}: {flags}")
        self.flags = flags
