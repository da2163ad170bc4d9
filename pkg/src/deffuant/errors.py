"""Exception types used across the package."""

from __future__ import annotations

from typing import Any


class ConfigurationError(ValueError):
    """Invalid configuration or usage (bad parameter, dimension mismatch, bad file)."""


class BoundInapplicableError(ValueError):
    """The consensus lower bound's hypothesis (epsilon > enclosing radius) fails.

    Distinct from a bound of zero: the formula simply does not apply.
    """


class InvariantViolation(RuntimeError):
    """A runtime invariant check failed; aborts the trial that raised it."""

    def __init__(self, invariant: str, step: int, slack: float, detail: str = ""):
        self.invariant = invariant
        self.step = step
        self.slack = slack
        self.detail = detail
        message = f"invariant {invariant!r} violated at step {step}: slack={slack:.3e}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)

    def as_record(self) -> dict[str, Any]:
        """JSON-serializable diagnostic record."""
        return {
            "invariant": self.invariant,
            "step": self.step,
            "slack": float(self.slack),
            "detail": self.detail,
        }
