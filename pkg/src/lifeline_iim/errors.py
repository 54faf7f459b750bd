"""Exception types shared across the package."""

from __future__ import annotations


class LifelineError(Exception):
    """Base class for all package errors."""


class ModelError(LifelineError):
    """A model object is structurally unusable (bad ids, bad shapes)."""


class CurveError(LifelineError):
    """A fragility or autonomy curve has invalid parameters."""


class MissingCurveError(LifelineError):
    """A hazard acts on a node that has no fragility curve for it."""


class SolvabilityError(LifelineError):
    """The interdependency matrix has spectral radius >= 1 (Leontief
    inverse does not exist)."""


class ConvergenceError(LifelineError):
    """Fixed-point iteration over cyclic network dependencies failed to
    converge within the iteration budget."""


class StructuralMismatchError(LifelineError):
    """An event-tree comparison was requested for a network whose
    configurations are not mutually exclusive full-flow alternatives."""


class ScenarioParseError(LifelineError):
    """A scenario document failed to parse. `errors` holds one entry per
    problem: {"where": str, "message": str} with line/column for JSON
    syntax errors and a JSON path for reference errors."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"{e['where']}: {e['message']}" for e in self.errors)
        super().__init__(f"scenario parse failed: {lines}")
