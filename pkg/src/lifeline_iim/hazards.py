"""Fragility curves, autonomy curves, event vectors and the
self-failure probability of a node.

All probabilities are cumulative failure probabilities in [0, 1].
Independent contributions combine as p = 1 - prod(1 - p_i); redundant
parallels fail jointly with p = prod(p_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import CurveError, MissingCurveError
from .model import Node

LOGNORMAL = "lognormal_cdf"
PIECEWISE = "piecewise_linear"
STEP = "step"


def _check_points(points, what: str):
    if len(points) < 2:
        raise CurveError(f"{what}: needs at least two breakpoints")
    xs = [p[0] for p in points]
    ps = [p[1] for p in points]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise CurveError(f"{what}: breakpoint abscissae must be strictly increasing")
    if any(not 0.0 <= p <= 1.0 for p in ps):
        raise CurveError(f"{what}: probabilities must lie in [0, 1]")
    if any(b < a for a, b in zip(ps, ps[1:])):
        raise CurveError(f"{what}: probabilities must be nondecreasing")


def _interp(points, x: float) -> float:
    # clamp outside the support
    if x <= points[0][0]:
        return points[0][1]
    if x >= points[-1][0]:
        return points[-1][1]
    for (x0, p0), (x1, p1) in zip(points, points[1:]):
        if x0 <= x <= x1:
            return p0 + (p1 - p0) * (x - x0) / (x1 - x0)
    return points[-1][1]


@dataclass(frozen=True)
class FragilityCurve:
    """Complete-failure fragility: intensity -> failure probability.

    Forms:
      lognormal_cdf  params median (> 0) and beta (> 0)
      piecewise_linear  params points [(intensity, prob), ...]
      step  params threshold (finite); closed at the threshold
    units is informational (g, m, cycles, ...).
    """

    name: str
    hazard: str
    form: str
    median: float = 0.0
    beta: float = 0.0
    points: tuple = ()
    threshold: float = 0.0
    units: str = ""

    def __post_init__(self):
        if self.form == LOGNORMAL:
            if self.median <= 0 or self.beta <= 0:
                raise CurveError(f"curve {self.name!r}: median and beta must be > 0")
        elif self.form == PIECEWISE:
            object.__setattr__(self, "points", tuple(tuple(p) for p in self.points))
            _check_points(self.points, f"curve {self.name!r}")
        elif self.form == STEP:
            if not math.isfinite(self.threshold):
                raise CurveError(f"curve {self.name!r}: threshold must be finite")
        else:
            raise CurveError(f"curve {self.name!r}: unknown form {self.form!r}")

    def __call__(self, intensity: float) -> float:
        return eval_fragility(self, intensity)


def eval_fragility(curve: FragilityCurve, intensity: float) -> float:
    """Failure probability at the given intensity; 0 below the support."""
    if curve.form == LOGNORMAL:
        if intensity <= 0.0:
            return 0.0
        z = math.log(intensity / curve.median) / (curve.beta * math.sqrt(2.0))
        return 0.5 * (1.0 + math.erf(z))
    if curve.form == PIECEWISE:
        return _interp(curve.points, intensity)
    if curve.form == STEP:
        return 1.0 if intensity >= curve.threshold else 0.0
    raise CurveError(f"unknown form {curve.form!r}")


@dataclass(frozen=True)
class AutonomyCurve:
    """Run-out curve: accumulated duty hours -> failure probability.

    step form returns 1 once duty >= capacity_hours (closed threshold);
    piecewise_linear must start at zero probability for zero duty.
    """

    name: str
    form: str
    capacity_hours: float = 0.0
    points: tuple = ()

    def __post_init__(self):
        if self.form == STEP:
            if not (math.isfinite(self.capacity_hours) and self.capacity_hours > 0):
                raise CurveError(f"autonomy {self.name!r}: capacity_hours must be > 0")
        elif self.form == PIECEWISE:
            object.__setattr__(self, "points", tuple(tuple(p) for p in self.points))
            _check_points(self.points, f"autonomy {self.name!r}")
            if _interp(self.points, 0.0) != 0.0:
                raise CurveError(f"autonomy {self.name!r}: must be 0 at zero duty")
        else:
            raise CurveError(f"autonomy {self.name!r}: unknown form {self.form!r}")

    def __call__(self, duty_hours: float) -> float:
        if duty_hours <= 0.0:
            return 0.0
        if self.form == STEP:
            return 1.0 if duty_hours >= self.capacity_hours else 0.0
        return _interp(self.points, duty_hours)


@dataclass
class EventVector:
    """Hazard intensities hitting specific nodes at one time.

    intensities maps node id -> (hazard kind, intensity value).
    """

    time: float
    intensities: dict[str, tuple[str, float]] = field(default_factory=dict)


@dataclass
class CurveLibrary:
    fragility: dict[str, FragilityCurve] = field(default_factory=dict)
    autonomy: dict[str, AutonomyCurve] = field(default_factory=dict)

    def fragility_curve(self, name: str) -> FragilityCurve:
        try:
            return self.fragility[name]
        except KeyError:
            raise MissingCurveError(f"fragility curve {name!r} not defined") from None

    def autonomy_curve(self, name: str) -> AutonomyCurve:
        try:
            return self.autonomy[name]
        except KeyError:
            raise MissingCurveError(f"autonomy curve {name!r} not defined") from None


def combine_independent(probabilities: Sequence[float]) -> float:
    """1 - prod(1 - p_i); empty input gives 0."""
    surv = 1.0
    for p in probabilities:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        surv *= 1.0 - p
    return 1.0 - surv


def joint_redundant_failure(probabilities: Sequence[float]) -> float:
    """prod(p_i): all redundant parallels down at once. Errors on empty
    input (a joint failure of nothing is meaningless)."""
    if not probabilities:
        raise ValueError("joint_redundant_failure needs at least one member")
    out = 1.0
    for p in probabilities:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        out *= p
    return out


def autonomy_increment(curve: AutonomyCurve, duty_prev: float, duty_now: float) -> float:
    """Conditional failure probability added by duty growing from
    duty_prev to duty_now: (a1 - a0) / (1 - a0).

    Chained with combine_independent across steps this reproduces the
    cumulative curve exactly; with duty_prev = 0 it reduces to the
    plain curve value.
    """
    a0 = curve(duty_prev)
    a1 = curve(max(duty_prev, duty_now))
    if a0 >= 1.0:
        return 0.0  # already certain; carried term holds it at 1
    return (a1 - a0) / (1.0 - a0)


def self_failure(
    node: Node,
    intensities: Sequence[tuple[str, float]],
    carried_psf: float,
    duty_hours: float,
    curves: CurveLibrary,
    duty_hours_prev: float = 0.0,
) -> float:
    """Total self-failure probability of a node at one time step.

    Combines (independently) the carried probability from the previous
    step, one fragility term per hazard acting now, and the autonomy
    run-out increment between the previous and current duty reading.
    Raises MissingCurveError if a hazard acts on the node without a
    matching fragility curve.
    """
    terms = [carried_psf]
    for hazard, value in intensities:
        curve_name = node.fragility.get(hazard)
        if curve_name is None:
            raise MissingCurveError(
                f"node {node.id!r}: hazard {hazard!r} acting but no fragility curve"
            )
        terms.append(eval_fragility(curves.fragility_curve(curve_name), value))
    if node.autonomy is not None:
        curve = curves.autonomy_curve(node.autonomy)
        terms.append(autonomy_increment(curve, duty_hours_prev, duty_hours))
    return combine_independent(terms)


def node_site_intensity(node: Node, hazard: str) -> Optional[float]:
    """Site exposure of a node for a hazard kind; None when exempt."""
    return node.site.get(hazard)
