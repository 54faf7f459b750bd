import math

import pytest
from hypothesis import given, strategies as st

from lifeline_iim import (
    AutonomyCurve,
    CurveError,
    CurveLibrary,
    FragilityCurve,
    autonomy_increment,
    combine_independent,
    joint_redundant_failure,
)
from lifeline_iim.errors import MissingCurveError


def test_lognormal_median_is_half():
    curve = FragilityCurve(name="f", hazard="eq", form="lognormal_cdf", median=2.0, beta=0.5)
    assert curve(2.0) == pytest.approx(0.5, abs=1e-15)


def test_lognormal_matches_erf_form():
    curve = FragilityCurve(name="f", hazard="eq", form="lognormal_cdf", median=1.0, beta=0.4)
    for i in (0.3, 1.0, 2.5):
        z = math.log(i) / 0.4
        assert curve(i) == pytest.approx(0.5 * (1 + math.erf(z / math.sqrt(2))), abs=1e-15)
    assert curve(0.0) == 0.0
    assert curve(-1.0) == 0.0


def test_piecewise_clamps_outside_support():
    curve = FragilityCurve(
        name="p", hazard="tsu", form="piecewise_linear", points=[(1.0, 0.0), (3.0, 1.0)]
    )
    assert curve(0.5) == 0.0
    assert curve(2.0) == pytest.approx(0.5)
    assert curve(10.0) == 1.0


def test_step_threshold_is_closed():
    curve = FragilityCurve(name="s", hazard="eq", form="step", threshold=0.1)
    assert curve(0.0999) == 0.0
    assert curve(0.1) == 1.0
    assert curve(5.0) == 1.0


def test_bad_curve_parameters_raise():
    with pytest.raises(CurveError):
        FragilityCurve(name="x", hazard="eq", form="lognormal_cdf", median=0.0, beta=0.4)
    with pytest.raises(CurveError):
        FragilityCurve(name="x", hazard="eq", form="nope")
    with pytest.raises(CurveError):
        # probabilities must be nondecreasing in [0,1]
        FragilityCurve(
            name="x", hazard="eq", form="piecewise_linear", points=[(0.0, 0.5), (1.0, 0.2)]
        )
    with pytest.raises(CurveError):
        AutonomyCurve(name="a", form="step", capacity_hours=0.0)
    with pytest.raises(CurveError):
        # autonomy must start at zero probability
        AutonomyCurve(name="a", form="piecewise_linear", points=[(0.0, 0.2), (5.0, 1.0)])


def test_autonomy_step_is_closed_at_capacity():
    curve = AutonomyCurve(name="batt", form="step", capacity_hours=10.0)
    assert curve(9.999) == 0.0
    assert curve(10.0) == 1.0
    assert curve(0.0) == 0.0


def test_combine_independent_frozen():
    # 1 - 0.9*0.8*0.7 = 0.496, hand computation
    assert combine_independent([0.1, 0.2, 0.3]) == pytest.approx(0.496, abs=1e-15)
    assert combine_independent([]) == 0.0
    with pytest.raises(ValueError):
        combine_independent([1.2])


def test_joint_redundant_failure_frozen():
    assert joint_redundant_failure([0.2, 0.3]) == pytest.approx(0.06, abs=1e-15)
    with pytest.raises(ValueError):
        joint_redundant_failure([])


def test_curve_library_lookup_errors():
    lib = CurveLibrary()
    with pytest.raises(MissingCurveError):
        lib.fragility_curve("missing")
    with pytest.raises(MissingCurveError):
        lib.autonomy_curve("missing")


@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=0, max_size=8)
)
def test_combine_independent_bounds(ps):
    out = combine_independent(ps)
    assert 0.0 <= out <= 1.0
    assert out >= max(ps, default=0.0) - 1e-12  # union dominates each member


@given(
    st.floats(min_value=0.01, max_value=5.0),
    st.floats(min_value=0.05, max_value=1.5),
    st.floats(min_value=0.001, max_value=10.0),
    st.floats(min_value=0.001, max_value=10.0),
)
def test_lognormal_monotone(median, beta, i1, i2):
    curve = FragilityCurve(name="m", hazard="eq", form="lognormal_cdf", median=median, beta=beta)
    lo, hi = sorted((i1, i2))
    assert curve(lo) <= curve(hi) + 1e-15


@given(
    st.floats(min_value=1.0, max_value=40.0),
    st.lists(st.floats(min_value=0.0, max_value=50.0), min_size=2, max_size=6),
)
def test_autonomy_increments_telescope(capacity, duties):
    """Chaining conditional increments across any duty partition must
    reproduce the cumulative curve exactly."""
    curve = AutonomyCurve(
        name="ramp",
        form="piecewise_linear",
        points=[(0.0, 0.0), (capacity, 0.0), (capacity + 10.0, 1.0)],
    )
    checkpoints = sorted(duties)
    carried = 0.0
    prev = 0.0
    for d in checkpoints:
        inc = autonomy_increment(curve, prev, d)
        carried = combine_independent([carried, inc])
        prev = d
    assert carried == pytest.approx(curve(checkpoints[-1]), abs=1e-12)


def test_autonomy_increment_after_certain_failure_is_zero():
    curve = AutonomyCurve(name="s", form="step", capacity_hours=5.0)
    assert autonomy_increment(curve, 6.0, 7.0) == 0.0
