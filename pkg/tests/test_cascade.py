import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lifeline_iim import (
    Configuration,
    InterNetworkDependency,
    Network,
    Node,
    SystemModel,
    configuration_occurrence,
    layer_survival,
    node_importance,
    propagate_layer,
    solve_system,
)
from oracles import enumerate_tree_pf, mc_two_pump_district, random_tree


def tree_network(parents):
    """Single-layer network from a parent array (node 0 is the root)."""
    n = len(parents)
    children = [[] for _ in range(n)]
    for i in range(1, n):
        children[parents[i]].append(i)
    nodes = []
    for i in range(n):
        kind = "source" if i == 0 else ("target" if not children[i] else "intermediate")
        nodes.append(Node(id=f"n{i}", kind=kind))
    edges = [(f"n{parents[i]}", f"n{i}") for i in range(1, n)]
    return Network(id="tree", nodes=nodes, configurations=[Configuration("only", edges)])


def two_pump_model():
    electric = Network(
        id="electric",
        nodes=[Node(id="grid", kind="source"), Node(id="feeder", kind="target")],
        configurations=[Configuration("grid-feed", [("grid", "feeder")])],
    )
    hydraulic = Network(
        id="hydraulic",
        nodes=[
            Node(id="pump1", kind="source", redundancy_group="pumps", partial_source=True),
            Node(id="pump2", kind="source", redundancy_group="pumps", partial_source=True),
            Node(id="tower", kind="intermediate"),
            Node(id="b1", kind="target"),
        ],
        configurations=[
            Configuration("main", [("pump1", "tower"), ("pump2", "tower"), ("tower", "b1")])
        ],
    )
    dep = InterNetworkDependency(
        from_network="electric",
        to_network="hydraulic",
        edges=[("feeder", "pump1"), ("feeder", "pump2")],
    )
    return SystemModel(networks=[electric, hydraulic], dependencies=[dep])


P_DISTRICT = {
    "grid": 0.02, "feeder": 0.01,
    "pump1": 0.05, "pump2": 0.05,
    "tower": 0.03, "b1": 0.01,
}


def test_chain_propagation_frozen():
    net = Network(
        id="c",
        nodes=[Node(id="a", kind="source"), Node(id="b", kind="intermediate"),
               Node(id="c", kind="target")],
        configurations=[Configuration("x", [("a", "b"), ("b", "c")])],
    )
    probs = propagate_layer(net, 0, {"a": 0.2, "b": 0.1, "c": 0.0})
    # p_f(c) = 1 - 0.8*0.9 = 0.28 (hand computation)
    assert probs["c"].p_f == pytest.approx(0.28, abs=1e-15)
    assert probs["c"].p_cf == pytest.approx(0.28, abs=1e-15)
    assert probs["a"].p_cf == 0.0
    layer = layer_survival(net, 0, {"a": 0.2, "b": 0.1, "c": 0.0})
    assert layer.survival == pytest.approx(0.72, abs=1e-15)


def test_tree_pf_matches_enumeration():
    rng = np.random.default_rng(2024)
    for _ in range(60):
        n = int(rng.integers(2, 11))
        parents = random_tree(rng, n)
        p = rng.random(n)
        net = tree_network(parents)
        probs = propagate_layer(net, 0, {f"n{i}": float(p[i]) for i in range(n)})
        exact = enumerate_tree_pf(parents, list(p))
        for i in range(n):
            assert probs[f"n{i}"].p_f == pytest.approx(exact[i], abs=1e-12)


def test_two_pump_district_frozen():
    """Closed-form values for the redundant-pump shape.

    p_f(feeder) = 1 - 0.98*0.99 = 0.0298; the pump group fails when the
    shared feed is down or both pumps self-fail:
    1 - (1-0.0298)(1-0.0025) = 0.0322255.
    """
    state = solve_system(two_pump_model(), P_DISTRICT)
    elec = state.networks["electric"]
    hyd = state.networks["hydraulic"]
    assert elec.nodes["feeder"].p_f == pytest.approx(0.0298, abs=1e-15)
    assert hyd.nodes["tower"].p_f == pytest.approx(0.061258735, abs=1e-12)
    assert hyd.nodes["b1"].p_f == pytest.approx(0.07064614765, abs=1e-12)
    assert hyd.layers[0].survival == pytest.approx(0.92935385235, abs=1e-12)
    assert hyd.loc == pytest.approx(0.07064614765, abs=1e-12)


def test_two_pump_district_against_monte_carlo():
    est = mc_two_pump_district(np.random.default_rng(99), 1_000_000, P_DISTRICT)
    state = solve_system(two_pump_model(), P_DISTRICT)
    hyd = state.networks["hydraulic"]
    n = 1_000_000
    for got, key in [
        (state.networks["electric"].nodes["feeder"].p_f, "p_f_feeder"),
        (hyd.nodes["b1"].p_f, "p_f_b1"),
        (hyd.layers[0].survival, "survival"),
    ]:
        sigma = (est[key] * (1 - est[key]) / n) ** 0.5
        assert abs(got - est[key]) < 4 * sigma + 1e-9, key


def test_shared_feeder_counted_once():
    """Both pumps hang off one feeder: its failure must enter the group
    joint failure once, not squared."""
    p = dict(P_DISTRICT, pump1=0.0, pump2=0.0)
    state = solve_system(two_pump_model(), p)
    hyd = state.networks["hydraulic"]
    # perfect pumps: the group fails exactly when the feed fails
    assert hyd.layers[0].survival == pytest.approx(
        (1 - 0.0298) * 0.97 * 0.99, abs=1e-15
    )


def test_configuration_occurrence_frozen():
    p_occ, loc = configuration_occurrence([0.5, 0.5])
    assert p_occ == pytest.approx([0.5, 0.25], abs=1e-15)
    assert loc == pytest.approx(0.25, abs=1e-15)
    p_occ, loc = configuration_occurrence([])
    assert p_occ == [] and loc == 1.0


def test_occurrence_normalizes_exactly():
    rng = np.random.default_rng(5)
    for _ in range(200):
        s = list(rng.random(int(rng.integers(1, 7))))
        p_occ, loc = configuration_occurrence(s)
        assert abs(sum(p_occ) + loc - 1.0) <= 1e-12
        assert all(0.0 <= p <= 1.0 for p in p_occ)
        assert 0.0 <= loc <= 1.0


def test_degraded_layer_has_zero_survival():
    net = Network(
        id="d",
        nodes=[Node(id="a", kind="source"), Node(id="t", kind="target")],
        configurations=[Configuration("deg", [("a", "t")], degraded=True)],
    )
    assert layer_survival(net, 0, {"a": 0.0, "t": 0.0}).survival == 0.0


def test_layer_missing_target_has_zero_survival():
    net = Network(
        id="m",
        nodes=[Node(id="a", kind="source"), Node(id="b", kind="intermediate"),
               Node(id="t", kind="target")],
        configurations=[Configuration("partial", [("a", "b")])],  # never reaches t
    )
    assert layer_survival(net, 0, {}).survival == 0.0


def test_cyclic_dependencies_collapse_to_certain_failure():
    """Mutually dependent networks with any positive local failure have
    no consistent state short of joint failure; the damped fixed point
    must land there."""
    n1 = Network(
        id="one",
        nodes=[Node(id="a", kind="source"), Node(id="t1", kind="target")],
        configurations=[Configuration("x", [("a", "t1")])],
    )
    n2 = Network(
        id="two",
        nodes=[Node(id="b", kind="source"), Node(id="t2", kind="target")],
        configurations=[Configuration("y", [("b", "t2")])],
    )
    deps = [
        InterNetworkDependency("one", "two", [("t1", "b")]),
        InterNetworkDependency("two", "one", [("t2", "a")]),
    ]
    model = SystemModel(networks=[n1, n2], dependencies=deps)
    state = solve_system(model, {"a": 0.1, "b": 0.2})
    assert state.converged
    assert state.networks["one"].nodes["t1"].p_f == pytest.approx(1.0, abs=1e-8)
    assert state.networks["two"].nodes["t2"].p_f == pytest.approx(1.0, abs=1e-8)
    # ... and stays at zero when nothing can fail locally
    clean = solve_system(model, {})
    assert clean.networks["one"].nodes["t1"].p_f == 0.0


def test_node_importance_frozen():
    net = Network(
        id="c",
        nodes=[Node(id="a", kind="source"), Node(id="b", kind="intermediate"),
               Node(id="t", kind="target")],
        configurations=[Configuration("x", [("a", "b"), ("b", "t")])],
    )
    model = SystemModel(networks=[net], dependencies=[])
    imp = node_importance(model, {"a": 0.3}, "a", "t")
    assert imp == pytest.approx(0.3, abs=1e-15)
    imp_list = node_importance(model, [{"a": 0.3}, {"a": 0.5}], "a", "t")
    assert imp_list == pytest.approx([0.3, 0.5], abs=1e-15)


@settings(max_examples=80, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**31 - 1),
    st.integers(min_value=2, max_value=9),
)
def test_psf_increase_never_decreases_pf_or_loc(seed, n):
    rng = np.random.default_rng(seed)
    parents = random_tree(rng, n)
    net = tree_network(parents)
    model = SystemModel(networks=[net], dependencies=[])
    base_p = {f"n{i}": float(x) for i, x in enumerate(rng.random(n) * 0.8)}
    bumped = dict(base_p)
    victim = f"n{int(rng.integers(0, n))}"
    bumped[victim] = min(1.0, bumped[victim] + float(rng.random()) * 0.2)

    a = solve_system(model, base_p).networks["tree"]
    b = solve_system(model, bumped).networks["tree"]
    for nid in a.nodes:
        assert b.nodes[nid].p_f >= a.nodes[nid].p_f - 1e-12
    assert b.loc >= a.loc - 1e-12
