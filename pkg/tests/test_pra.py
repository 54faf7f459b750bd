import numpy as np
import pytest

from lifeline_iim import (
    BasicEvent,
    Branch,
    EventTree,
    FaultTree,
    Gate,
    ModelError,
    StructuralMismatchError,
    eval_event_tree,
    eval_fault_tree,
    iim_eta_equivalence,
    iim_or_equivalence,
    node_from,
    or_reference_network,
    resolve_scenario,
)
from oracles import truth_table_fault_tree


def test_or_and_frozen():
    tree = FaultTree(
        top=Gate(id="top", kind="or", children=[
            Gate(id="g", kind="and", children=[
                BasicEvent(id="a", probability=0.5),
                BasicEvent(id="b", probability=0.5),
            ]),
            BasicEvent(id="c", probability=0.1),
        ])
    )
    # 1 - (1-0.25)(1-0.1) = 0.325
    assert eval_fault_tree(tree) == pytest.approx(0.325, abs=1e-15)


def test_fault_tree_matches_truth_table():
    rng = np.random.default_rng(11)
    for _ in range(60):
        # random depth-2 tree over distinct events
        kinds = rng.choice(["and", "or"], size=3)
        ps = rng.random(6)
        structure = (
            str(kinds[0]),
            (str(kinds[1]), "e0", "e1", "e2"),
            (str(kinds[2]), "e3", "e4"),
            "e5",
        )
        probs = {f"e{i}": float(p) for i, p in enumerate(ps)}

        def build(node):
            if isinstance(node, str):
                return BasicEvent(id=node, probability=probs[node])
            return Gate(
                id=f"g{id(node)}",
                kind=node[0],
                children=[build(c) for c in node[1:]],
            )

        got = eval_fault_tree(FaultTree(top=build(structure)))
        want = truth_table_fault_tree(structure, probs)
        assert got == pytest.approx(want, abs=1e-12)


def test_duplicate_event_ids_rejected():
    with pytest.raises(ModelError):
        FaultTree(top=Gate(id="g", kind="or", children=[
            BasicEvent(id="a", probability=0.1),
            BasicEvent(id="a", probability=0.2),
        ]))


def test_bad_probability_rejected():
    with pytest.raises(ModelError):
        BasicEvent(id="a", probability=1.3)


def test_node_from_dict():
    tree = node_from({
        "id": "top", "kind": "or",
        "children": [
            {"id": "a", "probability": 0.1},
            {"id": "g", "kind": "and",
             "children": [{"id": "b", "probability": 0.5},
                          {"id": "c", "probability": 0.5}]},
        ],
    })
    assert eval_fault_tree(FaultTree(top=tree)) == pytest.approx(0.325, abs=1e-15)
    with pytest.raises(ModelError):
        node_from({"id": "x"})  # neither gate nor basic event


def test_event_tree_frozen():
    tree = EventTree(
        initiating_frequency=2.0,
        branches=[Branch("first", 0.9), Branch("second", 0.5)],
    )
    seqs = eval_event_tree(tree)
    assert [s.frequency for s in seqs] == pytest.approx([1.8, 0.1, 0.1], abs=1e-15)
    assert seqs[-1].label == "loss"
    assert sum(s.frequency for s in seqs) == pytest.approx(2.0, abs=1e-12)


def test_or_identity_exact():
    rng = np.random.default_rng(3)
    for _ in range(100):
        k = int(rng.integers(2, 7))
        probs = list(rng.random(k))
        fta, iim, diff = iim_or_equivalence(probs)
        assert diff <= 1e-12
        assert fta == pytest.approx(1.0 - np.prod(1.0 - np.asarray(probs)), abs=1e-12)


def test_or_reference_network_shape():
    net = or_reference_network([0.1, 0.2, 0.3])
    assert net.node_ids == ["e0", "e1", "e2", "sink"]
    assert len(net.configurations) == 1


def test_eta_equivalence_on_bundled_supply_network():
    doc = resolve_scenario("example3")
    network = doc.build_model().network("supply")
    rng = np.random.default_rng(17)
    ids = network.node_ids
    for _ in range(50):
        p_sf = {nid: float(x) for nid, x in zip(ids, rng.random(len(ids)))}
        iim, eta, diff = iim_eta_equivalence(network, p_sf)
        assert diff <= 1e-12
        assert len(iim) == len(network.configurations) + 1


def test_eta_mismatch_on_non_covering_configuration():
    from lifeline_iim import Configuration, Network, Node

    net = Network(
        id="x",
        nodes=[Node(id="a", kind="source"), Node(id="b", kind="intermediate"),
               Node(id="t", kind="target")],
        configurations=[
            Configuration("full", [("a", "b"), ("b", "t")]),
            Configuration("stub", [("a", "b")]),  # never reaches the target
        ],
    )
    with pytest.raises(StructuralMismatchError):
        iim_eta_equivalence(net, {"a": 0.1})


def test_eta_mismatch_on_degraded_configuration():
    from lifeline_iim import Configuration, Network, Node

    net = Network(
        id="x",
        nodes=[Node(id="a", kind="source"), Node(id="t", kind="target")],
        configurations=[Configuration("deg", [("a", "t")], degraded=True)],
    )
    with pytest.raises(StructuralMismatchError):
        iim_eta_equivalence(net, {"a": 0.1})
