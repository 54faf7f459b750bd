"""Classic probabilistic risk assessment: fault trees and event trees,
plus the bridges that compare them with the cascade model.

Fault trees are tree-shaped (no shared subtrees in this version): AND
gates multiply child probabilities, OR gates combine children by
independence (1 - prod(1 - p)).

Event trees here have the first-success-terminates shape that matches a
supply hierarchy: branch k is tried only after branches 1..k-1 failed,
so sequence k has probability f * S_k * prod_{j<k}(1 - S_j) and the
terminal all-fail sequence f * prod(1 - S_j).  Sequence frequencies sum
to the initiating frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .cascade import ExternalInput, layer_survival, propagate_layer
from .errors import ModelError, StructuralMismatchError
from .model import (
    INTERMEDIATE,
    SOURCE,
    TARGET,
    Configuration,
    Network,
    Node,
    enumerate_chains,
)

AND = "and"
OR = "or"


@dataclass
class BasicEvent:
    id: str
    probability: float

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ModelError(f"basic event {self.id!r}: probability outside [0, 1]")


@dataclass
class Gate:
    id: str
    kind: str
    children: list[Union["Gate", BasicEvent]] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in (AND, OR):
            raise ModelError(f"gate {self.id!r}: kind must be 'and' or 'or'")
        if not self.children:
            raise ModelError(f"gate {self.id!r}: needs at least one child")


@dataclass
class FaultTree:
    top: Union[Gate, BasicEvent]

    def __post_init__(self):
        seen: set[str] = set()

        def collect(node):
            if node.id in seen:
                raise ModelError(
                    f"fault tree is not tree-shaped: {node.id!r} appears twice"
                )
            seen.add(node.id)
            if isinstance(node, Gate):
                for ch in node.children:
                    collect(ch)

        collect(self.top)


def eval_fault_tree(tree: Union[FaultTree, Gate, BasicEvent]) -> float:
    """Top-event probability under independence of basic events."""
    node = tree.top if isinstance(tree, FaultTree) else node_from(tree)

    def ev(n) -> float:
        if isinstance(n, BasicEvent):
            return n.probability
        ps = [ev(ch) for ch in n.children]
        if n.kind == AND:
            out = 1.0
            for p in ps:
                out *= p
            return out
        surv = 1.0
        for p in ps:
            surv *= 1.0 - p
        return 1.0 - surv

    return ev(node)


def node_from(node):
    """Accept a Gate/BasicEvent or its JSON form: gates are
    {"id", "kind": "and"|"or", "children": [...]}, basic events are
    {"id", "probability"}."""
    if isinstance(node, (Gate, BasicEvent)):
        return node
    if isinstance(node, dict):
        if "children" in node:
            return Gate(
                id=node.get("id", "gate"),
                kind=node.get("kind", OR),
                children=[node_from(ch) for ch in node["children"]],
            )
        if "probability" in node:
            return BasicEvent(id=node.get("id", "event"), probability=float(node["probability"]))
        raise ModelError(f"fault-tree node needs 'children' or 'probability': {node!r}")
    raise ModelError("expected a FaultTree, Gate, BasicEvent, or JSON dict")


@dataclass
class Branch:
    label: str
    success_probability: float

    def __post_init__(self):
        if not 0.0 <= self.success_probability <= 1.0:
            raise ModelError(
                f"branch {self.label!r}: success probability outside [0, 1]"
            )


@dataclass
class EventTree:
    initiating_frequency: float
    branches: list[Branch]

    def __post_init__(self):
        if self.initiating_frequency < 0.0:
            raise ModelError("initiating frequency must be >= 0")


@dataclass
class Sequence:
    label: str
    frequency: float


def eval_event_tree(tree: EventTree) -> list[Sequence]:
    """Expand the tree into end sequences.

    One sequence per branch success (after all earlier branches failed)
    plus the terminal all-fail sequence; frequencies sum to the
    initiating frequency.
    """
    seqs: list[Sequence] = []
    carry = tree.initiating_frequency
    for br in tree.branches:
        seqs.append(Sequence(label=br.label, frequency=carry * br.success_probability))
        carry *= 1.0 - br.success_probability
    seqs.append(Sequence(label="loss", frequency=carry))
    return seqs


def or_reference_network(probabilities: list[float]) -> Network:
    """Series chain of event nodes feeding a sound sink: under the
    cascade rule the sink fails when any event node fails, realizing an
    OR over the events."""
    if len(probabilities) < 1:
        raise ModelError("need at least one event probability")
    nodes = [Node(id="e0", kind=SOURCE)]
    for i in range(1, len(probabilities)):
        nodes.append(Node(id=f"e{i}", kind=INTERMEDIATE))
    nodes.append(Node(id="sink", kind=TARGET))
    ids = [n.id for n in nodes]
    edges = list(zip(ids, ids[1:]))
    return Network(
        id="or-reference",
        nodes=nodes,
        configurations=[Configuration(label="chain", edges=edges)],
    )


def iim_or_equivalence(probabilities: list[float]) -> tuple[float, float, float]:
    """Compare an OR gate over the given events with the cascade result
    on the series reference network.

    Returns (fault-tree value, cascade value, absolute difference).
    """
    gate = Gate(
        id="or",
        kind=OR,
        children=[
            BasicEvent(id=f"e{i}", probability=p) for i, p in enumerate(probabilities)
        ],
    )
    fta = eval_fault_tree(FaultTree(top=gate))

    net = or_reference_network(probabilities)
    p_sf = {f"e{i}": p for i, p in enumerate(probabilities)}
    p_sf["sink"] = 0.0
    probs = propagate_layer(net, 0, p_sf)
    iim = probs["sink"].p_f
    return fta, iim, abs(fta - iim)


def iim_eta_equivalence(
    network: Network,
    p_sf: dict[str, float],
    external: dict[str, ExternalInput] | None = None,
) -> tuple[list[float], list[float], float]:
    """Compare configuration occurrence with an event-tree expansion.

    The event tree asks "does layer k serve?" in hierarchy order with
    success probability S_k; its sequence probabilities must equal the
    cascade p_occ (and the terminal sequence the loc).  Raises
    StructuralMismatchError when the configurations are not mutually
    exclusive full-flow alternatives (degraded or not covering every
    target), where the correspondence does not hold.

    Returns (cascade values, event-tree values, max absolute
    difference); both lists end with the loss entry.
    """
    from .cascade import configuration_occurrence

    survivals = []
    for k, config in enumerate(network.configurations):
        chains = enumerate_chains(network, k)
        reached = {c[-1] for c in chains}
        if config.degraded or any(t not in reached for t in network.targets):
            raise StructuralMismatchError(
                f"configuration {k} ({config.label}) is not a full-flow "
                "alternative; event-tree comparison is undefined"
            )
        layer = layer_survival(network, k, p_sf, external)
        survivals.append(layer.survival)

    p_occ, loc = configuration_occurrence(survivals)

    tree = EventTree(
        initiating_frequency=1.0,
        branches=[
            Branch(label=c.label, success_probability=s)
            for c, s in zip(network.configurations, survivals)
        ],
    )
    seqs = eval_event_tree(tree)
    eta = [s.frequency for s in seqs]
    iim = p_occ + [loc]
    diff = max(abs(a - b) for a, b in zip(iim, eta))
    return iim, eta, diff
