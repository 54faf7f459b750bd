"""Probabilistic cascading-failure propagation over configured networks.

Per configuration (layer) the propagation is linear: walking the chain
in topological order, a node's cascading-failure probability equals the
failure probability transmitted by its unique supplier, and its total
failure probability is p_f = 1 - (1 - p_sf)(1 - p_cf).  Redundancy
groups transmit the joint failure of their members.

Layer occurrence follows the supply hierarchy: a layer is in service
when its whole source-to-target chain set survives and every
higher-priority layer is out, so p_occ_k = S_k * prod_{j<k}(1 - S_j)
and the loss-of-connection probability is loc = 1 - sum_k p_occ_k.

Inter-network dependencies feed an upstream node's p_f into downstream
entry nodes, combined by independence.  Independence is assumed
throughout; on tree-shaped layers the per-node p_f is exact, on shapes
with shared feeders it is exact only where noted (redundancy groups
fold shared feeders once).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ConvergenceError
from .hazards import combine_independent, joint_redundant_failure
from .model import (
    Network,
    SystemModel,
    chain_nodes,
    enumerate_chains,
    inflow_parents,
    topological_order,
)

FIXED_POINT_TOL = 1e-10
FIXED_POINT_MAX_ITER = 1000
_DAMPING = 0.5


@dataclass(frozen=True)
class ExternalInput:
    """Inter-network input arriving at one node: combined probability
    plus the identity of the upstream feeders (used to fold shared
    feeders of a redundancy group only once)."""

    probability: float = 0.0
    sources: frozenset = frozenset()


@dataclass
class NodeProbabilities:
    p_sf: float
    p_cf: float
    p_f: float


@dataclass
class LayerState:
    """Per-layer propagation result."""

    label: str
    p_cf: dict[str, float]
    p_f: dict[str, float]
    participants: list[str]
    survival: float


@dataclass
class NetworkState:
    id: str
    nodes: dict[str, NodeProbabilities]
    layers: list[LayerState]
    p_occ: list[float]
    loc: float


@dataclass
class SystemState:
    networks: dict[str, NetworkState]
    iterations: int = 1
    converged: bool = True


def _union(*ps: float) -> float:
    return combine_independent([p for p in ps if p > 0.0])


def _group_blocks(members, parent_of, pf_parent, ext):
    """Partition group members by their input sources.

    Returns [(block input probability, [member ids])].  Members sharing
    the same intra-layer parent and external feeders form one block, so
    a shared feeder is counted once in the joint failure.
    """
    blocks: dict = {}
    for m in members:
        parent = parent_of.get(m)
        ext_in = ext.get(m)
        key = (parent, ext_in.sources if ext_in else frozenset())
        q = 0.0
        if parent is not None:
            q = pf_parent(parent)
        if ext_in is not None:
            q = _union(q, ext_in.probability)
        blocks.setdefault(key, (q, []))[1].append(m)
    return list(blocks.values())


def _group_failure(members, p_sf, parent_of, pf_parent, ext) -> float:
    """Joint failure of a redundancy group as seen downstream.

    Product over feeder blocks of union(block input, prod member p_sf):
    within a block either the shared input is down or every member
    failed by itself; blocks are independent of one another.
    """
    out = 1.0
    for q_in, block_members in _group_blocks(members, parent_of, pf_parent, ext):
        joint_self = joint_redundant_failure([p_sf[m] for m in block_members])
        out *= _union(q_in, joint_self)
    return out


def propagate_layer(
    network: Network,
    config_index: int,
    p_sf: dict[str, float],
    external: Optional[dict[str, ExternalInput]] = None,
) -> dict[str, NodeProbabilities]:
    """Per-node failure probabilities within one configuration.

    p_cf(node) = union(external input, supplier failure); the supplier
    failure is the parent's p_f, or the group joint failure when the
    parents form a redundancy group.  p_f = 1 - (1-p_sf)(1-p_cf).
    """
    ext = external or {}
    config = network.configurations[config_index]
    order = topological_order(network, config)
    parents = inflow_parents(network, config)
    groups = network.groups()

    p_cf: dict[str, float] = {}
    p_f: dict[str, float] = {}

    # unique intra-layer parent per group member (validation guarantees
    # at most one logical supplier)
    parent_of = {
        nid: plist[0] if plist else None for nid, plist in parents.items()
    }

    for nid in order:
        plist = parents.get(nid, [])
        supplier_term = 0.0
        if plist:
            member_groups = {
                network.node(p).redundancy_group
                for p in plist
                if network.node(p).redundancy_group
            }
            if member_groups:
                # parents form one redundancy group (validated); only the
                # members actually feeding this node count
                gname = next(iter(member_groups))
                members = [m for m in plist if m in groups[gname]]
                supplier_term = _group_failure(
                    members, p_sf, parent_of, lambda p: p_f[p], ext
                )
            elif len(plist) > 1:
                # invalid under the single-supplier rule (validation flags
                # it); treat every feeder as required
                supplier_term = _union(*(p_f[p] for p in plist))
            else:
                supplier_term = p_f[plist[0]]
        ext_in = ext.get(nid)
        cf = _union(supplier_term, ext_in.probability if ext_in else 0.0)
        sf = p_sf.get(nid, 0.0)
        p_cf[nid] = cf
        p_f[nid] = _union(sf, cf)

    out = {}
    for nid in network.node_ids:
        out[nid] = NodeProbabilities(
            p_sf=p_sf.get(nid, 0.0),
            p_cf=p_cf.get(nid, 0.0),
            p_f=p_f.get(nid, _union(p_sf.get(nid, 0.0), 0.0)),
        )
    return out


def layer_survival(
    network: Network,
    config_index: int,
    p_sf: dict[str, float],
    external: Optional[dict[str, ExternalInput]] = None,
) -> LayerState:
    """Full-service survival S of one configuration.

    Product over the union of chain nodes of the local survival
    (1 - p_sf united with external input at entry nodes), counting each
    node once; redundancy groups contribute 1 - joint failure, with
    external feeder blocks folded once (intra-layer parents are already
    separate chain participants).  Degraded layers and layers missing a
    target have S = 0.
    """
    ext = external or {}
    config = network.configurations[config_index]
    probs = propagate_layer(network, config_index, p_sf, external)
    participants = chain_nodes(network, config_index)

    chains = enumerate_chains(network, config_index)
    reached = {c[-1] for c in chains}
    degraded = config.degraded or any(t not in reached for t in network.targets)
    if degraded or not participants:
        return LayerState(
            label=config.label,
            p_cf={n: probs[n].p_cf for n in network.node_ids},
            p_f={n: probs[n].p_f for n in network.node_ids},
            participants=participants,
            survival=0.0,
        )

    groups = network.groups()
    in_group = {
        m: g for g, members in groups.items() for m in members
    }
    survival = 1.0
    done_groups = set()
    for nid in participants:
        g = in_group.get(nid)
        if g is None:
            ext_in = ext.get(nid)
            p_local = _union(
                p_sf.get(nid, 0.0), ext_in.probability if ext_in else 0.0
            )
            survival *= 1.0 - p_local
        elif g not in done_groups:
            done_groups.add(g)
            members = [m for m in groups[g] if m in participants]
            # external blocks only: intra-layer parents already multiply
            # into the product as their own participants
            fail = _group_failure(
                members, p_sf, {m: None for m in members}, lambda p: 0.0, ext
            )
            survival *= 1.0 - fail
    return LayerState(
        label=config.label,
        p_cf={n: probs[n].p_cf for n in network.node_ids},
        p_f={n: probs[n].p_f for n in network.node_ids},
        participants=participants,
        survival=survival,
    )


def configuration_occurrence(survivals: list[float]) -> tuple[list[float], float]:
    """Occurrence probability per layer and loss of connection.

    p_occ_k = S_k * prod_{j<k}(1 - S_j); loc = 1 - sum(p_occ).  The sum
    telescopes to 1 - prod(1 - S_k), so 0 <= sum <= 1 always holds.
    """
    p_occ = []
    upstream_out = 1.0
    for s in survivals:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"survival {s} outside [0, 1]")
        p_occ.append(s * upstream_out)
        upstream_out *= 1.0 - s
    return p_occ, 1.0 - sum(p_occ)


def couple_layers_prob(
    dep_edges: list[tuple[str, str]],
    upstream_pf: dict[str, float],
    local: Optional[dict[str, ExternalInput]] = None,
) -> dict[str, ExternalInput]:
    """Route upstream failure probabilities across a dependency.

    Each downstream node unites its existing input with the p_f of
    every upstream feeder pointing at it (independence), keeping the
    feeder identities for group folding.
    """
    out: dict[str, ExternalInput] = dict(local or {})
    for up, down in dep_edges:
        prev = out.get(down, ExternalInput())
        out[down] = ExternalInput(
            probability=_union(prev.probability, upstream_pf[up]),
            sources=prev.sources | {up},
        )
    return out


def _solve_network(
    network: Network,
    p_sf: dict[str, float],
    external: dict[str, ExternalInput],
) -> NetworkState:
    layers = [
        layer_survival(network, k, p_sf, external)
        for k in range(len(network.configurations))
    ]
    p_occ, loc = configuration_occurrence([l.survival for l in layers])

    nodes: dict[str, NodeProbabilities] = {}
    for nid in network.node_ids:
        member_layers = [layer for layer in layers if nid in layer.participants]
        if member_layers:
            # a node is cut off when every configuration that could feed
            # it is broken upstream (routes treated as independent); the
            # product keeps p_f monotone in every p_sf, which an
            # occupancy-weighted mean is not
            cf = 1.0
            for layer in member_layers:
                cf *= layer.p_cf[nid]
        else:
            ext_in = external.get(nid)
            cf = ext_in.probability if ext_in else 0.0
        sf = p_sf.get(nid, 0.0)
        nodes[nid] = NodeProbabilities(p_sf=sf, p_cf=cf, p_f=_union(sf, cf))
    return NetworkState(id=network.id, nodes=nodes, layers=layers, p_occ=p_occ, loc=loc)


def _dependency_order(model: SystemModel) -> tuple[list[str], bool]:
    """Network ids in dependency order; second value is True when the
    dependency graph is acyclic (single sweep suffices)."""
    ids = [n.id for n in model.networks]
    edges = {(d.from_network, d.to_network) for d in model.dependencies}
    indeg = {i: 0 for i in ids}
    for a, b in edges:
        indeg[b] += 1
    order = []
    queue = [i for i in ids if indeg[i] == 0]
    indeg_work = dict(indeg)
    while queue:
        n = queue.pop(0)
        order.append(n)
        for a, b in edges:
            if a == n:
                indeg_work[b] -= 1
                if indeg_work[b] == 0:
                    queue.append(b)
    if len(order) == len(ids):
        return order, True
    # cyclic: keep declaration order for the sweep
    return ids, False


def solve_system(model: SystemModel, p_sf: dict[str, float]) -> SystemState:
    """Propagate self-failure probabilities through every network.

    Networks are processed in dependency order; cyclic dependencies are
    resolved by fixed-point iteration on the p_f vectors (tolerance
    1e-10, damping 0.5 when the residual grows, iteration cap 1000).
    """
    order, acyclic = _dependency_order(model)
    deps_to: dict[str, list] = {net.id: [] for net in model.networks}
    for dep in model.dependencies:
        deps_to[dep.to_network].append(dep)

    pf_global: dict[str, float] = {nid: p_sf.get(nid, 0.0) for nid in model.all_node_ids()}
    states: dict[str, NetworkState] = {}

    def sweep() -> float:
        delta = 0.0
        for net_id in order:
            network = model.network(net_id)
            external: dict[str, ExternalInput] = {}
            for dep in deps_to[net_id]:
                external = couple_layers_prob(dep.edges, pf_global, external)
            state = _solve_network(network, p_sf, external)
            states[net_id] = state
            for nid, np_ in state.nodes.items():
                delta = max(delta, abs(np_.p_f - pf_global[nid]))
                pf_global[nid] = np_.p_f
        return delta

    if acyclic:
        sweep()
        return SystemState(networks=states, iterations=1, converged=True)

    prev_delta = float("inf")
    damped = False
    for it in range(1, FIXED_POINT_MAX_ITER + 1):
        before = dict(pf_global)
        delta = sweep()
        if damped:
            for nid in pf_global:
                pf_global[nid] = before[nid] + _DAMPING * (pf_global[nid] - before[nid])
            delta = max(
                abs(pf_global[nid] - before[nid]) for nid in pf_global
            ) if pf_global else 0.0
        if delta < FIXED_POINT_TOL:
            return SystemState(networks=states, iterations=it, converged=True)
        if delta > prev_delta and not damped:
            damped = True  # oscillation: halve the update from here on
        prev_delta = delta
    raise ConvergenceError(
        f"dependency fixed point did not converge within {FIXED_POINT_MAX_ITER} iterations"
    )


def node_importance(
    model: SystemModel,
    p_sf,
    node_id: str,
    target_id: str,
):
    """Importance of a node for a target: p_f(target) as given minus
    p_f(target) with the node's self-failure forced to zero.

    p_sf may be a single {node: probability} map (returns a float) or a
    sequence of maps (returns one float per entry).
    """
    def single(pmap: dict[str, float]) -> float:
        base = solve_system(model, pmap)
        muted = dict(pmap)
        muted[node_id] = 0.0
        alt = solve_system(model, muted)
        net = model.node_network(target_id)
        return (
            base.networks[net.id].nodes[target_id].p_f
            - alt.networks[net.id].nodes[target_id].p_f
        )

    if isinstance(p_sf, dict):
        return single(p_sf)
    return [single(pmap) for pmap in p_sf]
