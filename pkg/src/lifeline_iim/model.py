"""Graph model for interdependent lifeline networks.

A network is a set of nodes plus an ordered stack of configurations.
Each configuration is one way the network can route service from source
nodes to target nodes (edge list, orientation only, no edge features).
Configuration order encodes supply hierarchy: index 0 is the ordinary
supply, higher indices are successively lower-priority backups.

Within one configuration every node draws from at most one supplier.
Members of a redundancy group are interchangeable parallels and count
as a single logical supplier for that rule.

Networks are tied together by inter-network dependencies: node-to-node
edges that feed the failure probability of an upstream node into a
downstream network's entry node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ModelError

SOURCE = "source"
INTERMEDIATE = "intermediate"
TARGET = "target"
NODE_KINDS = (SOURCE, INTERMEDIATE, TARGET)


@dataclass
class Node:
    """One component of a lifeline network.

    site maps hazard kind -> exposure intensity for site-driven events
    (a node exposed to no intensity for a hazard kind is exempt from
    it).  fragility maps hazard kind -> fragility curve name, autonomy
    names an autonomy curve and autonomy_capacity_h optionally overrides
    the curve's capacity.  initial_psf seeds the carried self-failure
    probability (e.g. a valve known to be stuck closed).
    """

    id: str
    kind: str
    category: str = ""
    site: dict[str, float] = field(default_factory=dict)
    fragility: dict[str, str] = field(default_factory=dict)
    autonomy: Optional[str] = None
    redundancy_group: Optional[str] = None
    partial_source: bool = False
    initial_psf: float = 0.0

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ModelError(f"node {self.id!r}: unknown kind {self.kind!r}")
        if not 0.0 <= self.initial_psf <= 1.0:
            raise ModelError(f"node {self.id!r}: initial_psf outside [0, 1]")
        if not self.category:
            self.category = self.kind


@dataclass
class Configuration:
    """One supply layer: a directed edge list over the network's nodes."""

    label: str
    edges: list[tuple[str, str]]
    degraded: bool = False

    def __post_init__(self):
        self.edges = [tuple(e) for e in self.edges]


@dataclass
class Network:
    id: str
    nodes: list[Node]
    configurations: list[Configuration]

    def __post_init__(self):
        self._by_id = {n.id: n for n in self.nodes}
        if len(self._by_id) != len(self.nodes):
            raise ModelError(f"network {self.id!r}: duplicate node ids")

    def node(self, node_id: str) -> Node:
        return self._by_id[node_id]

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    @property
    def targets(self) -> list[str]:
        return [n.id for n in self.nodes if n.kind == TARGET]

    @property
    def sources(self) -> list[str]:
        return [n.id for n in self.nodes if n.kind == SOURCE]

    def groups(self) -> dict[str, list[str]]:
        """Redundancy groups as {group name: member node ids}."""
        out: dict[str, list[str]] = {}
        for n in self.nodes:
            if n.redundancy_group:
                out.setdefault(n.redundancy_group, []).append(n.id)
        return out

    def add_configuration(self, config: Configuration) -> int:
        """Append a configuration at the lowest hierarchy; returns its index."""
        self.configurations.append(config)
        return len(self.configurations) - 1


@dataclass
class InterNetworkDependency:
    """Directed node-to-node coupling between two networks.

    edges lists (upstream node id, downstream node id) pairs; the
    equivalent boolean incidence matrix (rows = upstream network nodes,
    columns = downstream network nodes) is available via matrix().
    """

    from_network: str
    to_network: str
    edges: list[tuple[str, str]]

    def __post_init__(self):
        self.edges = [tuple(e) for e in self.edges]

    def matrix(self, upstream_ids: list[str], downstream_ids: list[str]):
        import numpy as np

        m = np.zeros((len(upstream_ids), len(downstream_ids)), dtype=bool)
        up = {nid: i for i, nid in enumerate(upstream_ids)}
        down = {nid: j for j, nid in enumerate(downstream_ids)}
        for a, b in self.edges:
            m[up[a], down[b]] = True
        return m


@dataclass
class SystemModel:
    networks: list[Network]
    dependencies: list[InterNetworkDependency] = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {n.id: n for n in self.networks}
        if len(self._by_id) != len(self.networks):
            raise ModelError("duplicate network ids")

    def network(self, network_id: str) -> Network:
        return self._by_id[network_id]

    def node_network(self, node_id: str) -> Optional[Network]:
        for net in self.networks:
            if node_id in net._by_id:
                return net
        return None

    def all_node_ids(self) -> list[str]:
        return [nid for net in self.networks for nid in net.node_ids]


@dataclass
class Violation:
    code: str
    where: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, where: str, message: str):
        self.violations.append(Violation(code, where, message))


def _adjacency(network: Network, config: Configuration) -> dict[str, list[str]]:
    """Outflow adjacency {from: [to, ...]} for one configuration."""
    adj: dict[str, list[str]] = {nid: [] for nid in network.node_ids}
    for a, b in config.edges:
        adj.setdefault(a, []).append(b)
    return adj


def inflow_parents(network: Network, config: Configuration) -> dict[str, list[str]]:
    """Inflow parents {node: [supplier, ...]} for one configuration."""
    parents: dict[str, list[str]] = {nid: [] for nid in network.node_ids}
    for a, b in config.edges:
        parents.setdefault(b, []).append(a)
    return parents


def effective_suppliers(network: Network, parents: Iterable[str]) -> list[object]:
    """Collapse a parent list into logical suppliers.

    Parents that are members of the same redundancy group collapse into
    one ("group", name) supplier; everything else stays ("node", id).
    """
    seen = []
    for p in parents:
        g = network.node(p).redundancy_group if p in network._by_id else None
        key = ("group", g) if g else ("node", p)
        if key not in seen:
            seen.append(key)
    return seen


def topological_order(network: Network, config: Configuration) -> list[str]:
    """Kahn topological order over the configuration's edges.

    Raises ModelError when the configuration contains a cycle; use
    validate_topology for a non-throwing check.
    """
    adj = _adjacency(network, config)
    indeg = {nid: 0 for nid in adj}
    for a, outs in adj.items():
        for b in outs:
            indeg[b] = indeg.get(b, 0) + 1
    queue = sorted([n for n, d in indeg.items() if d == 0])
    order = []
    while queue:
        n = queue.pop(0)
        order.append(n)
        for b in adj.get(n, []):
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
        queue.sort()
    if len(order) != len(indeg):
        cyc = sorted(n for n, d in indeg.items() if d > 0)
        raise ModelError(
            f"configuration {config.label!r} contains a cycle through {cyc}"
        )
    return order


def _find_cycle_nodes(config: Configuration) -> list[str]:
    adj: dict[str, list[str]] = {}
    indeg: dict[str, int] = {}
    for a, b in config.edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, [])
        indeg[b] = indeg.get(b, 0) + 1
        indeg.setdefault(a, 0)
    queue = [n for n, d in indeg.items() if d == 0]
    count = 0
    while queue:
        n = queue.pop()
        count += 1
        for b in adj[n]:
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
    return sorted(n for n, d in indeg.items() if d > 0)


def reachable_from(network: Network, config: Configuration, start: str) -> set[str]:
    adj = _adjacency(network, config)
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for b in adj.get(n, []):
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return seen


def enumerate_chains(network: Network, config_index: int) -> list[list[str]]:
    """All source-to-target paths of one configuration, as node id lists.

    Redundant parallels produce one chain per member; networks with
    several targets produce one chain per (source path, target) pair.
    """
    config = network.configurations[config_index]
    adj = _adjacency(network, config)
    targets = set(network.targets)
    chains: list[list[str]] = []

    # only nodes with no inflow in this configuration can start a chain,
    # and they must be declared sources of the network
    parents = inflow_parents(network, config)
    starts = [
        nid
        for nid in network.node_ids
        if network.node(nid).kind == SOURCE and not parents.get(nid)
        and adj.get(nid)
    ]

    def walk(path: list[str]):
        n = path[-1]
        if n in targets:
            chains.append(list(path))
            return
        for b in sorted(adj.get(n, [])):
            if b in path:  # cycle guard; validation reports it separately
                continue
            path.append(b)
            walk(path)
            path.pop()

    for s in sorted(starts):
        walk([s])
    return chains


def chain_nodes(network: Network, config_index: int) -> list[str]:
    """Union of nodes appearing on any source-to-target chain, in the
    network's node order."""
    on_chain = set()
    for chain in enumerate_chains(network, config_index):
        on_chain.update(chain)
    return [nid for nid in network.node_ids if nid in on_chain]


def validate_topology(model: SystemModel) -> ValidationReport:
    """Structural validation; violations are returned as data.

    Checks: globally unique node ids, edge endpoints exist, node kinds
    respect orientation (sources have no inflow, targets no outflow),
    at most one logical supplier per node per configuration, acyclic
    configurations, target reachability unless the configuration is
    flagged degraded, redundancy group members in one network, full
    target coverage by non-partial sources, and dependency endpoint
    networks.
    """
    report = ValidationReport()

    seen_nodes: dict[str, str] = {}
    for net in model.networks:
        for n in net.nodes:
            if n.id in seen_nodes:
                report.add(
                    "duplicate-node-id",
                    f"network {net.id}",
                    f"node id {n.id!r} already used in network {seen_nodes[n.id]!r}",
                )
            seen_nodes[n.id] = net.id

    for net in model.networks:
        where_net = f"network {net.id}"
        if not net.targets:
            report.add("no-targets", where_net, "network declares no target node")
        groups = net.groups()
        for gname, members in groups.items():
            if len(members) < 2:
                report.add(
                    "undersized-group",
                    where_net,
                    f"redundancy group {gname!r} has fewer than two members",
                )

        for k, config in enumerate(net.configurations):
            where = f"network {net.id}, configuration {k} ({config.label})"
            ids = set(net.node_ids)
            bad_edge = False
            for a, b in config.edges:
                if a not in ids or b not in ids:
                    report.add(
                        "unknown-edge-endpoint",
                        where,
                        f"edge ({a!r}, {b!r}) references a node outside the network",
                    )
                    bad_edge = True
            if bad_edge:
                continue

            cyc = _find_cycle_nodes(config)
            if cyc:
                report.add(
                    "cycle",
                    where,
                    f"configuration contains a cycle through nodes {cyc}",
                )
                continue

            parents = inflow_parents(network=net, config=config)
            for nid, plist in parents.items():
                node = net.node(nid)
                if plist and node.kind == SOURCE:
                    report.add(
                        "source-with-inflow",
                        where,
                        f"source node {nid!r} has inflow edges",
                    )
                suppliers = effective_suppliers(net, plist)
                if len(suppliers) > 1:
                    report.add(
                        "multiple-suppliers",
                        where,
                        f"node {nid!r} draws from {len(suppliers)} suppliers; "
                        "at most one node or one redundancy group is allowed",
                    )
            outs = _adjacency(net, config)
            for nid, olist in outs.items():
                if olist and net.node(nid).kind == TARGET:
                    report.add(
                        "target-with-outflow",
                        where,
                        f"target node {nid!r} has outflow edges",
                    )

            chains = enumerate_chains(net, k)
            reached_targets = {c[-1] for c in chains}
            missing = [t for t in net.targets if t not in reached_targets]
            if missing and not config.degraded:
                report.add(
                    "unreachable-target",
                    where,
                    f"targets {missing} unreachable from any source "
                    "(flag the configuration degraded if intended)",
                )

            # a non-partial source taking part in the configuration must
            # reach every target the configuration serves
            for s in net.sources:
                if not outs.get(s):
                    continue
                node = net.node(s)
                if node.partial_source:
                    continue
                reach = reachable_from(net, config, s)
                unmet = [t for t in reached_targets if t not in reach]
                if unmet:
                    report.add(
                        "partial-source-unflagged",
                        where,
                        f"source {s!r} feeds only part of the served targets "
                        f"(misses {unmet}); mark it partial_source if intended",
                    )

    net_ids = {net.id for net in model.networks}
    for dep in model.dependencies:
        where = f"dependency {dep.from_network} -> {dep.to_network}"
        if dep.from_network not in net_ids or dep.to_network not in net_ids:
            report.add("unknown-network", where, "dependency references unknown network")
            continue
        if dep.from_network == dep.to_network:
            report.add("self-dependency", where, "dependency must join two networks")
            continue
        up = model.network(dep.from_network)
        down = model.network(dep.to_network)
        for a, b in dep.edges:
            if a not in up._by_id:
                report.add(
                    "unknown-edge-endpoint", where,
                    f"upstream node {a!r} not in network {up.id!r}",
                )
            if b not in down._by_id:
                report.add(
                    "unknown-edge-endpoint", where,
                    f"downstream node {b!r} not in network {down.id!r}",
                )

    return report
