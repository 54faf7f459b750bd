"""Temporal simulation: step a system model along a timeline.

Transmission within a step is immediate; the state at the end of one
step is the initial condition of the next.  Self-failure probabilities
only grow (failures persist): events add fragility terms by
independence, autonomy run-out adds the conditional increment of the
node's run-out curve as its duty clock advances.

Interventions append new configurations at the lowest hierarchy of a
network (recovery is modeled by adding supply paths, never by lowering
a probability).
"""

from __future__ import annotations

import bisect
import copy
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import classic
from .cascade import SystemState, solve_system
from .errors import ModelError
from .hazards import CurveLibrary, EventVector, self_failure
from .model import Configuration, SystemModel, TARGET, chain_nodes, validate_topology

EXPECTED = "expected"
DOMINANT = "dominant"
AUTONOMY_MODES = (EXPECTED, DOMINANT)
_GRID_EPS = 1e-9


@dataclass
class Intervention:
    """Append `configuration` to `network_id` at `time` (hours)."""

    time: float
    network_id: str
    configuration: Configuration


@dataclass
class Timeline:
    t0: float
    t_end: float
    dt: float
    events: list[EventVector] = field(default_factory=list)
    interventions: list[Intervention] = field(default_factory=list)

    def __post_init__(self):
        if self.dt <= 0:
            raise ModelError("dt must be > 0")
        if self.t_end < self.t0:
            raise ModelError("t_end must be >= t0")
        self.events = sorted(self.events, key=lambda e: e.time)
        self.interventions = sorted(self.interventions, key=lambda i: i.time)

    def grid(self) -> list[float]:
        times = []
        k = 0
        while True:
            t = self.t0 + k * self.dt
            if t > self.t_end + _GRID_EPS:
                break
            times.append(round(t, 9))
            k += 1
        return times


@dataclass
class StepRecord:
    time: float
    state: SystemState
    p_sf: dict[str, float]
    duty: dict[str, float]
    classic: Optional[dict] = None


@dataclass
class ProbabilityReport:
    """Time-indexed simulation output.

    steps[i].state holds per-node {p_sf, p_cf, p_f}, per-layer p_occ and
    per-network loc; steps[i].classic (when requested) holds the classic
    companion series (q, per-node decay scores, group inoperabilities,
    system score).
    """

    times: list[float]
    steps: list[StepRecord]

    def at(self, time: float) -> StepRecord:
        """Record at the last grid point <= time."""
        i = bisect.bisect_right([round(t, 9) for t in self.times], time + _GRID_EPS) - 1
        if i < 0:
            raise KeyError(f"no step at or before t={time}")
        return self.steps[i]


def _node_layers(model: SystemModel) -> dict[str, list[tuple[str, int]]]:
    """Which (network, layer) chains each node takes part in."""
    out: dict[str, list[tuple[str, int]]] = {}
    for net in model.networks:
        for k in range(len(net.configurations)):
            for nid in chain_nodes(net, k):
                out.setdefault(nid, []).append((net.id, k))
    return out


def autonomy_clock_advance(
    layers_of_node: list[tuple[str, int]],
    p_occ_by_network: dict[str, list[float]],
    dt: float,
    mode: str,
) -> float:
    """Duty-hours added over one step for a node with autonomy.

    expected: dt weighted by the total occurrence probability of the
    node's layers.  dominant: dt iff one of the node's layers is the
    serving layer of its network — the highest-priority layer with
    positive occurrence probability (the deterministic narrative: the
    system runs on the best alternative still able to serve, and
    temporal wear accrues to that layer's nodes at full rate).
    """
    if mode not in AUTONOMY_MODES:
        raise ModelError(f"unknown autonomy mode {mode!r}")
    if not layers_of_node:
        return 0.0
    if mode == EXPECTED:
        w = sum(
            p_occ_by_network[net_id][k]
            for net_id, k in layers_of_node
            if net_id in p_occ_by_network and k < len(p_occ_by_network[net_id])
        )
        return dt * min(w, 1.0)
    for net_id, k in layers_of_node:
        p_occ = p_occ_by_network.get(net_id)
        if not p_occ or k >= len(p_occ):
            continue
        serving = next((j for j, p in enumerate(p_occ) if p > 0.0), None)
        if serving == k:
            return dt
    return 0.0


def _classic_companion(model: SystemModel, p_sf: dict[str, float]) -> dict:
    """Classic inoperability series on the layer-0 topology.

    Builds one system-wide A (transpose of the ordinary adjacency plus
    dependency edges), applies the series-parallel correction, solves
    the joint damage vector and one perturbation scenario per node, and
    aggregates decay scores into the system score by node category
    (targets excluded).
    """
    ids = model.all_node_ids()
    idx = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    a = np.zeros((n, n))
    for net in model.networks:
        if not net.configurations:
            continue
        for u, v in net.configurations[0].edges:
            a[idx[v], idx[u]] = 1.0
    for dep in model.dependencies:
        for u, v in dep.edges:
            a[idx[v], idx[u]] = 1.0

    groups: dict[str, list[int]] = {}
    for net in model.networks:
        for gname, members in net.groups().items():
            groups[f"{net.id}/{gname}"] = [idx[m] for m in members]
    sp = classic.sp_vector(n, groups)

    c = np.array([p_sf.get(nid, 0.0) for nid in ids])
    joint = classic.damage_vector_sp(a, sp, c, groups)

    # one scenario per node: perturb only node i with its own c_i
    a_sp = a * sp[:, None]
    inv = np.linalg.inv(np.eye(n) - a_sp)
    per_node_q = inv * c[None, :]  # column i = q for node i's scenario
    dc = per_node_q.sum(axis=0)

    by_kind: dict[str, list[float]] = {}
    for nid in ids:
        net = model.node_network(nid)
        node = net.node(nid)
        if node.kind == TARGET:
            continue
        by_kind.setdefault(node.category, []).append(float(dc[idx[nid]]))
    sys_s = classic.system_score(by_kind) if by_kind else 0.0

    return {
        "q_raw": {nid: float(joint.raw[idx[nid]]) for nid in ids},
        "q": {nid: float(joint.clamped[idx[nid]]) for nid in ids},
        "dc_s": {nid: float(dc[idx[nid]]) for nid in ids},
        "groups": dict(joint.groups),
        "sys_s": float(sys_s),
    }


def run_timeline(
    model: SystemModel,
    curves: CurveLibrary,
    timeline: Timeline,
    autonomy_mode: str = EXPECTED,
    classic_series: bool = False,
) -> ProbabilityReport:
    """Deterministic step-by-step simulation.

    Per step: advance autonomy clocks from the previous occurrence
    snapshot, fold in events landing on this step (first grid point at
    or after the event time), apply due interventions, solve the system,
    record.  Raises ModelError if the model fails topology validation.
    """
    report_check = validate_topology(model)
    if not report_check.ok:
        first = report_check.violations[0]
        raise ModelError(
            f"model failed validation ({len(report_check.violations)} violations; "
            f"first: {first.where}: {first.message})"
        )
    if autonomy_mode not in AUTONOMY_MODES:
        raise ModelError(f"unknown autonomy mode {autonomy_mode!r}")

    psf: dict[str, float] = {}
    duty: dict[str, float] = {}
    for net in model.networks:
        for node in net.nodes:
            psf[node.id] = node.initial_psf
            duty[node.id] = 0.0

    times = timeline.grid()
    events = list(timeline.events)
    interventions = list(timeline.interventions)
    node_layers = _node_layers(model)

    steps: list[StepRecord] = []
    prev_occ: dict[str, list[float]] = {}
    prev_t: Optional[float] = None

    for t in times:
        # 1. autonomy clocks (previous step's occurrence snapshot)
        duty_prev = dict(duty)
        if prev_t is not None:
            for net in model.networks:
                for node in net.nodes:
                    if node.autonomy is None:
                        continue
                    duty[node.id] += autonomy_clock_advance(
                        node_layers.get(node.id, []),
                        prev_occ,
                        timeline.dt,
                        autonomy_mode,
                    )

        # 2. events due at this grid point
        acting: dict[str, list[tuple[str, float]]] = {}
        while events and events[0].time <= t + _GRID_EPS:
            ev = events.pop(0)
            for nid, (hazard, value) in ev.intensities.items():
                acting.setdefault(nid, []).append((hazard, value))

        for net in model.networks:
            for node in net.nodes:
                if node.id in acting or node.autonomy is not None:
                    psf[node.id] = self_failure(
                        node,
                        acting.get(node.id, []),
                        psf[node.id],
                        duty[node.id],
                        curves,
                        duty_hours_prev=duty_prev[node.id],
                    )

        # 3. interventions due at this grid point
        while interventions and interventions[0].time <= t + _GRID_EPS:
            iv = interventions.pop(0)
            model.network(iv.network_id).add_configuration(iv.configuration)
            node_layers = _node_layers(model)

        # 4. solve and record
        state = solve_system(model, psf)
        prev_occ = {net_id: st.p_occ for net_id, st in state.networks.items()}
        steps.append(
            StepRecord(
                time=t,
                state=state,
                p_sf=dict(psf),
                duty=dict(duty),
                classic=_classic_companion(model, psf) if classic_series else None,
            )
        )
        prev_t = t

    return ProbabilityReport(times=times, steps=steps)


def run_ensemble(
    model: SystemModel,
    curves: CurveLibrary,
    timelines: list[tuple[Timeline, float]],
    autonomy_mode: str = EXPECTED,
    classic_series: bool = False,
) -> ProbabilityReport:
    """Weighted aggregate over alternative timelines (e.g. hazard
    severities sampled from a hazard curve, weights supplied by the
    caller).

    Every member runs on its own copy of the model (runs mutate the
    model through interventions).  Weights are normalized to sum 1;
    all-zero or negative weights raise ValueError.
    """
    if not timelines:
        raise ValueError("no timelines to run")
    reports = []
    weights = []
    for tl, w in timelines:
        reports.append(
            run_timeline(
                copy.deepcopy(model),
                curves,
                tl,
                autonomy_mode=autonomy_mode,
                classic_series=classic_series,
            )
        )
        weights.append(w)
    return combine_reports(reports, weights)


def combine_reports(
    reports: list[ProbabilityReport], weights: list[float]
) -> ProbabilityReport:
    """Weighted mean of structurally identical reports.

    Weights are normalized to sum 1; all-zero weights raise ValueError.
    Returns a report whose per-node probabilities, per-layer p_occ and
    loc are the weighted means (classic series are averaged when present
    in every input).
    """
    if not reports:
        raise ValueError("no reports to combine")
    if len(weights) != len(reports):
        raise ValueError("one weight per report required")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be >= 0")
    total = sum(weights)
    if total == 0:
        raise ValueError("weights sum to zero")
    w = [x / total for x in weights]

    base = reports[0]
    for r in reports[1:]:
        if r.times != base.times:
            raise ValueError("reports do not share a time grid")

    out = copy.deepcopy(base)
    for i, step in enumerate(out.steps):
        for net_id, net_state in step.state.networks.items():
            for nid, np_ in net_state.nodes.items():
                np_.p_sf = sum(
                    wk * r.steps[i].state.networks[net_id].nodes[nid].p_sf
                    for wk, r in zip(w, reports)
                )
                np_.p_cf = sum(
                    wk * r.steps[i].state.networks[net_id].nodes[nid].p_cf
                    for wk, r in zip(w, reports)
                )
                np_.p_f = sum(
                    wk * r.steps[i].state.networks[net_id].nodes[nid].p_f
                    for wk, r in zip(w, reports)
                )
            net_state.p_occ = [
                sum(
                    wk * r.steps[i].state.networks[net_id].p_occ[k]
                    for wk, r in zip(w, reports)
                )
                for k in range(len(net_state.p_occ))
            ]
            net_state.loc = sum(
                wk * r.steps[i].state.networks[net_id].loc for wk, r in zip(w, reports)
            )
            for k, layer in enumerate(net_state.layers):
                layer.survival = sum(
                    wk * r.steps[i].state.networks[net_id].layers[k].survival
                    for wk, r in zip(w, reports)
                )
        if step.classic is not None and all(
            r.steps[i].classic is not None for r in reports
        ):
            for key in ("q_raw", "q", "dc_s", "groups"):
                step.classic[key] = {
                    k: sum(wk * r.steps[i].classic[key][k] for wk, r in zip(w, reports))
                    for k in step.classic[key]
                }
            step.classic["sys_s"] = sum(
                wk * r.steps[i].classic["sys_s"] for wk, r in zip(w, reports)
            )
    return out


def importance_series(
    model_factory,
    timeline_factory,
    curves: CurveLibrary,
    node_id: str,
    target_id: str,
    autonomy_mode: str = EXPECTED,
) -> tuple[list[float], list[float]]:
    """Importance of a node for a target along a timeline.

    Runs the timeline as given and once more with the node exempted
    from all hazards (fragility, autonomy, initial failure); returns
    (times, p_f difference per step).  Factories must build fresh
    model/timeline objects because runs mutate them (interventions).
    """
    base = run_timeline(model_factory(), curves, timeline_factory(), autonomy_mode)

    muted_model = model_factory()
    found = None
    for net in muted_model.networks:
        for node in net.nodes:
            if node.id == node_id:
                node.fragility = {}
                node.autonomy = None
                node.initial_psf = 0.0
                found = net.id
    if found is None:
        raise KeyError(f"node {node_id!r} not in model")
    muted_tl = timeline_factory()
    muted_tl.events = [
        EventVector(
            time=ev.time,
            intensities={k: v for k, v in ev.intensities.items() if k != node_id},
        )
        for ev in muted_tl.events
    ]
    alt = run_timeline(muted_model, curves, muted_tl, autonomy_mode)

    target_net = None
    for net in muted_model.networks:
        if target_id in net._by_id:
            target_net = net.id
    if target_net is None:
        raise KeyError(f"target {target_id!r} not in model")

    series = [
        b.state.networks[target_net].nodes[target_id].p_f
        - a.state.networks[target_net].nodes[target_id].p_f
        for b, a in zip(base.steps, alt.steps)
    ]
    return base.times, series
