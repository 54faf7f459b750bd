"""Operations shared by the HTTP service and the CLI.

Each op takes a parsed ScenarioDocument (plus options) and returns a
JSON-serializable dict, so the CLI local path and the HTTP handlers
produce identical payloads.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Optional

from ..engine import importance_series, run_timeline
from ..errors import StructuralMismatchError
from ..model import TARGET
from ..pra import (
    eval_event_tree,
    eval_fault_tree,
    iim_eta_equivalence,
    iim_or_equivalence,
    node_from,
    Branch,
    EventTree,
    FaultTree,
)
from ..cascade import solve_system
from ..scenario import (
    ScenarioDocument,
    list_scenarios,
    report_to_json_dict,
    resolve_scenario,
    parse_scenario,
)
from ..model import validate_topology

PRA_TOL = 1e-9


def load_document(scenario: Optional[str] = None, document: Optional[dict] = None) -> ScenarioDocument:
    """Resolve a scenario by name/path or parse an inline document."""
    if (scenario is None) == (document is None):
        raise ValueError("provide exactly one of scenario name/path or inline document")
    if scenario is not None:
        return resolve_scenario(scenario)
    return parse_scenario(document)


def op_list_scenarios() -> dict:
    return {"scenarios": list_scenarios()}


def op_validate(doc: ScenarioDocument) -> dict:
    model = doc.build_model()
    report = validate_topology(model)
    return {
        "ok": report.ok,
        "violations": [
            {"code": v.code, "where": v.where, "message": v.message}
            for v in report.violations
        ],
    }


def _apply_overrides(doc: ScenarioDocument, dt: Optional[float], autonomy_mode: Optional[str]):
    model = doc.build_model()
    timeline = doc.build_timeline()
    if dt is not None:
        timeline = replace(timeline, dt=float(dt))
    mode = autonomy_mode or doc.autonomy_mode
    return model, timeline, mode


def _checkpoint_summary(doc: ScenarioDocument, report) -> dict:
    """Network loc and per-configuration p_occ at the scenario's named
    checkpoint times (closest step at or before each)."""
    out = {}
    for label, t in doc.checkpoints.items():
        step = report.at(t)
        if step is None:
            continue
        nets = {}
        for net_id, net in step.state.networks.items():
            nets[net_id] = {
                "loc": net.loc,
                "p_occ": {
                    layer.label: p for layer, p in zip(net.layers, net.p_occ)
                },
            }
        out[label] = {"time": step.time, "networks": nets}
    return out


def op_run(
    doc: ScenarioDocument,
    dt: Optional[float] = None,
    autonomy_mode: Optional[str] = None,
    classic: Optional[bool] = None,
) -> dict:
    model, timeline, mode = _apply_overrides(doc, dt, autonomy_mode)
    want_classic = doc.classic_series if classic is None else classic
    report = run_timeline(model, doc.curves, timeline, autonomy_mode=mode,
                          classic_series=want_classic)
    return {
        "scenario": doc.name,
        "autonomy_mode": mode,
        "report": report_to_json_dict(report),
        "checkpoints": _checkpoint_summary(doc, report),
    }


def op_importance(
    doc: ScenarioDocument,
    node: str,
    target: str,
    autonomy_mode: Optional[str] = None,
) -> dict:
    mode = autonomy_mode or doc.autonomy_mode
    times, series = importance_series(
        doc.build_model, doc.build_timeline, doc.curves, node, target, mode
    )
    return {
        "node": node,
        "target": target,
        "times": times,
        "importance": series,
        "peak": max(series) if series else 0.0,
    }


def _base_psf(model, overrides: dict) -> dict:
    psf = {}
    for net in model.networks:
        for node in net.nodes:
            psf[node.id] = float(node.initial_psf)
    psf.update({k: float(v) for k, v in overrides.items()})
    return psf


def op_compare_pra(doc: ScenarioDocument, tol: float = PRA_TOL) -> dict:
    """Compare the scenario's fault-tree / event-tree definitions with
    the network model's own probabilities.

    OR groups check the redundancy identity (OR gate = series chain of
    failure events feeding one sink).  Fault trees bound to a (network,
    target) pair compare top-gate probability with the solved p_f of
    the target.  Event trees compare configuration-occupation
    probabilities with first-success sequence frequencies; trees that
    carry explicit (e.g. conditioned) branch probabilities are compared
    as given and are expected to disagree when those probabilities
    encode information outside the configuration model.
    """
    model = doc.build_model()
    pra = doc.pra
    comparisons = []

    for i, entry in enumerate(pra.get("or_events", [])):
        probs = entry["probabilities"] if isinstance(entry, dict) else list(entry)
        fta, iim, diff = iim_or_equivalence([float(p) for p in probs])
        comparisons.append(
            {
                "kind": "or_identity",
                "id": entry.get("id", f"or[{i}]") if isinstance(entry, dict) else f"or[{i}]",
                "fta": fta,
                "iim": iim,
                "max_diff": diff,
                "match": diff <= tol,
            }
        )

    for ft_spec in pra.get("fault_trees", []):
        tree = FaultTree(top=node_from(ft_spec["top"]))
        fta_p = eval_fault_tree(tree)
        result = {"kind": "fault_tree", "id": ft_spec.get("id", "fault_tree"), "fta": fta_p}
        if "network" in ft_spec and "target" in ft_spec:
            psf = _base_psf(model, ft_spec.get("p_sf", {}))
            state = solve_system(model, psf)
            iim_p = state.networks[ft_spec["network"]].nodes[ft_spec["target"]].p_f
            diff = abs(iim_p - fta_p)
            result.update({"iim": iim_p, "max_diff": diff, "match": diff <= tol})
        else:
            result.update({"max_diff": 0.0, "match": True})
        comparisons.append(result)

    for et_spec in pra.get("event_trees", []):
        network = model.network(et_spec["network"])
        psf = _base_psf(model, et_spec.get("p_sf", {}))
        local = {n.id: psf[n.id] for n in network.nodes}
        result = {
            "kind": "event_tree",
            "id": et_spec.get("id", "event_tree"),
            "conditioned": bool(et_spec.get("conditioned", False)),
        }
        explicit = et_spec.get("branch_probabilities")
        try:
            if explicit is not None:
                f = float(et_spec.get("initiating_frequency", 1.0))
                tree = EventTree(
                    initiating_frequency=f,
                    branches=[
                        Branch(label=f"branch-{k}", success_probability=float(p))
                        for k, p in enumerate(explicit)
                    ],
                )
                seqs = eval_event_tree(tree)
                eta = [s.frequency for s in seqs]
                from ..cascade import _solve_network  # same path the engine uses

                net_state = _solve_network(network, local, {})
                iim = [f * p for p in net_state.p_occ] + [f * net_state.loc]
                diff = max(abs(a - b) for a, b in zip(iim, eta))
            else:
                iim, eta, diff = iim_eta_equivalence(network, local)
            result.update(
                {"iim": iim, "eta": eta, "max_diff": diff, "match": diff <= tol}
            )
        except StructuralMismatchError as e:
            # no numeric comparison exists; report the shape problem
            result.update({"max_diff": None, "match": False, "reason": str(e)})
        comparisons.append(result)

    finite = [c["max_diff"] for c in comparisons if c["max_diff"] is not None]
    return {
        "ok": all(c["match"] for c in comparisons),
        "comparisons": comparisons,
        "max_diff": max(finite) if finite else 0.0,
        "count": len(comparisons),
    }


def op_plot_data(
    doc: ScenarioDocument,
    out_dir,
    dt: Optional[float] = None,
    autonomy_mode: Optional[str] = None,
) -> dict:
    """Per-network time-series CSVs for plotting: one occupancy file
    (p_occ per configuration + loc) and one node file (p_f per node)
    per network, plus a targets file (p_f of every target node)."""
    model, timeline, mode = _apply_overrides(doc, dt, autonomy_mode)
    report = run_timeline(model, doc.curves, timeline, autonomy_mode=mode)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def write_csv(path: Path, header: list[str], rows):
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
        written.append(str(path))

    first = report.steps[0].state
    for net_id, net0 in first.networks.items():
        labels = [layer.label for layer in net0.layers]
        header = ["time_h"] + [f"p_occ:{lab}" for lab in labels] + ["loc"]
        rows = []
        for step in report.steps:
            net = step.state.networks[net_id]
            rows.append([step.time] + list(net.p_occ) + [net.loc])
        write_csv(out_dir / f"{doc.name}__{net_id}__occupancy.csv", header, rows)

        node_ids = list(net0.nodes)
        header = ["time_h"] + [f"p_f:{nid}" for nid in node_ids]
        rows = []
        for step in report.steps:
            net = step.state.networks[net_id]
            rows.append([step.time] + [net.nodes[nid].p_f for nid in node_ids])
        write_csv(out_dir / f"{doc.name}__{net_id}__nodes.csv", header, rows)

    target_ids = [
        (net.id, n.id) for net in model.networks for n in net.nodes if n.kind == TARGET
    ]
    if target_ids:
        header = ["time_h"] + [f"p_f:{nid}" for _, nid in target_ids]
        rows = []
        for step in report.steps:
            rows.append(
                [step.time]
                + [step.state.networks[net_id].nodes[nid].p_f for net_id, nid in target_ids]
            )
        write_csv(out_dir / f"{doc.name}__targets.csv", header, rows)

    return {"scenario": doc.name, "files": written}
