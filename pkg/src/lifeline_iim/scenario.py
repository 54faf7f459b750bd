"""Scenario documents: JSON schema, parsing, bundled scenarios, report
export.

A scenario document is one JSON object:

  schema_version   integer, currently 1
  name/description free text
  curves           {"fragility": {name: {...}}, "autonomy": {name: {...}}}
  curves_file      optional path (relative to the document) merged in
  model            networks, nodes, configurations, dependencies
  timeline         t0/t_end/dt, events, interventions
  analysis         autonomy_mode, classic_series, checkpoints, targets
  pra              optional fault trees / event trees

Events either list explicit intensities ({"node": ["hazard", value]})
or expand from the node site table ({"hazard": h, "from_site": true}),
in which case every node exposed to that hazard kind receives its site
intensity (nodes without a site entry are exempt).

Reports export to CSV (long format: time_h, entity_kind, entity_id,
quantity, value; 12 significant digits) or JSON (nested by time step,
bit-exact round trip).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .engine import (
    EXPECTED,
    AUTONOMY_MODES,
    Intervention,
    ProbabilityReport,
    Timeline,
)
from .errors import ScenarioParseError
from .hazards import AutonomyCurve, CurveLibrary, EventVector, FragilityCurve
from .model import (
    Configuration,
    InterNetworkDependency,
    Network,
    Node,
    SystemModel,
)

SCHEMA_VERSION = 1
SCENARIO_DIR_ENV = "LIFELINE_IIM_SCENARIO_DIR"
CSV_HEADER = "time_h,entity_kind,entity_id,quantity,value"


@dataclass
class ScenarioDocument:
    """Parsed scenario. build_model()/build_timeline() return fresh
    objects on every call (runs mutate them through interventions)."""

    name: str
    description: str
    schema_version: int
    curves: CurveLibrary
    raw: dict
    path: Optional[Path] = None
    analysis: dict = field(default_factory=dict)
    pra: dict = field(default_factory=dict)

    def build_model(self) -> SystemModel:
        return _build_model(self.raw["model"])

    def build_timeline(self) -> Timeline:
        return _build_timeline(self.raw["timeline"], self.raw["model"])

    @property
    def autonomy_mode(self) -> str:
        return self.analysis.get("autonomy_mode", EXPECTED)

    @property
    def classic_series(self) -> bool:
        return bool(self.analysis.get("classic_series", False))

    @property
    def checkpoints(self) -> dict[str, float]:
        return dict(self.analysis.get("checkpoints", {}))


class _Collector:
    def __init__(self):
        self.errors: list[dict] = []

    def add(self, where: str, message: str):
        self.errors.append({"where": where, "message": message})

    def raise_if_any(self):
        if self.errors:
            raise ScenarioParseError(self.errors)


def _req(obj: dict, key: str, where: str, errs: _Collector, default=None):
    if key not in obj:
        errs.add(where, f"missing required key {key!r}")
        return default
    return obj[key]


def _build_curves(doc: dict, base_dir: Optional[Path], errs: _Collector) -> CurveLibrary:
    lib = CurveLibrary()
    merged = {"fragility": {}, "autonomy": {}}

    sources = []
    cf = doc.get("curves_file")
    if cf:
        path = (base_dir / cf) if base_dir else Path(cf)
        if not path.exists():
            errs.add("curves_file", f"file not found: {path}")
        else:
            try:
                sources.append(json.loads(path.read_text()))
            except json.JSONDecodeError as e:
                errs.add(f"curves_file {path}", f"line {e.lineno} col {e.colno}: {e.msg}")
    if "curves" in doc:
        sources.append(doc["curves"])

    for src in sources:
        for section in ("fragility", "autonomy"):
            merged[section].update(src.get(section, {}))

    for name, spec in merged["fragility"].items():
        where = f"curves.fragility.{name}"
        try:
            lib.fragility[name] = FragilityCurve(
                name=name,
                hazard=spec.get("hazard", ""),
                form=spec.get("form", ""),
                median=float(spec.get("median", 0.0)),
                beta=float(spec.get("beta", 0.0)),
                points=tuple(tuple(p) for p in spec.get("points", ())),
                threshold=float(spec.get("threshold", 0.0)),
                units=spec.get("units", ""),
            )
        except Exception as e:
            errs.add(where, str(e))
    for name, spec in merged["autonomy"].items():
        where = f"curves.autonomy.{name}"
        try:
            lib.autonomy[name] = AutonomyCurve(
                name=name,
                form=spec.get("form", ""),
                capacity_hours=float(spec.get("capacity_hours", 0.0)),
                points=tuple(tuple(p) for p in spec.get("points", ())),
            )
        except Exception as e:
            errs.add(where, str(e))
    return lib


def _build_node(spec: dict, where: str, errs: _Collector) -> Optional[Node]:
    try:
        autonomy = spec.get("autonomy")
        if isinstance(autonomy, dict):
            autonomy = autonomy.get("curve")
        return Node(
            id=spec["id"],
            kind=spec.get("kind", "intermediate"),
            category=spec.get("category", ""),
            site={k: float(v) for k, v in spec.get("site", {}).items()},
            fragility=dict(spec.get("fragility", {})),
            autonomy=autonomy,
            redundancy_group=spec.get("redundancy_group"),
            partial_source=bool(spec.get("partial_source", False)),
            initial_psf=float(spec.get("initial_psf", 0.0)),
        )
    except KeyError as e:
        errs.add(where, f"missing node key {e}")
    except Exception as e:
        errs.add(where, str(e))
    return None


def _build_model(spec: dict) -> SystemModel:
    networks = []
    for net_spec in spec.get("networks", []):
        nodes = []
        errs = _Collector()
        for i, ns in enumerate(net_spec.get("nodes", [])):
            node = _build_node(ns, f"nodes[{i}]", errs)
            if node:
                nodes.append(node)
        errs.raise_if_any()
        configs = [
            Configuration(
                label=cs.get("label", f"layer-{k}"),
                edges=[tuple(e) for e in cs.get("edges", [])],
                degraded=bool(cs.get("degraded", False)),
            )
            for k, cs in enumerate(net_spec.get("configurations", []))
        ]
        networks.append(Network(id=net_spec["id"], nodes=nodes, configurations=configs))
    deps = [
        InterNetworkDependency(
            from_network=d["from_network"],
            to_network=d["to_network"],
            edges=[tuple(e) for e in d.get("edges", [])],
        )
        for d in spec.get("dependencies", [])
    ]
    return SystemModel(networks=networks, dependencies=deps)


def _site_event(ev_spec: dict, model_spec: dict) -> dict[str, tuple[str, float]]:
    hazard = ev_spec["hazard"]
    intensities = {}
    for net_spec in model_spec.get("networks", []):
        for ns in net_spec.get("nodes", []):
            site = ns.get("site", {})
            if hazard in site:
                intensities[ns["id"]] = (hazard, float(site[hazard]))
    return intensities


def _build_timeline(spec: dict, model_spec: dict) -> Timeline:
    events = []
    for ev_spec in spec.get("events", []):
        if ev_spec.get("from_site"):
            intensities = _site_event(ev_spec, model_spec)
        else:
            intensities = {
                nid: (hv[0], float(hv[1]))
                for nid, hv in ev_spec.get("intensities", {}).items()
            }
        events.append(EventVector(time=float(ev_spec["time"]), intensities=intensities))
    interventions = [
        Intervention(
            time=float(iv["time"]),
            network_id=iv["network"],
            configuration=Configuration(
                label=iv["configuration"].get("label", "intervention"),
                edges=[tuple(e) for e in iv["configuration"].get("edges", [])],
                degraded=bool(iv["configuration"].get("degraded", False)),
            ),
        )
        for iv in spec.get("interventions", [])
    ]
    return Timeline(
        t0=float(spec.get("t0", 0.0)),
        t_end=float(spec["t_end"]),
        dt=float(spec.get("dt", 0.25)),
        events=events,
        interventions=interventions,
    )


def _check_references(doc: dict, curves: CurveLibrary, errs: _Collector):
    """Cross-reference checks with JSON-path positions."""
    model = doc.get("model", {})
    node_ids: dict[str, str] = {}
    net_ids = set()
    for ni, net_spec in enumerate(model.get("networks", [])):
        net_where = f"model.networks[{ni}]"
        if "id" not in net_spec:
            errs.add(net_where, "missing network id")
            continue
        net_ids.add(net_spec["id"])
        ids_here = set()
        for i, ns in enumerate(net_spec.get("nodes", [])):
            where = f"{net_where}.nodes[{i}]"
            nid = ns.get("id")
            if nid is None:
                errs.add(where, "missing node id")
                continue
            node_ids[nid] = net_spec["id"]
            ids_here.add(nid)
            for hazard, cname in ns.get("fragility", {}).items():
                if cname not in curves.fragility:
                    errs.add(where, f"unknown fragility curve {cname!r} for hazard {hazard!r}")
            for hazard in ns.get("site", {}):
                if hazard not in ns.get("fragility", {}):
                    errs.add(
                        where,
                        f"node exposed to hazard {hazard!r} but has no fragility curve for it",
                    )
            autonomy = ns.get("autonomy")
            if isinstance(autonomy, dict):
                autonomy = autonomy.get("curve")
            if autonomy and autonomy not in curves.autonomy:
                errs.add(where, f"unknown autonomy curve {autonomy!r}")
        for k, cs in enumerate(net_spec.get("configurations", [])):
            for j, e in enumerate(cs.get("edges", [])):
                if len(e) != 2:
                    errs.add(
                        f"{net_where}.configurations[{k}].edges[{j}]",
                        "edge must be a [from, to] pair",
                    )
                    continue
                for endpoint in e:
                    if endpoint not in ids_here:
                        errs.add(
                            f"{net_where}.configurations[{k}].edges[{j}]",
                            f"unknown node {endpoint!r}",
                        )
    for di, d in enumerate(model.get("dependencies", [])):
        where = f"model.dependencies[{di}]"
        for key in ("from_network", "to_network"):
            if d.get(key) not in net_ids:
                errs.add(where, f"{key} references unknown network {d.get(key)!r}")
        for j, e in enumerate(d.get("edges", [])):
            if len(e) != 2:
                errs.add(f"{where}.edges[{j}]", "edge must be a [from, to] pair")
                continue
            for endpoint in e:
                if endpoint not in node_ids:
                    errs.add(f"{where}.edges[{j}]", f"unknown node {endpoint!r}")

    timeline = doc.get("timeline", {})
    if "t_end" not in timeline:
        errs.add("timeline", "missing required key 't_end'")
    for i, ev in enumerate(timeline.get("events", [])):
        where = f"timeline.events[{i}]"
        if "time" not in ev:
            errs.add(where, "missing event time")
        if ev.get("from_site"):
            if "hazard" not in ev:
                errs.add(where, "from_site event needs a hazard kind")
        elif "intensities" in ev:
            for nid, hv in ev["intensities"].items():
                if nid not in node_ids:
                    errs.add(f"{where}.intensities", f"unknown node {nid!r}")
                elif not isinstance(hv, (list, tuple)) or len(hv) != 2:
                    errs.add(f"{where}.intensities.{nid}", "expected [hazard, value]")
        else:
            errs.add(where, "event needs either from_site+hazard or intensities")
    for i, iv in enumerate(timeline.get("interventions", [])):
        where = f"timeline.interventions[{i}]"
        if iv.get("network") not in net_ids:
            errs.add(where, f"unknown network {iv.get('network')!r}")
        if "configuration" not in iv:
            errs.add(where, "missing configuration")
        if "time" not in iv:
            errs.add(where, "missing time")

    mode = doc.get("analysis", {}).get("autonomy_mode", EXPECTED)
    if mode not in AUTONOMY_MODES:
        errs.add("analysis.autonomy_mode", f"unknown mode {mode!r}")


def parse_scenario(source) -> ScenarioDocument:
    """Parse a scenario from a path, JSON text, or parsed dict.

    Raises ScenarioParseError listing every problem found (line/column
    for JSON syntax errors, JSON paths for reference errors).
    """
    errs = _Collector()
    base_dir = None
    path = None

    if isinstance(source, dict):
        doc = source
    else:
        text = None
        if isinstance(source, (str, Path)) and os.path.exists(str(source)):
            path = Path(source)
            base_dir = path.parent
            text = path.read_text()
        elif isinstance(source, str):
            text = source
        else:
            raise ScenarioParseError(
                [{"where": "input", "message": f"cannot read scenario from {source!r}"}]
            )
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioParseError(
                [{"where": f"line {e.lineno}, column {e.colno}", "message": e.msg}]
            ) from None

    if not isinstance(doc, dict):
        raise ScenarioParseError(
            [{"where": "document", "message": "top level must be a JSON object"}]
        )

    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        errs.add("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    if "model" not in doc:
        errs.add("document", "missing required key 'model'")
    if "timeline" not in doc:
        errs.add("document", "missing required key 'timeline'")
    errs.raise_if_any()

    curves = _build_curves(doc, base_dir, errs)
    _check_references(doc, curves, errs)
    errs.raise_if_any()

    sdoc = ScenarioDocument(
        name=doc.get("name", path.stem if path else "scenario"),
        description=doc.get("description", ""),
        schema_version=version,
        curves=curves,
        raw=doc,
        path=path,
        analysis=dict(doc.get("analysis", {})),
        pra=dict(doc.get("pra", {})),
    )
    # building once validates dataclass-level constraints eagerly
    try:
        sdoc.build_model()
        sdoc.build_timeline()
    except ScenarioParseError:
        raise
    except Exception as e:
        raise ScenarioParseError([{"where": "model", "message": str(e)}]) from None
    return sdoc


def bundled_scenario_names() -> list[str]:
    files = resources.files("lifeline_iim.scenarios")
    names = []
    for entry in files.iterdir():
        if entry.name.endswith(".json") and not entry.name.endswith("calibration.json"):
            names.append(entry.name[: -len(".json")])
    return sorted(names)


def scenario_search_dirs() -> list[Path]:
    dirs = []
    env = os.environ.get(SCENARIO_DIR_ENV)
    if env:
        dirs.append(Path(env))
    return dirs


def list_scenarios() -> list[dict]:
    """Bundled scenarios plus *.json files from $LIFELINE_IIM_SCENARIO_DIR."""
    out = []
    for name in bundled_scenario_names():
        out.append({"name": name, "origin": "bundled"})
    for d in scenario_search_dirs():
        if not d.is_dir():
            continue
        for p in sorted(d.glob("*.json")):
            out.append({"name": p.stem, "origin": str(d)})
    return out


def resolve_scenario(name_or_path: str) -> ScenarioDocument:
    """Resolve by explicit path, then $LIFELINE_IIM_SCENARIO_DIR, then
    the bundled set."""
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        return parse_scenario(p)
    for d in scenario_search_dirs():
        candidate = d / f"{name_or_path}.json"
        if candidate.exists():
            return parse_scenario(candidate)
    files = resources.files("lifeline_iim.scenarios")
    candidate = files / f"{name_or_path}.json"
    if candidate.is_file():
        doc = json.loads(candidate.read_text())
        ref = doc.pop("curves_file", None)
        if ref:
            # inline the sibling curve library so the lookup stays zip-safe
            sibling = files / ref
            if not sibling.is_file():
                raise ScenarioParseError(
                    [{"where": "curves_file", "message": f"missing {ref!r}"}]
                )
            shared = json.loads(sibling.read_text())
            merged = {"fragility": dict(shared.get("fragility", {})),
                      "autonomy": dict(shared.get("autonomy", {}))}
            local = doc.get("curves", {})
            merged["fragility"].update(local.get("fragility", {}))
            merged["autonomy"].update(local.get("autonomy", {}))
            doc["curves"] = merged
        return parse_scenario(doc)
    raise ScenarioParseError(
        [{"where": "scenario", "message": f"unknown scenario {name_or_path!r}"}]
    )


def report_rows(report_dict: dict):
    """Deterministic long-format rows (time, kind, id, quantity, value)
    from the nested JSON form of a report."""
    for step in report_dict["steps"]:
        t = step["time"]
        for net_id, net in step["networks"].items():
            for nid, probs in net["nodes"].items():
                yield (t, "node", nid, "p_sf", probs["p_sf"])
                yield (t, "node", nid, "p_cf", probs["p_cf"])
                yield (t, "node", nid, "p_f", probs["p_f"])
            for cfg in net["configurations"]:
                cid = f"{net_id}/{cfg['label']}"
                yield (t, "configuration", cid, "p_occ", cfg["p_occ"])
                yield (t, "configuration", cid, "chain_survival", cfg["chain_survival"])
            yield (t, "network", net_id, "loc", net["loc"])
        if "classic" in step:
            cl = step["classic"]
            for nid, v in cl["q_raw"].items():
                yield (t, "node", nid, "q_raw", v)
            for nid, v in cl["q"].items():
                yield (t, "node", nid, "q", v)
            for nid, v in cl["dc_s"].items():
                yield (t, "node", nid, "dc_s", v)
            for gid, v in cl["groups"].items():
                yield (t, "redundancy_group", gid, "inoperability", v)
            yield (t, "system", "system", "sys_s", cl["sys_s"])


def report_to_json_dict(report: ProbabilityReport) -> dict:
    steps = []
    for step in report.steps:
        networks = {}
        for net_id, net in step.state.networks.items():
            networks[net_id] = {
                "nodes": {
                    nid: {"p_sf": p.p_sf, "p_cf": p.p_cf, "p_f": p.p_f}
                    for nid, p in net.nodes.items()
                },
                "configurations": [
                    {
                        "label": layer.label,
                        "p_occ": p_occ,
                        "chain_survival": layer.survival,
                    }
                    for layer, p_occ in zip(net.layers, net.p_occ)
                ],
                "loc": net.loc,
            }
        entry = {"time": step.time, "networks": networks}
        if step.classic is not None:
            entry["classic"] = step.classic
        steps.append(entry)
    return {"times": list(report.times), "steps": steps}


def export_report_dict(report_dict: dict, path, fmt: Optional[str] = None) -> Path:
    """Write the JSON form of a report as CSV (long format, 12
    significant digits) or JSON (nested by step, bit-exact floats)."""
    path = Path(path)
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "csv"
    if fmt == "csv":
        lines = [CSV_HEADER]
        for t, kind, eid, quantity, value in report_rows(report_dict):
            lines.append(f"{t:.12g},{kind},{eid},{quantity},{value:.12g}")
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        path.write_text(json.dumps(report_dict, indent=1))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def export_report(report: ProbabilityReport, path, fmt: Optional[str] = None) -> Path:
    """Write a report as CSV or JSON (see export_report_dict)."""
    return export_report_dict(report_to_json_dict(report), path, fmt)


def import_report_dict(path) -> dict:
    return json.loads(Path(path).read_text())
