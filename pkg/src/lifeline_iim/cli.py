"""Command-line interface.

Subcommands: validate, run, importance, compare-pra, list-scenarios,
export-plot-data.  Every analysis runs locally by default; pass
--server http://host:port to route through a running service instead
(the CLI then acts as a thin client and prints the same output).

Exit codes: 0 ok, 1 validation or equivalence failure, 2 usage /
parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .errors import LifelineError, ScenarioParseError
from .scenario import export_report_dict
from .service import ops

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _add_scenario_arg(p: argparse.ArgumentParser):
    p.add_argument(
        "--scenario",
        required=True,
        help="bundled scenario name or path to a scenario JSON file",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifeline-iim",
        description=(
            "Probabilistic cascading-failure analysis for interdependent "
            "lifeline networks."
        ),
    )
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running service; analyses are sent there instead of run locally",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="random seed (reserved for sampling tools; scenario runs are deterministic)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario's model for structural violations")
    _add_scenario_arg(p)

    p = sub.add_parser("run", help="run a scenario timeline and write the report")
    _add_scenario_arg(p)
    p.add_argument("--out", default=None, help="report file (default: print a summary)")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="report format (default: by --out extension, else csv)")
    p.add_argument("--dt", type=float, default=None, help="override the time step, hours")
    p.add_argument("--autonomy-mode", choices=("expected", "dominant"), default=None)
    p.add_argument("--classic", action="store_true",
                   help="include the classic inoperability series in the report")

    p = sub.add_parser("importance", help="rank a node's importance for a target over time")
    _add_scenario_arg(p)
    p.add_argument("--node", required=True, help="node to assess")
    p.add_argument("--target", required=True, help="target whose failure probability is read")
    p.add_argument("--out", default=None, help="optional CSV (time_h,importance)")
    p.add_argument("--autonomy-mode", choices=("expected", "dominant"), default=None)

    p = sub.add_parser(
        "compare-pra",
        help="compare the scenario's fault/event trees with the network model",
    )
    _add_scenario_arg(p)
    p.add_argument("--tolerance", type=float, default=ops.PRA_TOL)

    sub.add_parser("list-scenarios", help="list bundled and user scenarios")

    p = sub.add_parser(
        "export-plot-data",
        help="run a scenario and write per-network time-series CSVs",
    )
    _add_scenario_arg(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--autonomy-mode", choices=("expected", "dominant"), default=None)

    return parser


def _scenario_payload(scenario: str) -> dict:
    """Name for bundled scenarios; inline document for local files (the
    server may not share our filesystem)."""
    if os.path.exists(scenario):
        return {"document": json.loads(Path(scenario).read_text())}
    return {"scenario": scenario}


class _Client:
    """Thin HTTP client mirroring the local ops."""

    def __init__(self, base_url: str):
        import httpx

        self._httpx = httpx
        self.base = base_url.rstrip("/")

    def _post(self, route: str, payload: dict) -> dict:
        r = self._httpx.post(f"{self.base}{route}", json=payload, timeout=120.0)
        if r.status_code >= 400:
            raise LifelineError(f"server returned {r.status_code}: {r.text}")
        return r.json()

    def list_scenarios(self) -> dict:
        r = self._httpx.get(f"{self.base}/scenarios", timeout=30.0)
        r.raise_for_status()
        return r.json()

    def validate(self, scenario: str) -> dict:
        return self._post("/validate", _scenario_payload(scenario))

    def run(self, scenario: str, dt, autonomy_mode, classic) -> dict:
        payload = _scenario_payload(scenario)
        payload.update({"dt": dt, "autonomy_mode": autonomy_mode, "classic": classic})
        return self._post("/run", payload)

    def importance(self, scenario: str, node: str, target: str, autonomy_mode) -> dict:
        payload = _scenario_payload(scenario)
        payload.update({"node": node, "target": target, "autonomy_mode": autonomy_mode})
        return self._post("/importance", payload)

    def compare_pra(self, scenario: str, tolerance: float) -> dict:
        payload = _scenario_payload(scenario)
        payload["tolerance"] = tolerance
        return self._post("/compare-pra", payload)


def _print_parse_error(e: ScenarioParseError):
    print("scenario error:", file=sys.stderr)
    for err in e.errors:
        print(f"  {err['where']}: {err['message']}", file=sys.stderr)


def _cmd_validate(args) -> int:
    if args.server:
        result = _Client(args.server).validate(args.scenario)
    else:
        result = ops.op_validate(ops.load_document(scenario=args.scenario))
    if result["ok"]:
        print("OK: no violations")
        return EXIT_OK
    for v in result["violations"]:
        print(f"{v['code']} at {v['where']}: {v['message']}")
    print(f"{len(result['violations'])} violation(s)")
    return EXIT_FAILURE


def _cmd_run(args) -> int:
    if args.server:
        result = _Client(args.server).run(
            args.scenario, args.dt, args.autonomy_mode, args.classic or None
        )
    else:
        doc = ops.load_document(scenario=args.scenario)
        result = ops.op_run(
            doc, dt=args.dt, autonomy_mode=args.autonomy_mode,
            classic=True if args.classic else None,
        )
    report = result["report"]
    if args.out:
        path = export_report_dict(report, args.out, args.format)
        print(f"wrote {path} ({len(report['steps'])} steps)")
    else:
        last = report["steps"][-1]
        print(f"scenario {result['scenario']} ({result['autonomy_mode']} autonomy), "
              f"{len(report['steps'])} steps, final t = {last['time']:g} h")
        for net_id, net in last["networks"].items():
            occ = ", ".join(
                f"{c['label']}={c['p_occ']:.6g}" for c in net["configurations"]
            )
            print(f"  {net_id}: loc={net['loc']:.6g}  {occ}")
    for label, cp in sorted(result.get("checkpoints", {}).items(),
                            key=lambda kv: kv[1]["time"]):
        nets = "  ".join(
            f"{nid}: loc={v['loc']:.4g}" for nid, v in cp["networks"].items()
        )
        print(f"  [{label} @ {cp['time']:g} h]  {nets}")
    return EXIT_OK


def _cmd_importance(args) -> int:
    if args.server:
        result = _Client(args.server).importance(
            args.scenario, args.node, args.target, args.autonomy_mode
        )
    else:
        doc = ops.load_document(scenario=args.scenario)
        result = ops.op_importance(doc, args.node, args.target,
                                   autonomy_mode=args.autonomy_mode)
    print(f"importance of {result['node']} for {result['target']}: "
          f"peak {result['peak']:.12g}")
    if args.out:
        lines = ["time_h,importance"]
        for t, v in zip(result["times"], result["importance"]):
            lines.append(f"{t:.12g},{v:.12g}")
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.out} ({len(result['times'])} steps)")
    return EXIT_OK


def _cmd_compare_pra(args) -> int:
    if args.server:
        result = _Client(args.server).compare_pra(args.scenario, args.tolerance)
    else:
        doc = ops.load_document(scenario=args.scenario)
        result = ops.op_compare_pra(doc, tol=args.tolerance)
    for c in result["comparisons"]:
        status = "match" if c["match"] else "MISMATCH"
        diff = "n/a (structural)" if c["max_diff"] is None else f"{c['max_diff']:.3e}"
        line = f"{c['kind']} {c['id']}: max diff {diff}  [{status}]"
        if c.get("reason"):
            line += f"  ({c['reason']})"
        print(line)
    print(f"overall max diff {result['max_diff']:.3e} over {result['count']} comparison(s)")
    if not result["ok"]:
        print("PRA comparison failed", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _cmd_list_scenarios(args) -> int:
    if args.server:
        result = _Client(args.server).list_scenarios()
    else:
        result = ops.op_list_scenarios()
    for s in result["scenarios"]:
        print(f"{s['name']}  ({s['origin']})")
    return EXIT_OK


def _cmd_export_plot_data(args) -> int:
    doc = ops.load_document(scenario=args.scenario)
    result = ops.op_plot_data(doc, args.out, dt=args.dt, autonomy_mode=args.autonomy_mode)
    for f in result["files"]:
        print(f"wrote {f}")
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "run": _cmd_run,
    "importance": _cmd_importance,
    "compare-pra": _cmd_compare_pra,
    "list-scenarios": _cmd_list_scenarios,
    "export-plot-data": _cmd_export_plot_data,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse exits on usage errors / --help
        return int(e.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except ScenarioParseError as e:
        _print_parse_error(e)
        # unresolvable name = usage; a broken document = validation failure
        unknown = any(err.get("where") == "scenario" for err in e.errors)
        return EXIT_USAGE if unknown else EXIT_FAILURE
    except LifelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
