"""Command line entry point.

Subcommands: serve, validate, import, route, simulate, evaluate. Exit codes:
0 success, 1 validation/runtime error, 2 usage error. Machine-readable
output only appears behind --json. Flags fall back to MUSEUMTWIN_* env vars
(MUSEUMTWIN_DATA_DIR, MUSEUMTWIN_LISTEN, MUSEUMTWIN_SEED, MUSEUMTWIN_JSON).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import nav, sim, spaceio
from .model import validate_space
from .scan import ScanStep, TagObservation, place_anchor, register_capture_points, tag_poi
from .service import ServiceConfig, SpaceService

ENV_PREFIX = "MUSEUMTWIN_"


@dataclass
class CommandOutcome:
    exit_code: int
    human: str = ""
    machine: dict | list | None = None
    json_mode: bool = False


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--json", action="store_true", default=bool(_env("JSON")),
        help="emit machine-readable JSON instead of text",
    )
    parser = argparse.ArgumentParser(
        prog="museumtwin",
        description="Digital-twin service for indoor visitor guidance",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name: str, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    serve = add_parser("serve", help="start the HTTP service")
    serve.add_argument("--listen", default=_env("LISTEN", "127.0.0.1:8077"),
                       help="host:port to bind (default 127.0.0.1:8077)")
    serve.add_argument("--data-dir", default=_env("DATA_DIR", "data"))
    serve.add_argument("--frontend-dir", default=_env("FRONTEND_DIR"),
                       help="directory with the built browser console (served at /ui)")
    serve.add_argument("--cell-size", type=float, default=float(_env("CELL_SIZE", 0.5)))
    serve.add_argument("--clearance", type=float, default=float(_env("CLEARANCE", 0.25)))
    serve.add_argument("--alpha", type=float, default=float(_env("ALPHA", 0.5)),
                       help="position smoothing factor in (0, 1]")
    serve.add_argument("--enter-radius", type=float, default=float(_env("ENTER_RADIUS", 2.0)))
    serve.add_argument("--exit-radius", type=float, default=float(_env("EXIT_RADIUS", 3.0)))

    validate = add_parser("validate", help="check a space document")
    validate.add_argument("space_file")

    imp = add_parser("import", help="validate a space document and store it in the data dir")
    imp.add_argument("space_file")
    imp.add_argument("--scans", help="scan document with capture steps and tag observations")
    imp.add_argument("--data-dir", default=_env("DATA_DIR", "data"))

    route = add_parser("route", help="plan a route through assets from a point")
    route.add_argument("space_file")
    route.add_argument("--from", dest="start", required=True, metavar="X,Y")
    route.add_argument("--assets", required=True, help="comma-separated asset ids")
    route.add_argument("--mode", choices=["optimal", "as-given"], default="optimal")
    route.add_argument("--cell-size", type=float, default=0.5)
    route.add_argument("--clearance", type=float, default=0.25)

    simulate = add_parser("simulate", help="run a scripted visitor scenario")
    simulate.add_argument("scenario_file")
    simulate.add_argument("--out", help="write the trace to this file")
    simulate.add_argument("--seed", type=int,
                          default=None if _env("SEED") is None else int(_env("SEED")))

    evaluate = add_parser("evaluate", help="summarize a trace file")
    evaluate.add_argument("trace_file")
    return parser


def run_command(argv: list[str]) -> CommandOutcome:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandOutcome(exit_code=int(exc.code or 0))
    handler = {
        "serve": _cmd_serve,
        "validate": _cmd_validate,
        "import": _cmd_import,
        "route": _cmd_route,
        "simulate": _cmd_simulate,
        "evaluate": _cmd_evaluate,
    }[args.command]
    try:
        outcome = handler(args)
    except (spaceio.SpaceIoError, sim.SimError, nav.NavError, OSError, ValueError) as exc:
        outcome = CommandOutcome(exit_code=1, human=f"error: {exc}")
    outcome.json_mode = bool(args.json)
    return outcome


def _cmd_validate(args) -> CommandOutcome:
    model, warnings = spaceio.parse_space_text(Path(args.space_file).read_text())
    report = validate_space(model)
    lines = [f"error: {e}" for e in report.errors]
    lines += [f"warning: {w}" for w in report.warnings]
    lines += [f"warning: {w}" for w in warnings]
    verdict = "valid" if report.ok else "invalid"
    lines.append(f"{args.space_file}: {verdict}")
    machine = {"errors": report.errors, "warnings": report.warnings + warnings, "valid": report.ok}
    return CommandOutcome(0 if report.ok else 1, "\n".join(lines), machine)


def _load_scan_doc(path: str):
    doc = json.loads(Path(path).read_text())
    steps = [
        ScanStep(
            capture_id=str(s["capture_id"]),
            delta=tuple(spaceio.parse_point2(s.get("delta", [0, 0]), "scan step")),
            heading=spaceio.parse_heading(s.get("heading", {"rad": 0.0}), "scan step"),
            eye_height=float(s.get("eye_height", 1.5)),
        )
        for s in doc.get("steps", [])
    ]
    observations = [
        TagObservation(
            capture_id=str(o["capture_id"]),
            yaw=spaceio.parse_heading(o.get("yaw", {"rad": 0.0}), "observation"),
            pitch=spaceio.parse_heading(o.get("pitch", {"rad": 0.0}), "observation"),
            depth=float(o["depth"]),
            kind=str(o.get("kind", "poi")),
            title=str(o.get("title", "")),
            description=str(o.get("description", "")),
            anchor_id=o.get("id"),
        )
        for o in doc.get("observations", [])
    ]
    return steps, observations


def _cmd_import(args) -> CommandOutcome:
    model = spaceio.load_space(args.space_file)
    imported_anchors = 0
    if args.scans:
        steps, observations = _load_scan_doc(args.scans)
        captures = {c.id: c for c in register_capture_points(steps)}
        for capture in captures.values():
            from .model import Mutation, apply_mutation
            model = apply_mutation(
                model, Mutation(action="add", kind="capture_point", entity=capture)
            )
        for obs in observations:
            if obs.capture_id not in captures:
                return CommandOutcome(1, f"error: observation references unknown capture {obs.capture_id}")
            anchor = place_anchor(obs, captures[obs.capture_id])
            model = tag_poi(model, anchor)
            imported_anchors += 1
    data_dir = Path(args.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    target = data_dir / f"{model.id}.json"
    spaceio.save_space(model, target)
    human = f"imported space {model.id} (version {model.version}) to {target}"
    if imported_anchors:
        human += f" with {imported_anchors} tagged anchors"
    return CommandOutcome(0, human, {"id": model.id, "version": model.version, "path": str(target)})


def _cmd_route(args) -> CommandOutcome:
    model = spaceio.load_space(args.space_file)
    try:
        x_str, y_str = args.start.split(",")
        start = (float(x_str), float(y_str))
    except ValueError:
        return CommandOutcome(2, "usage error: --from expects X,Y")
    asset_ids = [a for a in args.assets.split(",") if a]
    route = nav.plan_route(
        model, start, asset_ids,
        cell_size=args.cell_size, clearance=args.clearance, order_mode=args.mode,
    )
    order = " -> ".join(aid for aid, _ in route.visit_order) or "(stay)"
    human = f"route length {route.length:.2f} m, visit order: {order}"
    from .service import route_doc
    return CommandOutcome(0, human, route_doc(route))


def _cmd_simulate(args) -> CommandOutcome:
    doc = json.loads(Path(args.scenario_file).read_text())
    space_path, scenario, config = sim.scenario_from_doc(doc)
    if args.seed is not None:
        from dataclasses import replace
        config = replace(config, seed=args.seed)
    base = Path(args.scenario_file).parent
    resolved = Path(space_path)
    if not resolved.is_absolute():
        resolved = (base / resolved) if (base / resolved).exists() else Path(space_path)
    model = spaceio.load_space(resolved)
    trace = sim.run_scenario(model, scenario, config)
    lines = sim.trace_to_lines(trace)
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n")
    summary = trace.summary
    human = (
        f"steps {summary['steps']}, availability {summary['fix_availability_ratio']:.3f}, "
        f"median error {summary['median_error']}, p95 {summary['p95_error']}, "
        f"events {summary['events_count']}"
    )
    if args.out:
        human += f"\ntrace written to {args.out}"
    machine = {"trace": lines, "summary": summary}
    return CommandOutcome(0, human, machine)


def _cmd_evaluate(args) -> CommandOutcome:
    trace = sim.trace_from_lines(Path(args.trace_file).read_text().splitlines())
    if not trace.steps:
        return CommandOutcome(1, "error: trace has no steps")
    summary = sim.evaluate(trace)
    human = "\n".join(f"{key}: {value}" for key, value in sorted(summary.items()))
    return CommandOutcome(0, human, summary)


def _cmd_serve(args) -> CommandOutcome:
    import uvicorn

    from .httpapi import create_app

    host, _, port_str = args.listen.partition(":")
    service = SpaceService(
        ServiceConfig(
            data_dir=Path(args.data_dir),
            smoothing_alpha=args.alpha,
            enter_radius_m=args.enter_radius,
            exit_radius_m=args.exit_radius,
            cell_size_m=args.cell_size,
            clearance_m=args.clearance,
        )
    )
    frontend = args.frontend_dir
    if frontend is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        frontend = candidate if candidate.is_dir() else None
    app = create_app(service, frontend_dir=frontend)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port_str or 8077), log_level="info")
    return CommandOutcome(0)


def main(argv: list[str] | None = None) -> int:
    outcome = run_command(sys.argv[1:] if argv is None else argv)
    if outcome.json_mode and outcome.machine is not None:
        print(json.dumps(outcome.machine, separators=(",", ":")))
    elif outcome.human:
        print(outcome.human)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
