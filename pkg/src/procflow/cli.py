"""Administrative command line.

Exit codes: 0 success, 1 domain violation, 2 I/O or parse failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import indicators as ind
from .errors import CorruptLog, ProcessError, ValidationFailed
from .model import build_process_model, validate_process_model
from .scenario import load_scenario, run_scenario
from .store import open_workspace
from .timeutil import format_ts, parse_ts

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


def cmd_validate(args) -> int:
    try:
        doc = json.loads(Path(args.model).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read model: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        model = build_process_model(doc)
    except ProcessError as exc:
        print(f"{exc.code}: {exc.message}")
        return EXIT_DOMAIN
    report = validate_process_model(model)
    if not report:
        print(f"{model.name} v{model.version}: valid")
        return EXIT_OK
    for v in report:
        print(f"({v.rule}) {v.subject}: {v.message}")
    return EXIT_DOMAIN


def cmd_serve(args) -> int:
    import uvicorn
    from .service import create_app

    try:
        ws = open_workspace(args.workspace, create=True)
    except ProcessError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_IO
    app = create_app(ws, ui_origin=args.ui_origin)
    if args.ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=args.ui_dir, html=True), name="ui")
    try:
        uvicorn.run(app, host=args.host, port=args.port)
    finally:
        ws.close()
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        ws = open_workspace(args.workspace, writable=False)
    except CorruptLog as exc:
        print(f"CorruptLog: {exc.message}", file=sys.stderr)
        return EXIT_DOMAIN
    except ProcessError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_IO
    with ws:
        insts = ws.engine.state.instances
        by_status: dict[str, int] = {}
        for i in insts.values():
            by_status[i.status] = by_status.get(i.status, 0) + 1
        detail = ", ".join(f"{n} {s}" for s, n in sorted(by_status.items()))
        print(f"{len(insts)} instances" + (f" ({detail})" if detail else ""))
        for iid in sorted(insts):
            view = ws.engine.instance_view(iid)
            states = ", ".join(f"{e['type']}={e['state']}" for e in view["entities"])
            print(f"  {iid} [{view['status']}] {states}")
    return EXIT_OK


def cmd_run_scenario(args) -> int:
    try:
        steps = load_scenario(args.scenario)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationFailed as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_IO
    base_dir = Path(args.scenario).resolve().parent
    try:
        with open_workspace(args.workspace, create=True) as ws:
            labels = run_scenario(steps, ws, base_dir)
            print(f"{len(steps)} steps executed, "
                  f"{ws.engine.log.last_seq} events, "
                  f"{len(labels)} instances labelled")
    except ProcessError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def _format_value(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def cmd_indicators(args) -> int:
    try:
        ws = open_workspace(args.workspace, writable=False)
    except ProcessError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_IO
    with ws:
        as_of = parse_ts(args.as_of) if args.as_of else ws.engine.log.last_at
        defs = list(ws.indicator_defs.values())
        try:
            ind.check_no_ratio_cycles(ws.indicator_defs)
            rows = []
            for d in defs:
                val = ind.evaluate_indicator(d, ws.engine.log.events, ws.registry,
                                             ws.indicator_defs, as_of)
                rows.append(val)
        except ProcessError as exc:
            print(f"{exc.code}: {exc.message}", file=sys.stderr)
            return EXIT_DOMAIN
        if args.format == "json":
            print(json.dumps([r.to_dict() for r in rows], indent=2))
        else:
            print("name,family,perspective,value,sample_size,as_of")
            for r in rows:
                print(f"{r.indicator},{r.family},{r.perspective},"
                      f"{_format_value(r.value)},{r.sample_size},{format_ts(as_of)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="procflow")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate a model document")
    v.add_argument("model")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("serve", help="open a workspace and start the HTTP API")
    s.add_argument("--workspace", required=True)
    s.add_argument("--port", type=int, default=8080)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--ui-origin", default=None)
    s.add_argument("--ui-dir", default=None)
    s.set_defaults(func=cmd_serve)

    r = sub.add_parser("replay", help="replay the workspace log and summarize")
    r.add_argument("--workspace", required=True)
    r.set_defaults(func=cmd_replay)

    rs = sub.add_parser("run-scenario", help="execute a scripted scenario")
    rs.add_argument("scenario")
    rs.add_argument("--workspace", required=True)
    rs.set_defaults(func=cmd_run_scenario)

    i = sub.add_parser("indicators", help="evaluate all indicator definitions")
    i.add_argument("--workspace", required=True)
    i.add_argument("--as-of", default=None)
    i.add_argument("--format", choices=("csv", "json"), default="csv")
    i.set_defaults(func=cmd_indicators)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
