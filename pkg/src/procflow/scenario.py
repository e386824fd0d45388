"""Scripted scenario execution — the deterministic fixture generator.

A scenario file is a JSON array of steps ``{"op": ..., "args": {...},
"at": "<RFC 3339>"}``.  Timestamps are explicit so two runs in fresh
workspaces produce byte-identical event logs.  See docs/scenario.md.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ValidationFailed
from .store import Workspace
from .timeutil import parse_ts

OPS = ("publish_model", "load_indicators", "instantiate", "perform", "attest", "migrate")


def run_scenario(steps: list[dict], ws: Workspace, base_dir: Path) -> dict[str, str]:
    """Execute the steps against the workspace; returns label -> instance id."""
    labels: dict[str, str] = {}

    def resolve(ref: str) -> str:
        return labels.get(ref, ref)

    def actor(args):
        a = ws.registry.actor(args["actor"])
        if a is None:
            raise ValidationFailed(f"unknown actor {args['actor']!r}")
        return a

    for i, step in enumerate(steps, start=1):
        op = step.get("op")
        args = step.get("args", {})
        if op not in OPS:
            raise ValidationFailed(f"step {i}: unknown op {op!r}")
        at = parse_ts(step["at"]) if "at" in step else 0

        if op == "publish_model":
            doc = json.loads((base_dir / args["path"]).read_text(encoding="utf-8"))
            ws.publish_model_doc(doc)
        elif op == "load_indicators":
            doc = json.loads((base_dir / args["path"]).read_text(encoding="utf-8"))
            ws.load_indicator_doc(doc, name=Path(args["path"]).stem)
        elif op == "instantiate":
            view = ws.engine.instantiate_process(
                args["model"], args.get("attributes"), at=at,
                version=args.get("version"))
            if "label" in args:
                labels[args["label"]] = view["id"]
        elif op == "perform":
            ws.engine.perform_activity(
                resolve(args["instance"]), args["activity"], actor(args),
                parameters=args.get("parameters"), at=at)
        elif op == "attest":
            ws.engine.attest_objective(
                args["objective"], resolve(args["instance"]), actor(args), at=at)
        elif op == "migrate":
            ws.engine.migrate_instance(
                resolve(args["instance"]), args["to_version"], actor(args), at=at)
    return labels


def load_scenario(path) -> list[dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list):
        raise ValidationFailed("scenario file must be a JSON array of steps")
    return doc
