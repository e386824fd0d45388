"""Plain-file workspace persistence.

Layout under the workspace root:

    models/*.json       published model documents (one version per file)
    indicators/*.json   indicator definition packs
    events.ndjson       the append-only trace log
    snapshot.json       optional state snapshot {seq, state}
    LOCK                single-writer lock file

Opening a workspace validates every model file and replays the log, so the
returned engine is ready to execute.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from .engine import Engine
from .errors import CorruptLog, MissingRoot, StaleSnapshot, StorageFailure, ValidationFailed
from .indicators import IndicatorDef, check_no_ratio_cycles
from .model import ModelRegistry, ProcessModel, actors_from_doc, build_process_model, validate_process_model
from .trace import EngineState, EventLog, apply_event, parse_log_lines, replay


class Workspace:
    def __init__(self, root: Path, registry: ModelRegistry, engine: Engine,
                 indicator_defs: dict[str, IndicatorDef], lock: bool = False):
        self.root = Path(root)
        self.registry = registry
        self.engine = engine
        self.indicator_defs = indicator_defs
        self._locked = False
        if lock:
            self._acquire_lock()

    @property
    def log_path(self) -> Path:
        return self.root / "events.ndjson"

    @property
    def snapshot_path(self) -> Path:
        return self.root / "snapshot.json"

    def _acquire_lock(self) -> None:
        path = self.root / "LOCK"
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StorageFailure(f"workspace {self.root} is locked by another writer") from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        self._locked = True

    def close(self) -> None:
        self.engine.log.close()
        if self._locked:
            (self.root / "LOCK").unlink(missing_ok=True)
            self._locked = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def publish_model_doc(self, doc: dict) -> ProcessModel:
        """Publish a model document and persist it under models/."""
        model = build_process_model(doc)
        self.engine.publish_model(model)
        self.registry.register_actors(actors_from_doc(doc))
        models_dir = self.root / "models"
        models_dir.mkdir(exist_ok=True)
        path = models_dir / f"{model.name}_v{model.version}.json"
        path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return model

    def load_indicator_doc(self, doc: list, name: str = "pack") -> None:
        defs = {d["name"]: IndicatorDef.from_dict(d) for d in doc}
        merged = dict(self.indicator_defs)
        merged.update(defs)
        check_no_ratio_cycles(merged)
        self.indicator_defs.update(defs)
        self.engine.indicator_defs = self.indicator_defs
        out = self.root / "indicators"
        out.mkdir(exist_ok=True)
        (out / f"{name}.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _load_models(root: Path, registry: ModelRegistry) -> None:
    models_dir = root / "models"
    if not models_dir.is_dir():
        return
    docs = []
    for path in sorted(models_dir.glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationFailed(f"{path.name}: malformed JSON ({exc})") from exc
        docs.append((path, doc))
    # register in version order so publish gating sees each predecessor
    docs.sort(key=lambda pd: (pd[1].get("name", ""), pd[1].get("version", 0)))
    for path, doc in docs:
        model = build_process_model(doc)
        report = validate_process_model(model)
        if report:
            raise ValidationFailed(
                f"{path.name}: " + "; ".join(v.message for v in report))
        registry.publish(model)
        registry.register_actors(actors_from_doc(doc))


def _load_indicators(root: Path) -> dict[str, IndicatorDef]:
    defs: dict[str, IndicatorDef] = {}
    ind_dir = root / "indicators"
    if not ind_dir.is_dir():
        return defs
    for path in sorted(ind_dir.glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationFailed(f"{path.name}: malformed JSON ({exc})") from exc
        for d in doc:
            defs[d["name"]] = IndicatorDef.from_dict(d)
    check_no_ratio_cycles(defs)
    return defs


def open_workspace(root, create: bool = False, writable: bool = True) -> Workspace:
    """Open (or initialize) a workspace: validate models, replay the log."""
    root = Path(root)
    if not root.exists():
        if create:
            root.mkdir(parents=True)
        else:
            raise MissingRoot(f"workspace root {root} does not exist")

    registry = ModelRegistry()
    _load_models(root, registry)
    defs = _load_indicators(root)

    log_path = root / "events.ndjson"
    events = []
    if log_path.exists():
        with open(log_path, encoding="utf-8") as fh:
            events = parse_log_lines(fh)
    state = replay(events, registry)

    log = EventLog(log_path if writable else None)
    if not writable:
        for ev in events:
            log.ingest(ev)
    else:
        # the file already holds these lines; seed the in-memory view only
        for ev in events:
            log.events.append(ev)
            log._last_at[ev.instance] = max(log._last_at.get(ev.instance, 0), ev.at)

    engine = Engine(registry, log, indicator_defs=defs, state=state)
    return Workspace(root, registry, engine, defs, lock=writable)


def snapshot(ws: Workspace) -> Path:
    """Write a point-in-time state snapshot keyed by the last applied seq."""
    doc = {"seq": ws.engine.log.last_seq, "state": ws.engine.state.to_dict()}
    tmp = ws.snapshot_path.with_suffix(".tmp")
    tmp.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, ws.snapshot_path)
    return ws.snapshot_path


def load_snapshot(ws: Workspace) -> EngineState:
    """Load the snapshot and replay only the events after its seq."""
    try:
        doc = json.loads(ws.snapshot_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise StorageFailure(f"no snapshot in {ws.root}") from None
    except json.JSONDecodeError as exc:
        raise StorageFailure(f"snapshot unreadable: {exc}") from exc
    seq = int(doc["seq"])
    events = ws.engine.log.events
    if seq > (events[-1].seq if events else 0):
        raise StaleSnapshot(f"snapshot seq {seq} is beyond the log end")
    state = EngineState.from_dict(doc["state"])
    for ev in events:
        if ev.seq > seq:
            apply_event(state, ev, ws.registry)
    return state
