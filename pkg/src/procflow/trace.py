"""Append-only trace log and deterministic replay.

One event per state change plus lifecycle bookends; the log is the single
source of truth that both the live engine state and every indicator are
derived from.  The on-disk format is newline-delimited JSON, UTF-8, one
event per line, timestamps RFC 3339 with milliseconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ClockSkew, CorruptLog, StorageFailure
from .timeutil import Millis, format_ts, parse_ts

EVENT_KINDS = (
    "instance_started",
    "state_changed",
    "instance_completed",
    "objective_attested",
    "objective_evaluated",
    "instance_migrated",
)

# serialized field order is fixed so log bytes are reproducible
_FIELDS = ("seq", "at", "kind", "instance", "entity", "activity",
           "actor", "from_state", "to_state", "payload")


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    at: Millis
    kind: str
    instance: str
    entity: Optional[str] = None
    activity: Optional[str] = None
    actor: Optional[str] = None
    from_state: Optional[str] = None
    to_state: Optional[str] = None
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "at": format_ts(self.at),
            "kind": self.kind,
            "instance": self.instance,
            "entity": self.entity,
            "activity": self.activity,
            "actor": self.actor,
            "from_state": self.from_state,
            "to_state": self.to_state,
            "payload": self.payload,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "TraceEvent":
        if d.get("kind") not in EVENT_KINDS:
            raise CorruptLog(f"unknown event kind {d.get('kind')!r}")
        return cls(
            seq=int(d["seq"]),
            at=parse_ts(d["at"]),
            kind=d["kind"],
            instance=d["instance"],
            entity=d.get("entity"),
            activity=d.get("activity"),
            actor=d.get("actor"),
            from_state=d.get("from_state"),
            to_state=d.get("to_state"),
            payload=d.get("payload") or {},
        )


class EventLog:
    """Totally ordered, gapless event sequence; optionally file-backed.

    Appends assign ``seq`` and enforce per-instance timestamp monotonicity;
    when a path is bound, each event is flushed to disk before the append
    returns.
    """

    def __init__(self, path=None):
        self.events: list[TraceEvent] = []
        self._last_at: dict[str, Millis] = {}
        self._path = path
        self._fh = None
        if path is not None:
            try:
                self._fh = open(path, "a", encoding="utf-8")
            except OSError as exc:
                raise StorageFailure(f"cannot open log {path}: {exc}") from exc

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    @property
    def last_seq(self) -> int:
        return self.events[-1].seq if self.events else 0

    @property
    def last_at(self) -> Millis:
        return max((e.at for e in self.events), default=0)

    def append(self, at, kind, instance, *, entity=None, activity=None, actor=None,
               from_state=None, to_state=None, payload=None) -> TraceEvent:
        prev = self._last_at.get(instance)
        if prev is not None and at < prev:
            raise ClockSkew(
                f"timestamp {format_ts(at)} precedes last event of {instance} ({format_ts(prev)})")
        ev = TraceEvent(
            seq=self.last_seq + 1, at=at, kind=kind, instance=instance,
            entity=entity, activity=activity, actor=actor,
            from_state=from_state, to_state=to_state, payload=payload or {},
        )
        if self._fh is not None:
            try:
                self._fh.write(ev.to_line() + "\n")
                self._fh.flush()
            except OSError as exc:
                raise StorageFailure(f"append failed: {exc}") from exc
        self.events.append(ev)
        self._last_at[instance] = at
        return ev

    def ingest(self, ev: TraceEvent) -> None:
        """Admit an already-sequenced event (replay path); no file write."""
        if ev.seq != self.last_seq + 1:
            raise CorruptLog(f"gap in log: expected seq {self.last_seq + 1}, got {ev.seq}")
        prev = self._last_at.get(ev.instance)
        if prev is not None and ev.at < prev:
            raise CorruptLog(f"timestamp regression at seq {ev.seq}")
        self.events.append(ev)
        self._last_at[ev.instance] = ev.at

    def query(self, instance=None, entity=None, kind=None, actor=None,
              time_range=None, limit=None) -> list[TraceEvent]:
        """Filtered view in seq order; an empty filter returns the whole log."""
        out = []
        lo, hi = time_range if time_range else (None, None)
        for ev in self.events:
            if instance is not None and ev.instance != instance:
                continue
            if entity is not None and ev.entity != entity:
                continue
            if kind is not None and ev.kind != kind:
                continue
            if actor is not None and ev.actor != actor:
                continue
            if lo is not None and ev.at < lo:
                continue
            if hi is not None and ev.at > hi:
                continue
            out.append(ev)
            if limit is not None and len(out) >= limit:
                break
        return out


def parse_log_lines(lines: Iterable[str]) -> list[TraceEvent]:
    """Parse NDJSON lines, reporting the offending line number on failure."""
    events = []
    expected = 1
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            ev = TraceEvent.from_dict(json.loads(stripped))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CorruptLog(f"line {lineno}: unparseable event ({exc})") from exc
        if ev.seq != expected:
            raise CorruptLog(f"line {lineno}: expected seq {expected}, got {ev.seq}")
        expected += 1
        events.append(ev)
    return events


# -- replayed state ----------------------------------------------------------

@dataclass
class InstanceState:
    id: str
    model_name: str
    model_version: int
    status: str  # running | completed | terminated
    started_at: Millis
    ended_at: Optional[Millis]
    context: dict[str, str]  # entity-role (type name) -> entity id

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "model_name": self.model_name,
            "model_version": self.model_version,
            "status": self.status,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "context": dict(self.context),
        }


@dataclass
class EntityState:
    id: str
    type: str
    instance: str
    state: str
    attributes: dict
    parent: Optional[str]
    created_at: Millis
    entered_state_at: Millis

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "type": self.type,
            "instance": self.instance,
            "state": self.state,
            "attributes": dict(self.attributes),
            "parent": self.parent,
            "created_at": self.created_at,
            "entered_state_at": self.entered_state_at,
        }


@dataclass
class ObjectiveState:
    objective: str
    instance: str
    reached: bool
    last_evaluated: Millis
    history: list[tuple[Millis, bool]]

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "instance": self.instance,
            "reached": self.reached,
            "last_evaluated": self.last_evaluated,
            "history": [[t, r] for t, r in self.history],
        }


@dataclass
class EngineState:
    """Aggregate state rebuilt from (or maintained alongside) the log."""

    instances: dict[str, InstanceState] = field(default_factory=dict)
    entities: dict[str, EntityState] = field(default_factory=dict)
    objectives: dict[str, ObjectiveState] = field(default_factory=dict)  # "instance::objective"
    instance_counter: int = 0

    def to_dict(self) -> dict:
        return {
            "instances": {k: v.to_dict() for k, v in sorted(self.instances.items())},
            "entities": {k: v.to_dict() for k, v in sorted(self.entities.items())},
            "objectives": {k: v.to_dict() for k, v in sorted(self.objectives.items())},
            "instance_counter": self.instance_counter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineState":
        st = cls(instance_counter=int(d.get("instance_counter", 0)))
        for k, v in d.get("instances", {}).items():
            st.instances[k] = InstanceState(
                id=v["id"], model_name=v["model_name"], model_version=v["model_version"],
                status=v["status"], started_at=v["started_at"], ended_at=v["ended_at"],
                context=dict(v["context"]))
        for k, v in d.get("entities", {}).items():
            st.entities[k] = EntityState(
                id=v["id"], type=v["type"], instance=v["instance"], state=v["state"],
                attributes=dict(v["attributes"]), parent=v["parent"],
                created_at=v["created_at"], entered_state_at=v["entered_state_at"])
        for k, v in d.get("objectives", {}).items():
            st.objectives[k] = ObjectiveState(
                objective=v["objective"], instance=v["instance"], reached=v["reached"],
                last_evaluated=v["last_evaluated"],
                history=[(t, r) for t, r in v["history"]])
        return st


def obj_key(instance: str, objective: str) -> str:
    return f"{instance}::{objective}"


def apply_event(state: EngineState, ev: TraceEvent, registry) -> None:
    """Apply one event to the aggregate state, checking legality.

    Shared by the live engine and replay, which is what makes replay agree
    with the live state by construction.
    """
    if ev.kind == "instance_started":
        model = registry.get(ev.payload["model"]["name"], ev.payload["model"]["version"])
        context = {}
        for ent in ev.payload["entities"]:
            context[ent["type"]] = ent["id"]
            state.entities[ent["id"]] = EntityState(
                id=ent["id"], type=ent["type"], instance=ev.instance,
                state=ent["state"], attributes=dict(ent.get("attributes", {})),
                parent=ent.get("parent"), created_at=ev.at, entered_state_at=ev.at)
        state.instances[ev.instance] = InstanceState(
            id=ev.instance, model_name=model.name, model_version=model.version,
            status="running", started_at=ev.at, ended_at=None, context=context)
        state.instance_counter += 1

    elif ev.kind == "state_changed":
        inst = state.instances.get(ev.instance)
        ent = state.entities.get(ev.entity)
        if inst is None or ent is None:
            raise CorruptLog(f"seq {ev.seq}: state change for unknown instance/entity")
        model = registry.get(inst.model_name, inst.model_version)
        lc = model.lifecycle_of(ent.type)
        if ent.state != ev.from_state or not lc.allows(ev.from_state, ev.to_state):
            raise CorruptLog(
                f"seq {ev.seq}: illegal transition {ev.from_state!r} -> {ev.to_state!r} "
                f"for entity {ent.id} in state {ent.state!r}")
        ent.state = ev.to_state
        ent.entered_state_at = ev.at
        for k, v in ev.payload.get("attributes", {}).items():
            ent.attributes[k] = v

    elif ev.kind == "instance_completed":
        inst = state.instances.get(ev.instance)
        if inst is None:
            raise CorruptLog(f"seq {ev.seq}: completion of unknown instance")
        inst.status = "completed"
        inst.ended_at = ev.at

    elif ev.kind == "objective_attested":
        key = obj_key(ev.instance, ev.payload["objective"])
        st = state.objectives.get(key)
        if st is None:
            st = ObjectiveState(ev.payload["objective"], ev.instance, False, ev.at, [])
            state.objectives[key] = st
        st.reached = True
        st.last_evaluated = ev.at
        st.history.append((ev.at, True))

    elif ev.kind == "objective_evaluated":
        key = obj_key(ev.instance, ev.payload["objective"])
        reached = bool(ev.payload["reached"])
        st = state.objectives.get(key)
        if st is None:
            st = ObjectiveState(ev.payload["objective"], ev.instance, reached, ev.at, [])
            state.objectives[key] = st
        st.reached = reached
        st.last_evaluated = ev.at
        st.history.append((ev.at, reached))

    elif ev.kind == "instance_migrated":
        inst = state.instances.get(ev.instance)
        if inst is None:
            raise CorruptLog(f"seq {ev.seq}: migration of unknown instance")
        inst.model_version = ev.payload["to_version"]

    else:  # pragma: no cover - from_dict already rejects unknown kinds
        raise CorruptLog(f"seq {ev.seq}: unknown kind {ev.kind!r}")


def replay(events: Iterable[TraceEvent], registry) -> EngineState:
    """Rebuild the full engine state from a gapless event sequence."""
    state = EngineState()
    log = EventLog()
    for ev in events:
        log.ingest(ev)  # seq gap + per-instance timestamp checks
        apply_event(state, ev, registry)
    return state
