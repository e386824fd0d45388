"""Indicator computation over the trace.

Two indicator families: performance indicators read only the events of
instances already completed (the settled past), process indicators may read
running instances and are the basis of drift detection.  Every value is a
pure function of (log prefix up to as_of, definition), so recomputation is
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import CyclicRatio, UnknownIndicator, ValidationFailed
from .model import ModelRegistry, ProcessModel
from .timeutil import Millis, format_ts

PERSPECTIVES = ("financial", "customer", "internal_process", "learning")
FAMILIES = ("performance", "process")
SPEC_OPS = ("terminal_state_count", "completed_count", "ratio",
            "mean_transition_duration", "in_state_count", "overdue_count",
            "attestation_count")
RENDER_KINDS = ("scalar", "ratio", "time_series", "status_flag", "comment")


@dataclass(frozen=True)
class IndicatorDef:
    name: str
    family: str
    perspective: str
    spec: dict  # {"op": ..., op-specific keys}
    render: dict  # {"kind": ..., kind-specific keys}

    @classmethod
    def from_dict(cls, d: dict) -> "IndicatorDef":
        if d.get("family") not in FAMILIES:
            raise ValidationFailed(f"indicator {d.get('name')!r}: bad family {d.get('family')!r}")
        if d.get("perspective") not in PERSPECTIVES:
            raise ValidationFailed(
                f"indicator {d.get('name')!r}: bad perspective {d.get('perspective')!r}")
        spec = d.get("spec") or {}
        if spec.get("op") not in SPEC_OPS:
            raise ValidationFailed(f"indicator {d.get('name')!r}: bad spec op {spec.get('op')!r}")
        render = d.get("render", "scalar")
        if isinstance(render, str):
            render = {"kind": render}
        if render.get("kind") not in RENDER_KINDS:
            raise ValidationFailed(
                f"indicator {d.get('name')!r}: bad render {render.get('kind')!r}")
        if spec["op"] in ("overdue_count", "in_state_count") and d["family"] != "process":
            raise ValidationFailed(
                f"indicator {d['name']!r}: running-state spec requires family=process")
        return cls(name=d["name"], family=d["family"], perspective=d["perspective"],
                   spec=spec, render=render)

    def to_dict(self) -> dict:
        return {"name": self.name, "family": self.family,
                "perspective": self.perspective, "spec": dict(self.spec),
                "render": dict(self.render)}


@dataclass(frozen=True)
class IndicatorValue:
    indicator: str
    as_of: Millis
    value: object  # number, flag string, text, point list, or None (undefined)
    sample_size: int
    family: str = ""
    perspective: str = ""

    def to_dict(self) -> dict:
        return {
            "indicator": self.indicator,
            "as_of": format_ts(self.as_of),
            "value": self.value,
            "sample_size": self.sample_size,
            "family": self.family,
            "perspective": self.perspective,
        }


def check_no_ratio_cycles(defs: dict[str, IndicatorDef]) -> None:
    """Reject ratio definitions whose numerator/denominator chains loop."""
    def visit(name: str, stack: tuple) -> None:
        if name in stack:
            raise CyclicRatio(f"ratio cycle through {name!r}")
        d = defs.get(name)
        if d is None:
            raise UnknownIndicator(f"ratio component {name!r} is not defined")
        if d.spec["op"] == "ratio":
            visit(d.spec["numerator"], stack + (name,))
            visit(d.spec["denominator"], stack + (name,))

    for name in defs:
        visit(name, ())


# -- event-scan helpers ------------------------------------------------------

def _instances_of_model(events, model_name: str) -> dict[str, dict]:
    """instance id -> {"started": ms, "completed": ms|None, "entities": payload}."""
    out: dict[str, dict] = {}
    for ev in events:
        if ev.kind == "instance_started" and ev.payload["model"]["name"] == model_name:
            out[ev.instance] = {"started": ev.at, "completed": None,
                                "entities": ev.payload["entities"]}
        elif ev.kind == "instance_completed" and ev.instance in out:
            out[ev.instance]["completed"] = ev.at
    return out


def _completed_by(insts: dict, as_of: Millis) -> set[str]:
    return {i for i, rec in insts.items()
            if rec["completed"] is not None and rec["completed"] <= as_of}


def _state_entries(events, instance_id: str, as_of: Millis):
    """Chronological (at, entity, state) entries for an instance up to as_of."""
    entries = []
    for ev in events:
        if ev.instance != instance_id or ev.at > as_of:
            continue
        if ev.kind == "instance_started":
            for ent in ev.payload["entities"]:
                entries.append((ev.at, ent["id"], ent["state"]))
        elif ev.kind == "state_changed":
            entries.append((ev.at, ev.entity, ev.to_state))
    return entries


def _entity_state_at(events, instance_id: str, entity_id: str, as_of: Millis):
    """(state, entered_at) of one entity at as_of, or None if not yet created."""
    current = None
    for at, eid, state in _state_entries(events, instance_id, as_of):
        if eid == entity_id:
            current = (state, at)
    return current


def _root_entity_id(rec: dict) -> Optional[str]:
    for ent in rec["entities"]:
        if ent.get("parent") is None:
            return ent["id"]
    return None


# -- the indicator library ---------------------------------------------------

def count_by_terminal_state(model: ProcessModel, events, as_of: Millis) -> dict[str, int]:
    """Completed instances bucketed by the terminal state their root entity
    reached; running instances are excluded."""
    lc = model.lifecycle_of(model.root_entity_type().name)
    counts = {s: 0 for s in sorted(lc.terminal)}
    insts = _instances_of_model(events, model.name)
    for iid in _completed_by(insts, as_of):
        root = _root_entity_id(insts[iid])
        got = _entity_state_at(events, iid, root, as_of)
        if got and got[0] in counts:
            counts[got[0]] += 1
    return counts


def completed_count(model: ProcessModel, events, as_of: Millis) -> int:
    insts = _instances_of_model(events, model.name)
    return len(_completed_by(insts, as_of))


def win_rate(model: ProcessModel, events, as_of: Millis):
    """Won / all terminal outcomes; (None, 0) when nothing terminated yet."""
    counts = count_by_terminal_state(model, events, as_of)
    if "Won" not in counts:
        raise ValidationFailed(f"model {model.name!r} has no terminal state 'Won'")
    total = sum(counts.values())
    if total == 0:
        return None, 0
    return counts["Won"] / total, total


def mean_transition_duration(model: ProcessModel, events, as_of: Millis,
                             from_state: str, to_state: str,
                             only_completed: bool = False):
    """Mean per-instance time from first entering from_state to the first
    subsequent entry into to_state; (None, 0) when no instance qualifies."""
    insts = _instances_of_model(events, model.name)
    pool = _completed_by(insts, as_of) if only_completed else set(insts)
    durations = []
    for iid in sorted(pool):
        t_from = None
        t_to = None
        for at, _eid, state in _state_entries(events, iid, as_of):
            if t_from is None and state == from_state:
                t_from = at
            elif t_from is not None and t_to is None and state == to_state:
                t_to = at
        if t_from is not None and t_to is not None:
            durations.append(t_to - t_from)
    if not durations:
        return None, 0
    return sum(durations) / len(durations), len(durations)


def in_state_count(model: ProcessModel, events, as_of: Millis, state: str) -> int:
    """Running instances with an entity currently sitting in `state`."""
    return len(_running_in_state(model, events, as_of, state))


def _running_in_state(model: ProcessModel, events, as_of: Millis, state: str):
    insts = _instances_of_model(events, model.name)
    done = _completed_by(insts, as_of)
    hits = []
    for iid, rec in sorted(insts.items()):
        if iid in done or rec["started"] > as_of:
            continue
        current: dict[str, tuple] = {}
        for at, eid, st in _state_entries(events, iid, as_of):
            current[eid] = (st, at)
        for eid, (st, at) in current.items():
            if st == state:
                hits.append((iid, eid, at))
    return hits


def detect_drift(model: ProcessModel, events, as_of: Millis, state: str,
                 max_dwell: Millis) -> list[tuple[str, Millis]]:
    """Running instances dwelling in `state` longer than max_dwell,
    longest dwell first."""
    out = []
    for iid, _eid, entered in _running_in_state(model, events, as_of, state):
        dwell = as_of - entered
        if dwell > max_dwell:
            out.append((iid, dwell))
    out.sort(key=lambda p: (-p[1], p[0]))
    return out


def attestation_count(model: ProcessModel, events, as_of: Millis, objective: str,
                      only_completed: bool = False) -> int:
    """Distinct instances with at least one attestation of `objective`."""
    insts = _instances_of_model(events, model.name)
    pool = _completed_by(insts, as_of) if only_completed else set(insts)
    hit = set()
    for ev in events:
        if (ev.kind == "objective_attested" and ev.at <= as_of
                and ev.instance in pool
                and ev.payload.get("objective") == objective):
            hit.add(ev.instance)
    return len(hit)


# -- evaluation / rendering --------------------------------------------------

def compute_numeric(d: IndicatorDef, events, registry: ModelRegistry,
                    defs: dict[str, IndicatorDef], as_of: Millis,
                    _stack: tuple = ()) -> tuple[Optional[float], int]:
    """Raw (value, sample_size) for a definition, before render mapping."""
    if d.name in _stack:
        raise CyclicRatio(f"ratio cycle through {d.name!r}")
    spec = d.spec
    op = spec["op"]
    performance = d.family == "performance"
    if op == "ratio":
        num = defs.get(spec["numerator"])
        den = defs.get(spec["denominator"])
        if num is None or den is None:
            raise UnknownIndicator(
                f"ratio {d.name!r} references an undefined indicator")
        nv, _ = compute_numeric(num, events, registry, defs, as_of, _stack + (d.name,))
        dv, dn = compute_numeric(den, events, registry, defs, as_of, _stack + (d.name,))
        if nv is None or dv in (None, 0):
            return None, 0
        sample = int(dv) if float(dv).is_integer() else dn
        return nv / dv, sample

    model = registry.latest(spec["model"])
    if op == "terminal_state_count":
        counts = count_by_terminal_state(model, events, as_of)
        v = counts.get(spec["state"], 0)
        return v, v
    if op == "completed_count":
        v = completed_count(model, events, as_of)
        return v, v
    if op == "mean_transition_duration":
        return mean_transition_duration(model, events, as_of, spec["from_state"],
                                        spec["to_state"], only_completed=performance)
    if op == "in_state_count":
        v = in_state_count(model, events, as_of, spec["state"])
        return v, v
    if op == "overdue_count":
        v = len(detect_drift(model, events, as_of, spec["state"], spec["max_dwell_ms"]))
        return v, v
    if op == "attestation_count":
        v = attestation_count(model, events, as_of, spec["objective"],
                              only_completed=performance)
        return v, v
    raise UnknownIndicator(f"unsupported spec op {op!r}")  # pragma: no cover


def _flag(value, render: dict) -> Optional[str]:
    if value is None:
        return None
    if value >= render["green_at_least"]:
        return "green"
    if value < render["red_below"]:
        return "red"
    return "amber"


def evaluate_indicator(d: IndicatorDef, events, registry: ModelRegistry,
                       defs: dict[str, IndicatorDef], as_of: Millis) -> IndicatorValue:
    """Compute one indicator and map it through its render form."""
    value, sample = compute_numeric(d, events, registry, defs, as_of)
    kind = d.render["kind"]
    if kind in ("scalar", "ratio"):
        rendered = value
    elif kind == "status_flag":
        rendered = _flag(value, d.render)
    elif kind == "comment":
        shown = "n/a" if value is None else f"{value:g}"
        rendered = d.render.get("template", "{name} is {value}").format(
            name=d.name, value=shown, as_of=format_ts(as_of))
    elif kind == "time_series":
        model = registry.latest(d.spec["model"])
        points = []
        insts = _instances_of_model(events, model.name)
        ticks = sorted({rec["completed"] for rec in insts.values()
                        if rec["completed"] is not None and rec["completed"] <= as_of})
        for t in ticks:
            v, _ = compute_numeric(d, events, registry, defs, t)
            points.append([format_ts(t), v])
        rendered = points
    else:  # pragma: no cover
        raise ValidationFailed(f"bad render kind {kind!r}")
    return IndicatorValue(indicator=d.name, as_of=as_of, value=rendered,
                          sample_size=sample, family=d.family,
                          perspective=d.perspective)


def scorecard_report(defs: list[IndicatorDef], events, registry: ModelRegistry,
                     as_of: Millis) -> dict:
    """Indicator values grouped under the four balanced-scorecard
    perspectives; every perspective appears even when empty."""
    by_name = {d.name: d for d in defs}
    check_no_ratio_cycles(by_name)
    report = {"as_of": format_ts(as_of),
              "perspectives": {p: [] for p in PERSPECTIVES}}
    for d in defs:
        val = evaluate_indicator(d, events, registry, by_name, as_of)
        report["perspectives"][d.perspective].append(val.to_dict())
    return report
