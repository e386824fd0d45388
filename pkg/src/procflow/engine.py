"""Process execution: instantiation, worklists, activity execution,
objective evaluation, and instance migration.

The engine owns no state of its own beyond the event log: every mutation is
expressed as a trace event which is appended and then applied through the
same ``apply_event`` used by replay, so rebuilding from the log always
reproduces the live state.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

from . import indicators as ind
from .errors import (
    ClockSkew,
    Forbidden,
    KindMismatch,
    MissingInput,
    NotRunning,
    SingleInstanceViolation,
    StabilityForbids,
    StateNotInTarget,
    UnknownActivity,
    UnknownInstance,
    UnknownModel,
    UnknownObjective,
    ValidationFailed,
    WrongState,
)
from .model import Actor, ModelRegistry, ProcessModel, Stability, Genericity, TimeAxis
from .timeutil import Millis
from .trace import EngineState, EventLog, ObjectiveState, apply_event, obj_key


@dataclass(frozen=True)
class WorkItem:
    instance: str
    activity: str
    entity: str
    enabled_since: Millis

    def to_dict(self) -> dict:
        from .timeutil import format_ts
        return {
            "instance": self.instance,
            "activity": self.activity,
            "entity": self.entity,
            "enabled_since": format_ts(self.enabled_since),
        }


class Engine:
    """Single-writer process engine over a model registry and an event log."""

    def __init__(self, registry: ModelRegistry, log: Optional[EventLog] = None,
                 indicator_defs: Optional[dict] = None,
                 state: Optional[EngineState] = None):
        self.registry = registry
        self.log = log if log is not None else EventLog()
        self.indicator_defs = indicator_defs or {}
        self.state = state if state is not None else EngineState()
        self._lock = threading.RLock()

    # -- helpers -------------------------------------------------------------

    def _instance(self, instance_id: str):
        inst = self.state.instances.get(instance_id)
        if inst is None:
            raise UnknownInstance(f"no instance {instance_id!r}")
        return inst

    def _model_of(self, inst) -> ProcessModel:
        return self.registry.get(inst.model_name, inst.model_version)

    def _live_count(self, model_name: str) -> int:
        return sum(1 for i in self.state.instances.values()
                   if i.model_name == model_name and i.status == "running")

    def _check_clock(self, instance_id: str, at: Millis) -> None:
        latest = max((e.at for e in self.log.events if e.instance == instance_id), default=None)
        if latest is not None and at < latest:
            raise ClockSkew(f"timestamp regression for instance {instance_id}")

    def _commit(self, at, kind, instance, **kw):
        ev = self.log.append(at, kind, instance, **kw)
        apply_event(self.state, ev, self.registry)
        return ev

    # -- model governance ----------------------------------------------------

    def publish_model(self, model: ProcessModel) -> ProcessModel:
        with self._lock:
            return self.registry.publish(model, self._live_count(model.name))

    # -- instantiation -------------------------------------------------------

    def instantiate_process(self, model_name: str, initial_attributes=None,
                            at: Millis = 0, version: Optional[int] = None) -> dict:
        """Create a running instance with one entity per declared type,
        each in its lifecycle's initial state."""
        with self._lock:
            model = (self.registry.get(model_name, version) if version is not None
                     else self.registry.latest(model_name))
            if (model.typology.genericity is Genericity.SINGLE_INSTANCE
                    and self._live_count(model_name) > 0):
                raise SingleInstanceViolation(
                    f"model {model_name!r} is single_instance and already running")
            root = model.root_entity_type()
            attrs = dict(initial_attributes or {})
            unknown = set(attrs) - root.attribute_names
            if unknown:
                raise ValidationFailed(f"unknown attributes for {root.name!r}: {sorted(unknown)}")

            instance_id = f"{model_name}-{self.state.instance_counter + 1:04d}"
            entities = []
            ids = {}
            for et in model.entity_types:
                eid = f"{instance_id}:{et.name}"
                ids[et.name] = eid
            for et in model.entity_types:
                lc = model.lifecycles[et.lifecycle]
                entities.append({
                    "id": ids[et.name],
                    "type": et.name,
                    "state": lc.initial,
                    "attributes": attrs if et.name == root.name else {},
                    "parent": ids.get(et.required_parent) if et.required_parent else None,
                })
            self._commit(at, "instance_started", instance_id, payload={
                "model": {"name": model.name, "version": model.version},
                "entities": entities,
            })
            return self.instance_view(instance_id)

    # -- worklist ------------------------------------------------------------

    def worklist(self, actor: Optional[Actor], as_of: Millis) -> list[WorkItem]:
        """Work items the actor can execute right now, oldest enabled first,
        ties broken by instance id."""
        if actor is None:
            return []
        items = []
        for inst in self.state.instances.values():
            if inst.status != "running":
                continue
            # an item is listed only if perform_activity at as_of would pass
            # its preconditions, which includes the per-instance clock check
            last = max((e.at for e in self.log.events if e.instance == inst.id), default=None)
            if last is None or last > as_of:
                continue
            model = self._model_of(inst)
            for act in model.activities:
                if not actor.satisfies(act.required_role, act.min_expertise):
                    continue
                eid = inst.context.get(act.entity_type)
                ent = self.state.entities.get(eid)
                if ent is None or ent.state != act.transition[0]:
                    continue
                if ent.entered_state_at > as_of:
                    continue
                items.append(WorkItem(inst.id, act.name, ent.id, ent.entered_state_at))
        items.sort(key=lambda w: (w.enabled_since, w.instance))
        return items

    # -- activity execution --------------------------------------------------

    def perform_activity(self, instance_id: str, activity_name: str, actor: Actor,
                         parameters=None, at: Millis = 0) -> dict:
        with self._lock:
            inst = self._instance(instance_id)
            if inst.status != "running":
                raise NotRunning(f"instance {instance_id} is {inst.status}")
            model = self._model_of(inst)
            act = model.activity(activity_name)
            if act is None:
                raise UnknownActivity(f"no activity {activity_name!r} in model {model.name!r}")
            self._check_clock(instance_id, at)
            ent = self.state.entities[inst.context[act.entity_type]]
            if ent.state != act.transition[0]:
                raise WrongState(
                    f"entity {ent.id} is in {ent.state!r}, activity needs {act.transition[0]!r}")
            if not actor.satisfies(act.required_role, act.min_expertise):
                raise Forbidden(
                    f"actor {actor.id!r} lacks role {act.required_role!r} "
                    f"at expertise >= {act.min_expertise}")

            params = dict(parameters or {})
            target = act.transition[1]
            outcome = None
            if act.outcome_states:
                outcome = params.pop("outcome", None)
                if outcome not in act.outcome_states:
                    raise MissingInput(
                        f"activity {act.name!r} needs an outcome among "
                        f"{sorted(act.outcome_states)}")
                target = act.outcome_states[outcome]

            et = model.entity_type(act.entity_type)
            unknown = set(params) - et.attribute_names
            if unknown:
                raise ValidationFailed(f"unknown parameters: {sorted(unknown)}")
            missing = [i for i in act.inputs
                       if params.get(i) is None and ent.attributes.get(i) is None]
            if missing:
                raise MissingInput(f"activity {act.name!r} missing inputs: {missing}")

            payload = {"attributes": params}
            if outcome is not None:
                payload["outcome"] = outcome
            self._commit(at, "state_changed", instance_id, entity=ent.id,
                         activity=act.name, actor=actor.id,
                         from_state=act.transition[0], to_state=target,
                         payload=payload)

            if self._all_terminal(inst, model) and model.typology.time is TimeAxis.LIMITED:
                self._commit(at, "instance_completed", instance_id)

            if act.objective:
                self.evaluate_objective(act.objective, instance_id, at)

            return self.instance_view(instance_id)

    def _all_terminal(self, inst, model: ProcessModel) -> bool:
        for type_name, eid in inst.context.items():
            lc = model.lifecycle_of(type_name)
            if not lc.terminal:
                continue
            if self.state.entities[eid].state not in lc.terminal:
                return False
        return True

    # -- objectives ----------------------------------------------------------

    def evaluate_objective(self, objective_name: str, instance_id: str,
                           at: Millis) -> ObjectiveState:
        """Evaluate and record an objective's reached status.

        Threshold objectives compare their indicator against the bound;
        attestation objectives are reached iff an attestation event exists.
        Monotone objectives latch: once reached, later evaluations stay
        reached."""
        with self._lock:
            inst = self._instance(instance_id)
            model = self._model_of(inst)
            obj = model.objective(objective_name)
            if obj is None:
                raise UnknownObjective(
                    f"no objective {objective_name!r} on model {model.name!r}")
            self._check_clock(instance_id, at)

            if obj.kind == "threshold":
                spec = obj.threshold_spec
                d = self.indicator_defs.get(spec.metric)
                if d is None:
                    raise ind.UnknownIndicator(
                        f"objective {obj.name!r} references unknown indicator {spec.metric!r}")
                value, _ = ind.compute_numeric(d, self.log.events, self.registry,
                                               self.indicator_defs, at)
                if value is None:
                    raw = False
                elif spec.comparator == ">=":
                    raw = value >= spec.bound
                else:
                    raw = value <= spec.bound
            else:
                raw = any(e.kind == "objective_attested"
                          and e.instance == instance_id
                          and e.payload.get("objective") == objective_name
                          and e.at <= at
                          for e in self.log.events)

            prev = self.state.objectives.get(obj_key(instance_id, objective_name))
            reached = raw
            if obj.continuity == "monotone" and prev is not None and prev.reached:
                reached = True
            self._commit(at, "objective_evaluated", instance_id,
                         payload={"objective": objective_name, "reached": reached})
            return self.state.objectives[obj_key(instance_id, objective_name)]

    def attest_objective(self, objective_name: str, instance_id: str, actor: Actor,
                         at: Millis) -> ObjectiveState:
        with self._lock:
            inst = self._instance(instance_id)
            model = self._model_of(inst)
            obj = model.objective(objective_name)
            if obj is None:
                raise UnknownObjective(
                    f"no objective {objective_name!r} on model {model.name!r}")
            if obj.kind != "attestation":
                raise KindMismatch(f"objective {obj.name!r} is a threshold objective")
            if not any(actor.expertise_for(r) is not None for r in model.roles):
                raise Forbidden(f"actor {actor.id!r} holds no role on model {model.name!r}")
            self._check_clock(instance_id, at)
            self._commit(at, "objective_attested", instance_id, actor=actor.id,
                         payload={"objective": objective_name})
            return self.state.objectives[obj_key(instance_id, objective_name)]

    # -- migration -----------------------------------------------------------

    def migrate_instance(self, instance_id: str, to_version: int, actor: Actor,
                         at: Millis) -> dict:
        with self._lock:
            inst = self._instance(instance_id)
            current = self._model_of(inst)
            if current.typology.stability is not Stability.UNSTABLE:
                raise StabilityForbids(
                    f"model {current.name!r} stability "
                    f"{current.typology.stability.value!r} forbids migration")
            target = self.registry.get(current.name, to_version)
            for type_name, eid in inst.context.items():
                st = self.state.entities[eid].state
                try:
                    lc = target.lifecycle_of(type_name)
                except Exception:
                    raise StateNotInTarget(
                        f"entity type {type_name!r} missing in version {to_version}")
                if st not in lc.states:
                    raise StateNotInTarget(
                        f"state {st!r} of {eid} does not exist in version {to_version}")
            self._check_clock(instance_id, at)
            self._commit(at, "instance_migrated", instance_id, actor=actor.id,
                         payload={"from_version": inst.model_version,
                                  "to_version": to_version})
            return self.instance_view(instance_id)

    # -- views ---------------------------------------------------------------

    def instance_view(self, instance_id: str) -> dict:
        from .timeutil import format_ts
        inst = self._instance(instance_id)
        entities = []
        for type_name, eid in inst.context.items():
            ent = self.state.entities[eid]
            entities.append({
                "id": ent.id, "type": ent.type, "state": ent.state,
                "attributes": dict(ent.attributes), "parent": ent.parent,
                "entered_state_at": format_ts(ent.entered_state_at),
            })
        objectives = []
        for key, ost in sorted(self.state.objectives.items()):
            if ost.instance != instance_id:
                continue
            objectives.append({
                "objective": ost.objective, "reached": ost.reached,
                "last_evaluated": format_ts(ost.last_evaluated),
                "history": [[format_ts(t), r] for t, r in ost.history],
            })
        return {
            "id": inst.id,
            "model": {"name": inst.model_name, "version": inst.model_version},
            "status": inst.status,
            "started_at": format_ts(inst.started_at),
            "ended_at": format_ts(inst.ended_at) if inst.ended_at is not None else None,
            "entities": entities,
            "objectives": objectives,
        }
