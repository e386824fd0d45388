"""Process model definitions and their consistency rules.

A process model binds entity types (each with a lifecycle state graph) to an
ordered list of role-gated activities, classifies the process along four
typology axes (time, stability, genericity, measurability), and declares the
objectives the process is meant to reach.  The typology is not decorative:
each axis choice imposes checkable constraints on the rest of the model,
enforced by :func:`validate_process_model`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import (
    DanglingTransition,
    FrozenModel,
    MissingInitial,
    TerminalOutflow,
    UnknownModel,
    UnreachableState,
    ValidationFailed,
)


class TimeAxis(str, Enum):
    LIMITED = "limited"
    NOT_LIMITED = "not_limited"
    CYCLICAL = "cyclical"


class Stability(str, Enum):
    STABLE = "stable"
    EVOLUTIONARY = "evolutionary"
    UNSTABLE = "unstable"


class Genericity(str, Enum):
    SINGLE_INSTANCE = "single_instance"
    MULTIPLE_INSTANCES = "multiple_instances"


class Measurability(str, Enum):
    MEASURABLE = "measurable"
    NOT_MEASURABLE = "not_measurable"


ATTRIBUTE_KINDS = ("text", "number", "date", "money", "reference")


@dataclass(frozen=True)
class ProcessTypology:
    time: TimeAxis
    stability: Stability
    genericity: Genericity
    measurability: Measurability

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessTypology":
        try:
            return cls(
                time=TimeAxis(d["time"]),
                stability=Stability(d["stability"]),
                genericity=Genericity(d["genericity"]),
                measurability=Measurability(d["measurability"]),
            )
        except (KeyError, ValueError) as exc:
            raise ValidationFailed(f"bad typology: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "time": self.time.value,
            "stability": self.stability.value,
            "genericity": self.genericity.value,
            "measurability": self.measurability.value,
        }


@dataclass(frozen=True)
class LifecycleDef:
    """Validated state graph: every state reachable, terminals absorbing."""

    name: str
    states: frozenset[str]
    initial: str
    terminal: frozenset[str]
    transitions: frozenset[tuple[str, str]]

    def allows(self, src: str, dst: str) -> bool:
        return (src, dst) in self.transitions

    def has_cycle_through_initial(self) -> bool:
        # a directed cycle through `initial` exists iff initial is reachable
        # from one of its successors
        succ: dict[str, set[str]] = {}
        for a, b in self.transitions:
            succ.setdefault(a, set()).add(b)
        frontier = list(succ.get(self.initial, ()))
        seen: set[str] = set()
        while frontier:
            s = frontier.pop()
            if s == self.initial:
                return True
            if s in seen:
                continue
            seen.add(s)
            frontier.extend(succ.get(s, ()))
        return False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "states": sorted(self.states),
            "initial": self.initial,
            "terminal": sorted(self.terminal),
            "transitions": [list(t) for t in sorted(self.transitions)],
        }


def define_lifecycle(name, states, initial, terminal=(), transitions=()) -> LifecycleDef:
    """Build a lifecycle, rejecting unreachable states, dangling transitions,
    and outflow from terminal states."""
    states = set(states)
    terminal = set(terminal)
    transitions = {tuple(t) for t in transitions}
    if not states:
        raise ValidationFailed("lifecycle needs at least one state")
    if initial not in states:
        raise MissingInitial(f"initial state {initial!r} not among states")
    for s in terminal:
        if s not in states:
            raise DanglingTransition(f"terminal state {s!r} not among states")
    for a, b in transitions:
        if a not in states or b not in states:
            raise DanglingTransition(f"transition ({a!r}, {b!r}) leaves the state set")
        if a in terminal:
            raise TerminalOutflow(f"transition out of terminal state {a!r}")
    reachable = {initial}
    frontier = [initial]
    while frontier:
        cur = frontier.pop()
        for a, b in transitions:
            if a == cur and b not in reachable:
                reachable.add(b)
                frontier.append(b)
    missing = states - reachable
    if missing:
        raise UnreachableState(f"states not reachable from initial: {sorted(missing)}")
    return LifecycleDef(
        name=name,
        states=frozenset(states),
        initial=initial,
        terminal=frozenset(terminal),
        transitions=frozenset(transitions),
    )


@dataclass(frozen=True)
class EntityTypeDef:
    name: str
    attributes: tuple[tuple[str, str], ...]  # (name, kind)
    lifecycle: str  # lifecycle name, resolved against the model
    required_parent: Optional[str] = None  # entity type name

    @property
    def attribute_names(self) -> set[str]:
        return {n for n, _ in self.attributes}

    def attribute_kind(self, name: str) -> Optional[str]:
        for n, k in self.attributes:
            if n == name:
                return k
        return None

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "attributes": [{"name": n, "kind": k} for n, k in self.attributes],
            "lifecycle": self.lifecycle,
        }
        if self.required_parent:
            d["required_parent"] = self.required_parent
        return d


@dataclass(frozen=True)
class ActivityDef:
    name: str
    entity_type: str
    transition: tuple[str, str]
    required_role: str
    min_expertise: int = 0
    inputs: tuple[str, ...] = ()
    objective: Optional[str] = None
    # optional parameter-selected targets (e.g. a decision activity whose
    # outcome picks one of several terminal states)
    outcome_states: Optional[dict[str, str]] = None

    def targets(self) -> set[str]:
        out = {self.transition[1]}
        if self.outcome_states:
            out.update(self.outcome_states.values())
        return out

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "entity_type": self.entity_type,
            "transition": list(self.transition),
            "required_role": self.required_role,
            "min_expertise": self.min_expertise,
            "inputs": list(self.inputs),
        }
        if self.objective:
            d["objective"] = self.objective
        if self.outcome_states:
            d["outcome_states"] = dict(self.outcome_states)
        return d


@dataclass(frozen=True)
class ThresholdSpec:
    metric: str  # indicator name
    comparator: str  # "<=" or ">="
    bound: float


@dataclass(frozen=True)
class Objective:
    name: str
    kind: str  # "threshold" | "attestation"
    continuity: str  # "monotone" | "revisable"
    threshold_spec: Optional[ThresholdSpec] = None

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "continuity": self.continuity}
        if self.threshold_spec:
            d["threshold_spec"] = {
                "metric": self.threshold_spec.metric,
                "comparator": self.threshold_spec.comparator,
                "bound": self.threshold_spec.bound,
            }
        return d


@dataclass(frozen=True)
class Actor:
    id: str
    name: str
    roles: tuple[tuple[str, int], ...]  # (role, expertise rank)

    def expertise_for(self, role: str) -> Optional[int]:
        for r, e in self.roles:
            if r == role:
                return e
        return None

    def satisfies(self, role: str, min_expertise: int) -> bool:
        e = self.expertise_for(role)
        return e is not None and e >= min_expertise

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "roles": [{"role": r, "expertise": e} for r, e in self.roles],
        }


@dataclass(frozen=True)
class ProcessModel:
    name: str
    version: int
    typology: ProcessTypology
    lifecycles: dict[str, LifecycleDef]
    entity_types: tuple[EntityTypeDef, ...]
    activities: tuple[ActivityDef, ...]
    objectives: tuple[Objective, ...]
    roles: tuple[str, ...] = ()

    def entity_type(self, name: str) -> EntityTypeDef:
        for et in self.entity_types:
            if et.name == name:
                return et
        raise ValidationFailed(f"unknown entity type {name!r}")

    def lifecycle_of(self, entity_type: str) -> LifecycleDef:
        return self.lifecycles[self.entity_type(entity_type).lifecycle]

    def activity(self, name: str) -> Optional[ActivityDef]:
        for a in self.activities:
            if a.name == name:
                return a
        return None

    def objective(self, name: str) -> Optional[Objective]:
        for o in self.objectives:
            if o.name == name:
                return o
        return None

    def root_entity_type(self) -> EntityTypeDef:
        roots = [et for et in self.entity_types if et.required_parent is None]
        if len(roots) != 1:
            raise ValidationFailed("model must have exactly one root entity type")
        return roots[0]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "typology": self.typology.to_dict(),
            "lifecycles": [lc.to_dict() for lc in self.lifecycles.values()],
            "entity_types": [et.to_dict() for et in self.entity_types],
            "activities": [a.to_dict() for a in self.activities],
            "objectives": [o.to_dict() for o in self.objectives],
            "roles": list(self.roles),
        }


@dataclass(frozen=True)
class Violation:
    rule: str  # "a".."f" or "structure"
    subject: str
    message: str

    def to_dict(self) -> dict:
        return {"rule": self.rule, "subject": self.subject, "message": self.message}


def _check_parent_acyclic(entity_types) -> None:
    parents = {et.name: et.required_parent for et in entity_types}
    for start in parents:
        seen = set()
        cur = start
        while cur is not None:
            if cur in seen:
                raise ValidationFailed(f"cycle in required_parent chain at {cur!r}")
            seen.add(cur)
            nxt = parents.get(cur)
            if nxt is not None and nxt not in parents:
                raise ValidationFailed(f"required_parent {nxt!r} of {cur!r} does not resolve")
            cur = nxt


def build_process_model(doc: dict) -> ProcessModel:
    """Build a ProcessModel from a plain document, resolving all references.

    Raises ValidationFailed (or a lifecycle error) when a reference fails to
    resolve; typology-level consistency is left to validate_process_model.
    """
    try:
        lifecycles = {}
        for lc in doc.get("lifecycles", []):
            built = define_lifecycle(
                lc["name"], lc["states"], lc["initial"],
                lc.get("terminal", []), lc.get("transitions", []),
            )
            if built.name in lifecycles:
                raise ValidationFailed(f"duplicate lifecycle {built.name!r}")
            lifecycles[built.name] = built

        entity_types = []
        for et in doc.get("entity_types", []):
            attrs = tuple((a["name"], a["kind"]) for a in et.get("attributes", []))
            names = [n for n, _ in attrs]
            if len(names) != len(set(names)):
                raise ValidationFailed(f"duplicate attribute in entity type {et['name']!r}")
            for n, k in attrs:
                if k not in ATTRIBUTE_KINDS:
                    raise ValidationFailed(f"unknown attribute kind {k!r} on {n!r}")
            if et["lifecycle"] not in lifecycles:
                raise ValidationFailed(
                    f"entity type {et['name']!r} references unknown lifecycle {et['lifecycle']!r}")
            entity_types.append(EntityTypeDef(
                name=et["name"], attributes=attrs, lifecycle=et["lifecycle"],
                required_parent=et.get("required_parent"),
            ))
        _check_parent_acyclic(entity_types)

        type_names = {et.name for et in entity_types}
        activities = []
        for a in doc.get("activities", []):
            if a["entity_type"] not in type_names:
                raise ValidationFailed(
                    f"activity {a['name']!r} references unknown entity type {a['entity_type']!r}")
            activities.append(ActivityDef(
                name=a["name"], entity_type=a["entity_type"],
                transition=tuple(a["transition"]),
                required_role=a["required_role"],
                min_expertise=int(a.get("min_expertise", 0)),
                inputs=tuple(a.get("inputs", [])),
                objective=a.get("objective"),
                outcome_states=a.get("outcome_states"),
            ))

        objectives = []
        for o in doc.get("objectives", []):
            spec = None
            if o["kind"] == "threshold":
                ts = o.get("threshold_spec")
                if ts is None:
                    raise ValidationFailed(f"threshold objective {o['name']!r} lacks threshold_spec")
                if ts["comparator"] not in ("<=", ">="):
                    raise ValidationFailed(f"bad comparator {ts['comparator']!r}")
                spec = ThresholdSpec(ts["metric"], ts["comparator"], float(ts["bound"]))
            elif o["kind"] == "attestation":
                if o.get("threshold_spec") is not None:
                    raise ValidationFailed(
                        f"attestation objective {o['name']!r} cannot carry a threshold_spec")
            else:
                raise ValidationFailed(f"unknown objective kind {o['kind']!r}")
            if o.get("continuity") not in ("monotone", "revisable"):
                raise ValidationFailed(f"unknown continuity {o.get('continuity')!r}")
            objectives.append(Objective(o["name"], o["kind"], o["continuity"], spec))

        roles = tuple(r["role"] if isinstance(r, dict) else r for r in doc.get("roles", []))

        return ProcessModel(
            name=doc["name"], version=int(doc["version"]),
            typology=ProcessTypology.from_dict(doc["typology"]),
            lifecycles=lifecycles, entity_types=tuple(entity_types),
            activities=tuple(activities), objectives=tuple(objectives),
            roles=roles,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationFailed(f"malformed model document: {exc!r}") from exc


def actors_from_doc(doc: dict) -> dict[str, Actor]:
    """Aggregate the per-role actor listings of a model document into Actors."""
    merged: dict[str, dict] = {}
    for entry in doc.get("roles", []):
        if not isinstance(entry, dict):
            continue
        role = entry["role"]
        for a in entry.get("actors", []):
            rec = merged.setdefault(a["id"], {"name": a.get("name", a["id"]), "roles": []})
            rec["roles"].append((role, int(a.get("expertise", 0))))
    return {
        aid: Actor(id=aid, name=rec["name"], roles=tuple(rec["roles"]))
        for aid, rec in merged.items()
    }


def validate_process_model(model: ProcessModel) -> list[Violation]:
    """Check the typology-driven constraints; an empty report means valid.

    (a) limited time requires every lifecycle to have a terminal state
    (b) cyclical time requires a lifecycle cycle through its initial state
    (c) non-measurable processes cannot carry threshold objectives
    (d) measurable processes must carry at least one threshold objective
    (e) every activity transition must be legal in its lifecycle
    (f) the first activity of a child entity type must take the parent
        reference as an input
    """
    out: list[Violation] = []

    names = [a.name for a in model.activities]
    for n in sorted({n for n in names if names.count(n) > 1}):
        out.append(Violation("structure", n, f"duplicate activity name {n!r}"))
    declared = {o.name for o in model.objectives}
    for a in model.activities:
        if a.objective and a.objective not in declared:
            out.append(Violation("structure", a.name,
                                 f"activity references undeclared objective {a.objective!r}"))
        et = model.entity_type(a.entity_type)
        for inp in a.inputs:
            if inp not in et.attribute_names:
                out.append(Violation("structure", a.name,
                                     f"input {inp!r} is not an attribute of {et.name!r}"))

    used = {lc.name for lc in (model.lifecycle_of(et.name) for et in model.entity_types)}
    if model.typology.time is TimeAxis.LIMITED:
        for name in sorted(used):
            if not model.lifecycles[name].terminal:
                out.append(Violation("a", name,
                                     f"time=limited but lifecycle {name!r} has no terminal state"))

    if model.typology.time is TimeAxis.CYCLICAL:
        if not any(model.lifecycles[n].has_cycle_through_initial() for n in used):
            out.append(Violation("b", model.name,
                                 "time=cyclical but no lifecycle cycles through its initial state"))

    thresholds = [o for o in model.objectives if o.kind == "threshold"]
    if model.typology.measurability is Measurability.NOT_MEASURABLE:
        for o in thresholds:
            out.append(Violation("c", o.name,
                                 f"measurability=not_measurable forbids threshold objective {o.name!r}"))
    if model.typology.measurability is Measurability.MEASURABLE and not thresholds:
        out.append(Violation("d", model.name,
                             "measurability=measurable requires at least one threshold objective"))

    for a in model.activities:
        lc = model.lifecycle_of(a.entity_type)
        src = a.transition[0]
        for dst in sorted(a.targets()):
            if not lc.allows(src, dst):
                out.append(Violation("e", a.name,
                                     f"transition ({src!r}, {dst!r}) not in lifecycle {lc.name!r}"))

    for et in model.entity_types:
        if et.required_parent is None:
            continue
        lc = model.lifecycle_of(et.name)
        creators = [a for a in model.activities
                    if a.entity_type == et.name and a.transition[0] == lc.initial]
        for a in creators:
            has_ref = any(et.attribute_kind(i) == "reference" for i in a.inputs)
            if not has_ref:
                out.append(Violation("f", a.name,
                                     f"activity {a.name!r} starts child type {et.name!r} "
                                     "without a parent reference input"))

    return out


class ModelRegistry:
    """Holds published model versions; publication is gated by stability.

    stable      -> frozen while live instances exist on the current version
    evolutionary-> new versions register; running instances stay pinned
    unstable    -> new versions register; instances become migratable
    """

    def __init__(self):
        self._models: dict[tuple[str, int], ProcessModel] = {}
        self._actors: dict[str, Actor] = {}

    def get(self, name: str, version: int) -> ProcessModel:
        try:
            return self._models[(name, version)]
        except KeyError:
            raise UnknownModel(f"no published model {name!r} version {version}") from None

    def latest(self, name: str) -> ProcessModel:
        versions = [v for (n, v) in self._models if n == name]
        if not versions:
            raise UnknownModel(f"no published model {name!r}")
        return self._models[(name, max(versions))]

    def versions(self, name: str) -> list[int]:
        return sorted(v for (n, v) in self._models if n == name)

    def all_models(self) -> list[ProcessModel]:
        return [self._models[k] for k in sorted(self._models)]

    def has(self, name: str, version: int) -> bool:
        return (name, version) in self._models

    def actors(self) -> dict[str, Actor]:
        return dict(self._actors)

    def actor(self, actor_id: str) -> Optional[Actor]:
        return self._actors.get(actor_id)

    def register_actors(self, actors: dict[str, Actor]) -> None:
        self._actors.update(actors)

    def publish(self, model: ProcessModel, live_instance_count: int = 0) -> ProcessModel:
        """Register a model version (see publish gating above).

        ``live_instance_count`` is the number of running instances of this
        model name, supplied by the engine.
        """
        report = validate_process_model(model)
        if report:
            raise ValidationFailed(
                "; ".join(v.message for v in report))
        existing = self.versions(model.name)
        if existing:
            current = self._models[(model.name, max(existing))]
            if model.version <= max(existing):
                raise ValidationFailed(
                    f"version {model.version} not newer than published {max(existing)}")
            if current.typology.stability is Stability.STABLE and live_instance_count > 0:
                raise FrozenModel(
                    f"model {model.name!r} is stable with {live_instance_count} live instances")
        self._models[(model.name, model.version)] = model
        return model
