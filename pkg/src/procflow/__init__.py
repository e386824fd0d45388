"""Embeddable business-process engine: typed process models bound to entity
lifecycles, role/expertise-gated execution with full traceability, and
scorecard indicators derived from the trace."""

from .engine import Engine, WorkItem
from .errors import ProcessError
from .model import (
    ActivityDef,
    Actor,
    EntityTypeDef,
    LifecycleDef,
    ModelRegistry,
    Objective,
    ProcessModel,
    ProcessTypology,
    build_process_model,
    define_lifecycle,
    validate_process_model,
)
from .trace import EventLog, TraceEvent, replay

__all__ = [
    "ActivityDef",
    "Actor",
    "Engine",
    "EntityTypeDef",
    "EventLog",
    "LifecycleDef",
    "ModelRegistry",
    "Objective",
    "ProcessError",
    "ProcessModel",
    "ProcessTypology",
    "TraceEvent",
    "WorkItem",
    "build_process_model",
    "define_lifecycle",
    "replay",
    "validate_process_model",
]
