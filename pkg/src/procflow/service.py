"""HTTP JSON API over the engine, worklists, and indicators.

Each route delegates 1:1 to an engine or indicator operation; actor identity
travels explicitly in the request (no auth), and `at` timestamps come from
the client so traces stay replayable.
"""

from __future__ import annotations

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from . import indicators as ind
from .errors import ProcessError, ValidationFailed
from .store import Workspace
from .timeutil import parse_ts

# machine code -> HTTP status; totality over the error hierarchy is asserted
# by the test suite
ERROR_STATUS = {
    "MissingInitial": 400,
    "UnreachableState": 400,
    "DanglingTransition": 400,
    "TerminalOutflow": 400,
    "ValidationFailed": 400,
    "ClockSkew": 400,
    "KindMismatch": 400,
    "CyclicRatio": 400,
    "Forbidden": 403,
    "UnknownModel": 404,
    "UnknownInstance": 404,
    "UnknownActivity": 404,
    "UnknownObjective": 404,
    "UnknownIndicator": 404,
    "MissingRoot": 404,
    "WrongState": 409,
    "SingleInstanceViolation": 409,
    "FrozenModel": 409,
    "NotRunning": 409,
    "StabilityForbids": 409,
    "StateNotInTarget": 409,
    "StaleSnapshot": 409,
    "MissingInput": 422,
    "CorruptLog": 500,
    "StorageFailure": 500,
    "ProcessError": 500,
}


def _as_of(ws: Workspace, raw) -> int:
    return parse_ts(raw) if raw else ws.engine.log.last_at


def create_app(ws: Workspace, ui_origin: str | None = None) -> FastAPI:
    app = FastAPI(title="process engine api")

    if ui_origin:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=[ui_origin],
                           allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ProcessError)
    async def _domain_error(_req: Request, exc: ProcessError):
        status = ERROR_STATUS.get(exc.code, 500)
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": exc.message})

    # -- models --------------------------------------------------------------

    @app.post("/models")
    def publish_model(doc: dict = Body(...)):
        model = ws.publish_model_doc(doc)
        return {"name": model.name, "version": model.version}

    @app.get("/models")
    def list_models():
        return [{"name": m.name, "version": m.version,
                 "typology": m.typology.to_dict()} for m in ws.registry.all_models()]

    @app.get("/models/{name}/{version}")
    def get_model(name: str, version: int):
        return ws.registry.get(name, version).to_dict()

    # -- instances -----------------------------------------------------------

    @app.post("/instances")
    def instantiate(body: dict = Body(...)):
        return ws.engine.instantiate_process(
            body["model"], body.get("attributes"),
            at=parse_ts(body["at"]), version=body.get("version"))

    @app.get("/instances")
    def list_instances(limit: int | None = None):
        ids = sorted(ws.engine.state.instances)
        if limit is not None:
            ids = ids[:limit]
        return [ws.engine.instance_view(i) for i in ids]

    @app.get("/instances/{instance_id}")
    def get_instance(instance_id: str):
        return ws.engine.instance_view(instance_id)

    @app.post("/instances/{instance_id}/activities/{activity_name}")
    def perform(instance_id: str, activity_name: str, body: dict = Body(...)):
        actor = ws.registry.actor(body.get("actor", ""))
        if actor is None:
            raise ValidationFailed(f"unknown actor {body.get('actor')!r}")
        return ws.engine.perform_activity(
            instance_id, activity_name, actor,
            parameters=body.get("parameters"), at=parse_ts(body["at"]))

    @app.post("/instances/{instance_id}/migrate")
    def migrate(instance_id: str, body: dict = Body(...)):
        actor = ws.registry.actor(body.get("actor", ""))
        if actor is None:
            raise ValidationFailed(f"unknown actor {body.get('actor')!r}")
        return ws.engine.migrate_instance(
            instance_id, body["to_version"], actor, at=parse_ts(body["at"]))

    # -- worklist ------------------------------------------------------------

    @app.get("/worklist")
    def worklist(actor: str, as_of: str | None = None):
        a = ws.registry.actor(actor)  # unknown actor -> empty list
        items = ws.engine.worklist(a, _as_of(ws, as_of))
        return [w.to_dict() for w in items]

    @app.get("/actors")
    def actors():
        return [a.to_dict() for a in sorted(ws.registry.actors().values(),
                                            key=lambda a: a.id)]

    # -- objectives ----------------------------------------------------------

    @app.post("/objectives/{objective_name}/attest")
    def attest(objective_name: str, body: dict = Body(...)):
        actor = ws.registry.actor(body.get("actor", ""))
        if actor is None:
            raise ValidationFailed(f"unknown actor {body.get('actor')!r}")
        ws.engine.attest_objective(
            objective_name, body["instance"], actor, at=parse_ts(body["at"]))
        return ws.engine.instance_view(body["instance"])

    # -- indicators ----------------------------------------------------------

    @app.get("/indicators")
    def list_indicators():
        return [d.to_dict() for d in ws.indicator_defs.values()]

    @app.get("/indicators/{name}")
    def indicator(name: str, as_of: str | None = None):
        d = ws.indicator_defs.get(name)
        if d is None:
            raise ind.UnknownIndicator(f"no indicator {name!r}")
        val = ind.evaluate_indicator(d, ws.engine.log.events, ws.registry,
                                     ws.indicator_defs, _as_of(ws, as_of))
        return val.to_dict()

    @app.get("/drift")
    def drift(model: str, state: str, max_dwell_ms: int, as_of: str | None = None):
        m = ws.registry.latest(model)
        when = _as_of(ws, as_of)
        hits = ind.detect_drift(m, ws.engine.log.events, when, state, max_dwell_ms)
        return [{"instance": iid, "dwell_ms": dwell} for iid, dwell in hits]

    @app.get("/scorecard")
    def scorecard(as_of: str | None = None):
        return ind.scorecard_report(list(ws.indicator_defs.values()),
                                    ws.engine.log.events, ws.registry,
                                    _as_of(ws, as_of))

    # -- trace ---------------------------------------------------------------

    @app.get("/events")
    def events(instance: str | None = None, entity: str | None = None,
               kind: str | None = None, actor: str | None = None,
               since: str | None = None, until: str | None = None,
               limit: int | None = None):
        time_range = None
        if since or until:
            time_range = (parse_ts(since) if since else None,
                          parse_ts(until) if until else None)
        evs = ws.engine.log.query(instance=instance, entity=entity, kind=kind,
                                  actor=actor, time_range=time_range, limit=limit)
        return [e.to_dict() for e in evs]

    return app
