#!/usr/bin/env python3
"""Record real API responses from the six-quotation fixture workspace into
frontend/test/fixtures/, so the UI contract tests compare rendered output
against genuine server payloads rather than hand-written ones."""

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient  # noqa: E402

from procflow.service import create_app  # noqa: E402
from procflow.store import open_workspace  # noqa: E402
from procflow.timeutil import format_ts  # noqa: E402
from conftest import run_fixture  # noqa: E402


def main():
    out_dir = REPO / "frontend" / "test" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix="procflow-record-"))
    try:
        root = run_fixture(tmp, "rfq_six")
        with open_workspace(root) as ws:
            with TestClient(create_app(ws)) as client:
                as_of = format_ts(ws.engine.log.last_at)
                # one fresh instance so the worklist is non-empty
                started = client.post("/instances", json={
                    "model": "rfq",
                    "at": format_ts(ws.engine.log.last_at + 60_000),
                    "attributes": {"customer": "walden", "reference": "RFQ-2025-777"},
                }).json()
                wl_as_of = started["started_at"]

                recordings = {
                    "actors": client.get("/actors").json(),
                    "models": client.get("/models").json(),
                    "model_rfq": client.get("/models/rfq/1").json(),
                    "worklist_claire": client.get(
                        "/worklist", params={"actor": "claire",
                                             "as_of": wl_as_of}).json(),
                    "worklist_ghost": client.get(
                        "/worklist", params={"actor": "ghost"}).json(),
                    "scorecard": client.get(
                        "/scorecard", params={"as_of": as_of}).json(),
                    "instance": client.get(f"/instances/{started['id']}").json(),
                    "events_instance": client.get(
                        "/events", params={"instance": started["id"]}).json(),
                    "indicator_empty_sample": client.get(
                        "/indicators/overdue_analysis",
                        params={"as_of": as_of}).json(),
                    "conflict_409": {"code": "WrongState",
                                     "message": "recorded conflict body"},
                }
                # a real 409 for the stale-work-item path
                reg = "registration of the request for Quotation"
                client.post(f"/instances/{started['id']}/activities/{reg}",
                            json={"actor": "claire",
                                  "at": format_ts(ws.engine.log.last_at + 1)})
                conflict = client.post(
                    f"/instances/{started['id']}/activities/{reg}",
                    json={"actor": "claire",
                          "at": format_ts(ws.engine.log.last_at + 2)})
                assert conflict.status_code == 409
                recordings["conflict_409"] = conflict.json()

        running_root = run_fixture(tmp, "rfq_running")
        with open_workspace(running_root, writable=False) as ws:
            with TestClient(create_app(ws)) as client:
                recordings["drift"] = client.get("/drift", params={
                    "model": "rfq", "state": "UnderAnalysis",
                    "max_dwell_ms": 259200000,
                    "as_of": format_ts(ws.engine.log.last_at + 864000000),
                }).json()

        for name, body in recordings.items():
            (out_dir / f"{name}.json").write_text(
                json.dumps(body, indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8")
            print(f"recorded {name}.json")
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


if __name__ == "__main__":
    main()
