import json
import shutil
from pathlib import Path

import pytest

from procflow.engine import Engine
from procflow.model import (
    ModelRegistry,
    actors_from_doc,
    build_process_model,
)
from procflow.indicators import IndicatorDef
from procflow.scenario import load_scenario, run_scenario
from procflow.store import open_workspace

REPO = Path(__file__).resolve().parents[1]
RFQ_MODEL_PATH = REPO / "models" / "rfq.json"
DEFAULT_INDICATORS_PATH = REPO / "indicators" / "default.json"
FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def rfq_doc():
    return json.loads(RFQ_MODEL_PATH.read_text(encoding="utf-8"))


@pytest.fixture
def rfq_model(rfq_doc):
    return build_process_model(rfq_doc)


@pytest.fixture
def default_defs():
    doc = json.loads(DEFAULT_INDICATORS_PATH.read_text(encoding="utf-8"))
    return {d["name"]: IndicatorDef.from_dict(d) for d in doc}


@pytest.fixture
def rfq_actors(rfq_doc):
    return actors_from_doc(rfq_doc)


def make_engine(model_doc, indicator_defs=None):
    registry = ModelRegistry()
    model = build_process_model(model_doc)
    registry.publish(model)
    registry.register_actors(actors_from_doc(model_doc))
    return Engine(registry, indicator_defs=indicator_defs or {})


@pytest.fixture
def rfq_engine(rfq_doc, default_defs):
    return make_engine(rfq_doc, indicator_defs=default_defs)


def run_fixture(tmp_path: Path, name: str):
    """Execute a shipped fixture scenario into a fresh workspace."""
    root = tmp_path / name
    steps = load_scenario(FIXTURES / f"{name}.json")
    with open_workspace(root, create=True) as ws:
        run_scenario(steps, ws, FIXTURES)
    return root


@pytest.fixture
def six_workspace(tmp_path):
    """Workspace produced by the six-quotation fixture, reopened read-only."""
    root = run_fixture(tmp_path, "rfq_six")
    ws = open_workspace(root, writable=False)
    yield ws
    ws.close()


@pytest.fixture
def running_workspace(tmp_path):
    root = run_fixture(tmp_path, "rfq_running")
    ws = open_workspace(root, writable=False)
    yield ws
    ws.close()
