import copy

import pytest

from procflow.errors import (
    Forbidden,
    KindMismatch,
    MissingInput,
    NotRunning,
    SingleInstanceViolation,
    StabilityForbids,
    StateNotInTarget,
    UnknownModel,
    WrongState,
)
from procflow.model import Actor, build_process_model

from conftest import make_engine

HOUR = 3_600_000


def start_rfq(engine, at=0):
    return engine.instantiate_process(
        "rfq", {"customer": "acme", "reference": "RFQ-1"}, at=at)


def drive_to_decision(engine, iid, actors, base=0):
    """Run every activity up to (not including) the customer decision."""
    engine.perform_activity(iid, "registration of the request for Quotation",
                            actors["claire"], at=base + 1)
    engine.perform_activity(iid, "analysis of the request for quotation",
                            actors["marc"], at=base + 2)
    engine.perform_activity(iid, "a project manager affectation", actors["paula"],
                            {"rfq_ref": f"{iid}:request_for_quotation",
                             "project_manager": "Paula"}, at=base + 3)
    engine.perform_activity(iid, "Realization of the offer", actors["paula"],
                            {"price": 100}, at=base + 4)
    engine.perform_activity(iid, "Validation of the offer", actors["victor"],
                            at=base + 5)
    engine.perform_activity(iid, "Sending to customer the offer", actors["claire"],
                            at=base + 6)


# -- instantiation -----------------------------------------------------------

def test_multiple_instances_allowed(rfq_engine):
    a = start_rfq(rfq_engine, at=0)
    b = start_rfq(rfq_engine, at=1)
    assert a["id"] != b["id"]
    assert a["status"] == b["status"] == "running"


def test_root_entity_starts_in_initial_state(rfq_engine):
    view = start_rfq(rfq_engine)
    states = {e["type"]: e["state"] for e in view["entities"]}
    assert states == {"request_for_quotation": "Draft", "offer": "Created"}
    parents = {e["type"]: e["parent"] for e in view["entities"]}
    assert parents["request_for_quotation"] is None
    assert parents["offer"] == view["id"] + ":request_for_quotation"


def test_instantiate_emits_one_started_event(rfq_engine):
    start_rfq(rfq_engine)
    kinds = [e.kind for e in rfq_engine.log.events]
    assert kinds == ["instance_started"]


def test_single_instance_model_rejects_second(rfq_doc, default_defs):
    doc = copy.deepcopy(rfq_doc)
    doc["typology"]["genericity"] = "single_instance"
    eng = make_engine(doc, default_defs)
    start_rfq(eng, at=0)
    with pytest.raises(SingleInstanceViolation):
        start_rfq(eng, at=1)


def test_unknown_model_rejected(rfq_engine):
    with pytest.raises(UnknownModel):
        rfq_engine.instantiate_process("nope", at=0)


# -- worklist ----------------------------------------------------------------

def test_roleless_actor_gets_empty_worklist(rfq_engine):
    start_rfq(rfq_engine)
    nobody = Actor("nobody", "Nobody", ())
    assert rfq_engine.worklist(nobody, as_of=10) == []


def test_analyst_sees_analysis_item(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    rfq_engine.perform_activity(view["id"], "registration of the request for Quotation",
                                rfq_actors["claire"], at=1)
    items = rfq_engine.worklist(rfq_actors["marc"], as_of=1)
    assert [w.activity for w in items] == ["analysis of the request for quotation"]
    assert items[0].instance == view["id"]


def test_worklist_tie_breaks_on_instance_id(rfq_engine, rfq_actors):
    a = start_rfq(rfq_engine, at=0)
    b = start_rfq(rfq_engine, at=0)
    items = rfq_engine.worklist(rfq_actors["claire"], as_of=0)
    regs = [w for w in items if w.activity.startswith("registration")]
    assert [w.instance for w in regs] == sorted([a["id"], b["id"]])


def test_expertise_gate_hides_items(rfq_engine, rfq_actors):
    # claire holds analyst at rank 1, below the required 2
    view = start_rfq(rfq_engine, at=0)
    rfq_engine.perform_activity(view["id"], "registration of the request for Quotation",
                                rfq_actors["claire"], at=1)
    names = {w.activity for w in rfq_engine.worklist(rfq_actors["claire"], as_of=1)}
    assert "analysis of the request for quotation" not in names


# -- perform_activity --------------------------------------------------------

def test_registration_transitions_rfq(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    out = rfq_engine.perform_activity(view["id"],
                                      "registration of the request for Quotation",
                                      rfq_actors["claire"], at=1)
    states = {e["type"]: e["state"] for e in out["entities"]}
    assert states["request_for_quotation"] == "Registered"
    changed = [e for e in rfq_engine.log.events if e.kind == "state_changed"]
    assert len(changed) == 1
    assert (changed[0].from_state, changed[0].to_state) == ("Draft", "Registered")


def test_repeat_activity_is_wrong_state(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    rfq_engine.perform_activity(view["id"], "registration of the request for Quotation",
                                rfq_actors["claire"], at=1)
    before = rfq_engine.log.last_seq
    with pytest.raises(WrongState):
        rfq_engine.perform_activity(view["id"],
                                    "registration of the request for Quotation",
                                    rfq_actors["claire"], at=2)
    assert rfq_engine.log.last_seq == before


def test_low_expertise_is_forbidden_and_appends_nothing(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    iid = view["id"]
    drive_to_decision(rfq_engine, iid, rfq_actors)
    # rerun validation attempt with an undertrained actor on a fresh instance
    v2 = start_rfq(rfq_engine, at=10)
    rfq_engine.perform_activity(v2["id"], "registration of the request for Quotation",
                                rfq_actors["claire"], at=11)
    rfq_engine.perform_activity(v2["id"], "analysis of the request for quotation",
                                rfq_actors["marc"], at=12)
    rfq_engine.perform_activity(v2["id"], "a project manager affectation",
                                rfq_actors["paula"],
                                {"rfq_ref": f"{v2['id']}:request_for_quotation",
                                 "project_manager": "Paula"}, at=13)
    rfq_engine.perform_activity(v2["id"], "Realization of the offer",
                                rfq_actors["paula"], {"price": 5}, at=14)
    before = rfq_engine.log.last_seq
    weak = Actor("weak", "Weak", (("expert", 1),))
    with pytest.raises(Forbidden):
        rfq_engine.perform_activity(v2["id"], "Validation of the offer", weak, at=15)
    assert rfq_engine.log.last_seq == before


def test_missing_input_rejected(rfq_engine, rfq_actors):
    view = rfq_engine.instantiate_process("rfq", {"customer": "acme"}, at=0)
    before = rfq_engine.log.last_seq
    with pytest.raises(MissingInput):
        rfq_engine.perform_activity(view["id"],
                                    "registration of the request for Quotation",
                                    rfq_actors["claire"], at=1)
    assert rfq_engine.log.last_seq == before


def test_input_satisfied_by_parameters(rfq_engine, rfq_actors):
    view = rfq_engine.instantiate_process("rfq", {"customer": "acme"}, at=0)
    out = rfq_engine.perform_activity(view["id"],
                                      "registration of the request for Quotation",
                                      rfq_actors["claire"],
                                      {"reference": "RFQ-9"}, at=1)
    ent = [e for e in out["entities"] if e["type"] == "request_for_quotation"][0]
    assert ent["attributes"]["reference"] == "RFQ-9"


def test_decision_outcome_selects_terminal_state(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    iid = view["id"]
    drive_to_decision(rfq_engine, iid, rfq_actors)
    out = rfq_engine.perform_activity(iid, "customer decision", rfq_actors["claire"],
                                      {"outcome": "lost"}, at=7)
    states = {e["type"]: e["state"] for e in out["entities"]}
    assert states["request_for_quotation"] == "Lost"
    assert out["status"] == "completed"


def test_decision_without_outcome_is_missing_input(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    iid = view["id"]
    drive_to_decision(rfq_engine, iid, rfq_actors)
    with pytest.raises(MissingInput):
        rfq_engine.perform_activity(iid, "customer decision", rfq_actors["claire"], at=7)


def test_completed_instance_refuses_activities(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    iid = view["id"]
    drive_to_decision(rfq_engine, iid, rfq_actors)
    rfq_engine.perform_activity(iid, "customer decision", rfq_actors["claire"],
                                {"outcome": "won"}, at=7)
    with pytest.raises(NotRunning):
        rfq_engine.perform_activity(iid, "customer decision", rfq_actors["claire"],
                                    {"outcome": "lost"}, at=8)


def test_completion_requires_all_terminal_lifecycles(rfq_engine, rfq_actors):
    # decision before the offer is sent: RFQ terminal but offer not -> running
    view = start_rfq(rfq_engine, at=0)
    iid = view["id"]
    rfq_engine.perform_activity(iid, "registration of the request for Quotation",
                                rfq_actors["claire"], at=1)
    rfq_engine.perform_activity(iid, "analysis of the request for quotation",
                                rfq_actors["marc"], at=2)
    out = rfq_engine.perform_activity(iid, "customer decision", rfq_actors["claire"],
                                      {"outcome": "declined"}, at=3)
    assert out["status"] == "running"


# -- objectives --------------------------------------------------------------

def test_attestation_objective_lifecycle(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    iid = view["id"]
    st = rfq_engine.evaluate_objective("offer_technically_validated", iid, at=1)
    assert st.reached is False
    rfq_engine.attest_objective("offer_technically_validated", iid,
                                rfq_actors["victor"], at=2)
    st = rfq_engine.evaluate_objective("offer_technically_validated", iid, at=3)
    assert st.reached is True


def test_attest_threshold_objective_is_kind_mismatch(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    with pytest.raises(KindMismatch):
        rfq_engine.attest_objective("win_rate_target", view["id"],
                                    rfq_actors["victor"], at=1)


def test_attest_twice_is_idempotent_on_status(rfq_engine, rfq_actors):
    view = start_rfq(rfq_engine, at=0)
    iid = view["id"]
    rfq_engine.attest_objective("offer_technically_validated", iid,
                                rfq_actors["victor"], at=1)
    st = rfq_engine.attest_objective("offer_technically_validated", iid,
                                     rfq_actors["victor"], at=2)
    assert st.reached is True
    attested = [e for e in rfq_engine.log.events if e.kind == "objective_attested"]
    assert len(attested) == 2


def test_roleless_actor_cannot_attest(rfq_engine):
    view = start_rfq(rfq_engine, at=0)
    nobody = Actor("nobody", "Nobody", ())
    with pytest.raises(Forbidden):
        rfq_engine.attest_objective("offer_technically_validated", view["id"],
                                    nobody, at=1)


def test_monotone_objective_latches(rfq_doc, default_defs, rfq_actors):
    doc = copy.deepcopy(rfq_doc)
    for o in doc["objectives"]:
        if o["name"] == "win_rate_target":
            o["continuity"] = "monotone"
    eng = make_engine(doc, default_defs)
    a = eng.instantiate_process("rfq", {"customer": "a", "reference": "r"}, at=0)
    drive_to_decision(eng, a["id"], rfq_actors, base=0)
    eng.perform_activity(a["id"], "customer decision", rfq_actors["claire"],
                         {"outcome": "won"}, at=7)  # win rate 1.0 -> reached
    st = eng.evaluate_objective("win_rate_target", a["id"], at=8)
    assert st.reached is True
    # two losses drag the metric to 1/3, below the 0.5 bound
    for k, base in ((2, 100), (3, 200)):
        v = eng.instantiate_process("rfq", {"customer": "x", "reference": "r"}, at=base)
        drive_to_decision(eng, v["id"], rfq_actors, base=base)
        eng.perform_activity(v["id"], "customer decision", rfq_actors["claire"],
                             {"outcome": "lost"}, at=base + 7)
    st = eng.evaluate_objective("win_rate_target", a["id"], at=300)
    assert st.reached is True  # latched
    flags = [r for _, r in st.history]
    assert flags == sorted(flags)  # never true -> false


def test_revisable_objective_dips(rfq_engine, rfq_actors):
    a = rfq_engine.instantiate_process("rfq", {"customer": "a", "reference": "r"}, at=0)
    drive_to_decision(rfq_engine, a["id"], rfq_actors, base=0)
    rfq_engine.perform_activity(a["id"], "customer decision", rfq_actors["claire"],
                                {"outcome": "won"}, at=7)
    assert rfq_engine.evaluate_objective("win_rate_target", a["id"], at=8).reached
    for base in (100, 200):
        v = rfq_engine.instantiate_process("rfq", {"customer": "x", "reference": "r"},
                                           at=base)
        drive_to_decision(rfq_engine, v["id"], rfq_actors, base=base)
        rfq_engine.perform_activity(v["id"], "customer decision", rfq_actors["claire"],
                                    {"outcome": "lost"}, at=base + 7)
    st = rfq_engine.evaluate_objective("win_rate_target", a["id"], at=300)
    assert st.reached is False  # revisable: reflects the latest evaluation


# -- migration ---------------------------------------------------------------

def _unstable(doc):
    d = copy.deepcopy(doc)
    d["typology"]["stability"] = "unstable"
    return d


def test_migrate_unstable_instance(rfq_doc, default_defs, rfq_actors):
    doc = _unstable(rfq_doc)
    eng = make_engine(doc, default_defs)
    view = eng.instantiate_process("rfq", {"customer": "a", "reference": "r"}, at=0)
    v2 = copy.deepcopy(doc)
    v2["version"] = 2
    eng.publish_model(build_process_model(v2))
    out = eng.migrate_instance(view["id"], 2, rfq_actors["claire"], at=1)
    assert out["model"]["version"] == 2


def test_migrate_stable_model_forbidden(rfq_doc, default_defs, rfq_actors):
    eng = make_engine(rfq_doc, default_defs)  # evolutionary
    view = eng.instantiate_process("rfq", {"customer": "a", "reference": "r"}, at=0)
    with pytest.raises(StabilityForbids):
        eng.migrate_instance(view["id"], 1, rfq_actors["claire"], at=1)


def test_migrate_to_version_missing_state(rfq_doc, default_defs, rfq_actors):
    doc = _unstable(rfq_doc)
    eng = make_engine(doc, default_defs)
    view = eng.instantiate_process("rfq", {"customer": "a", "reference": "r"}, at=0)
    v2 = copy.deepcopy(doc)
    v2["version"] = 2
    for lc in v2["lifecycles"]:
        if lc["name"] == "rfq_lifecycle":
            lc["states"] = ["Registered", "UnderAnalysis", "Won", "Lost", "Declined"]
            lc["initial"] = "Registered"
            lc["transitions"] = [t for t in lc["transitions"] if t[0] != "Draft"]
    for a in v2["activities"]:
        if a["name"] == "registration of the request for Quotation":
            a["transition"] = ["Registered", "UnderAnalysis"]
            a["required_role"] = "sales"
    v2["activities"] = [a for a in v2["activities"]
                        if a["name"] != "registration of the request for Quotation"]
    eng.publish_model(build_process_model(v2))
    with pytest.raises(StateNotInTarget):
        eng.migrate_instance(view["id"], 2, rfq_actors["claire"], at=1)
