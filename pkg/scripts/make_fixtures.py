#!/usr/bin/env python3
"""Regenerate the scripted fixture scenarios under fixtures/.

The six-quotation scenario drives 3 won / 2 lost / 1 declined runs with
staggered analysis dwells (1h..6h, mean 3.5h); the running scenario parks
five instances in UnderAnalysis for drift tests.  Timestamps are explicit
UTC so the generated event logs are byte-stable.
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

HOUR = 3_600_000
DAY = 24 * HOUR
BASE = 1740988800000  # 2025-03-03T08:00:00.000Z


def ts(ms: int) -> str:
    from datetime import datetime, timezone
    dt = datetime.fromtimestamp(ms // 1000, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{ms % 1000:03d}Z"


def step(op, args, at=None):
    s = {"op": op, "args": args}
    if at is not None:
        s["at"] = ts(at)
    return s


def rfq_six():
    outcomes = ["won", "won", "won", "lost", "lost", "declined"]
    attested = [True, True, True, True, False, False]
    steps = [
        step("publish_model", {"path": "../models/rfq.json"}),
        step("load_indicators", {"path": "../indicators/default.json"}),
    ]
    for k in range(1, 7):
        t0 = BASE + (k - 1) * DAY
        label = f"rfq{k}"
        iid = f"rfq-{k:04d}"
        dwell = k * HOUR  # Registered -> UnderAnalysis
        steps += [
            step("instantiate", {
                "label": label, "model": "rfq",
                "attributes": {"customer": f"customer-{k}", "reference": f"RFQ-2025-{k:03d}"},
            }, t0),
            step("perform", {
                "instance": label, "activity": "registration of the request for Quotation",
                "actor": "claire",
            }, t0 + 10 * 60_000),
            step("perform", {
                "instance": label, "activity": "analysis of the request for quotation",
                "actor": "marc",
            }, t0 + 10 * 60_000 + dwell),
            step("perform", {
                "instance": label, "activity": "a project manager affectation",
                "actor": "paula",
                "parameters": {"rfq_ref": f"{iid}:request_for_quotation",
                               "project_manager": "Paula"},
            }, t0 + 12 * HOUR),
            step("perform", {
                "instance": label, "activity": "Realization of the offer",
                "actor": "paula", "parameters": {"price": 1000 * k},
            }, t0 + 20 * HOUR),
            step("perform", {
                "instance": label, "activity": "Validation of the offer",
                "actor": "victor",
            }, t0 + 22 * HOUR),
        ]
        if attested[k - 1]:
            steps.append(step("attest", {
                "instance": label, "objective": "offer_technically_validated",
                "actor": "victor",
            }, t0 + 22 * HOUR + 30 * 60_000))
        steps += [
            step("perform", {
                "instance": label, "activity": "Sending to customer the offer",
                "actor": "claire",
            }, t0 + 23 * HOUR),
            step("perform", {
                "instance": label, "activity": "customer decision",
                "actor": "claire", "parameters": {"outcome": outcomes[k - 1]},
            }, t0 + 3 * DAY),
        ]
    return steps


def rfq_running():
    steps = [
        step("publish_model", {"path": "../models/rfq.json"}),
        step("load_indicators", {"path": "../indicators/default.json"}),
    ]
    # five instances entering UnderAnalysis 2, 5, 8, 11 and 14 days after BASE
    for k in range(1, 6):
        t0 = BASE + (k - 1) * 3 * DAY
        label = f"run{k}"
        steps += [
            step("instantiate", {
                "label": label, "model": "rfq",
                "attributes": {"customer": f"pending-{k}", "reference": f"RFQ-2025-1{k:02d}"},
            }, t0),
            step("perform", {
                "instance": label, "activity": "registration of the request for Quotation",
                "actor": "claire",
            }, t0 + HOUR),
            step("perform", {
                "instance": label, "activity": "analysis of the request for quotation",
                "actor": "marc",
            }, t0 + 2 * DAY),
        ]
    return steps


def main():
    fixtures = ROOT / "fixtures"
    fixtures.mkdir(exist_ok=True)
    for name, steps in (("rfq_six", rfq_six()), ("rfq_running", rfq_running())):
        path = fixtures / f"{name}.json"
        path.write_text(json.dumps(steps, indent=2, ensure_ascii=False) + "\n",
                        encoding="utf-8")
        print(f"wrote {path} ({len(steps)} steps)")


if __name__ == "__main__":
    main()
