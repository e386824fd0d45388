#!/usr/bin/env python3
"""End-to-end demonstration of the quotation case study.

Runs the six-quotation fixture into a scratch workspace, then prints the
replay summary, the indicator table, and the scorecard grouping.

Usage: python3 scripts/run_case_study.py [workspace-dir]
"""

import json
import shutil
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from procflow import indicators as ind  # noqa: E402
from procflow.scenario import load_scenario, run_scenario  # noqa: E402
from procflow.store import open_workspace  # noqa: E402


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else REPO / "out" / "case_study"
    if root.exists():
        shutil.rmtree(root)

    steps = load_scenario(REPO / "fixtures" / "rfq_six.json")
    with open_workspace(root, create=True) as ws:
        run_scenario(steps, ws, REPO / "fixtures")

    with open_workspace(root, writable=False) as ws:
        engine = ws.engine
        print(f"workspace: {root}")
        print(f"events:    {engine.log.last_seq}")
        print(f"instances: {len(engine.state.instances)}")
        for iid in sorted(engine.state.instances):
            view = engine.instance_view(iid)
            states = ", ".join(f"{e['type']}={e['state']}" for e in view["entities"])
            print(f"  {iid} [{view['status']}] {states}")

        as_of = engine.log.last_at
        print("\nindicators:")
        for d in ws.indicator_defs.values():
            val = ind.evaluate_indicator(d, engine.log.events, ws.registry,
                                         ws.indicator_defs, as_of)
            shown = "n/a" if val.value is None else val.value
            print(f"  {d.name:28s} {d.perspective:17s} {shown!r:>14} "
                  f"(n={val.sample_size})")

        report = ind.scorecard_report(list(ws.indicator_defs.values()),
                                      engine.log.events, ws.registry, as_of)
        print("\nscorecard perspectives:")
        for persp, rows in report["perspectives"].items():
            names = ", ".join(r["indicator"] for r in rows) or "-"
            print(f"  {persp:17s} {names}")


if __name__ == "__main__":
    main()
