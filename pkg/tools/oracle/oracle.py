#!/usr/bin/env python3
"""Independent linear-scan oracle over a workspace event log.

Reads events.ndjson and the model document directly, with none of the main
package imported, and computes the reference values the test suite compares
against: terminal-state counts, win rate, and the mean duration between two
state entries.

Usage:
    python3 tools/oracle/oracle.py <workspace> [--as-of RFC3339]
                                   [--from-state S --to-state S]
"""

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path


def parse_ts(text):
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    return round(datetime.fromisoformat(s).timestamp() * 1000)


def load_events(workspace):
    path = Path(workspace) / "events.ndjson"
    if not path.exists():
        return []
    events = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            ev = json.loads(line)
            ev["at_ms"] = parse_ts(ev["at"])
            events.append(ev)
    return events


def load_model(workspace):
    docs = []
    for path in sorted((Path(workspace) / "models").glob("*.json")):
        docs.append(json.loads(path.read_text(encoding="utf-8")))
    if not docs:
        sys.exit("oracle: no model documents in workspace")
    docs.sort(key=lambda d: d["version"])
    return docs[-1]


def root_terminal_states(model):
    roots = [et for et in model["entity_types"] if "required_parent" not in et]
    lc_name = roots[0]["lifecycle"]
    for lc in model["lifecycles"]:
        if lc["name"] == lc_name:
            return lc["terminal"]
    sys.exit("oracle: root lifecycle not found")


def state_entries(events, instance, as_of):
    """Chronological (at_ms, entity, state) entries for one instance."""
    out = []
    for ev in events:
        if ev["instance"] != instance or ev["at_ms"] > as_of:
            continue
        if ev["kind"] == "instance_started":
            for ent in ev["payload"]["entities"]:
                out.append((ev["at_ms"], ent["id"], ent["state"]))
        elif ev["kind"] == "state_changed":
            out.append((ev["at_ms"], ev["entity"], ev["to_state"]))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("workspace")
    ap.add_argument("--as-of", default=None)
    ap.add_argument("--from-state", default="Registered")
    ap.add_argument("--to-state", default="UnderAnalysis")
    args = ap.parse_args()

    events = load_events(args.workspace)
    model = load_model(args.workspace)
    as_of = parse_ts(args.as_of) if args.as_of else max(
        (e["at_ms"] for e in events), default=0)

    started = {}
    completed = {}
    for ev in events:
        if ev["kind"] == "instance_started" and ev["payload"]["model"]["name"] == model["name"]:
            roots = [e for e in ev["payload"]["entities"] if e.get("parent") is None]
            started[ev["instance"]] = roots[0]["id"]
        elif ev["kind"] == "instance_completed" and ev["instance"] in started:
            if ev["at_ms"] <= as_of:
                completed[ev["instance"]] = ev["at_ms"]

    terminal = root_terminal_states(model)
    counts = {s: 0 for s in terminal}
    for iid in completed:
        root = started[iid]
        last = None
        for at, eid, st in state_entries(events, iid, as_of):
            if eid == root:
                last = st
        if last in counts:
            counts[last] += 1

    total = sum(counts.values())
    win = counts.get("Won", 0) / total if total else None

    durations = []
    for iid in sorted(started):
        t_from = t_to = None
        for at, _eid, st in state_entries(events, iid, as_of):
            if t_from is None and st == args.from_state:
                t_from = at
            elif t_from is not None and t_to is None and st == args.to_state:
                t_to = at
        if t_from is not None and t_to is not None:
            durations.append(t_to - t_from)
    mean = sum(durations) / len(durations) if durations else None

    print(json.dumps({
        "counts": counts,
        "completed": total,
        "win_rate": win,
        "mean_transition_ms": mean,
        "mean_sample_size": len(durations),
    }, sort_keys=True))


if __name__ == "__main__":
    main()
