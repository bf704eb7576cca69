#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Independent expectations for the bundled fixture shop experiment.

Replays the scripted persona paths from tools/gen_fixture_transcripts.py and
computes, without touching the C++ code, what the pipeline must report:
per-run url paths and outcomes, goal summaries, trait-centric issue counts,
page-level and intent-level journey graphs, and the interactive elements of
every fixture page. The result is frozen to fixtures/oracles/shop_expected.json.

Usage: shop_oracle.py [fixtures_dir]
"""

import json
import sys
from collections import Counter, OrderedDict
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tools"))

import gen_fixture_transcripts as gen  # noqa: E402


def collapse(seq):
    out = []
    for x in seq:
        if not out or out[-1] != x:
            out.append(x)
    return out


def journey(paths):
    """paths: run -> node sequence (already collapsed)."""
    nodes, links = OrderedDict(), Counter()
    for run in sorted(paths):
        path = paths[run]
        for node in path:
            n = nodes.setdefault(node, {"starts": 0, "terminations": 0, "visits": 0})
            n["visits"] += 1
        nodes[path[0]]["starts"] += 1
        nodes[path[-1]]["terminations"] += 1
        for a, b in zip(path, path[1:]):
            links[(a, b)] += 1
    return {
        "nodes": [{"id": k, **v} for k, v in nodes.items()],
        "links": [{"source": a, "target": b, "flow": f} for (a, b), f in sorted(links.items())],
    }


def main():
    fixtures = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "fixtures"
    shop = gen.Shop(fixtures / "shop")
    dims = [d for d, _ in gen.DIMENSIONS]

    runs, page_paths, intent_paths = {}, {}, {}
    b6_issue = None
    goals = {g: {"agents_attempting": 0, "agents_with_issues": 0, "successes": 0} for g in gen.GOALS}
    traits = {g: {f"{d}={v}": {"issue_count": 0, "runs": 0, "failures": 0}
                  for d, vals in gen.DIMENSIONS for v in vals} for g in gen.GOALS}
    occurrences = Counter()

    for pid, persona in gen.personas():
        for goal in gen.GOALS:
            run = f"{pid}--{goal}"
            path = gen.find_tee_path(persona) if goal == "find_tee" else gen.bundle_path(persona)
            last = path[-1]
            success = last[8] if last[1] == "done" else None
            issues = [s[7] for s in path if s[7]]
            runs[run] = {"steps": len(path), "urls": [s[0] for s in path], "success": success,
                         "issues": len(issues)}
            page_paths[run] = collapse([s[0] for s in path])
            intent_paths[run] = collapse([s[6] for s in path])
            for k, s in enumerate(path, start=1):
                if s[7]:
                    rec = gen.ISSUES[s[7]]
                    occurrences[(rec[0].lower(), rec[1].lower())] += 1
                if s[7] == "B6" and pid == "p-budget-normal-new-r1":
                    b6_issue = f"{gen.EXPERIMENT_ID}.{run}.s{k}.i1"

            g = goals[goal]
            g["agents_attempting"] += 1
            g["agents_with_issues"] += 1 if issues else 0
            g["successes"] += 1 if success is True else 0
            for d in dims:
                t = traits[goal][f"{d}={persona[d]}"]
                t["issue_count"] += len(issues)
                t["runs"] += 1
                t["failures"] += 0 if success is True else 1

    for g in goals.values():
        g["success_ratio"] = g["successes"] / g["agents_attempting"] if g["agents_attempting"] else 0.0

    pages = sorted(p.name for p in (fixtures / "shop").glob("*.html"))
    elements = {}
    for page in pages:
        elements["/" + page] = [
            {"index": i, "tag": el["tag"], "id": el["attrs"].get("id", ""), "href": el["attrs"].get("href", ""),
             "name": el["attrs"].get("name", "")}
            for i, el in enumerate(shop.elements("/" + page), start=1)
        ]

    out = {
        "version": "1.0",
        "experiment_id": gen.EXPERIMENT_ID,
        "b6_issue": b6_issue,
        "total_issues": sum(r["issues"] for r in runs.values()),
        "runs": runs,
        "goals": [{"goal_id": g, **goals[g]} for g in gen.GOALS],
        "trait_centric": traits,
        "occurrences": [{"type": t, "element": e, "count": c} for (t, e), c in sorted(occurrences.items())],
        "journey_page_level": journey(page_paths),
        "journey_goal_level": journey(intent_paths),
        "elements": elements,
    }
    dest = fixtures / "oracles"
    dest.mkdir(exist_ok=True)
    (dest / "shop_expected.json").write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
