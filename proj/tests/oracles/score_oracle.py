#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Brute-force tag-similarity scores for hand-built cases.

Each trace's tag set is the union of its step tags after case folding and
whitespace collapsing. intra is the mean pairwise Jaccard over same-persona
trace pairs, inter over cross-persona pairs (0 when a class has no pairs),
score = intra - inter. Values are computed with exact fractions and frozen to
fixtures/oracles/score_cases.json.

Usage: score_oracle.py [fixtures_dir]
"""

import itertools
import json
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]


def norm(tag):
    return " ".join(tag.lower().split())


def jaccard(a, b):
    if not a and not b:
        return Fraction(1)
    return Fraction(len(a & b), len(a | b))


def score(traces):
    sets = [(t["persona"], {norm(x) for step in t["tags"] for x in step}) for t in traces]
    intra, inter = [], []
    for (pa, a), (pb, b) in itertools.combinations(sets, 2):
        (intra if pa == pb else inter).append(jaccard(a, b))
    mi = sum(intra, Fraction(0)) / len(intra) if intra else Fraction(0)
    mx = sum(inter, Fraction(0)) / len(inter) if inter else Fraction(0)
    return mi, mx


CASES = {
    "identical_same_persona": [
        {"persona": "p1", "tags": [["browse"], ["buy"]]},
        {"persona": "p1", "tags": [["Browse "], ["buy"]]},
    ],
    "disjoint_cross_persona": [
        {"persona": "p1", "tags": [["browse"]]},
        {"persona": "p2", "tags": [["checkout"]]},
    ],
    "two_by_two_overlap": [
        {"persona": "p1", "tags": [["browse product options"], ["locate cheapest product"]]},
        {"persona": "p1", "tags": [["browse product options"], ["compare prices"]]},
        {"persona": "p2", "tags": [["search for product"], ["compare prices", "select size"]]},
        {"persona": "p2", "tags": [["search  for Product"], ["select item for purchase"]]},
    ],
    "refine_round_1": [
        {"persona": "p1", "tags": [["a"], ["b"]]},
        {"persona": "p1", "tags": [["c"], ["d"]]},
        {"persona": "p2", "tags": [["a"], ["c"]]},
    ],
    "refine_round_2": [
        {"persona": "p1", "tags": [["a"], ["b"]]},
        {"persona": "p1", "tags": [["a"], ["b"]]},
        {"persona": "p2", "tags": [["c"], ["d"]]},
    ],
}


def main():
    fixtures = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "fixtures"
    out = {"version": "1.0", "cases": {}}
    for name, traces in CASES.items():
        intra, inter = score(traces)
        out["cases"][name] = {
            "traces": traces,
            "intra": float(intra),
            "inter": float(inter),
            "score": float(intra - inter),
            "exact": {"intra": str(intra), "inter": str(inter), "score": str(intra - inter)},
        }
    dest = fixtures / "oracles"
    dest.mkdir(exist_ok=True)
    (dest / "score_cases.json").write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
