#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Generates the scripted model transcripts for the bundled fixture shop.

Element indices are computed here with Python's html.parser, independently of
the C++ page-state extractor, so a simulation that replays these transcripts
also cross-checks interactive-element numbering.

Usage: gen_fixture_transcripts.py [fixtures_dir]
"""

import itertools
import json
import sys
from html.parser import HTMLParser
from pathlib import Path

EXPERIMENT_ID = "shop-fixture"
MAX_STEPS = 25

DIMENSIONS = [
    ("PS", ["budget", "flexible"]),
    ("TP", ["rushed", "normal"]),
    ("UT", ["new", "returning"]),
]
GOALS = ["find_tee", "bundle_savings"]


class Interactive(HTMLParser):
    """Lists interactive elements in document order, 1-based."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.elements = []
        self._open = None

    def handle_starttag(self, tag, attrs):
        a = {k: (v or "") for k, v in attrs}
        hit = (
            (tag == "a" and "href" in a)
            or (tag == "input" and a.get("type", "").lower() != "hidden")
            or tag in ("button", "select", "textarea")
            or "onclick" in a
        )
        if hit:
            self.elements.append({"tag": tag, "attrs": a, "text": ""})
            self._open = self.elements[-1] if tag not in ("input",) else None

    def handle_endtag(self, tag):
        if self._open is not None and self._open["tag"] == tag:
            self._open = None

    def handle_data(self, data):
        if self._open is not None and self._open["tag"] != "select":
            self._open["text"] += data


class Shop:
    def __init__(self, root):
        self.root = root
        self.cache = {}

    def elements(self, page):
        if page not in self.cache:
            p = Interactive()
            p.feed((self.root / page.lstrip("/")).read_text())
            self.cache[page] = p.elements
        return self.cache[page]

    def index(self, page, key):
        """key: '#id', 'name:n', 'text:Label' (exact collapsed text) or 'href:/x'."""
        for i, el in enumerate(self.elements(page), start=1):
            a = el["attrs"]
            text = " ".join(el["text"].split())
            if key.startswith("#") and a.get("id") == key[1:]:
                return i, el
            if key.startswith("name:") and a.get("name") == key[5:]:
                return i, el
            if key.startswith("text:") and text == key[5:]:
                return i, el
            if key.startswith("href:") and a.get("href") == key[5:]:
                return i, el
        raise KeyError(f"{key} not found on {page}")


def slug(v):
    out, sep = [], False
    for c in v.lower():
        if c.isalnum() and c.isascii():
            if sep and out:
                out.append("_")
            out.append(c)
            sep = False
        else:
            sep = True
    return "".join(out)


def personas():
    names = [d for d, _ in DIMENSIONS]
    for combo in itertools.product(*[vals for _, vals in DIMENSIONS]):
        pid = "p-" + "-".join(slug(v) for v in combo) + "-r1"
        yield pid, dict(zip(names, combo))


# ---- scripted behaviour ----
# Each step: (page, kind, key-or-None, payload-or-None, intent, reasoning, tag, issue-or-None)

ISSUES = {
    "A1": ("Sort label mismatch", "select#sort", "The sort says Low to High but the list starts with the most expensive tee.",
           "Fix the comparator so the order matches the selected sort label.", ["B1", "A3"],
           "The label does not describe the ordering shown.", 3),
    "A5": ("Returns flow hard to find", "main.returns", "Returns need four steps and an email exchange despite the Easy Returns promise.",
           "Provide a single consolidated return form.", ["D1", "D3"],
           "The process contradicts the user's expectation of an easy return.", 2),
    "A6": ("Vintage filter broken", "input#filter-vintage", "Checking Vintage does not change the product list.",
           "Fix the filter query so vintage items are returned.", ["C3"],
           "The control gives no response to input.", 1),
    "B1": ("No size info shown", "a.bundle-continue", "The bundle can be sent to the cart without seeing which sizes were picked.",
           "Require a size for each item and show a bundle summary.", ["A3", "E1"],
           "Missing information invites an error that is only noticed later.", 3),
    "B2": ("Shipping cost unclear", "p.shipping", "Shipping only appears at the final checkout step.",
           "Show a shipping estimate in the cart.", ["A3", "D1"],
           "Cost information arrives too late in the sequence.", 2),
    "B3": ("Progress meter off by one", "div#bundle-meter", "The meter still shows 2/3 after all three tees were picked.",
           "Count picks correctly in the meter.", ["A4"],
           "Progress feedback contradicts the user's actions.", 4),
    "B4": ("Bundle rules unclear", "button#apply-coupon", "The bundle discount is not explained before checkout.",
           "Preview the discount while the bundle is built.", ["B3"],
           "No guidance on how the discount is earned.", 3),
    "B5": ("No feedback on add to cart", "button#add-to-cart", "Clicking Add to cart only changes the cart count.",
           "Show an Added to cart confirmation.", ["A4"],
           "The action completes without visible feedback.", 4),
    "B6": ("Add to cart looks disabled", "button#add-to-cart", "The button is grey on grey and reads as inactive, although it works.",
           "Give the button an active style and an accessible contrast ratio.", ["C2", "A2"],
           "The styling signals that the control cannot be used.", 4),
    "B7": ("No shipping or return info", "main.policies", "The policies page has no shipping, return or contact details.",
           "Add a policy summary near the call to action.", ["A3"],
           "Information needed to trust the purchase is missing.", 2),
    "C1": ("Promo strip hides filters", "div.promo-strip", "The sale banner pushes the filters below the fold.",
           "Shrink the banner and move filters up.", ["A1", "C1"],
           "Layout hides the controls the user needs.", 4),
    "C2": ("Mixed currency display", "ul.product-list", "Some prices are in CHF and others in USD.",
           "Show one currency based on the user's locale.", ["A3", "B2"],
           "Inconsistent units make comparison hard.", 2),
    "C3": ("Redundant search button", "button.search-btn", "The search button duplicates pressing enter.",
           "Remove or repurpose the button.", ["E3"],
           "The extra control adds no efficiency.", 1),
}


def find_tee_path(traits):
    budget = traits["PS"] == "budget"
    rushed = traits["TP"] == "rushed"
    new = traits["UT"] == "new"
    steps = []
    if not new:
        steps.append(("/index.html", "type", "name:q", "classic tee", "search for the tee I bought before",
                      "I remember the tee I want, so I type its name into search.", "search for product", None))
        steps.append(("/index.html", "click", "text:Search", None, "run the search",
                      "I press the search button to see the results.", "search for product", "C3"))
    else:
        steps.append(("/index.html", "click", "text:Shop all tees", None, "open the full catalogue",
                      "I am new here, so I start with the full list of tees.", "browse product options", None))
    if budget:
        steps.append(("/shop.html", "type", "#sort", "Price: Low to High", "sort by lowest price",
                      "I want the cheapest tee first, so I sort from low to high.", "locate cheapest product", "A1"))
        if not rushed:
            steps.append(("/shop.html", "click", "#filter-vintage", None, "narrow to vintage tees",
                          "A vintage tee could be cheaper, so I try the vintage filter.", "filter products", "A6"))
            steps.append(("/shop.html", "scroll", None, "600", "look for more filters",
                          "The big sale banner takes the whole screen, so I scroll to find the filters.",
                          "filter products", "C1"))
        steps.append(("/shop.html", "click", "text:Classic Crew Tee", None, "open the cheapest sensible tee",
                      "The Classic Crew Tee is within my budget; I open it.", "compare prices", "C2"))
        steps.append(("/product.html", "scroll", None, "400", "find a working buy button",
                      "The Add to cart button looks greyed out, so I scroll looking for another way to buy.",
                      "select item for purchase", "B6"))
        if rushed and new:
            steps.append(("/product.html", "done", None, None, "give up",
                          "I cannot tell whether the button works and I have no time; I stop here.",
                          "abandon purchase", None, False))
            return steps
        steps.append(("/product.html", "click", "#add-to-cart", None, "try the grey button anyway",
                      "Maybe it works after all; I click Add to cart.", "select item for purchase", "B5"))
    else:
        steps.append(("/shop.html", "click", "text:Heavyweight Tee", None, "open the premium tee",
                      "Price matters less to me; the heavyweight tee looks best.", "browse product options", None))
        steps.append(("/product.html", "type", "#size", "M", "choose my size",
                      "I pick size M before adding it.", "select size", None))
        steps.append(("/product.html", "click", "#add-to-cart", None, "add the tee to my cart",
                      "I add it to the cart.", "select item for purchase", "B5"))
    steps.append(("/product.html", "done", None, None, "finish",
                  "I found a tee and added it to the cart.", "confirm selection", None, True))
    return steps


def bundle_path(traits):
    rushed = traits["TP"] == "rushed"
    new = traits["UT"] == "new"
    budget = traits["PS"] == "budget"
    steps = []
    if new:
        steps.append(("/index.html", "click", "text:Easy Returns", None, "check the returns promise first",
                      "Before buying several tees I want to know how returns work.", "check return policy", None))
        steps.append(("/returns.html", "click", "text:Read the full returns policy", None, "read the full policy",
                      "Four steps and an email? I open the full policy.", "check return policy", "A5"))
        steps.append(("/policies.html", "click", "text:Bundles", None, "go to bundles",
                      "The policy page says nothing useful; I go to the bundles.", "navigate to bundles", "B7"))
    else:
        steps.append(("/index.html", "click", "text:Build a bundle", None, "open the bundle builder",
                      "Bundles save money, so I go straight there.", "navigate to bundles", None))
    for key, name in (("#pick-classic", "Classic Crew"), ("#pick-basic", "Basic"), ("#pick-heavy", "Heavyweight")):
        issue = "B3" if key == "#pick-heavy" else None
        steps.append(("/bundles.html", "click", key, None, f"add the {name} tee to the bundle",
                      f"I pick the {name} tee for my bundle.", "build bundle", issue))
    if rushed:
        steps.append(("/bundles.html", "done", None, None, "stop",
                      "The meter still says 2/3 after three picks; I do not trust it and stop.",
                      "abandon purchase", None, False))
        return steps
    steps.append(("/bundles.html", "click", "text:Continue to cart", None, "go to the cart",
                  "I continue to the cart, though I never chose sizes.", "review cart", "B1"))
    if budget:
        steps.append(("/cart.html", "type", "#coupon", "SAVE10", "enter a coupon",
                      "I try a coupon code to save more.", "apply discount", None))
        steps.append(("/cart.html", "click", "#apply-coupon", None, "apply the coupon",
                      "I apply it, but nothing explains the bundle discount.", "apply discount", "B4"))
    steps.append(("/cart.html", "click", "#checkout", None, "go to checkout",
                  "I move on to checkout to see the total.", "review cost summary", None))
    steps.append(("/checkout.html", "done", None, None, "finish",
                  "Shipping shows up only now, but the bundle discount is applied.", "review cost summary", "B2",
                  True))
    return steps


def decision_text(step, index):
    page, kind, key, payload, intent, reasoning, _tag, _issue, *rest = step
    action = {"kind": kind}
    if index is not None:
        action["target_index"] = index
    if payload is not None:
        action["payload"] = payload
    if kind == "done":
        action["success"] = rest[0]
    body = {"intent": intent, "reasoning": reasoning, "action": action}
    return reasoning + "\n```json\n" + json.dumps(body) + "\n```"


def issue_record(code):
    t, el, reason, fix, codes, expl, sev = ISSUES[code]
    return {"type": t, "element": el, "reason": reason, "fix": fix, "upt_codes": codes,
            "upt_explanation": expl, "issue_severity": sev}


def main():
    fixtures = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    shop = Shop(fixtures / "shop")
    sim, annotate, preview_changed, preview_same = [], [], [], []

    for pid, traits in personas():
        for goal in GOALS:
            run = f"{pid}--{goal}"
            path = find_tee_path(traits) if goal == "find_tee" else bundle_path(traits)
            assert len(path) <= MAX_STEPS
            tags, issue_steps = [], []
            for k, step in enumerate(path, start=1):
                page, kind, key = step[0], step[1], step[2]
                index = None
                if key is not None:
                    index, _ = shop.index(page, key)
                response = decision_text(step, index)
                sim.append({"match": f"[session {run}] Step {k} of at most {MAX_STEPS}", "response": response})
                tags.append([step[6]])
                issues = [issue_record(step[7])] if step[7] else []
                issue_steps.append({"step": k, "issues": issues})
                if step[7] == "B6" and pid == "p-budget-normal-new-r1":
                    iid = f"{EXPERIMENT_ID}.{run}.s{k}.i1"
                    preview_same.append({"match": f"[session {run}] Step {k} of at most {MAX_STEPS}",
                                         "response": response})
                    preview_same.append({"match": f"[judge {iid}]", "response": json.dumps(
                        {"verdict": "unresolved", "summary": "The user still scrolls past the button."})})
                    add_index, _ = shop.index(page, "#add-to-cart")
                    clicked = ("/product.html", "click", "#add-to-cart", None, "add the tee to my cart",
                               "The Add to cart button is clearly active now, so I click it.",
                               "select item for purchase", None)
                    preview_changed.append({"match": f"[session {run}] Step {k} of at most {MAX_STEPS}",
                                            "response": decision_text(clicked, add_index)})
                    preview_changed.append({"match": f"[judge {iid}]", "response": json.dumps(
                        {"verdict": "resolved", "summary": "The user now clicks Add to cart directly."})})
            annotate.append({"match": f"[tagging {run}]", "response": json.dumps(tags)})
            annotate.append({"match": f"[issues {run}]", "response": "```json\n" + json.dumps(
                {"version": "1.0", "expected_steps": len(path), "steps": issue_steps}, indent=2) + "\n```"})

    out = fixtures / "transcripts"
    out.mkdir(exist_ok=True)

    def write(name, entries):
        (out / name).write_text(json.dumps({"version": "1.0", "entries": entries}, indent=2) + "\n")

    write("simulate.json", sim)
    write("annotate.json", annotate)
    write("preview_b6_changed.json", preview_changed)
    write("preview_b6_same.json", preview_same)


if __name__ == "__main__":
    main()
