#!/usr/bin/env python3
"""Writes data/scenarios.jsonl, the 50-scenario evaluation corpus.

Composition:
  46 scenarios whose expected action and band are what a clinician reading the
     decision table would choose; every post-exercise session is unique, so
     no rendered message is shared across differing expectations.
   3 scenarios sharing one identical pre-exercise message (pre/post-meal
     readings in the normal band) where one label marks the reading as
     elevated; the duplicate output makes all three score 0.
   1 scenario labelled "light to moderate" for a post-exercise hypoglycemic
     reading; the engine blocks, which scores -1.

Expected score: proficiency 90.0, efficiency 92.0.
"""
import json
import sys

# Action per (context kind, band); post-exercise uses the same action.
ACTIONS = {
    ("fasting", "low"): "block",
    ("fasting", "normal"): "allow_light",
    ("fasting", "high"): "allow_moderate",
    ("fasting", "critically_high"): "warn_block",
    ("meal", "low"): "block",
    ("meal", "normal"): "allow_light_to_moderate",
    ("meal", "high"): "allow_moderate",
    ("meal", "elevated"): "allow_light_to_moderate",
    ("meal", "critically_high"): "warn_block",
}


def band(bg, context):
    if bg < 70:
        return "low"
    if bg <= 130:
        return "normal"
    if bg <= 180:
        return "high"
    if context == "fasting":
        return "critically_high"
    return "elevated" if bg <= 250 else "critically_high"


def kind(context):
    return "fasting" if context == "fasting" else "meal"


def main(path):
    rows = []

    def add(phase, context, bg, session=None, action=None, band_=None):
        b = band_ or band(bg, context)
        row = {
            "id": f"s{len(rows) + 1:02d}",
            "phase": phase,
            "context": context,
            "bg": bg,
            "expected_action": action or ACTIONS[(kind(context), band(bg, context))],
            "expected_band": b,
        }
        if session:
            row["session"] = session
        rows.append(row)

    # Pre-exercise, correct labels. Meal-context normal readings are left to
    # the duplicate-output triple below.
    pre = [
        ("fasting", [55, 66, 69]),
        ("fasting", [70, 95, 118, 130]),
        ("fasting", [131, 150, 180]),
        ("fasting", [181, 240, 320]),
        ("pre_meal", [52, 68]),
        ("pre_meal", [140, 175]),
        ("pre_meal", [190, 250]),
        ("pre_meal", [251, 380]),
        ("post_meal", [64]),
        ("post_meal", [135, 160]),
        ("post_meal", [181, 230]),
        ("post_meal", [260, 410]),
    ]
    for context, values in pre:
        for bg in values:
            add("pre_exercise", context, bg)

    # Post-exercise, correct labels; (duration, kcal, bg_before) all distinct.
    post = [
        ("fasting", 62, (20, 90, 95)),
        ("fasting", 92, (25, 110, 120)),
        ("fasting", 110, (31, 140, 128)),
        ("fasting", 150, (35, 150, 175)),
        ("fasting", 170, (40, 180, 190)),
        ("fasting", 260, (18, 70, 275)),
        ("pre_meal", 60, (22, 85, 90)),
        ("pre_meal", 100, (27, 105, 130)),
        ("pre_meal", 122, (33, 133, 145)),
        ("pre_meal", 145, (38, 160, 170)),
        ("pre_meal", 200, (45, 190, 230)),
        ("pre_meal", 300, (15, 60, 320)),
        ("post_meal", 66, (24, 95, 102)),
        ("post_meal", 115, (29, 125, 150)),
        ("post_meal", 128, (36, 155, 160)),
        ("post_meal", 165, (42, 170, 200)),
        ("post_meal", 210, (50, 220, 245)),
        ("post_meal", 280, (17, 65, 300)),
    ]
    for context, bg, (dur, kcal, before) in post:
        add("post_exercise", context, bg, {"duration_min": dur, "kcal_burned": kcal, "bg_before": before})

    assert len(rows) == 46, len(rows)

    # Triple: identical "light to moderate" message, one label disagrees.
    add("pre_exercise", "pre_meal", 100)
    add("pre_exercise", "pre_meal", 112, band_="elevated")
    add("pre_exercise", "post_meal", 120)

    # Action mismatch.
    add("post_exercise", "pre_meal", 62, {"duration_min": 26, "kcal_burned": 95, "bg_before": 88},
        action="allow_light_to_moderate")

    with open(path, "w") as out:
        for r in rows:
            out.write(json.dumps(r, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/scenarios.jsonl")
