#!/usr/bin/env python3
"""Writes data/study_21d.csv, a synthetic 21-day, 10-user replay log.

Every user exercises once a day with a glucose check before and after. The
week-1 exercise readings are built in +/- pairs around 160 (before) and a
12 mg/dL mean drop, so the pooled week-1 means are exactly 160 and 148. Later
weeks drift lower and every session ends below where it started.
"""
import datetime as dt
import random
import sys

START = dt.date(2024, 3, 4)
USERS = 10
DAYS = 21
HEADER = "date,user,kind,field1,field2,field3"


def paired(rng, n, center, spread):
    """n integers (n even) whose mean is exactly `center`."""
    half = [rng.randint(0, spread) for _ in range(n // 2)]
    values = [center + d for d in half] + [center - d for d in half]
    rng.shuffle(values)
    return values


def main(path):
    rng = random.Random(20240304)
    names = [f"p{i:02d}" for i in range(1, USERS + 1)]
    rows = [HEADER]
    day0 = START.isoformat()
    for i, n in enumerate(names):
        age = 45 + (i * 3) % 20
        sex = "female" if i % 2 else "male"
        rows.append(f"{day0}T06:00:00Z,{n},user,{n}@study.example,pw-{n}-2024,{age}/{sex}/{160 + i}/{62 + 2 * i}/occasional")
        rows.append(f"{day0}T06:00:00Z,{n},goals,80-140,6000,150")

    sessions = USERS * 7
    week1_before = paired(rng, sessions, 160, 25)
    week1_drop = paired(rng, sessions, 12, 6)

    for d in range(DAYS):
        day = START + dt.timedelta(days=d)
        week = d // 7
        for u, n in enumerate(names):
            k = d * USERS + u
            if week == 0:
                before = week1_before[k]
                drop = week1_drop[k]
            else:
                before = 160 - 8 * week + rng.randint(-20, 20)
                drop = 10 + rng.randint(1, 8)
            after = before - drop
            duration = rng.randint(20, 45)
            kcal = duration * rng.randint(35, 50) / 10
            fasting = rng.randint(105, 150) - 4 * week
            steps = rng.randint(3500, 9000)
            ts = day.isoformat()
            rows.append(f"{ts}T07:00:00Z,{n},reading,{fasting},fasting,")
            rows.append(f"{ts}T08:00:00Z,{n},medication,metformin,{ts}T08:{rng.randint(0, 40):02d}:00Z,")
            rows.append(f"{ts}T12:30:00Z,{n},meal,lunch,{rng.randint(450, 750)},")
            rows.append(f"{ts}T18:00:00Z,{n},exercise,{duration},{kcal:g},{before}/{after}/post_meal")
            rows.append(f"{ts}T21:00:00Z,{n},steps,{steps},,")
            rows.append(f"{ts}T23:59:00Z,{n},close_day,,,")

    with open(path, "w") as out:
        out.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/study_21d.csv")
