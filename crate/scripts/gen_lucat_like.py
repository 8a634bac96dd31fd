"""Regenerate data/lucat-like.csv: a synthetic lung-cancer cohort.

Treatment outcome is split across two target columns, progression and toxicity.
A few associations are planted: advanced stage treated with chemotherapy
progresses, early stage treated with surgery does not, and concurrent
chemoradiotherapy is toxic, more so for older patients.
"""
import csv
import random
import sys

rng = random.Random(20231)

STAGES = ["I", "II", "III", "IV"]
TREATMENTS = ["surgery", "chemo", "radio", "chemoradio", "immuno"]
AGES = ["<60", "60-70", ">70"]
SMOKING = ["never", "former", "current"]
HISTOLOGY = ["adeno", "squamous", "small_cell"]


def treatment_for(stage):
    weights = {
        "I": [6, 1, 2, 1, 0],
        "II": [4, 2, 2, 2, 1],
        "III": [1, 3, 2, 4, 2],
        "IV": [0, 5, 1, 1, 4],
    }[stage]
    return rng.choices(TREATMENTS, weights)[0]


def main(path):
    rows = []
    for _ in range(400):
        stage = rng.choices(STAGES, [3, 2, 3, 4])[0]
        treatment = treatment_for(stage)
        age = rng.choice(AGES)
        p_prog = 0.35
        if stage == "IV" and treatment == "chemo":
            p_prog = 0.95
        elif stage == "I" and treatment == "surgery":
            p_prog = 0.03
        elif stage in ("III", "IV"):
            p_prog = 0.55
        p_tox = 0.15
        if treatment == "chemoradio":
            p_tox = 0.8 if age == ">70" else 0.6
        rows.append({
            "age_group": age,
            "sex": rng.choice(["F", "M"]),
            "smoking": rng.choice(SMOKING),
            "ecog": str(rng.choices([0, 1, 2], [4, 4, 2])[0]),
            "histology": rng.choices(HISTOLOGY, [5, 3, 2])[0],
            "stage": stage,
            "first_treatment": treatment,
            "progression": "yes" if rng.random() < p_prog else "no",
            "toxicity": "yes" if rng.random() < p_tox else "no",
        })
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/lucat-like.csv")
