"""Regenerate the rating fixtures in data/ratings/.

perfect.csv   two raters who always agree
two-raters.csv  100 items: 40 both accept, 40 both reject, 10 + 10 split
seven-raters.csv  30 items rated by seven raters, seeded noise around a consensus
"""
import csv
import os
import sys
import random


def write(path, triples):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["item", "rater", "rating"])
        w.writerows(triples)


def main(out="data/ratings"):
    os.makedirs(out, exist_ok=True)
    perfect = []
    for i, d in enumerate(["accept", "reject", "accept", "accept", "reject", "reject"]):
        perfect += [(f"p{i + 1}", "r1", d), (f"p{i + 1}", "r2", d)]
    write(os.path.join(out, "perfect.csv"), perfect)

    pairs = [("accept", "accept")] * 40 + [("reject", "reject")] * 40
    pairs += [("accept", "reject")] * 10 + [("reject", "accept")] * 10
    two = []
    for i, (a, b) in enumerate(pairs):
        two += [(f"p{i + 1:03}", "r1", a), (f"p{i + 1:03}", "r2", b)]
    write(os.path.join(out, "two-raters.csv"), two)

    rng = random.Random(7)
    seven = []
    for i in range(30):
        consensus = rng.random() < 0.6
        for r in range(7):
            accept = consensus if rng.random() < 0.8 else not consensus
            seven.append((f"p{i + 1:02}", f"oncologist{r + 1}", "accept" if accept else "reject"))
    write(os.path.join(out, "seven-raters.csv"), seven)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/ratings")
