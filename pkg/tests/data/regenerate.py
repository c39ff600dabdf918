"""Recompute the pinned regression tables in this directory.

Run from the repository root: ``python3 tests/data/regenerate.py``.
Only rerun after an intentional numerical change, and review the diff.
"""

import csv
import json
from pathlib import Path

from cubemax.games import best_center, exhaustive_adversary
from cubemax.maximal import norm2_ascent
from cubemax.radial import spherical_family

HERE = Path(__file__).parent
NORM_SEED, NORM_RESTARTS, NORM_N_MAX = 0, 8, 14


def norm_table():
    rows = []
    for n in range(1, NORM_N_MAX + 1):
        est = norm2_ascent(spherical_family(n), seed=NORM_SEED, restarts=NORM_RESTARTS)
        rows.append({"n": n, "value": est.value, "iterations": est.iterations})
    doc = {"family": "S", "method": "alternating-ascent", "seed": NORM_SEED,
           "restarts": NORM_RESTARTS, "rows": rows}
    (HERE / "norm_estimates.json").write_text(json.dumps(doc, indent=2) + "\n")


def game_table():
    with open(HERE / "game_exhaustive.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "m", "epsilon", "value", "ratio", "method", "seed"])
        for n in range(5):
            for m in range((1 << n) + 1):
                marking, value = exhaustive_adversary(n, m)
                res = best_center(marking)
                w.writerow([n, m, str(marking.epsilon), str(value),
                            f"{res.ratio:.17g}", "exhaustive", ""])


if __name__ == "__main__":
    game_table()
    norm_table()
