#!/usr/bin/env python3
"""Regenerate fixtures/reported: five synthetic branch score files plus golden outputs.

Golden values are computed with exact rational arithmetic, independent of the C++ code.
"""
import random
import sys
from fractions import Fraction
from pathlib import Path

LABELS = ["IRHRF", "PAVF", "FAVF", "IRF", "DRT_ME", "VD"]
WEIGHTS = [
    ("effv2m_trex_prime", "0.1"),
    ("maxvit_trex_prime", "0.45"),
    ("effv2m_trex", "0.1"),
    ("maxvit_trex", "0.25"),
    ("effv2m_prime", "0.1"),
]
N_SAMPLES = 40


def header():
    return "sample_id," + ",".join(LABELS) + "\n"


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20230601)
    w = [Fraction(v) for _, v in WEIGHTS]
    assert sum(w) == 1

    ids = [f"s{i:03d}" for i in range(1, N_SAMPLES + 1)]
    scores = {k: {} for k, _ in WEIGHTS}
    combined = {}
    for sid in ids:
        while True:
            rows = [[Fraction(rng.randint(0, 100), 100) for _ in LABELS] for _ in WEIGHTS]
            comb = [sum(w[k] * rows[k][j] for k in range(len(WEIGHTS))) for j in range(len(LABELS))]
            # keep every combined score clear of the 0.5 threshold
            if all(abs(c - Fraction(1, 2)) >= Fraction(1, 100) for c in comb):
                break
        for k, (name, _) in enumerate(WEIGHTS):
            scores[name][sid] = rows[k]
        combined[sid] = comb

    def fmt(x):
        # exact: every value is a multiple of 1/2000
        assert (x * 10**6).denominator == 1
        n = int(x * 10**6)
        return f"{n // 10**6}.{n % 10**6:06d}"

    (out / "weights.csv").write_text("branch_id,weight\n" + "".join(f"{n},{v}\n" for n, v in WEIGHTS))
    for name, _ in WEIGHTS:
        body = "".join(sid + "," + ",".join(fmt(v) for v in scores[name][sid]) + "\n" for sid in ids)
        (out / f"{name}.csv").write_text(header() + body)
    order = sorted(ids)
    (out / "golden_combined.csv").write_text(
        header() + "".join(sid + "," + ",".join(fmt(c) for c in combined[sid]) + "\n" for sid in order))
    (out / "golden_pred.csv").write_text(
        header() + "".join(sid + "," + ",".join("1" if c >= Fraction(1, 2) else "0" for c in combined[sid]) + "\n"
                           for sid in order))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).resolve().parent.parent / "fixtures" / "reported"))
