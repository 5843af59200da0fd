"""Regenerates tests/data/welch_pairs.csv with scipy's Welch test.

Run from crates/core: python3 tests/oracles/welch_pairs.py > tests/data/welch_pairs.csv
Row 0 is the n = 10 example with means 1.0 / 1.5 and standard deviations 0.5 / 0.7.
"""
import csv
import sys

import numpy as np
from scipy import stats


def with_moments(z, mean, sd):
    z = (z - z.mean()) / z.std(ddof=1)
    return mean + sd * z


def main():
    rng = np.random.default_rng(7)
    pairs = [(with_moments(rng.normal(size=10), 1.0, 0.5), with_moments(rng.normal(size=10), 1.5, 0.7))]
    while len(pairs) < 101:
        na, nb = rng.integers(2, 60, size=2)
        a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 3), size=na)
        b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 3), size=nb)
        pairs.append((a, b))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["a", "b", "p"])
    for a, b in pairs:
        p = stats.ttest_ind(a, b, equal_var=False).pvalue
        w.writerow([";".join(repr(float(v)) for v in a), ";".join(repr(float(v)) for v in b), repr(float(p))])


if __name__ == "__main__":
    main()
