"""Search for a market where raising a P coefficient lowers the concordance ratio.

Draws random two-attribute markets with three levels per attribute and
sparse supports, raises one theta entry in P and compares the P,N to N,P
concordance ratios of the two logit equilibria. Prints the first instance
whose ratio falls by more than a relative 1e-6.

    python3 scripts/find_statics_counterexample.py --seed 0 --trials 2000
"""

from __future__ import annotations

import argparse
import itertools
import json

import numpy as np

from multimatch.logit import comparative_statics
from multimatch.market import ComplementarityPattern, DiscreteMeasure, Quadratic


def draw(rng):
    levels = [0, 1, 2]
    grid = list(itertools.product(levels, levels))
    k = rng.integers(3, 6)
    xs = [grid[i] for i in sorted(rng.choice(len(grid), k, replace=False))]
    ys = [grid[i] for i in sorted(rng.choice(len(grid), k, replace=False))]
    pF = rng.dirichlet(np.ones(len(xs))).round(3)
    pG = rng.dirichlet(np.ones(len(ys))).round(3)
    pF[-1] = 1 - pF[:-1].sum()
    pG[-1] = 1 - pG[:-1].sum()
    theta = rng.uniform(0.1, 2.0, size=(2, 2)).round(2)
    return xs, ys, pF, pG, theta


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=2000)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    pattern = ComplementarityPattern([(1, 1), (1, 2), (2, 1), (2, 2)])
    for trial in range(args.trials):
        xs, ys, pF, pG, theta = draw(rng)
        if min(pF) <= 0 or min(pG) <= 0:
            continue
        i, j = rng.integers(0, 2, size=2)
        raised = theta.copy()
        raised[i, j] += 1.0
        F = DiscreteMeasure.from_pairs(zip(xs, pF.tolist()))
        G = DiscreteMeasure.from_pairs(zip(ys, pG.tolist()))
        rep = comparative_statics(Quadratic(theta.tolist()), Quadratic(raised.tolist()), F, G, pattern)
        if rep.ratio_after < rep.ratio_before * (1 - 1e-6):
            print(json.dumps({
                "trial": trial, "firms": xs, "firm_mass": pF.tolist(), "workers": ys,
                "worker_mass": pG.tolist(), "theta": theta.tolist(), "raised": [int(i) + 1, int(j) + 1],
                "ratio_before": rep.ratio_before, "ratio_after": rep.ratio_after,
            }))
            return
    print("no counterexample found")


if __name__ == "__main__":
    main()
