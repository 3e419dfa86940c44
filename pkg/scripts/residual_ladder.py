"""Residuals ||S^k - CDC||_F for the shipped roots, as CSV on stdout.

    python scripts/residual_ladder.py --dmax 3
"""

import argparse
import csv
import sys

from cdcroots.roots import QubitRootSpec, cb_lower_bound_root, perturb_root, qubit_maximal_root, residual_ladder


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dmax", type=int, default=3)
    args = p.parse_args(argv)

    roots = {"qubit-root": qubit_maximal_root(QubitRootSpec(0.5, 0.4, 0.3))}
    for d in range(2, args.dmax + 1):
        roots[f"perturb-root-d{d}"] = perturb_root(d)[0]
    for d in (2, 3):
        roots[f"cb-bound-d{d}"] = cb_lower_bound_root(d).channel

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["construction", "k", "residual"])
    for name, ch in roots.items():
        for k, r in enumerate(residual_ladder(ch, ch.dim**2), 1):
            w.writerow([name, k, f"{r:.6e}"])


if __name__ == "__main__":
    main()
