"""Distance of the counterexample's memory branch from the CDC along alternating inputs.

For each number of psi_y/psi_x pairs n, prints the Frobenius distance of the
branch product to the CDC and the full-simulation memory distinguishability
of |0> and |1>, next to the predicted sqrt(2)|ab|^n and 2|ab|^n.
"""

import argparse

import numpy as np

from cdcroots.memory import (
    alternating_inputs,
    branch_concatenation,
    counterexample_channel,
    distinguishability,
    extract_branch,
    is_strictly_forgetful,
    pauli_eigenstate,
)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--b", type=float, default=0.1)
    p.add_argument("--pairs", type=int, default=6)
    args = p.parse_args(argv)

    t = counterexample_channel(args.a, args.b)
    f = extract_branch(t)
    cdc = np.diag([1.0, 0, 0, 0])
    ab = abs(args.a * args.b)
    print(f"strictly forgetful: {is_strictly_forgetful(t).strictly_forgetful}")
    print(f"{'n':>3} {'branch dist':>12} {'predicted':>12} {'full sim':>12} {'predicted':>12}")
    for n in range(1, args.pairs + 1):
        seq = [pauli_eigenstate("y"), pauli_eigenstate("x")] * n
        dist = np.linalg.norm(branch_concatenation(f, seq) - cdc)
        full = distinguishability(t, 2 * n, *alternating_inputs(2 * n)) if 2 * n <= 8 else float("nan")
        print(f"{n:>3} {dist:>12.4e} {np.sqrt(2) * ab**n:>12.4e} {full:>12.4e} {2 * ab**n:>12.4e}")


if __name__ == "__main__":
    main()
