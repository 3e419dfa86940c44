"""Sweep random Pauli-diagonal channels and compare the tetrahedron test with Choi positivity.

Prints the agreement count and the fraction of the cube [-r, r]^3 that is CP.
"""

import argparse

import numpy as np

from cdcroots.channels import is_completely_positive
from cdcroots.roots import PauliDiagonalParams, pauli_diagonal_channel, tetrahedron_check


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--radius", type=float, default=1.2)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    lams = np.random.default_rng(args.seed).uniform(-args.radius, args.radius, size=(args.samples, 3))
    tet = np.array([tetrahedron_check(PauliDiagonalParams(*l)) for l in lams])
    cp = np.array([is_completely_positive(pauli_diagonal_channel(PauliDiagonalParams(*l)))[0] for l in lams])
    print(f"samples      {args.samples}")
    print(f"agreement    {np.sum(tet == cp)}/{args.samples}")
    print(f"CP fraction  {cp.mean():.4f}")
    # tetrahedron volume 8/3 inside a cube of volume (2r)^3
    print(f"expected     {8 / 3 / (2 * args.radius) ** 3:.4f}")


if __name__ == "__main__":
    main()
