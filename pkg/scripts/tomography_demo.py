"""Logical Paulis of the cardinal states, the error state and a leaked state.

Compares the analytic parity blocks with truncated displaced-parity
operators and writes a joint-Wigner slice for one state.
"""

import argparse

import numpy as np

from dualrail import fock, tomography as tomo
from dualrail.codespace import CARDINAL_STATES, DualRailState, two_mode_ket


def states():
    for label in CARDINAL_STATES:
        yield label, DualRailState.cardinal(label).ket()
    yield "error |00>", two_mode_ket(0, 0)
    yield "leaked |21>", two_mode_ket(2, 1)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=20, help="per-mode truncation of the sampling operators")
    p.add_argument("--wigner-out", help="CSV of Re(alpha) x Re(beta) joint Wigner for +X")
    args = p.parse_args()

    print(f"{'state':>12} {'method':>9}   I_L      X_L      Y_L      Z_L")
    for label, ket in states():
        rho = fock.ket_to_dm(ket)
        for method in ("analytic", "truncated"):
            lp, _, _ = tomo.tomography_pipeline(rho, (3, 3), method, args.dim)
            vals = " ".join(f"{v:+.5f}" for v in lp.as_tuple())
            print(f"{label:>12} {method:>9}  {vals}")

    if args.wigner_out:
        rho = fock.ket_to_dm(DualRailState.cardinal("+X").ket())
        axis = np.linspace(-2, 2, 21)
        points, values = tomo.wigner_grid(rho, axis, axis, dims=(3, 3))
        tomo.write_wigner_csv(args.wigner_out, points, values)
        print(f"wrote {len(values)} points to {args.wigner_out}")


if __name__ == "__main__":
    main()
