"""Simulate a pumped chevron and fit the Rabi rate and resonance.

    python3 scripts/chevron_fit.py --omega-mhz 0.98 --out results/chevron.csv
"""

import argparse

import numpy as np

from dualrail import kerr
from dualrail.params import DEVICE, TWO_PI


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--omega-mhz", type=float, default=0.98)
    p.add_argument("--span-mhz", type=float, default=4.0)
    p.add_argument("--n-delta", type=int, default=41)
    p.add_argument("--t-max-us", type=float, default=3.0)
    p.add_argument("--n-t", type=int, default=121)
    p.add_argument("--include-dropped", action="store_true", help="keep the transmon self-Kerr term")
    p.add_argument("--out", help="scan CSV")
    args = p.parse_args()

    omega = TWO_PI * args.omega_mhz
    center = -DEVICE.chi_bq
    deltas = center + TWO_PI * np.linspace(-args.span_mhz / 2, args.span_mhz / 2, args.n_delta)
    times = np.linspace(0, args.t_max_us, args.n_t)
    print(f"{kerr.points_per_period(omega, times):.1f} time points per Rabi period")
    scan = kerr.chevron_scan(DEVICE, omega, deltas, times, include_dropped=args.include_dropped)
    if args.out:
        kerr.write_chevron_csv(args.out, deltas, times, scan)
    fit_omega, fit_center = kerr.fit_rabi(scan, deltas, times)
    print(f"Omega/2pi  input {args.omega_mhz:.4f} MHz, fitted {fit_omega / TWO_PI:.4f} MHz "
          f"({fit_omega / omega - 1:+.2%})")
    print(f"center/2pi expected {center / TWO_PI:.4f} MHz, fitted {fit_center / TWO_PI:.4f} MHz")
    print(f"pi pulse {np.pi / fit_omega:.3f} us")


if __name__ == "__main__":
    main()
