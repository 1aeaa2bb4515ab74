"""Simulate the six cardinal-state ensembles, train one HMM each, print the rate table.

    python3 scripts/rate_recovery.py --n-trajectories 10000 --out results/rates.csv
"""

import argparse
import csv
import time

from dualrail import erasure, hmm
from dualrail.erasure import DetectorModel, SimConfig
from dualrail.params import DEVICE


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-trajectories", type=int, default=10_000)
    p.add_argument("--n-rounds", type=int, default=167)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-e-given-c", type=float, default=0.0, help="detector false-positive probability")
    p.add_argument("--p-g-given-e", type=float, default=0.0, help="detector false-negative probability")
    p.add_argument("--out", help="optional CSV of the table")
    args = p.parse_args()

    det = DetectorModel(p_e_given_C=args.p_e_given_c, p_g_given_E=args.p_g_given_e)
    cfg = SimConfig(DEVICE, det, args.n_rounds, args.n_trajectories, args.seed)
    tau = DEVICE.round_duration_ms
    start = time.perf_counter()
    ens = erasure.simulate_ensemble(cfg)
    models = {s: hmm.baum_welch(hmm.map_outcomes(e.outcomes)) for s, e in ens.items()}
    res = hmm.decode_ensemble(models, ens, tau, DEVICE)

    rows = []
    print(f"{'state':>5} {'prob/gate':>9} {'rate':>7} {'expected':>8} {'false neg':>9} {'false pos':>9} {'viterbi acc':>11}")
    for s, r in res.reports.items():
        rows.append([s, r.erasure_prob_per_gate, r.erasure_rate, res.expected_rates[s],
                     r.false_negative_per_gate, r.false_positive_per_gate, res.accuracy[s]])
        print(f"{s:>5} {r.erasure_prob_per_gate:9.5f} {r.erasure_rate:7.3f} {res.expected_rates[s]:8.3f} "
              f"{r.false_negative_per_gate:9.5f} {r.false_positive_per_gate:9.5f} {res.accuracy[s]:11.5f}")
    print(f"mean false neg {res.mean_false_negative:.5f}, mean false pos {res.mean_false_positive:.5f}")
    print(f"{time.perf_counter() - start:.1f} s")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["state", "prob_per_gate", "rate_per_ms", "expected_rate_per_ms",
                        "false_neg_per_gate", "false_pos_per_gate", "viterbi_accuracy"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
