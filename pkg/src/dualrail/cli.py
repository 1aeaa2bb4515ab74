"""Command-line front end: ``dualrail <command> [options]``.

Commands: simulate | train | decode | tomography | chevron | decay.
Exit codes: 0 success, 2 configuration error, 3 input/output error,
4 numerical failure.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import erasure, fock, hmm, kerr
from .codespace import CARDINAL_STATES, DualRailState, two_mode_ket
from .config import ConfigError, dump_config, load_config
from .decay import FitError, fit_pauli_decay
from .params import TWO_PI
from .tomography import DISPLACEMENTS, PAULI_LABELS, tomography_pipeline

log = logging.getLogger("dualrail")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
CONFIG_NAME = "config.yaml"
NUMERICAL_ERRORS = (
    kerr.NoOscillationError,
    FitError,
    erasure.EmptyPostselectionError,
    hmm.DegenerateModelError,
    ZeroDivisionError,
    FloatingPointError,
    np.linalg.LinAlgError,
)


class InputError(Exception):
    """Missing, malformed or inconsistent input files."""


def state_filename(label):
    return label.replace("+", "plus").replace("-", "minus")


def _state_label(text):
    """Accept ``+Z`` as well as the file-name form ``plusZ``."""
    aliases = {state_filename(s): s for s in CARDINAL_STATES}
    return aliases.get(text, text)


def _protect_labels(argv):
    # argparse would read a bare -X / -Y / -Z as an option
    return ["minus" + a[1] if a in ("-X", "-Y", "-Z") else a for a in argv]


def _emit(args, summary, lines):
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _read_traj(path):
    try:
        return erasure.read_trajectories(path)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


# simulate


def cmd_simulate(args, cfg):
    os.makedirs(args.out, exist_ok=True)
    sim = cfg.sim_config()
    summary, lines = {}, [f"{'state':>5}  {'erasure/round':>13}  {'flagged by end':>14}"]
    fractions = {}
    for label in cfg.simulate.states:
        ens = erasure.simulate_state(sim, label)
        path = os.path.join(args.out, state_filename(label) + ".traj")
        erasure.write_trajectories(path, ens)
        flagged = ens.outcomes != erasure.OUT_G
        fractions[label] = flagged.mean(axis=0)
        # new first flags per surviving trajectory, averaged over rounds
        first = erasure.first_event_index(ens.outcomes)
        at_risk = np.array([(first < 0).sum() + (first >= k).sum() for k in range(ens.n_rounds)])
        new = np.bincount(first[first >= 0], minlength=ens.n_rounds)
        hazard = float(new.sum() / at_risk.sum())
        ever = float(flagged.any(axis=1).mean())
        summary[label] = {"file": path, "erasure_fraction_per_round": hazard, "flagged_by_end": ever}
        lines.append(f"{label:>5}  {hazard:13.5f}  {ever:14.4f}")
    with open(os.path.join(args.out, "erasure_fraction.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round"] + list(fractions))
        for k in range(sim.n_rounds):
            w.writerow([k] + [repr(float(fractions[s][k])) for s in fractions])
    with open(os.path.join(args.out, CONFIG_NAME), "w") as fh:
        fh.write(dump_config(cfg))
    _emit(args, {"out": args.out, "states": summary}, lines)
    return EXIT_OK


# train / decode


def cmd_train(args, cfg):
    if not args.trajectories:
        raise InputError("no trajectory files given")
    data = [(p, *_read_traj(p)) for p in args.trajectories]
    lengths = {meta["n"] for _, meta, _ in data}
    if len(lengths) > 1:
        raise InputError(f"trajectory files have different round counts: {sorted(lengths)}")
    tau_ms = cfg.system.round_duration_us * 1e-3
    rows, summary = [], {}
    for path, meta, outcomes in data:
        obs = hmm.map_outcomes(outcomes, cfg.hmm.h_mode)
        model = hmm.baum_welch(obs, cfg.hmm.model(), cfg.hmm.max_iter, cfg.hmm.tol)
        out_dir = args.out or os.path.dirname(path) or "."
        os.makedirs(out_dir, exist_ok=True)
        model_path = os.path.join(out_dir, _stem(path) + ".model.json")
        model.save(model_path, cfg.system.round_duration_us)
        r = hmm.rates(model, tau_ms)
        summary[meta["state"]] = {"model": model_path, **r.__dict__}
        rows.append((meta["state"], r))
    lines = [f"{'state':>5}  {'prob/gate':>9}  {'rate 1/ms':>9}  {'false neg':>9}  {'false pos':>9}"]
    for label, r in rows:
        lines.append(
            f"{label:>5}  {r.erasure_prob_per_gate:9.5f}  {r.erasure_rate:9.4f}  "
            f"{r.false_negative_per_gate:9.5f}  {r.false_positive_per_gate:9.5f}"
        )
    _emit(args, {"states": summary}, lines)
    return EXIT_OK


def _stem(path):
    base = os.path.basename(path)
    return base[: -len(".traj")] if base.endswith(".traj") else base


def cmd_decode(args, cfg):
    if not args.trajectories:
        raise InputError("no trajectory files given")
    summary, lines = {}, []
    for path in args.trajectories:
        meta, outcomes = _read_traj(path)
        model_dir = args.models or os.path.dirname(path) or "."
        model_path = os.path.join(model_dir, _stem(path) + ".model.json")
        try:
            model, _ = hmm.HmmModel.load(model_path)
        except (ValueError, KeyError) as exc:
            raise InputError(f"{model_path}: {exc}") from exc
        obs = hmm.map_outcomes(outcomes, cfg.hmm.h_mode)
        paths = [hmm.viterbi(model, o) for o in obs] if cfg.hmm.h_mode == "drop" else hmm.viterbi(model, obs)
        out_dir = args.out or os.path.dirname(path) or "."
        os.makedirs(out_dir, exist_ok=True)
        out_path = os.path.join(out_dir, _stem(path) + ".paths")
        header = f"#dualrail-traj v1 state={meta['state']} n={meta['n']} seed={meta['seed']}\n"
        erasure.write_paths(out_path, paths, header)
        entry = {"paths": out_path}
        truth = str(path) + ".truth"
        line = f"{meta['state']:>5}  -> {out_path}"
        if os.path.exists(truth) and cfg.hmm.h_mode == "as_e":
            _, hidden = erasure.read_paths(truth)
            acc = float(np.mean(paths == hmm.truth_to_binary(hidden)))
            entry["accuracy"] = acc
            line += f"  accuracy {acc:.5f}"
        summary[meta["state"]] = entry
        lines.append(line)
    _emit(args, {"states": summary}, lines)
    return EXIT_OK


# tomography


def _state_rho(spec, dims_arg):
    if spec.endswith(".npy"):
        arr = np.load(spec)
        if arr.ndim == 1:
            arr = fock.ket_to_dm(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"{spec}: expected a ket or a square density matrix")
        dims = tuple(dims_arg) if dims_arg else None
        return arr, dims
    if spec == "error":
        ket = two_mode_ket(0, 0)
    elif spec in CARDINAL_STATES:
        ket = DualRailState.cardinal(spec).ket()
    else:
        raise ConfigError(f"unparseable state {spec!r}; use one of {CARDINAL_STATES}, 'error' or a .npy file")
    return fock.ket_to_dm(ket), (3, 3)


def cmd_tomography(args, cfg):
    rho, dims = _state_rho(args.state, args.dims)
    try:
        fock.validate_density_matrix(rho, tol=1e-8)
    except ValueError as exc:
        raise InputError(f"{args.state}: {exc}") from exc
    logical, tq, parities = tomography_pipeline(rho, dims, cfg.tomography.method, cfg.tomography.dim)
    rows = [("parity", f"d{i}", float(v)) for i, v in enumerate(parities)]
    rows += [("pauli", a + b, tq[a + b]) for a in PAULI_LABELS for b in PAULI_LABELS]
    rows += [("logical", name + "_L", v) for name, v in zip("IXYZ", logical.as_tuple())]
    table = []
    for kind, label, value in rows:
        extra = ["", ""]
        if kind == "parity":
            a, b = DISPLACEMENTS[int(label[1:])]
            extra = [_cstr(a), _cstr(b)]
        table.append([kind, label, repr(value)] + extra)
    header = ["kind", "label", "value", "alpha", "beta"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh).writerows([header] + table)
    elif not args.json:
        csv.writer(sys.stdout).writerows([header] + table)
        return EXIT_OK
    summary = {
        "state": args.state,
        "method": cfg.tomography.method,
        "logical": dict(zip(("I_L", "X_L", "Y_L", "Z_L"), logical.as_tuple())),
        "pauli": {label: value for kind, label, value in rows if kind == "pauli"},
        "parity": [value for kind, _, value in rows if kind == "parity"],
    }
    _emit(args, summary, [f"{k} = {v:+.6f}" for k, v in summary["logical"].items()])
    return EXIT_OK


def _cstr(z):
    z = complex(z)
    return f"{z.real:.12g}{z.imag:+.12g}j"


# chevron


def chevron_grids(cfg):
    c = cfg.chevron
    center = c.delta_center_mhz if c.delta_center_mhz is not None else -cfg.system.chi_bq_mhz
    deltas = TWO_PI * np.linspace(center - c.delta_span_mhz / 2, center + c.delta_span_mhz / 2, c.n_delta)
    times = np.linspace(0.0, c.t_max_us, c.n_t)
    return deltas, times


def cmd_chevron(args, cfg):
    c = cfg.chevron
    omega = TWO_PI * c.omega_mhz
    deltas, times = chevron_grids(cfg)
    ppp = kerr.points_per_period(omega, times)
    if ppp < 8:
        log.warning("coarse time grid: %.1f points per Rabi period (want >= 8)", ppp)
    scan = kerr.chevron_scan(cfg.system_params(), omega, deltas, times, c.n_b_max, 0, c.include_dropped)
    if args.out:
        kerr.write_chevron_csv(args.out, deltas, times, scan)
    fit_omega, fit_center = kerr.fit_rabi(scan, deltas, times)
    summary = {
        "omega_mhz": fit_omega / TWO_PI,
        "center_mhz": fit_center / TWO_PI,
        "input_omega_mhz": c.omega_mhz,
        "points_per_period": ppp,
        "scan": args.out,
    }
    lines = [
        f"Omega/2pi = {summary['omega_mhz']:.6f} MHz (input {c.omega_mhz:g} MHz)",
        f"center/2pi = {summary['center_mhz']:.6f} MHz",
    ]
    _emit(args, summary, lines)
    return EXIT_OK


# decay


def pauli_series(ens, postselect, min_survivors=2):
    """Per-round logical (I, X, Y, Z) averaged over all or no-flag trajectories.

    Returns ``(rounds, series (K, 4), counts)`` truncated at the last round
    that still has ``min_survivors`` trajectories.
    """
    if ens.bloch is None:
        raise ValueError("ensemble needs record_bloch=True")
    in_code = ens.hidden == erasure.C
    if postselect:
        mask = np.cumsum(ens.outcomes != erasure.OUT_G, axis=1) == 0
    else:
        mask = np.ones_like(in_code)
    counts = mask.sum(axis=0)
    short = np.flatnonzero(counts < min_survivors)
    K = short[0] if short.size else ens.n_rounds
    if K == 0:
        raise erasure.EmptyPostselectionError("no trajectory survives the first round")
    mask, counts = mask[:, :K], counts[:K]
    series = np.empty((K, 4))
    series[:, 0] = (in_code[:, :K] & mask).sum(axis=0) / counts
    series[:, 1:] = (ens.bloch[:, :K, :] * mask[:, :, None]).sum(axis=0) / counts[:, None]
    return np.arange(K), series, counts


def fit_series(label, times, series, postselect, delta_kappa):
    """Fit every Pauli whose initial value is clearly nonzero."""
    out = {}
    for j, pauli in enumerate("IXYZ"):
        if abs(series[0, j]) < 0.5:
            continue
        fit = fit_pauli_decay(times, series[:, j], postselect, pauli, label, delta_kappa)
        out[pauli] = fit
    return out


def cmd_decay(args, cfg_cli):
    cfg_path = os.path.join(args.ensemble_dir, CONFIG_NAME)
    if not os.path.exists(cfg_path):
        raise InputError(f"{cfg_path} not found; run 'dualrail simulate' first")
    cfg = load_config(cfg_path)
    postselect = cfg_cli.decay.postselect
    min_surv = cfg_cli.decay.min_survivors
    params = cfg.system_params()
    sim = cfg.sim_config()
    states = args.states or cfg.simulate.states
    summary, lines = {}, []
    for label in states:
        traj_path = os.path.join(args.ensemble_dir, state_filename(label) + ".traj")
        meta, outcomes = _read_traj(traj_path)
        ens = erasure.simulate_state(sim, label, record_bloch=True)
        if meta["seed"] != sim.master_seed or not np.array_equal(outcomes, ens.outcomes):
            raise InputError(f"{traj_path} does not match the ensemble regenerated from {cfg_path}")
        rounds, series, counts = pauli_series(ens, postselect, min_surv)
        if rounds.size < 10:
            raise erasure.EmptyPostselectionError(
                f"{label}: only {rounds.size} rounds keep >= {min_surv} trajectories"
            )
        times = rounds * params.round_duration_ms
        fits = fit_series(label, times, series, postselect, params.delta_kappa)
        entry = {
            "rounds_used": int(rounds.size),
            "final_survivors": int(counts[-1]),
            "Z_first": float(series[0, 3]),
            "Z_last": float(series[-1, 3]),
            "fits": {},
        }
        for pauli, fit in fits.items():
            entry["fits"][pauli] = {
                "model": fit.model,
                "rate_per_ms": fit.rate,
                "stderr": fit.stderr,
                "ci95": list(fit.ci95),
                "upper_bound": fit.upper_bound,
            }
            if fit.is_bound:
                txt = f"< {fit.upper_bound:.3g} /ms (upper bound)"
            else:
                txt = f"{fit.rate:.4g} +- {fit.stderr:.2g} /ms"
            lines.append(f"{label:>3} {pauli}_L [{fit.model}] {txt}")
        lines.append(f"{label:>3} Z_L {series[0, 3]:+.3f} -> {series[-1, 3]:+.3f} over {rounds.size} rounds")
        summary[label] = entry
    _emit(args, {"postselect": postselect, "states": summary}, lines)
    return EXIT_OK


# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override one config value"
    )
    common.add_argument("--json", action="store_true", help="print a JSON summary")
    common.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="dualrail", description="Dual-rail erasure qubit toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate erasure-check trajectories")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--n-trajectories", type=int)
    s.add_argument("--n-rounds", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--states", nargs="+", type=_state_label)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("train", parents=[common], help="fit one HMM per trajectory file")
    s.add_argument("trajectories", nargs="*")
    s.add_argument("--out", help="directory for model files (default: next to the input)")
    s.add_argument("--max-iter", type=int)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("decode", parents=[common], help="Viterbi-decode trajectory files")
    s.add_argument("trajectories", nargs="*")
    s.add_argument("--models", help="directory holding <name>.model.json (default: next to the input)")
    s.add_argument("--out", help="directory for decoded paths")
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("tomography", parents=[common], help="16-point joint-Wigner reconstruction")
    s.add_argument(
        "state", type=_state_label, help="+Z, -Z, +X, -X, +Y, -Y, error, or a .npy ket/density matrix"
    )
    s.add_argument("--dims", type=int, nargs=2, metavar=("DIM_A", "DIM_B"))
    s.add_argument("--method", choices=("truncated", "analytic"))
    s.add_argument("--dim", type=int, help="per-mode truncation for the truncated method")
    s.add_argument("--out", help="CSV output (default: stdout)")
    s.set_defaults(func=cmd_tomography)

    s = sub.add_parser("chevron", parents=[common], help="simulate and fit a pumped chevron")
    s.add_argument("--omega-mhz", type=float)
    s.add_argument("--out", help="scan CSV")
    s.set_defaults(func=cmd_chevron)

    s = sub.add_parser("decay", parents=[common], help="fit logical Pauli decay of a simulated ensemble")
    s.add_argument("ensemble_dir")
    s.add_argument("--postselect", action=argparse.BooleanOptionalAction, default=None)
    s.add_argument("--states", nargs="+", type=_state_label)
    s.add_argument("--min-survivors", type=int)
    s.set_defaults(func=cmd_decay)
    return p


_FLAG_KEYS = {
    "n_trajectories": "simulate.n_trajectories",
    "n_rounds": "simulate.n_rounds",
    "seed": "simulate.master_seed",
    "max_iter": "hmm.max_iter",
    "method": "tomography.method",
    "dim": "tomography.dim",
    "omega_mhz": "chevron.omega_mhz",
    "postselect": "decay.postselect",
    "min_survivors": "decay.min_survivors",
}


def resolve_config(args):
    cfg = load_config(args.config, args.set)
    for attr, key in _FLAG_KEYS.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg.set(key, value)
    if args.command == "simulate" and args.states:
        cfg.set("simulate.states", list(args.states))
    cfg.validate()
    return cfg


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_protect_labels(argv))
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, InputError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
