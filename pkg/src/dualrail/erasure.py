"""Monte Carlo erasure-detection trajectories.

Each round first reports a detector outcome for the current hidden state and
then evolves the state for one round duration, sampling at most one jump:

* code space (C): photon loss to |00> with the no-jump norm deficit, or
  photon gain into the two-excitation sector (H) with the rates of the
  ``a^dag`` / ``b^dag`` error operators; otherwise the code-space amplitudes
  pick up the no-jump distortion.
* two-excitation sector (H): decays back to a one-photon Fock codeword.
* error space (E, |00>): absorbing.

Every trajectory draws its uniforms from its own counter-derived seed, so a
trajectory is reproducible on its own and an ensemble is identical however
it is chunked.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .codespace import CARDINAL_STATES, DualRailState, nojump_pauli
from .params import DEVICE, SystemParams

# hidden states
C, E, H = 0, 1, 2
# detector outcomes
OUT_G, OUT_E, OUT_HIGHER = 0, 1, 2

OUTCOME_CHARS = "geh"
HIDDEN_CHARS = "CEH"
DEFAULT_ROUNDS = 167
_UNIFORMS_PER_ROUND = 3


class EmptyPostselectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class DetectorModel:
    """Per-round detector confusion.

    ``collapses`` keeps the code-space amplitudes conditioned on the
    no-erasure record (no-jump back-action); switching it off freezes them at
    their prepared values.
    """

    p_e_given_C: float = 0.0
    p_g_given_E: float = 0.0
    p_higher_given_heated: float = 1.0
    collapses: bool = True

    def __post_init__(self):
        for name in ("p_e_given_C", "p_g_given_E", "p_higher_given_heated"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be a probability")


@dataclass(frozen=True)
class SimConfig:
    params: SystemParams = DEVICE
    detector: DetectorModel = field(default_factory=DetectorModel)
    n_rounds: int = DEFAULT_ROUNDS
    n_trajectories: int = 10_000
    master_seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 1 or self.n_trajectories < 1:
            raise ValueError("n_rounds and n_trajectories must be >= 1")


@dataclass
class Trajectory:
    outcomes: np.ndarray
    prepared_state: str
    seed: int
    hidden: np.ndarray = None

    def __str__(self):
        return outcomes_to_str(self.outcomes)


@dataclass
class Ensemble:
    """All trajectories of one prepared state.

    ``bloch`` (optional) holds the logical Bloch vector of each trajectory's
    hidden state at every measurement, zero outside the code space.
    """

    state: str
    outcomes: np.ndarray
    hidden: np.ndarray
    seeds: np.ndarray
    master_seed: int = 0
    bloch: np.ndarray = None

    def __len__(self):
        return self.outcomes.shape[0]

    @property
    def n_rounds(self):
        return self.outcomes.shape[1]

    def trajectory(self, i):
        return Trajectory(self.outcomes[i], self.state, int(self.seeds[i]), self.hidden[i])


def trajectory_seed(master_seed, state_index, i):
    """64-bit seed of trajectory ``i`` of state ``state_index``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(state_index), int(i)))
    return int(ss.generate_state(1, np.uint64)[0])


def _uniforms(seed, n_rounds):
    return np.random.default_rng(seed).random((n_rounds, _UNIFORMS_PER_ROUND))


def _evolve(params, detector, psi, u, record_bloch=False):
    """Run trajectories in lockstep.

    ``u`` has shape (N, T, 3): jump, branch and detector uniforms per round.
    """
    n, T, _ = u.shape
    tau = params.round_duration_ms
    ka, kb = params.kappa_a, params.kappa_b
    ga, gb = ka * params.n_th_a, kb * params.n_th_b
    half_a, half_b = math.exp(-0.5 * ka * tau), math.exp(-0.5 * kb * tau)
    pe_c = detector.p_e_given_C
    pg_e = detector.p_g_given_E
    ph_h = detector.p_higher_given_heated

    state = np.full(n, C, dtype=np.int8)
    v = np.full(n, complex(psi.V))
    w = np.full(n, complex(psi.W))
    heated_na = np.zeros(n, dtype=np.int8)  # Alice photons while in H (Bob has 2 - n_a)

    outcomes = np.empty((n, T), dtype=np.int8)
    hidden = np.empty((n, T), dtype=np.int8)
    bloch = np.zeros((n, T, 3)) if record_bloch else None

    for k in range(T):
        u_jump, u_branch, u_det = u[:, k, 0], u[:, k, 1], u[:, k, 2]
        in_c = state == C
        in_e = state == E
        in_h = state == H

        out = np.empty(n, dtype=np.int8)
        out[in_c] = np.where(u_det[in_c] < pe_c, OUT_E, OUT_G)
        out[in_e] = np.where(u_det[in_e] < pg_e, OUT_G, OUT_E)
        out[in_h] = np.where(u_det[in_h] < ph_h, OUT_HIGHER, OUT_E)
        outcomes[:, k] = out
        hidden[:, k] = state
        if record_bloch:
            vw = np.conj(v[in_c]) * w[in_c]
            bloch[in_c, k, 0] = 2 * vw.real
            bloch[in_c, k, 1] = 2 * vw.imag
            bloch[in_c, k, 2] = np.abs(v[in_c]) ** 2 - np.abs(w[in_c]) ** 2
        if k == T - 1:
            break

        new_state = state.copy()

        # code space
        idx = np.flatnonzero(in_c)
        if idx.size:
            pv = np.abs(v[idx]) ** 2
            pw = np.abs(w[idx]) ** 2
            survive = pv * half_b**2 + pw * half_a**2
            p_loss = 1 - survive
            weights = np.stack([ga * pv, 2 * ga * pw, 2 * gb * pv, gb * pw], axis=1)
            rate_h = weights.sum(axis=1)
            p_heat = -np.expm1(-rate_h * tau)
            uj = u_jump[idx]
            lost = uj < p_loss
            heated = ~lost & (uj < p_loss + p_heat)
            stay = ~(lost | heated)

            new_state[idx[lost]] = E
            if heated.any():
                hw = weights[heated]
                cum = np.cumsum(hw, axis=1) / hw.sum(axis=1, keepdims=True)
                choice = (u_branch[idx[heated]][:, None] >= cum).sum(axis=1)
                choice = np.minimum(choice, 3)
                # branches: |11> (Alice gain), |20>, |02>, |11> (Bob gain)
                heated_na[idx[heated]] = np.array([1, 2, 0, 1], dtype=np.int8)[choice]
                new_state[idx[heated]] = H
            if detector.collapses:
                s = idx[stay]
                nrm = np.sqrt(survive[stay])
                v[s] = v[s] * half_b / nrm
                w[s] = w[s] * half_a / nrm

        # two-excitation sector
        idx = np.flatnonzero(in_h)
        if idx.size:
            na = heated_na[idx].astype(float)
            rate = na * ka + (2 - na) * kb
            decayed = u_jump[idx] < -np.expm1(-rate * tau)
            if decayed.any():
                d = idx[decayed]
                alice_loss = u_branch[d] < (na[decayed] * ka / rate[decayed])
                na_after = heated_na[d] - alice_loss.astype(np.int8)
                # one photon left: in Bob -> |01> (V=1), in Alice -> |10> (W=1)
                v[d] = np.where(na_after == 0, 1.0, 0.0)
                w[d] = np.where(na_after == 0, 0.0, 1.0)
                new_state[d] = C

        state = new_state
    return outcomes, hidden, bloch


def simulate_trajectory(cfg, state, seed):
    """One trajectory with hidden-state record, from an explicit 64-bit seed."""
    psi = DualRailState.cardinal(state) if isinstance(state, str) else state
    label = state if isinstance(state, str) else "custom"
    u = _uniforms(seed, cfg.n_rounds)[None]
    outcomes, hidden, _ = _evolve(cfg.params, cfg.detector, psi, u)
    return Trajectory(outcomes[0], label, int(seed), hidden[0])


def simulate_state(cfg, state, record_bloch=False):
    """Ensemble for one cardinal state, seeds split from ``cfg.master_seed``."""
    s_idx = CARDINAL_STATES.index(state)
    seeds = np.array(
        [trajectory_seed(cfg.master_seed, s_idx, i) for i in range(cfg.n_trajectories)],
        dtype=np.uint64,
    )
    u = np.stack([_uniforms(int(s), cfg.n_rounds) for s in seeds])
    outcomes, hidden, bloch = _evolve(
        cfg.params, cfg.detector, DualRailState.cardinal(state), u, record_bloch
    )
    return Ensemble(state, outcomes, hidden, seeds, cfg.master_seed, bloch)


def simulate_ensemble(cfg, states=CARDINAL_STATES, record_bloch=False):
    """Ensembles for each requested cardinal state, keyed by label."""
    return {s: simulate_state(cfg, s, record_bloch) for s in states}


def first_event_index(outcomes):
    """Index of the first non-g outcome per trajectory; -1 if none."""
    outcomes = np.atleast_2d(outcomes)
    flagged = outcomes != OUT_G
    first = flagged.argmax(axis=1)
    return np.where(flagged.any(axis=1), first, -1)


def survivors(outcomes, k):
    """Mask of trajectories whose outcomes 0..k are all g."""
    return np.all(np.atleast_2d(outcomes)[:, : k + 1] == OUT_G, axis=1)


@dataclass
class PostselectionStats:
    rounds: np.ndarray
    times_ms: np.ndarray
    n_survivors: np.ndarray
    survival: np.ndarray
    mean: np.ndarray  # (rounds, 3) survivor-averaged exact Bloch vector
    shot_mean: np.ndarray  # (rounds, 3) one projective shot per survivor
    shot_sem: np.ndarray
    analytic: np.ndarray  # (rounds, 3) no-jump closed form


def postselect_no_jump(ensemble, round_k, params=DEVICE, shot_seed=0):
    """Statistics of trajectories with only g outcomes through each round 0..round_k.

    Requires an ensemble simulated with ``record_bloch=True``. Each survivor
    also contributes one simulated projective measurement of X, Y and Z per
    round, giving shot-noise-limited estimates with standard errors.
    """
    if ensemble.bloch is None:
        raise ValueError("ensemble was simulated without record_bloch=True")
    n = len(ensemble)
    if n == 0:
        raise EmptyPostselectionError("empty ensemble")
    rounds = np.arange(round_k + 1)
    times = rounds * params.round_duration_ms
    flagged = np.cumsum(ensemble.outcomes[:, : round_k + 1] != OUT_G, axis=1) == 0
    counts = flagged.sum(axis=0)
    if counts[-1] == 0:
        raise EmptyPostselectionError(f"no trajectory survives through round {round_k}")
    rng = np.random.default_rng(np.random.SeedSequence(shot_seed, spawn_key=(1,)))
    mean = np.empty((rounds.size, 3))
    shot_mean = np.empty((rounds.size, 3))
    shot_sem = np.empty((rounds.size, 3))
    for k in rounds:
        b = ensemble.bloch[flagged[:, k], k, :]
        mean[k] = b.mean(axis=0)
        shots = np.where(rng.random(b.shape) < 0.5 * (1 + b), 1.0, -1.0)
        shot_mean[k] = shots.mean(axis=0)
        shot_sem[k] = shots.std(axis=0, ddof=1) / math.sqrt(len(b)) if len(b) > 1 else np.inf
    psi = DualRailState.cardinal(ensemble.state)
    analytic = np.stack(nojump_pauli(psi, params.delta_kappa, times), axis=1)
    return PostselectionStats(rounds, times, counts, counts / n, mean, shot_mean, shot_sem, analytic)


def outcomes_to_str(outcomes):
    return "".join(OUTCOME_CHARS[o] for o in outcomes)


def _decode(line, alphabet):
    lut = {c: i for i, c in enumerate(alphabet)}
    try:
        return np.array([lut[c] for c in line], dtype=np.int8)
    except KeyError as exc:
        raise ValueError(f"unexpected symbol {exc.args[0]!r}; expected one of {alphabet!r}")


def write_trajectories(path, ensemble, truth=True):
    """Write ``path`` (outcomes) and, optionally, ``path + '.truth'`` (hidden states)."""
    header = (
        f"#dualrail-traj v1 state={ensemble.state} n={ensemble.n_rounds} "
        f"seed={int(ensemble.master_seed)}\n"
    )
    table = np.array(list(OUTCOME_CHARS))
    with open(path, "w") as fh:
        fh.write(header)
        for row in ensemble.outcomes:
            fh.write("".join(table[row]) + "\n")
    if truth:
        write_paths(str(path) + ".truth", ensemble.hidden, header)


def write_paths(path, paths, header=None):
    """Hidden-state paths in the C/E/H alphabet, one per line."""
    table = np.array(list(HIDDEN_CHARS))
    with open(path, "w") as fh:
        if header:
            fh.write(header)
        for row in paths:
            fh.write("".join(table[np.asarray(row)]) + "\n")


def parse_header(line):
    parts = line.strip().split()
    if len(parts) < 2 or parts[0] != "#dualrail-traj" or parts[1] != "v1":
        raise ValueError(f"not a dualrail trajectory header: {line.strip()!r}")
    meta = dict(p.split("=", 1) for p in parts[2:])
    return {"state": meta["state"], "n": int(meta["n"]), "seed": int(meta["seed"])}


def read_trajectories(path, alphabet=OUTCOME_CHARS):
    """Return (header dict, int8 array of shape (n_traj, n_rounds))."""
    with open(path) as fh:
        meta = parse_header(fh.readline())
        rows = [_decode(line.strip(), alphabet) for line in fh if line.strip()]
    if not rows:
        raise ValueError(f"{path}: no trajectories")
    if any(len(r) != meta["n"] for r in rows):
        raise ValueError(f"{path}: trajectory length differs from header n={meta['n']}")
    return meta, np.stack(rows)


def read_paths(path):
    return read_trajectories(path, HIDDEN_CHARS)
