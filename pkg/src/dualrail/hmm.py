"""Two-state categorical HMM over erasure-check outcomes.

Hidden states are code space (C = 0) and error space (E = 1); outcomes are
g (0) and e (1). ``emission[state, outcome]`` is P(outcome | state).
"""

from dataclasses import dataclass, field
import json
import logging
import math

import numpy as np

from .erasure import E as HIDDEN_E, H as HIDDEN_H, OUT_E, OUT_G, OUT_HIGHER

log = logging.getLogger(__name__)

C, E = 0, 1
STOCHASTIC_TOL = 1e-12


class DegenerateModelError(ValueError):
    pass


@dataclass
class HmmModel:
    transition: np.ndarray
    emission: np.ndarray
    initial: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=float)
        self.emission = np.asarray(self.emission, dtype=float)
        self.initial = np.asarray(self.initial, dtype=float)
        for name, m in (("transition", self.transition), ("emission", self.emission)):
            if m.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2")
        if self.initial.shape != (2,):
            raise ValueError("initial must have two entries")
        for name, m in (("transition", self.transition), ("emission", self.emission), ("initial", self.initial)):
            rows = np.atleast_2d(m).sum(axis=1)
            if np.any(rows == 0):
                raise DegenerateModelError(f"{name} has an all-zero row")
            if np.any(m < 0) or np.any(m > 1) or np.any(np.abs(rows - 1) > 1e-9):
                raise ValueError(f"{name} is not row-stochastic")

    @classmethod
    def default_init(cls):
        """Near-identity transitions and near-ideal emissions."""
        return cls(
            transition=[[0.96, 0.04], [0.04, 0.96]],
            emission=[[0.99, 0.01], [0.1, 0.9]],
        )

    @property
    def t_CE(self):
        return self.transition[C, E]

    @property
    def t_CC(self):
        return self.transition[C, C]

    @property
    def e_gE(self):
        return self.emission[E, OUT_G]

    @property
    def e_eC(self):
        return self.emission[C, OUT_E]

    def to_dict(self, round_duration_us=None):
        d = {
            "transition": self.transition.tolist(),
            "emission": self.emission.tolist(),
            "initial": self.initial.tolist(),
        }
        if round_duration_us is not None:
            d["round_duration_us"] = float(round_duration_us)
        return d

    def save(self, path, round_duration_us):
        with open(path, "w") as fh:
            json.dump(self.to_dict(round_duration_us), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        """Return ``(model, round_duration_us)``."""
        with open(path) as fh:
            d = json.load(fh)
        unknown = set(d) - {"transition", "emission", "initial", "round_duration_us"}
        if unknown:
            raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
        return cls(d["transition"], d["emission"], d["initial"]), d.get("round_duration_us")


def map_outcomes(outcomes, h_mode="as_e"):
    """Reduce g/e/higher outcomes to the two-symbol HMM alphabet.

    ``"as_e"`` treats higher as e. ``"drop"`` deletes higher rounds, which
    returns a list of (possibly unequal length) arrays.
    """
    outcomes = np.asarray(outcomes)
    if h_mode == "as_e":
        return np.where(outcomes == OUT_HIGHER, OUT_E, outcomes).astype(np.int8)
    if h_mode == "drop":
        rows = np.atleast_2d(outcomes)
        return [r[r != OUT_HIGHER].astype(np.int8) for r in rows]
    raise ValueError(f"unknown h_mode {h_mode!r}")


def _group_by_length(trajs):
    """Batches of equal-length sequences as (unique rows, multiplicities)."""
    if isinstance(trajs, np.ndarray) and trajs.ndim == 1:
        trajs = trajs[None, :]
    if isinstance(trajs, np.ndarray):
        batches = [trajs] if trajs.size else []
    else:
        by_len = {}
        for t in trajs:
            t = np.asarray(t)
            if t.size:
                by_len.setdefault(t.size, []).append(t)
        batches = [np.stack(by_len[n]) for n in sorted(by_len)]
    groups = []
    for b in batches:
        rows, counts = np.unique(b.astype(np.int8), axis=0, return_counts=True)
        groups.append((rows.astype(np.intp), counts.astype(float)))
    return groups


def _scaled_passes(m, obs):
    """Scaled forward/backward for a batch of equal-length sequences (N, T).

    Returns time-major ``alpha``, ``beta`` of shape (T, N, 2), the scale
    factors (T, N) and the gathered emission likelihoods (T, N, 2).
    """
    n, T = obs.shape
    A = m.transition
    lik = m.emission.T[obs.T]
    alpha = np.empty((T, n, 2))
    scale = np.empty((T, n))
    a = m.initial * lik[0]
    for t in range(T):
        if t:
            prev = alpha[t - 1]
            a = np.empty((n, 2))
            a[:, 0] = prev[:, 0] * A[0, 0] + prev[:, 1] * A[1, 0]
            a[:, 1] = prev[:, 0] * A[0, 1] + prev[:, 1] * A[1, 1]
            a *= lik[t]
        c = a[:, 0] + a[:, 1]
        scale[t] = c
        alpha[t] = a / c[:, None]
    beta = np.empty((T, n, 2))
    beta[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        x = lik[t + 1] * beta[t + 1] / scale[t + 1][:, None]
        beta[t, :, 0] = A[0, 0] * x[:, 0] + A[0, 1] * x[:, 1]
        beta[t, :, 1] = A[1, 0] * x[:, 0] + A[1, 1] * x[:, 1]
    return alpha, beta, scale, lik


def forward_backward(m, traj):
    """Log-likelihood and per-round posterior P(state | outcomes) of one sequence."""
    obs = np.asarray(traj, dtype=np.intp)
    if obs.ndim != 1 or obs.size == 0:
        raise ValueError("forward_backward needs a nonempty 1-D outcome sequence")
    alpha, beta, scale, _ = _scaled_passes(m, obs[None, :])
    with np.errstate(divide="ignore"):
        ll = float(np.log(scale).sum())
    return ll, (alpha * beta)[:, 0, :]


def log_likelihood(m, trajs):
    """Total log-likelihood of a set of sequences."""
    total = 0.0
    for obs, w in _group_by_length(trajs):
        _, _, scale, _ = _scaled_passes(m, obs)
        with np.errstate(divide="ignore"):
            total += float(w @ np.log(scale).sum(axis=0))
    return total


def _expected_counts(m, groups):
    trans = np.zeros((2, 2))
    emit = np.zeros((2, 2))
    ll = 0.0
    for obs, w in groups:
        alpha, beta, scale, lik = _scaled_passes(m, obs)
        ll += float(w @ np.log(scale).sum(axis=0))
        gamma = (alpha * beta) * w[None, :, None]
        is_e = (obs.T == OUT_E)[:, :, None]
        emit[:, OUT_E] += (gamma * is_e).sum(axis=(0, 1))
        emit[:, OUT_G] += (gamma * ~is_e).sum(axis=(0, 1))
        if obs.shape[1] > 1:
            right = lik[1:] * beta[1:] / scale[1:, :, None]
            left = alpha[:-1] * w[None, :, None]
            trans += m.transition * np.einsum("tni,tnj->ij", left, right)
    return trans, emit, ll


@dataclass
class TrainingResult:
    model: HmmModel
    history: list
    converged: bool


def baum_welch(trajs, init=None, max_iter=200, tol=1e-6, update_initial=False, return_history=False):
    """Expectation-maximization over all sequences jointly.

    The initial distribution stays fixed at ``init.initial`` unless
    ``update_initial``. Iteration stops once the total log-likelihood changes
    by less than ``tol``.
    """
    groups = _group_by_length(trajs)
    if not groups:
        raise ValueError("baum_welch needs at least one nonempty sequence")
    m = init if init is not None else HmmModel.default_init()
    history = []
    converged = False
    for _ in range(max_iter):
        trans, emit, ll = _expected_counts(m, groups)
        history.append(ll)
        if len(history) > 1 and abs(history[-1] - history[-2]) < tol:
            converged = True
            break
        new_t = m.transition.copy()
        new_e = m.emission.copy()
        for i in (C, E):
            # unvisited states keep their previous rows
            if trans[i].sum() > 0:
                new_t[i] = trans[i] / trans[i].sum()
            if emit[i].sum() > 0:
                new_e[i] = emit[i] / emit[i].sum()
        initial = m.initial
        if update_initial:
            first = np.zeros(2)
            for obs, w in groups:
                alpha, beta, _, _ = _scaled_passes(m, obs)
                first += w @ (alpha[0] * beta[0])
            initial = first / first.sum()
        m = HmmModel(new_t, new_e, initial)
    if not converged:
        log.warning("Baum-Welch stopped after %d iterations without reaching tol=%g", max_iter, tol)
    if return_history:
        return TrainingResult(m, history, converged)
    return m


def sample(m, n, T, rng):
    """Draw ``n`` (hidden, outcome) sequences of length ``T`` from the model."""
    hidden = np.empty((n, T), dtype=np.int8)
    state = (rng.random(n) >= m.initial[C]).astype(np.int8)
    for t in range(T):
        if t:
            state = (rng.random(n) >= m.transition[state, C]).astype(np.int8)
        hidden[:, t] = state
    outcomes = (rng.random((n, T)) >= m.emission[hidden, OUT_G]).astype(np.int8)
    return hidden, outcomes


def _viterbi_batch(m, obs):
    n, T = obs.shape
    with np.errstate(divide="ignore"):
        logA = np.log(m.transition)
        logB = np.log(m.emission)
        delta = np.log(m.initial)[None, :] + logB[:, obs[:, 0]].T
    back = np.zeros((n, T, 2), dtype=np.int8)
    for t in range(1, T):
        cand = delta[:, :, None] + logA[None, :, :]
        # argmax returns the first maximum, so ties resolve toward C
        back[:, t] = cand.argmax(axis=1)
        delta = cand.max(axis=1) + logB[:, obs[:, t]].T
    path = np.empty((n, T), dtype=np.int8)
    path[:, T - 1] = delta.argmax(axis=1)
    rows = np.arange(n)
    for t in range(T - 1, 0, -1):
        path[:, t - 1] = back[rows, t, path[:, t]]
    return path


def viterbi(m, traj):
    """Most likely hidden path; accepts one sequence or an (N, T) array."""
    obs = np.asarray(traj, dtype=np.intp)
    if obs.ndim == 1:
        return _viterbi_batch(m, obs[None, :])[0]
    return _viterbi_batch(m, obs)


def path_log_prob(m, path, traj):
    """log P(path, outcomes)."""
    path = np.asarray(path)
    traj = np.asarray(traj)
    with np.errstate(divide="ignore"):
        lp = math.log(m.initial[path[0]]) if m.initial[path[0]] > 0 else -math.inf
        lp += np.log(m.emission[path, traj]).sum()
        lp += np.log(m.transition[path[:-1], path[1:]]).sum()
    return float(lp)


@dataclass(frozen=True)
class RateReport:
    erasure_prob_per_gate: float
    erasure_rate: float  # 1/ms
    false_negative_per_gate: float
    false_positive_per_gate: float


def rates(m, round_duration_ms):
    """Per-gate probabilities and the linear probability-to-rate conversion."""
    return RateReport(
        erasure_prob_per_gate=float(m.t_CE),
        erasure_rate=float(m.t_CE / round_duration_ms),
        false_negative_per_gate=float(m.t_CE * m.e_gE),
        false_positive_per_gate=float(m.t_CC * m.e_eC),
    )


def expected_erasure_rate(state, params):
    """kappa_b for +Z, kappa_a for -Z, their mean on the equator."""
    if state == "+Z":
        return params.kappa_b
    if state == "-Z":
        return params.kappa_a
    return 0.5 * (params.kappa_a + params.kappa_b)


def truth_to_binary(hidden):
    """Collapse simulator C/E/H labels to the HMM's C/E."""
    hidden = np.asarray(hidden)
    return np.where((hidden == HIDDEN_E) | (hidden == HIDDEN_H), E, C).astype(np.int8)


@dataclass
class DecodeResult:
    reports: dict
    paths: dict
    accuracy: dict
    expected_rates: dict
    mean_false_negative: float
    mean_false_positive: float


def decode_ensemble(models, ensembles, round_duration_ms, params=None, h_mode="as_e"):
    """Rates and Viterbi paths per state.

    ``ensembles`` maps a state label to either an ``Ensemble`` (ground truth
    available) or an outcome array. False rates are averaged uniformly over
    states.
    """
    reports, paths, accuracy, expected = {}, {}, {}, {}
    for label, ens in ensembles.items():
        m = models[label]
        raw = getattr(ens, "outcomes", ens)
        obs = map_outcomes(raw, h_mode)
        reports[label] = rates(m, round_duration_ms)
        if h_mode == "drop":
            paths[label] = [viterbi(m, o) for o in obs]
        else:
            paths[label] = viterbi(m, obs)
            hidden = getattr(ens, "hidden", None)
            if hidden is not None:
                accuracy[label] = float(np.mean(paths[label] == truth_to_binary(hidden)))
        if params is not None:
            expected[label] = expected_erasure_rate(label, params)
    fn = float(np.mean([r.false_negative_per_gate for r in reports.values()]))
    fp = float(np.mean([r.false_positive_per_gate for r in reports.values()]))
    return DecodeResult(reports, paths, accuracy, expected, fn, fp)
