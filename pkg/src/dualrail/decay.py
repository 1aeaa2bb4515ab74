"""Exponential and no-jump decay fits for logical Pauli series."""

from dataclasses import dataclass
import warnings

import numpy as np
from scipy import stats
from scipy.optimize import OptimizeWarning, curve_fit

from .codespace import DualRailState, nojump_pauli

MIN_POINTS = 10
_COMPONENT = {"X": 0, "Y": 1, "Z": 2}


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay rate in 1/ms.

    ``upper_bound`` is set when the 95% interval of the rate includes zero,
    in which case the rate is unresolved and only the bound is meaningful.
    """

    model: str
    rate: float
    stderr: float
    ci95: tuple
    amplitude: float
    upper_bound: float = None

    @property
    def is_bound(self):
        return self.upper_bound is not None


def _exp(t, amp, rate):
    return amp * np.exp(-rate * t)


def _rate_stderr(t, y, base, amp, rate, sigma):
    """Standard error of the rate from the analytic Jacobian.

    The residual variance is floored at the sqrt(machine eps) resolution of
    the data so that exactly fitting series still get a finite interval.
    """
    decay = base * np.exp(-rate * t)
    jac = np.stack([decay, -t * amp * decay], axis=1)
    resid = y - amp * decay
    if sigma is not None:
        w = 1 / np.asarray(sigma, dtype=float)
        jac, resid, s_sq = jac * w[:, None], resid * w, 1.0
    else:
        floor = np.sqrt(np.finfo(float).eps) * np.abs(y).max()
        s_sq = max(float(resid @ resid) / (t.size - 2), floor**2)
    try:
        cov = np.linalg.inv(jac.T @ jac) * s_sq
    except np.linalg.LinAlgError as exc:
        raise FitError("decay fit covariance is singular") from exc
    if not np.isfinite(cov[1, 1]):
        raise FitError("decay fit covariance is singular")
    return float(np.sqrt(max(cov[1, 1], 0.0)))


def fit_pauli_decay(t, values, postselected=False, pauli="I", state=None, delta_kappa=0.0, sigma=None):
    """Fit a per-round Pauli series.

    Without postselection, and for I and Z with postselection, the model is
    ``A exp(-G t)``. Postselected X and Y are fit to ``A f(t) exp(-G t)``
    where ``f`` is the no-jump evolution of ``state`` (a cardinal label or
    ``DualRailState``) at ``delta_kappa``; ``G`` is then the residual
    dephasing rate.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.size < MIN_POINTS:
        raise ValueError(f"need matching series of at least {MIN_POINTS} points")

    if postselected and pauli in ("X", "Y"):
        if state is None:
            raise ValueError("postselected X/Y fits need the prepared state")
        psi = DualRailState.cardinal(state) if isinstance(state, str) else state
        shape = np.asarray(nojump_pauli(psi, delta_kappa, t)[_COMPONENT[pauli]])
        if abs(shape[0]) < 1e-9:
            raise ValueError(f"<{pauli}> of the prepared state vanishes; nothing to fit")

        base = shape

        def model(tt, amp, rate):
            return amp * np.interp(tt, t, shape) * np.exp(-rate * tt)

        name = "nojump*exp"
        amp0 = y[0] / shape[0]
        residual = y / shape
    else:
        model = _exp
        base = np.ones_like(t)
        name = "exp"
        amp0 = y[0] if y[0] != 0 else 1.0
        residual = y

    span = t[-1] - t[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = residual[-1] / residual[0] if residual[0] else 1.0
    rate0 = -np.log(ratio) / span if ratio > 0 and span > 0 else 0.0
    try:
        with warnings.catch_warnings():
            # the covariance is recomputed below
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(
                model, t, y, p0=[amp0, rate0], sigma=sigma, absolute_sigma=sigma is not None,
                maxfev=10_000, xtol=1e-12, ftol=1e-12,
            )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"decay fit did not converge: {exc}") from exc
    amp, rate = popt
    err = _rate_stderr(t, y, base, amp, rate, sigma)
    half = stats.t.ppf(0.975, max(t.size - 2, 1)) * err
    lo, hi = rate - half, rate + half
    # a rate bound below zero carries no information beyond 'no decay'
    bound = max(float(hi), 0.0) if lo <= 0 else None
    return DecayFit(name, float(rate), err, (float(lo), float(hi)), float(amp), bound)
