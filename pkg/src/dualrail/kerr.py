"""Pumped cross-Kerr Hamiltonians, chevron scans and Rabi fits.

Time is in us and angular frequencies in rad/us throughout. The transmon is
truncated to the four levels g, e, f, h. Composite kets are ordered
transmon-major: ``index = q * dim_b + n_b``.

Detuning convention: ``PumpParams.Delta`` is the coefficient of ``b^dag b``
in the effective rotating-frame Hamiltonian, i.e. the detuning after the
``Delta -> Delta - 3 K_qq`` relabelling that makes the e<->h pumped process
static. The pump frequency in the lab is ``2 w_q - w_b - 3 K_qq + Delta``
with that same Delta; the sign convention of the hardware detuning is left
to the caller.
"""

from dataclasses import dataclass
import csv
import logging
import math
import warnings

import numpy as np
from scipy.optimize import least_squares

from . import fock
from .params import TWO_PI

log = logging.getLogger(__name__)

G, E, F, H = range(4)
N_TRANSMON = 4


class NoOscillationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PumpParams:
    Omega: complex
    Delta: float = 0.0


@dataclass(frozen=True)
class JosephsonExpansion:
    """Quartic expansion constants of the junction.

    ``E_J`` is E_J/h in GHz, ``omega_*`` are angular frequencies in rad/ns and
    ``epsilon_d`` is the drive amplitude in rad/us.
    """

    E_J: float
    phi_a: float
    phi_b: float
    phi_q: float
    epsilon_d: float
    omega_q: float
    omega_d: float
    omega_a: float = 0.0
    omega_b: float = 0.0

    def __post_init__(self):
        if min(self.phi_a, self.phi_b, self.phi_q) <= 0:
            raise ValueError("zero-point phases must be positive")


@dataclass(frozen=True)
class EffectiveParams:
    K: dict
    chi: dict
    xi: complex
    Omega: complex
    Omega_eh: complex
    stark: dict


def derive_effective_params(j):
    """Self-Kerrs, cross-Kerrs, drive displacement and pump rate from the quartic expansion.

    All returned frequencies are in rad/us. ``Omega`` is the two-photon pump
    rate ``xi^* sqrt(2 chi_bq K_qq)``; ``Omega_eh`` is the rescaled
    ``sqrt(3/2) Omega`` that couples |e,n+1> and |h,n>.
    """
    detuning = (j.omega_q - j.omega_d) * 1e3
    if detuning == 0:
        raise ZeroDivisionError("drive is resonant with the transmon; xi is undefined")
    xi = 1j * j.epsilon_d / detuning
    ej = TWO_PI * 1e3 * j.E_J
    phi = {"a": j.phi_a, "b": j.phi_b, "q": j.phi_q}
    K = {m: -0.5 * ej * p**4 for m, p in phi.items()}
    chi = {
        "ab": -ej * phi["a"] ** 2 * phi["b"] ** 2,
        "aq": -ej * phi["a"] ** 2 * phi["q"] ** 2,
        "bq": -ej * phi["b"] ** 2 * phi["q"] ** 2,
    }
    stark = {m: 0.5 * K[m] * abs(xi) ** 2 for m in phi}
    # chi_bq and K_qq are both negative, so the product is positive
    omega = np.conj(xi) * math.sqrt(2 * chi["bq"] * K["q"])
    return EffectiveParams(K, chi, xi, complex(omega), complex(math.sqrt(1.5) * omega), stark)


def build_chi_hamiltonian(p, pump, n_b_max=3, n_a=0, include_dropped=False):
    """Effective pumped Hamiltonian on (transmon x Bob).

    Parameters
    ----------
    p : SystemParams
    pump : PumpParams
    n_b_max : int
        Highest Bob Fock level kept (Bob dimension is ``n_b_max + 1``).
    n_a : int
        Alice photon number; enters only through ``chi_aq n_a q^dag q``.
    include_dropped : bool
        Also keep the off-resonant g<->f pumped ladder ``(Omega/sqrt 3) b^dag |g><f|``,
        which sits ``2 K_qq`` away from the e<->h process.
    """
    if int(n_b_max) != n_b_max or n_b_max < 2:
        raise fock.InvalidDimensionError(f"n_b_max must be an integer >= 2, got {n_b_max!r}")
    dim_b = int(n_b_max) + 1
    b = fock.annihilation(dim_b)
    nb = fock.number(dim_b)
    nq = fock.number(N_TRANSMON)
    iq = fock.identity(N_TRANSMON)
    ib = fock.identity(dim_b)

    def ketbra(i, j):
        m = np.zeros((N_TRANSMON, N_TRANSMON), dtype=complex)
        m[i, j] = 1.0
        return m

    omega = complex(pump.Omega)
    h = pump.Delta * fock.tensor(iq, nb)
    coupling = omega * fock.tensor(ketbra(E, H), b.conj().T)
    if include_dropped:
        coupling = coupling + omega / math.sqrt(3) * fock.tensor(ketbra(G, F), b.conj().T)
        h = h + fock.tensor(ketbra(F, F), ib) * (-2 * p.K_qq)
    h = h + coupling + coupling.conj().T
    h = h + p.chi_aq * n_a * fock.tensor(nq, ib)
    h = h + p.chi_bq * fock.tensor(nq, nb)
    return h


def state_index(q, n_b, n_b_max=3):
    return q * (n_b_max + 1) + n_b


def two_level_eigen(Delta, Omega):
    """lambda_pm = -Delta/2 +- sqrt(Delta^2 + 4|Omega|^2)/2.

    These are the eigenvalues of ``[[-Delta, Omega], [Omega^*, 0]]``; for
    ``|Omega| << Delta`` the upper one approaches ``|Omega|^2 / Delta``.
    """
    r = 0.5 * np.sqrt(np.square(Delta) + 4 * np.abs(Omega) ** 2)
    return -0.5 * Delta + r, -0.5 * Delta - r


def dispersive_shift(Delta, Omega):
    if Delta == 0:
        raise ZeroDivisionError("dispersive shift undefined at zero detuning")
    if abs(Omega) > 0.2 * abs(Delta):
        warnings.warn(
            f"|Omega|/|Delta| = {abs(Omega) / abs(Delta):.2f}; dispersive approximation is poor",
            stacklevel=2,
        )
    return abs(Omega) ** 2 / Delta


def chevron_scan(p, Omega, Delta_grid, t_grid, n_b_max=3, n_a=0, include_dropped=False):
    """P_e(Delta, t) = |<e,1| exp(-iHt) |e,1>|^2 on the given grids.

    Rows follow ``Delta_grid`` (rad/us), columns follow ``t_grid`` (us).
    """
    Delta_grid = np.atleast_1d(np.asarray(Delta_grid, dtype=float))
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if Delta_grid.size == 0 or t_grid.size == 0:
        raise ValueError("chevron grids must be nonempty")
    k = state_index(E, 1, n_b_max)
    out = np.empty((Delta_grid.size, t_grid.size))
    for i, delta in enumerate(Delta_grid):
        h = build_chi_hamiltonian(p, PumpParams(Omega, delta), n_b_max, n_a, include_dropped)
        w, v = np.linalg.eigh(h)
        weights = np.abs(v[k, :]) ** 2
        amp = np.exp(-1j * np.outer(t_grid, w)) @ weights
        out[i] = np.abs(amp) ** 2
    return out


def rabi_model(Delta, t, Omega, center):
    """Two-level chevron: 1 - [4W^2/(d^2+4W^2)] sin^2(sqrt(d^2+4W^2) t / 2)."""
    d = np.asarray(Delta)[:, None] - center
    r2 = d**2 + 4 * Omega**2
    t = np.asarray(t)[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        amp = np.where(r2 > 0, 4 * Omega**2 / r2, 0.0)
    return 1 - amp * np.sin(0.5 * np.sqrt(r2) * t) ** 2


def _dominant_angular_frequency(t, y):
    t = np.asarray(t, dtype=float)
    tu = np.linspace(t[0], t[-1], max(len(t), 64))
    yu = np.interp(tu, t, y)
    yu = yu - yu.mean()
    n = 8 * len(tu)
    spec = np.abs(np.fft.rfft(yu, n))
    freqs = np.fft.rfftfreq(n, tu[1] - tu[0])
    k = 1 + np.argmax(spec[1:])
    return TWO_PI * freqs[k]


def fit_rabi(scan, Delta_grid, t_grid, min_contrast=0.05):
    """Least-squares chevron fit.

    Returns ``(Omega, center)`` in rad/us. Raises ``NoOscillationError`` when
    the scan has no visible population transfer or covers less than one
    Rabi period at the fitted rate.
    """
    scan = np.asarray(scan, dtype=float)
    Delta_grid = np.asarray(Delta_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if scan.shape != (Delta_grid.size, t_grid.size):
        raise ValueError("scan shape does not match grids")
    depth = 1 - scan.min(axis=1)
    if depth.max() < min_contrast:
        raise NoOscillationError("no population transfer visible in chevron scan")

    row = int(np.argmax(depth))
    center0 = Delta_grid[row]
    # on resonance P_e = cos^2(Omega t), which oscillates at 2 Omega
    omega0 = 0.5 * _dominant_angular_frequency(t_grid, scan[row])

    def resid(x):
        return (rabi_model(Delta_grid, t_grid, x[0], x[1]) - scan).ravel()

    best = None
    for scale in (1.0, 0.5, 2.0):
        res = least_squares(resid, [omega0 * scale, center0], method="lm")
        if best is None or res.cost < best.cost:
            best = res
    omega_fit, center_fit = abs(best.x[0]), best.x[1]
    if omega_fit * (t_grid.max() - t_grid.min()) < math.pi:
        raise NoOscillationError("scan covers less than one Rabi period")
    return float(omega_fit), float(center_fit)


def points_per_period(Omega, t_grid):
    """Samples per population period pi/|Omega| for a uniform time grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 2 or Omega == 0:
        return math.inf
    dt = (t_grid[-1] - t_grid[0]) / (t_grid.size - 1)
    return math.pi / abs(Omega) / dt


def write_chevron_csv(path, Delta_grid, t_grid, scan):
    """Rows are detunings (MHz, i.e. Delta/2pi), columns are times (us)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_mhz\\t_us"] + [repr(float(t)) for t in t_grid])
        for d, row in zip(Delta_grid, scan):
            w.writerow([repr(float(d) / TWO_PI)] + [repr(float(x)) for x in row])


def read_chevron_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    t_grid = np.array([float(x) for x in rows[0][1:]])
    Delta_grid = np.array([float(r[0]) for r in rows[1:]]) * TWO_PI
    scan = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return Delta_grid, t_grid, scan
