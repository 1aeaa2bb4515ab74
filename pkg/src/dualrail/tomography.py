"""Joint-Wigner tomography of the dual-rail qubit.

Parities are sampled at 16 displacement pairs and inverted into the 16
two-qubit Pauli expectations of the {|0>,|1>} x {|0>,|1>} Fock subspace,
from which the four logical dual-rail Paulis follow. Internally everything
is in parity units: W(alpha) = (2/pi) P(alpha) for one mode and
W(alpha, beta) = (4/pi^2) P_J(alpha, beta) for two.
"""

from dataclasses import dataclass
import csv
import functools
import math

import numpy as np

from . import fock

EULER = math.e
SQRT2 = math.sqrt(2)
PAULI_LABELS = "IXYZ"
PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-mode sampling points, ordered as the single-mode inversion expects
SINGLE_POINTS = (1 / SQRT2, -1 / SQRT2, 1j / SQRT2, 0.0)

_UNIT = (0, 1, -1, 1j)
DISPLACEMENTS = tuple((a / SQRT2, b / SQRT2) for a in _UNIT for b in _UNIT)


@dataclass(frozen=True)
class TwoQubitPaulis:
    """Expectations of sigma_A x sigma_B; ``values[i, j]`` uses PAULI_LABELS order."""

    values: np.ndarray

    def __getitem__(self, label):
        return float(self.values[PAULI_LABELS.index(label[0]), PAULI_LABELS.index(label[1])])

    def as_dict(self):
        return {a + b: self[a + b] for a in PAULI_LABELS for b in PAULI_LABELS}


@dataclass(frozen=True)
class LogicalPaulis:
    I: float
    X: float
    Y: float
    Z: float

    def as_tuple(self):
        return (self.I, self.X, self.Y, self.Z)


def wigner_single(rho, alpha, method="expm"):
    rho = np.asarray(rho)
    return 2 / math.pi * fock.expectation(rho, fock.displaced_parity(alpha, rho.shape[0], method))


def joint_parity_operator(alpha, beta, dims, method="expm"):
    return fock.tensor(
        fock.displaced_parity(alpha, dims[0], method),
        fock.displaced_parity(beta, dims[1], method),
    )


def wigner_joint(rho, alpha, beta, dims=None, method="expm"):
    """(4/pi^2) Tr[rho P_A(alpha) x P_B(beta)] with A-major indexing."""
    rho = np.asarray(rho)
    dims = _infer_dims(rho, dims)
    return 4 / math.pi**2 * fock.expectation(rho, joint_parity_operator(alpha, beta, dims, method))


def _infer_dims(rho, dims):
    if dims is None:
        d = math.isqrt(rho.shape[0])
        if d * d != rho.shape[0]:
            raise fock.DimensionMismatchError("cannot infer per-mode dimensions; pass dims")
        return (d, d)
    if dims[0] * dims[1] != rho.shape[0]:
        raise fock.DimensionMismatchError(f"dims {dims} do not match state size {rho.shape[0]}")
    return tuple(dims)


def fock_paulis(parities):
    """(I, X, Y, Z) from parities at 1/sqrt2, -1/sqrt2, i/sqrt2 and 0 (in that order)."""
    p_plus, p_minus, p_i, p_0 = parities
    e = EULER
    i_ = e / 2 * (p_plus + p_minus)
    x = e / (2 * SQRT2) * (p_plus - p_minus)
    y = e / (2 * SQRT2) * (2 * p_i - p_plus - p_minus)
    return i_, x, y, p_0


def two_qubit_paulis(joint_parities):
    """Invert 16 joint parities (ordered as DISPLACEMENTS) into TwoQubitPaulis."""
    p = np.asarray(joint_parities, dtype=float)
    if p.shape != (16,):
        raise ValueError(f"expected 16 joint parities, got {p.size}")
    e, e2, r2 = EULER, EULER**2, SQRT2
    v = {
        "II": e2 / 4 * (p[5] + p[6] + p[9] + p[10]),
        "IX": e2 / (4 * r2) * (p[5] - p[6] + p[9] - p[10]),
        "IY": e2 / (4 * r2) * (2 * p[7] - p[5] - p[6] + 2 * p[11] - p[9] - p[10]),
        "IZ": e / 2 * (p[4] + p[8]),
        "XI": e2 / (4 * r2) * (p[5] + p[6] - p[9] - p[10]),
        "XX": e2 / 8 * (p[5] - p[6] - p[9] + p[10]),
        "XY": e2 / 8 * (2 * p[7] - p[5] - p[6] - 2 * p[11] + p[9] + p[10]),
        "XZ": e / (2 * r2) * (p[4] - p[8]),
        "YI": e2 / (4 * r2) * (2 * p[13] + 2 * p[14] - p[5] - p[6] - p[9] - p[10]),
        "YX": e2 / 8 * (2 * p[13] - 2 * p[14] - p[5] + p[6] - p[9] + p[10]),
        "YY": e2 / 8 * (
            4 * p[15] - 2 * p[13] - 2 * p[14] - 2 * p[7] + p[5] + p[6] - 2 * p[11] + p[9] + p[10]
        ),
        # printed with e^2 and a single p[12]; only this form inverts exactly
        "YZ": e / (2 * r2) * (2 * p[12] - p[4] - p[8]),
        "ZI": e / 2 * (p[1] + p[2]),
        "ZX": e / (2 * r2) * (p[1] - p[2]),
        "ZY": e / (2 * r2) * (2 * p[3] - p[1] - p[2]),
        "ZZ": p[0],
    }
    values = np.array([[v[a + b] for b in PAULI_LABELS] for a in PAULI_LABELS])
    return TwoQubitPaulis(values)


def logical_paulis(p):
    return LogicalPaulis(
        I=0.5 * (p["II"] - p["ZZ"]),
        X=0.5 * (p["XX"] + p["YY"]),
        Y=0.5 * (p["YX"] - p["XY"]),
        Z=0.5 * (p["ZI"] - p["IZ"]),
    )


def joint_parities(rho, dims=None, method="truncated", dim=fock.DEFAULT_DIM):
    """Expected joint parities at the 16 sampling points.

    ``method="analytic"`` projects ``rho`` onto the two-qubit Fock subspace
    and uses the exact 2x2 parity blocks; ``"truncated"`` embeds ``rho`` into
    ``dim`` levels per mode and uses truncated displacement operators.
    """
    rho = np.asarray(rho, dtype=complex)
    dims = _infer_dims(rho, dims)
    if method == "analytic":
        sub = fock.project(rho, dims, (2, 2))
        ops = _sampling_operators("analytic", (2, 2))
    elif method == "truncated":
        big = (max(dim, dims[0]), max(dim, dims[1]))
        sub = fock.embed(rho, dims, big)
        ops = _sampling_operators("truncated", big)
    else:
        raise ValueError(f"unknown parity method {method!r}")
    # ops are Hermitian, so Tr[rho op] is real up to rounding
    return np.einsum("ij,kji->k", sub, ops).real


@functools.lru_cache(maxsize=8)
def _sampling_operators(method, dims):
    if method == "analytic":
        ops = [fock.tensor(fock.fock_qubit_parity_block(a), fock.fock_qubit_parity_block(b)) for a, b in DISPLACEMENTS]
    else:
        ops = [joint_parity_operator(a, b, dims) for a, b in DISPLACEMENTS]
    ops = np.stack(ops)
    ops.setflags(write=False)
    return ops


def joint_wigner_samples(rho, dims=None, method="truncated", dim=fock.DEFAULT_DIM):
    """W(alpha, beta) at the 16 sampling points."""
    return 4 / math.pi**2 * joint_parities(rho, dims, method, dim)


def tomography_pipeline(rho, dims=None, method="truncated", dim=fock.DEFAULT_DIM):
    """Joint Wigner samples -> parities -> two-qubit Paulis -> logical Paulis.

    Returns ``(LogicalPaulis, TwoQubitPaulis, parities)``.
    """
    w = joint_wigner_samples(rho, dims, method, dim)
    parities = w * math.pi**2 / 4
    tq = two_qubit_paulis(parities)
    return logical_paulis(tq), tq, parities


def direct_two_qubit_paulis(rho, dims=None):
    """Tr[rho_proj sigma_i x sigma_j] on the projected two-qubit subspace (oracle)."""
    rho = np.asarray(rho, dtype=complex)
    dims = _infer_dims(rho, dims)
    sub = fock.project(rho, dims, (2, 2))
    values = np.array(
        [[np.trace(sub @ np.kron(PAULIS[a], PAULIS[b])).real for b in PAULI_LABELS] for a in PAULI_LABELS]
    )
    return TwoQubitPaulis(values)


def write_wigner_csv(path, points, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_alpha", "im_alpha", "re_beta", "im_beta", "W"])
        for (a, b), val in zip(points, values):
            a, b = complex(a), complex(b)
            w.writerow([repr(a.real), repr(a.imag), repr(b.real), repr(b.imag), repr(float(val))])


def wigner_grid(rho, alphas, betas, dims=None, method="expm"):
    """Joint Wigner values on the product grid ``alphas x betas`` (flattened, alpha-major)."""
    rho = np.asarray(rho, dtype=complex)
    dims = _infer_dims(rho, dims)
    pa = [fock.displaced_parity(a, dims[0], method) for a in alphas]
    pb = [fock.displaced_parity(b, dims[1], method) for b in betas]
    points, values = [], []
    for a, opa in zip(alphas, pa):
        for b, opb in zip(betas, pb):
            points.append((a, b))
            values.append(4 / math.pi**2 * fock.expectation(rho, fock.tensor(opa, opb)))
    return points, np.array(values)


PAULI_SERIES_COLUMNS = ["round", "I_L", "X_L", "Y_L", "Z_L"] + [a + b for a in PAULI_LABELS for b in PAULI_LABELS]


def write_pauli_series_csv(path, rounds, logical, two_qubit):
    """One row per round: logical values then the 16 two-qubit values."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PAULI_SERIES_COLUMNS)
        for k, lp, tq in zip(rounds, logical, two_qubit):
            row = [int(k)] + [repr(float(x)) for x in lp.as_tuple()]
            row += [repr(float(x)) for x in tq.values.ravel()]
            w.writerow(row)


def read_pauli_series_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != PAULI_SERIES_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        rows = list(reader)
    rounds = np.array([int(r["round"]) for r in rows])
    logical = [LogicalPaulis(*(float(r[c]) for c in ("I_L", "X_L", "Y_L", "Z_L"))) for r in rows]
    two_qubit = [
        TwoQubitPaulis(np.array([[float(r[a + b]) for b in PAULI_LABELS] for a in PAULI_LABELS]))
        for r in rows
    ]
    return rounds, logical, two_qubit
