"""Dual-rail codewords, cavity error channels and no-jump evolution.

Two-mode kets live on 3 x 3 Fock levels (Alice major), enough to hold the
two-excitation states reached by photon gain. Logical conventions:
``|+Z> = |01>``, ``|-Z> = |10>``, ``X = |01><10| + |10><01|`` and
``Y = -i|01><10| + i|10><01|`` on the code space.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

from . import fock
from .params import DEVICE

DIM = 3
CARDINAL_STATES = ("+Z", "-Z", "+X", "-X", "+Y", "-Y")

_S = 1 / math.sqrt(2)
_CARDINAL_AMPLITUDES = {
    "+Z": (1.0, 0.0),
    "-Z": (0.0, 1.0),
    "+X": (_S, _S),
    "-X": (_S, -_S),
    "+Y": (_S, 1j * _S),
    "-Y": (_S, -1j * _S),
}


class AnnihilatedStateError(ValueError):
    """The error operator maps the state to zero."""


@dataclass(frozen=True)
class DualRailState:
    """V |01> + W |10>."""

    V: complex
    W: complex

    def __post_init__(self):
        if abs(abs(self.V) ** 2 + abs(self.W) ** 2 - 1) > 1e-10:
            raise ValueError("dual-rail amplitudes must satisfy |V|^2 + |W|^2 = 1")

    @classmethod
    def cardinal(cls, label):
        try:
            v, w = _CARDINAL_AMPLITUDES[label]
        except KeyError:
            raise ValueError(f"unknown cardinal state {label!r}; expected one of {CARDINAL_STATES}")
        return cls(complex(v), complex(w))

    def ket(self):
        return self.V * two_mode_ket(0, 1) + self.W * two_mode_ket(1, 0)


class ErrorKind(enum.Enum):
    IDENTITY = "I"
    LOSS_A = "a"
    LOSS_B = "b"
    GAIN_A = "a+"
    GAIN_B = "b+"
    DEPHASE_A = "n_a"
    DEPHASE_B = "n_b"
    NO_JUMP = "nojump"


@dataclass(frozen=True)
class ErrorChannel:
    kind: ErrorKind
    t: float = 0.0  # ms, NO_JUMP only

    def __post_init__(self):
        if self.kind is ErrorKind.NO_JUMP and self.t < 0:
            raise ValueError("no-jump duration must be non-negative")


def two_mode_ket(n_a, n_b, dim=DIM):
    return fock.tensor(fock.fock_ket(n_a, dim), fock.fock_ket(n_b, dim))


def codeword(which):
    """Normalized two-mode ket (length 9) of a cardinal state label."""
    return DualRailState.cardinal(which).ket()


def error_operator(channel, params=DEVICE, dim=DIM):
    """Matrix of the error-set element on the two-mode space."""
    a = fock.tensor(fock.annihilation(dim), fock.identity(dim))
    b = fock.tensor(fock.identity(dim), fock.annihilation(dim))
    na = a.conj().T @ a
    nb = b.conj().T @ b
    kind = channel.kind
    if kind is ErrorKind.IDENTITY:
        return np.eye(dim * dim, dtype=complex)
    if kind is ErrorKind.LOSS_A:
        return a
    if kind is ErrorKind.LOSS_B:
        return b
    if kind is ErrorKind.GAIN_A:
        return a.conj().T
    if kind is ErrorKind.GAIN_B:
        return b.conj().T
    if kind is ErrorKind.DEPHASE_A:
        return na
    if kind is ErrorKind.DEPHASE_B:
        return nb
    # diagonal in Fock basis
    rates = 0.5 * (params.kappa_a * np.diag(na).real + params.kappa_b * np.diag(nb).real)
    return np.diag(np.exp(-rates * channel.t)).astype(complex)


def apply_error(psi, channel, params=DEVICE):
    """Normalized error state E|psi> / ||E|psi>|| as a 9-component ket."""
    out = error_operator(channel, params) @ psi.ket()
    nrm = np.linalg.norm(out)
    if nrm < 1e-12:
        raise AnnihilatedStateError(f"{channel.kind.name} annihilates the state")
    return out / nrm


def logical_bloch(psi):
    """(X, Y, Z) of a code-space state."""
    vw = np.conj(psi.V) * psi.W
    return (2 * vw.real, 2 * vw.imag, abs(psi.V) ** 2 - abs(psi.W) ** 2)


def nojump_pauli(psi, delta_kappa, t):
    """Logical Pauli expectations after no-jump evolution for time ``t``.

    ``delta_kappa = kappa_a - kappa_b`` in 1/ms and ``t`` in ms; both may be
    arrays (broadcast together). Z is taken from the normalized state,
    ``(|V|^2 - |W|^2 e^{-dk t}) / (|V|^2 + |W|^2 e^{-dk t})``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    v2 = abs(psi.V) ** 2
    w2 = abs(psi.W) ** 2
    decay = np.exp(-delta_kappa * t)
    norm = v2 + w2 * decay
    half = np.exp(-0.5 * delta_kappa * t)
    wv = np.conj(psi.W) * psi.V
    vw = np.conj(psi.V) * psi.W
    x = ((wv + vw) * half / norm).real
    y = (1j * (wv - vw) * half / norm).real
    z = (v2 - w2 * decay) / norm
    return x, y, z


def nojump_state(psi, delta_kappa, t):
    """Code-space amplitudes of the normalized no-jump state."""
    w = psi.W * math.exp(-0.5 * delta_kappa * t)
    nrm = math.sqrt(abs(psi.V) ** 2 + abs(w) ** 2)
    return DualRailState(psi.V / nrm, w / nrm)


def code_projector(dim=DIM):
    """Projector onto span{|01>, |10>}."""
    k01 = two_mode_ket(0, 1, dim)
    k10 = two_mode_ket(1, 0, dim)
    return np.outer(k01, k01) + np.outer(k10, k10)


def excitation_number(dim=DIM):
    n = fock.number(dim)
    return fock.tensor(n, fock.identity(dim)) + fock.tensor(fock.identity(dim), n)
