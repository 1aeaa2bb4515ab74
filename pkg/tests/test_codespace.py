import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualrail.codespace import (
    CARDINAL_STATES,
    AnnihilatedStateError,
    DualRailState,
    ErrorChannel,
    ErrorKind,
    apply_error,
    code_projector,
    codeword,
    error_operator,
    excitation_number,
    logical_bloch,
    nojump_pauli,
    nojump_state,
    two_mode_ket,
)
from dualrail.params import DEVICE

S = 1 / math.sqrt(2)

K01, K10 = two_mode_ket(0, 1), two_mode_ket(1, 0)
# logical Paulis as 9x9 matrices on the code space
PX = np.outer(K01, K10) + np.outer(K10, K01)
PY = -1j * np.outer(K01, K10) + 1j * np.outer(K10, K01)
PZ = np.outer(K01, K01) - np.outer(K10, K10)


@st.composite
def dual_rail_states(draw):
    theta = draw(st.floats(0, math.pi))
    phi = draw(st.floats(0, 2 * math.pi))
    return DualRailState(complex(math.cos(theta / 2)), math.sin(theta / 2) * complex(math.cos(phi), math.sin(phi)))


def _bloch_from_ket(ket):
    return tuple(float(np.vdot(ket, p @ ket).real) for p in (PX, PY, PZ))


def test_codewords():
    np.testing.assert_array_equal(codeword("+Z"), K01)
    np.testing.assert_array_equal(codeword("-Z"), K10)
    np.testing.assert_allclose(codeword("+X"), (K01 + K10) * S)
    np.testing.assert_allclose(codeword("-Y"), (K01 - 1j * K10) * S)
    for label in CARDINAL_STATES:
        assert np.linalg.norm(codeword(label)) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        codeword("+W")


def test_state_normalization_check():
    with pytest.raises(ValueError):
        DualRailState(1.0, 1.0)


@pytest.mark.parametrize("label, expected", [
    ("+Z", (0, 0, 1)), ("-Z", (0, 0, -1)), ("+X", (1, 0, 0)),
    ("-X", (-1, 0, 0)), ("+Y", (0, 1, 0)), ("-Y", (0, -1, 0)),
])
def test_cardinal_bloch_vectors(label, expected):
    psi = DualRailState.cardinal(label)
    np.testing.assert_allclose(logical_bloch(psi), expected, atol=1e-12)
    np.testing.assert_allclose(_bloch_from_ket(psi.ket()), expected, atol=1e-12)


def test_y_sign_follows_closed_form():
    # i (W^* V - V^* W) at V = 1/sqrt2, W = i/sqrt2 is +1
    psi = DualRailState(S, 1j * S)
    v, w = psi.V, psi.W
    assert (1j * (np.conj(w) * v - np.conj(v) * w)).real == pytest.approx(1)
    assert logical_bloch(psi)[1] == pytest.approx(1)


def test_loss_gives_vacuum():
    psi = DualRailState(0.6, 0.8j)
    for kind in (ErrorKind.LOSS_A, ErrorKind.LOSS_B):
        out = apply_error(psi, ErrorChannel(kind))
        np.testing.assert_allclose(np.abs(out), np.abs(two_mode_ket(0, 0)), atol=1e-12)
    with pytest.raises(AnnihilatedStateError):
        apply_error(DualRailState.cardinal("+Z"), ErrorChannel(ErrorKind.LOSS_A))


def test_gain_examples():
    out = apply_error(DualRailState(1, 0), ErrorChannel(ErrorKind.GAIN_A))
    np.testing.assert_allclose(out, two_mode_ket(1, 1), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(dual_rail_states())
def test_gain_closed_forms(psi):
    v, w = psi.V, psi.W
    ga = apply_error(psi, ErrorChannel(ErrorKind.GAIN_A))
    expected = (v * two_mode_ket(1, 1) + math.sqrt(2) * w * two_mode_ket(2, 0)) / math.sqrt(1 + abs(w) ** 2)
    np.testing.assert_allclose(ga, expected, atol=1e-12)
    gb = apply_error(psi, ErrorChannel(ErrorKind.GAIN_B))
    expected = (math.sqrt(2) * v * two_mode_ket(0, 2) + w * two_mode_ket(1, 1)) / math.sqrt(1 + abs(v) ** 2)
    np.testing.assert_allclose(gb, expected, atol=1e-12)
    n = excitation_number()
    for out in (ga, gb):
        np.testing.assert_allclose(n @ out, 2 * out, atol=1e-12)


def test_dephasing_annihilates_empty_rail():
    with pytest.raises(AnnihilatedStateError):
        apply_error(DualRailState.cardinal("+Z"), ErrorChannel(ErrorKind.DEPHASE_A))
    out = apply_error(DualRailState.cardinal("+Z"), ErrorChannel(ErrorKind.DEPHASE_B))
    np.testing.assert_allclose(out, K01)


@settings(max_examples=100, deadline=None)
@given(dual_rail_states(), st.sampled_from(list(ErrorKind)), st.floats(0, 5))
def test_error_states_are_normalized(psi, kind, t):
    try:
        out = apply_error(psi, ErrorChannel(kind, t if kind is ErrorKind.NO_JUMP else 0.0))
    except AnnihilatedStateError:
        return
    assert np.linalg.norm(out) == pytest.approx(1, abs=1e-10)


def test_nojump_channel():
    psi = DualRailState.cardinal("+X")
    out = apply_error(psi, ErrorChannel(ErrorKind.NO_JUMP, 0.0))
    np.testing.assert_allclose(out, psi.ket(), atol=1e-15)
    with pytest.raises(ValueError):
        ErrorChannel(ErrorKind.NO_JUMP, -1.0)
    t = 0.7
    out = apply_error(psi, ErrorChannel(ErrorKind.NO_JUMP, t))
    ratio = out @ K10 / (out @ K01)
    assert ratio == pytest.approx(math.exp(-0.5 * DEVICE.delta_kappa * t))


def test_identity_channel():
    assert np.array_equal(error_operator(ErrorChannel(ErrorKind.IDENTITY)), np.eye(9))


def test_nojump_examples():
    psi = DualRailState.cardinal("+X")
    np.testing.assert_allclose(nojump_pauli(psi, 1.115, 0.0), (1, 0, 0), atol=1e-15)
    x, y, z = nojump_pauli(psi, 1.115, 100.0)
    assert z == pytest.approx(1, abs=1e-12) and abs(x) < 1e-12
    with pytest.raises(ValueError):
        nojump_pauli(psi, 1.0, -0.1)


@settings(max_examples=1000, deadline=None)
@given(dual_rail_states(), st.floats(-5, 5), st.floats(0, 3))
def test_nojump_against_closed_forms_and_state(psi, dk, t):
    v, w = psi.V, psi.W
    norm = abs(v) ** 2 + abs(w) ** 2 * math.exp(-dk * t)
    half = math.exp(-0.5 * dk * t)
    x_closed = ((np.conj(w) * v + np.conj(v) * w) * half / norm).real
    y_closed = (1j * (np.conj(w) * v - np.conj(v) * w) * half / norm).real
    x, y, z = nojump_pauli(psi, dk, t)
    assert abs(x - x_closed) <= 1e-12 and abs(y - y_closed) <= 1e-12
    # state-derived oracle: evolve the 9-vector and measure
    ket = psi.ket() * np.exp(-0.5 * dk * t * np.diag(error_operator(ErrorChannel(ErrorKind.DEPHASE_A))).real)
    ket /= np.linalg.norm(ket)
    np.testing.assert_allclose((x, y, z), _bloch_from_ket(ket), atol=1e-12)
    assert x * x + y * y + z * z == pytest.approx(1, abs=1e-10)
    np.testing.assert_allclose(logical_bloch(nojump_state(psi, dk, t)), (x, y, z), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(dual_rail_states(), st.floats(0, 3))
def test_nojump_symmetric_rails_constant(psi, t):
    np.testing.assert_allclose(nojump_pauli(psi, 0.0, t), logical_bloch(psi), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(dual_rail_states(), st.floats(0.01, 5))
def test_nojump_z_strictly_increasing(psi, dk):
    if abs(psi.W) < 1e-3 or abs(psi.V) < 1e-3:
        return
    t = np.linspace(0, min(1.0, 5 / dk), 50)
    z = nojump_pauli(psi, dk, t)[2]
    assert np.all(np.diff(z) > 0)


def test_code_projector():
    p = code_projector()
    np.testing.assert_allclose(p @ p, p)
    assert np.trace(p) == 2
