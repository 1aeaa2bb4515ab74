import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualrail import fock

E1 = math.exp(-1)  # 0.36787944...
S = 1 / math.sqrt(2)

small_alpha = st.builds(
    lambda r, th: r * complex(math.cos(th), math.sin(th)),
    st.floats(0, 1),
    st.floats(0, 2 * math.pi),
)


def test_annihilation_small():
    np.testing.assert_array_equal(fock.annihilation(2), [[0, 1], [0, 0]])
    a = fock.annihilation(3)
    assert a[0, 1] == 1 and a[1, 2] == pytest.approx(math.sqrt(2))
    assert np.count_nonzero(a) == 2


@pytest.mark.parametrize("dim", [1, 0, -3, 2.5])
def test_invalid_dimension(dim):
    with pytest.raises(fock.InvalidDimensionError):
        fock.annihilation(dim)


@pytest.mark.parametrize("dim", [2, 5, 20])
def test_commutator_away_from_edge(dim):
    a = fock.annihilation(dim)
    comm = a @ a.conj().T - a.conj().T @ a
    np.testing.assert_allclose(np.diag(comm)[: dim - 1], 1, atol=1e-12)


def test_parity():
    np.testing.assert_array_equal(np.diag(fock.parity(4)).real, [1, -1, 1, -1])
    p = fock.parity(7)
    np.testing.assert_array_equal(p @ p, np.eye(7))
    k1 = fock.fock_ket(1, 5)
    assert (k1.conj() @ fock.parity(5) @ k1).real == -1


def test_displacement_zero_is_identity():
    np.testing.assert_allclose(fock.displacement(0, 10), np.eye(10), atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(small_alpha)
def test_displacement_inverse_and_unitarity(alpha):
    d = fock.displacement(alpha, 20)
    np.testing.assert_allclose(d @ fock.displacement(-alpha, 20), np.eye(20), atol=1e-8)
    assert np.abs(d @ d.conj().T - np.eye(20)).max() <= 1e-8


@settings(max_examples=40, deadline=None)
@given(small_alpha)
def test_coherent_state_is_poissonian(alpha):
    # <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!)
    ket = fock.displacement(alpha, 30)[:, 0]
    n = np.arange(12)
    expected = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt([math.factorial(k) for k in n])
    np.testing.assert_allclose(ket[:12], expected, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(small_alpha)
def test_laguerre_matches_expm_on_low_levels(alpha):
    lag = fock.displacement(alpha, 30, method="laguerre")
    exp = fock.displacement(alpha, 30, method="expm")
    np.testing.assert_allclose(lag[:10, :10], exp[:10, :10], atol=1e-8)


def test_unknown_displacement_method():
    with pytest.raises(ValueError):
        fock.displacement(0.1, 5, method="pade")


def test_vacuum_displaced_parity():
    alpha = S
    d = fock.displacement(alpha, 20)
    v = fock.fock_ket(0, 20)
    # <0|D(-alpha) Pi D(alpha)|0> = <alpha|-alpha>
    assert (v @ d.conj().T @ fock.parity(20) @ d @ v).real == pytest.approx(E1, abs=1e-10)
    rho = fock.ket_to_dm(v)
    assert fock.expectation(rho, fock.displaced_parity(alpha, 20)) == pytest.approx(E1, abs=1e-10)


def test_displaced_parity_matrix_elements():
    alpha = 0.3 - 0.4j
    p = fock.displaced_parity(alpha, 25)
    x = abs(alpha) ** 2
    assert p[1, 1].real == pytest.approx(math.exp(-2 * x) * (4 * x - 1), abs=1e-10)
    assert p[0, 1] == pytest.approx(2 * np.conj(alpha) * math.exp(-2 * x), abs=1e-10)
    assert fock.displaced_parity(S, 20)[1, 1].real == pytest.approx(E1, abs=1e-10)
    np.testing.assert_allclose(fock.displaced_parity(0, 6), fock.parity(6), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(small_alpha)
def test_displaced_parity_hermitian_bounded(alpha):
    p = fock.displaced_parity(alpha, 20)
    assert fock.is_hermitian(p)
    w = np.linalg.eigvalsh(p)
    assert w.min() >= -1 - 1e-8 and w.max() <= 1 + 1e-8


def test_parity_block_examples():
    np.testing.assert_allclose(fock.fock_qubit_parity_block(0), [[1, 0], [0, -1]])
    np.testing.assert_allclose(
        fock.fock_qubit_parity_block(S), E1 * np.array([[1, math.sqrt(2)], [math.sqrt(2), 1]]), atol=1e-15
    )


@settings(max_examples=60, deadline=None)
@given(small_alpha)
def test_parity_block_matches_truncated(alpha):
    block = fock.displaced_parity(alpha, 25)[:2, :2]
    assert np.abs(block - fock.fock_qubit_parity_block(alpha)).max() <= 1e-8


def test_tensor_examples():
    np.testing.assert_array_equal(fock.tensor(np.eye(2), np.eye(3)), np.eye(6))
    np.testing.assert_array_equal(np.diag(fock.tensor(fock.parity(2), fock.parity(2))).real, [1, -1, -1, 1])
    # A-major: |n_A=1, n_B=0> sits at index dim_B
    k = fock.tensor(fock.fock_ket(1, 2), fock.fock_ket(0, 3))
    assert np.flatnonzero(k).tolist() == [3]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tensor_bilinearity(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    u = rng.normal(size=2) + 1j * rng.normal(size=2)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    np.testing.assert_allclose(fock.tensor(A, B) @ np.kron(u, v), np.kron(A @ u, B @ v), atol=1e-12)
    H = A + A.conj().T
    K = B + B.conj().T
    assert fock.is_hermitian(fock.tensor(H, K))


def test_expectation_examples():
    vac = fock.ket_to_dm(fock.fock_ket(0, 4))
    one = fock.ket_to_dm(fock.fock_ket(1, 4))
    assert fock.expectation(vac, fock.parity(4)) == 1.0
    assert fock.expectation(one, fock.number(4)) == pytest.approx(1.0)
    assert isinstance(fock.expectation(vac, fock.annihilation(4)), complex)
    with pytest.raises(fock.DimensionMismatchError):
        fock.expectation(vac, fock.parity(5))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), small_alpha)
def test_hermitian_expectation_is_real(seed, alpha):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    fock.validate_density_matrix(rho)
    value = np.trace(rho @ fock.displaced_parity(alpha, 8))
    assert abs(value.imag) <= 1e-10
    assert isinstance(fock.expectation(rho, fock.displaced_parity(alpha, 8)), float)


def test_validate_density_matrix_rejects():
    with pytest.raises(ValueError):
        fock.validate_density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        fock.validate_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        fock.validate_density_matrix(np.array([[0.5, 0.1], [0.2, 0.5]]))


def test_normalize():
    assert np.linalg.norm(fock.normalize([3, 4j])) == pytest.approx(1, abs=1e-10)
    with pytest.raises(ValueError):
        fock.normalize([0, 0])


def test_embed_project_roundtrip():
    rng = np.random.default_rng(3)
    g = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = g @ g.conj().T
    big = fock.embed(rho, (2, 3), (4, 5))
    assert big.shape == (20, 20)
    np.testing.assert_allclose(fock.project(big, (4, 5), (2, 3)), rho)
    assert np.trace(big) == pytest.approx(np.trace(rho))
    with pytest.raises(fock.DimensionMismatchError):
        fock.embed(rho, (2, 3), (1, 5))
