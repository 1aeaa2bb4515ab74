"""Truncated Fock-space operators.

Operators are plain ``numpy`` complex arrays. Two-mode spaces use the
mode-A-major index convention ``index = n_A * dim_B + n_B``.
"""

import logging

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

log = logging.getLogger(__name__)

DEFAULT_DIM = 20
ALGEBRA_TOL = 1e-10
TRUNCATION_TOL = 1e-8


class InvalidDimensionError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Fock truncation must be an integer >= 2, got {dim!r}")
    return int(dim)


def annihilation(dim):
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation(dim):
    return annihilation(dim).conj().T


def number(dim):
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def identity(dim):
    return np.eye(_check_dim(dim), dtype=complex)


def parity(dim):
    """(-1)^n on the first ``dim`` Fock levels."""
    dim = _check_dim(dim)
    return np.diag((-1.0) ** np.arange(dim)).astype(complex)


def fock_ket(n, dim):
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"level {n} outside truncation {dim}")
    ket = np.zeros(dim, dtype=complex)
    ket[n] = 1.0
    return ket


def _displacement_expm(alpha, dim):
    a = annihilation(dim)
    generator = alpha * a.conj().T - np.conj(alpha) * a
    # generator is anti-Hermitian: exp(G) = V exp(-i w) V^H with H = iG
    w, v = np.linalg.eigh(1j * generator)
    return (v * np.exp(-1j * w)) @ v.conj().T


def _displacement_laguerre(alpha, dim):
    """Closed-form matrix elements <m|D(alpha)|n> of the untruncated operator."""
    x = abs(alpha) ** 2
    out = np.empty((dim, dim), dtype=complex)
    for m in range(dim):
        for n in range(dim):
            if m >= n:
                k = m - n
                pref = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1))) * alpha**k
                lag = eval_genlaguerre(n, k, x)
            else:
                k = n - m
                pref = np.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1))) * (-np.conj(alpha)) ** k
                lag = eval_genlaguerre(m, k, x)
            out[m, n] = pref * np.exp(-x / 2) * lag
    return out


def displacement(alpha, dim=DEFAULT_DIM, method="expm"):
    """Displacement operator exp(alpha a^dag - alpha^* a) truncated to ``dim`` levels.

    Parameters
    ----------
    alpha : complex
        Displacement amplitude. Keep ``|alpha|**2`` well below ``dim``.
    dim : int
        Fock truncation.
    method : {"expm", "laguerre"}
        ``"expm"`` exponentiates the truncated generator (exactly unitary);
        ``"laguerre"`` projects the infinite-dimensional operator using
        associated Laguerre polynomials and serves as a cross-check.
    """
    dim = _check_dim(dim)
    if method == "expm":
        return _displacement_expm(complex(alpha), dim)
    if method == "laguerre":
        return _displacement_laguerre(complex(alpha), dim)
    raise ValueError(f"unknown displacement method {method!r}")


def displaced_parity(alpha, dim=DEFAULT_DIM, method="expm"):
    """Displaced parity D(alpha) Pi D(alpha)^dag, whose expectation is (pi/2) W(alpha).

    This ordering makes the {|0>, |1>} block equal to
    ``fock_qubit_parity_block(alpha)`` (off-diagonal ``+2 alpha^*``).
    """
    d = displacement(alpha, dim, method)
    p = d @ parity(dim) @ d.conj().T
    return 0.5 * (p + p.conj().T)


def fock_qubit_parity_block(alpha):
    """Exact {|0>, |1>} block of the displaced parity operator."""
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    return np.exp(-2 * x) * np.array(
        [[1.0, 2 * np.conj(alpha)], [2 * alpha, 4 * x - 1.0]], dtype=complex
    )


def tensor(a, b):
    """Kronecker product with mode A as the major index."""
    return np.kron(a, b)


def is_hermitian(op, tol=1e-12):
    op = np.asarray(op)
    return op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, atol=tol, rtol=0)


def ket_to_dm(ket):
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def normalize(ket):
    ket = np.asarray(ket, dtype=complex)
    nrm = np.linalg.norm(ket)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return ket / nrm


def validate_density_matrix(rho, tol=ALGEBRA_TOL):
    """Return ``rho`` as a complex array after checking it is a valid state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, 1e-12):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real:.3g} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has negative eigenvalues")
    return rho


def expectation(rho, op):
    """Tr[rho op].

    For a Hermitian ``op`` the real part is returned as a float; an imaginary
    residue above ``ALGEBRA_TOL`` is logged. Non-Hermitian operators give a
    complex value.
    """
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape:
        raise DimensionMismatchError(f"state shape {rho.shape} does not match operator shape {op.shape}")
    value = np.einsum("ij,ji->", rho, op)
    if is_hermitian(op):
        if abs(value.imag) > ALGEBRA_TOL:
            log.warning("expectation of Hermitian operator has imaginary residue %.3g", value.imag)
        return float(value.real)
    return complex(value)


def embed(rho, dims, new_dims):
    """Zero-pad a (multi-mode) density matrix to larger per-mode truncations."""
    rho = np.asarray(rho, dtype=complex)
    dims = tuple(dims)
    new_dims = tuple(new_dims)
    if len(dims) != len(new_dims) or any(n < d for d, n in zip(dims, new_dims)):
        raise DimensionMismatchError(f"cannot embed dims {dims} into {new_dims}")
    if rho.shape != (np.prod(dims),) * 2:
        raise DimensionMismatchError(f"state shape {rho.shape} does not match dims {dims}")
    t = rho.reshape(dims + dims)
    out = np.zeros(new_dims + new_dims, dtype=complex)
    out[tuple(slice(0, d) for d in dims) * 2] = t
    n = int(np.prod(new_dims))
    return out.reshape(n, n)


def project(rho, dims, new_dims):
    """Keep only the lowest ``new_dims`` levels of each mode (no renormalization)."""
    rho = np.asarray(rho, dtype=complex)
    dims = tuple(dims)
    new_dims = tuple(new_dims)
    if rho.shape != (np.prod(dims),) * 2 or any(n > d for d, n in zip(dims, new_dims)):
        raise DimensionMismatchError(f"cannot project dims {dims} onto {new_dims}")
    t = rho.reshape(dims + dims)[tuple(slice(0, d) for d in new_dims) * 2]
    n = int(np.prod(new_dims))
    return t.reshape(n, n)
