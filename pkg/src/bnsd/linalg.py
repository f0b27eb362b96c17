"""Small dense complex linear algebra for 2, 4 and 8 dimensional operators.

Matrices are plain ``numpy`` complex arrays. The helpers here only add the
shape and Hermiticity contracts the rest of the package relies on.
"""

from functools import reduce

import numpy as np

from .errors import DimensionMismatch, InvalidState, NotHermitian

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product of two square matrices."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*factors) -> np.ndarray:
    return reduce(kron, factors)


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def hermiticity_error(a) -> float:
    m = as_matrix(a)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(a) <= tol


def hermitian_eigenvalues(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in ascending order.

    Raises:
        NotHermitian: if any entry of ``a - a^dagger`` exceeds ``tol``.
    """
    m = as_matrix(a)
    err = hermiticity_error(m)
    if err > tol:
        raise NotHermitian(f"max |A - A^dagger| = {err:.3e} exceeds {tol:.1e}")
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def expectation(op, rho) -> complex:
    """tr(op @ rho) for a unit-trace ``rho``."""
    op = as_matrix(op)
    rho = as_matrix(rho)
    if op.shape != rho.shape:
        raise DimensionMismatch(f"operator {op.shape} vs state {rho.shape}")
    tr = np.trace(rho)
    if abs(tr - 1) > TRACE_TOL:
        raise InvalidState(f"state trace {tr} is not 1")
    # tr(AB) = sum_ij A_ij B_ji without forming the product
    return complex(np.sum(op * rho.T))


def validate_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``rho`` as an array after checking it is a valid density matrix."""
    try:
        rho = as_matrix(rho)
        evals = hermitian_eigenvalues(rho, tol)
    except (DimensionMismatch, NotHermitian) as exc:
        raise InvalidState(str(exc)) from exc
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        raise InvalidState(f"trace {np.trace(rho)} is not 1")
    if evals[0] < -tol:
        raise InvalidState(f"negative eigenvalue {evals[0]:.3e}")
    return rho
