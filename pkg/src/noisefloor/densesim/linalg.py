"""Hermitian eigendecomposition, partial trace and state helpers."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from ..errors import DimensionError, NumericalConsistencyError

HERMITIAN_TOL = 1e-8
JACOBI_THRESHOLD = 1e-12
JACOBI_MAX_SWEEPS = 100


def n_qubits_of(m: np.ndarray) -> int:
    """Qubit count of a ``2**n`` vector or square matrix."""
    dim = m.shape[0]
    if m.ndim not in (1, 2) or (m.ndim == 2 and m.shape[1] != dim):
        raise DimensionError(f"expected a vector or square matrix, got shape {m.shape}")
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def basis_state(bits: str | Iterable[int]) -> np.ndarray:
    """State vector for a bitstring; ``"1100"`` is qubit 0 in ``|1>``."""
    bits = [int(b) for b in bits]
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {b}")
        idx = (idx << 1) | b
    psi = np.zeros(1 << len(bits), dtype=complex)
    psi[idx] = 1.0
    return psi


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def as_density_matrix(state: np.ndarray) -> np.ndarray:
    """Promote a state vector to its projector; matrices pass through."""
    state = np.asarray(state, dtype=complex)
    n_qubits_of(state)
    return projector(state) if state.ndim == 1 else state


def check_density_matrix(rho: np.ndarray, tol: float = 1e-8) -> None:
    """Raise unless ``rho`` is Hermitian, unit-trace and positive within ``tol``."""
    n_qubits_of(rho)
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NumericalConsistencyError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise NumericalConsistencyError(f"density matrix trace is {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise NumericalConsistencyError("density matrix has a negative eigenvalue")


def _jacobi_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Each rotation first removes the phase of ``a[p, q]`` and then applies
    the real symmetric Jacobi rotation (Golub and Van Loan, sym.schur2).
    """
    a = np.array(m, dtype=complex)
    dim = a.shape[0]
    v = np.eye(dim, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off < JACOBI_THRESHOLD * scale:
            return np.real(np.diag(a)).copy(), v
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = a[p, q]
                b = abs(apq)
                if b < 1e-300:
                    continue
                phase = apq / b  # e^{i phi}
                tau = (a[q, q].real - a[p, p].real) / (2 * b)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                # R = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
                r = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = a[:, [p, q]] @ r
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = r.conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vc = v[:, [p, q]] @ r
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    raise NumericalConsistencyError(f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def hermitian_eig(m: np.ndarray, method: str = "lapack") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors (columns) of a Hermitian matrix.

    Args:
        m: square complex matrix, Hermitian within ``1e-8``.
        method: ``"lapack"`` (``numpy.linalg.eigh``) or ``"jacobi"`` for
            the pure-Python cyclic Jacobi solver.

    Raises:
        NumericalConsistencyError: ``m`` is not Hermitian, or Jacobi failed
            to converge.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise NumericalConsistencyError("matrix is not Hermitian")
    if method == "lapack":
        w, v = np.linalg.eigh((m + m.conj().T) / 2)
    elif method == "jacobi":
        w, v = _jacobi_eigh(m)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep`` (kept in ascending order)."""
    rho = np.asarray(rho)
    n = n_qubits_of(rho)
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise ValueError("partial trace needs at least one kept qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"kept qubits {keep} out of range for {n} qubits")
    if len(keep) == n:
        return rho.copy()
    t = rho.reshape((2,) * (2 * n))
    row = list(range(n))
    col = [n + q if q in keep else q for q in range(n)]
    out = [q for q in keep] + [n + q for q in keep]
    reduced = np.einsum(t, row + col, out)
    d = 1 << len(keep)
    return reduced.reshape(d, d)
