"""State metrics: purity, observables, stabilizer entropy, QMI, purification.

All entropies are in bits.  Density matrices are plain ``numpy`` arrays of
shape ``(2**n, 2**n)``; qubit 0 is the most significant index bit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .densesim.linalg import hermitian_eig, n_qubits_of, partial_trace
from .errors import DimensionError, NumericalConsistencyError, UndefinedCorrelationError
from .pauli import PauliSum, PauliWord

MAX_SE_QUBITS = 7
EIG_ZERO = 1e-12
EIG_NEGATIVE_TOL = 1e-9
DEFAULT_PURIFICATION_ORDER = 5


def purity(rho: np.ndarray) -> float:
    """``tr(rho**2)``, computed as the squared Frobenius norm."""
    return float(np.real(np.vdot(rho, rho)))


def pauli_expectation(rho: np.ndarray, word: PauliWord) -> complex:
    """``tr(P rho)`` by walking the index pairs ``(k ^ x, k)`` of ``rho``."""
    if n_qubits_of(rho) != word.n_qubits:
        raise DimensionError(f"{word.n_qubits}-qubit word on a {n_qubits_of(rho)}-qubit state")
    perm, phase = word.action()
    return complex(np.sum(phase * rho[perm, np.arange(len(perm))]))


def expectation(rho: np.ndarray, obs: PauliSum) -> float:
    """``tr(O rho)`` for a Hermitian Pauli sum, without building dense Paulis."""
    if n_qubits_of(rho) != obs.n_qubits:
        raise DimensionError(f"{obs.n_qubits}-qubit observable on a {n_qubits_of(rho)}-qubit state")
    total = 0j
    for t in obs.terms:
        total += t.coefficient * pauli_expectation(rho, t.word)
    return float(total.real)


def _sign_table(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    anded = idx[:, None] & idx[None, :]
    par = np.zeros_like(anded)
    for b in range(n):
        par ^= (anded >> b) & 1
    return (1 - 2 * par).astype(float)


def all_pauli_expectations(rho: np.ndarray) -> np.ndarray:
    """``tr(P rho)`` for all ``4**n`` words, indexed ``[x, z]`` by bit mask.

    For fixed ``x`` the values over ``z`` are a Walsh-Hadamard transform
    of the diagonal band ``rho[k, k ^ x]``, so the whole table costs
    ``O(8**n)`` instead of ``O(16**n)``.
    """
    n = n_qubits_of(rho)
    dim = 1 << n
    idx = np.arange(dim)
    band = rho[idx[None, :], idx[None, :] ^ idx[:, None]]  # band[x, k] = rho[k, k ^ x]
    signs = _sign_table(n)
    table = band @ signs
    # word (x, z) carries i**popcount(x & z) relative to X**x Z**z
    pc = np.zeros((dim, dim), dtype=int)
    anded = idx[:, None] & idx[None, :]
    for b in range(n):
        pc += (anded >> b) & 1
    phase = np.array([1, 1j, -1, -1j])[pc % 4]
    return phase * table


def eigenvalues(rho: np.ndarray, method: str = "lapack") -> np.ndarray:
    """Spectrum of a density matrix with round-off negatives clamped to zero.

    Raises :class:`NumericalConsistencyError` for eigenvalues below ``-1e-9``.
    """
    w, _ = hermitian_eig(rho, method=method)
    if w[-1] < -EIG_NEGATIVE_TOL:
        raise NumericalConsistencyError(f"density matrix eigenvalue {w[-1]:.3g} is negative")
    w = np.where(w < EIG_ZERO, 0.0, w)
    return w


def von_neumann_entropy(rho: np.ndarray, method: str = "lapack") -> float:
    w = eigenvalues(rho, method)
    w = w[w > 0]
    return float(max(-np.sum(w * np.log2(w)), 0.0))


def renyi2_entropy(rho: np.ndarray) -> float:
    return float(max(-math.log2(purity(rho)), 0.0))


def stabilizer_renyi_2(rho: np.ndarray, entropy: str = "renyi2") -> float:
    """Stabilizer 2-Renyi entropy in bits.

    ``-log2(sum_P tr(P rho)**4 / 2**n) - S(rho)`` summed over all ``4**n``
    Pauli words.  ``entropy`` selects the subtracted state entropy:
    ``"renyi2"`` (``-log2 tr rho**2``, the default) or ``"von_neumann"``.
    Both vanish on pure states.  Limited to ``n <= 7``.
    """
    n = n_qubits_of(rho)
    if n > MAX_SE_QUBITS:
        raise DimensionError(f"stabilizer entropy enumerates 4**n words; n={n} exceeds {MAX_SE_QUBITS}")
    vals = np.real(all_pauli_expectations(rho))
    total = float(np.sum(vals**4))
    magic = -math.log2(total / (1 << n))
    if entropy == "renyi2":
        s = -math.log2(purity(rho))
    elif entropy == "von_neumann":
        s = von_neumann_entropy(rho)
    else:
        raise ValueError(f"unknown entropy {entropy!r}")
    return magic - s


def multipartite_qmi(rho: np.ndarray, form: str = "watanabe") -> float:
    """Multipartite quantum mutual information over single-qubit parties, in bits.

    ``"watanabe"`` (default): total correlation ``sum_i S(rho_i) - S(rho)``.
    ``"kumar"``: ``sum_i S(rho without qubit i) - (n - 1) S(rho)``.
    Both equal ``S(A) + S(B) - S(AB)`` for two qubits and ``sum_i S(rho_i)``
    for pure states; they differ only on mixed states.
    """
    n = n_qubits_of(rho)
    if n < 2:
        raise DimensionError("mutual information needs at least two qubits")
    s_all = von_neumann_entropy(rho)
    if form == "kumar":
        parts = [von_neumann_entropy(partial_trace(rho, [q for q in range(n) if q != i])) for i in range(n)]
        return float(sum(parts) - (n - 1) * s_all)
    if form == "watanabe":
        parts = [von_neumann_entropy(partial_trace(rho, [i])) for i in range(n)]
        return float(sum(parts) - s_all)
    raise ValueError(f"unknown QMI form {form!r}")


def state_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """``<psi| rho |psi>`` for a pure target; ``rho`` may also be a vector."""
    psi = np.asarray(psi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if psi.ndim != 1 or rho.shape[0] != psi.shape[0]:
        raise DimensionError(f"target of length {psi.shape[0]} vs state of shape {rho.shape}")
    if rho.ndim == 1:
        return float(abs(np.vdot(psi, rho)) ** 2)
    return float(np.real(np.vdot(psi, rho @ psi)))


@dataclass(frozen=True)
class PurificationResult:
    order: int
    purified_state: np.ndarray
    residual_purity_gap: float


def purify(rho: np.ndarray, order: int = DEFAULT_PURIFICATION_ORDER) -> PurificationResult:
    """``rho**M / tr(rho**M)``; the trace is rescaled each step to avoid underflow."""
    if order < 1:
        raise ValueError("purification order must be at least 1")
    rho = np.asarray(rho, dtype=complex)
    n_qubits_of(rho)
    scale = np.trace(rho).real
    if scale < 1e-300:
        raise NumericalConsistencyError("state trace underflows")
    base = rho / scale
    out = base.copy()
    for _ in range(order - 1):
        out = out @ base
        tr = np.trace(out).real
        if tr < 1e-300:
            raise NumericalConsistencyError(f"tr(rho**M) underflows at order {order}")
        out /= tr
    out /= np.trace(out).real
    out = (out + out.conj().T) / 2
    return PurificationResult(order, out, 1.0 - purity(out))


def coherent_mismatch(ideal: np.ndarray, noisy: np.ndarray, order: int = DEFAULT_PURIFICATION_ORDER) -> float:
    """``1 - <ideal| purify(noisy, M) |ideal>``, the noise floor left after purification."""
    purified = purify(noisy, order).purified_state
    return 1.0 - state_fidelity(ideal, purified)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError("pearson needs two 1-D sequences of equal length")
    if len(x) < 3:
        raise ValueError("pearson needs at least three points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    scale = max(np.max(np.abs(x)), np.max(np.abs(y)), 1e-300)
    if sxx <= (1e-14 * scale) ** 2 * len(x) or syy <= (1e-14 * scale) ** 2 * len(y):
        raise UndefinedCorrelationError("correlation undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def bootstrap(
    stat: Callable[[Any], float],
    data: Sequence[Any] | np.ndarray,
    resamples: int = 250,
    seed: int | None = 0,
) -> tuple[float, float]:
    """Mean and sample standard deviation of ``stat`` over resampled datasets.

    Each resample draws ``len(data)`` items with replacement.  ``data`` may be
    a numpy array (indexed along axis 0) or any sequence.
    """
    if resamples < 2:
        raise ValueError("bootstrap needs at least two resamples")
    size = len(data)
    if size == 0:
        raise ValueError("bootstrap needs non-empty data")
    rng = np.random.default_rng(seed)
    values = np.empty(resamples)
    is_array = isinstance(data, np.ndarray)
    for i in range(resamples):
        idx = rng.integers(0, size, size)
        sample = data[idx] if is_array else [data[j] for j in idx]
        values[i] = stat(sample)
    return float(values.mean()), float(values.std(ddof=1))


@dataclass
class MetricReport:
    """Flat record of the metric suite for one state.

    ``overlap`` is the fidelity with a pure target; ``coherent_mismatch`` and
    ``energy`` are ``None`` when no target or Hamiltonian was supplied.
    """

    purity: float
    se_m2: float
    qmi: float
    overlap: float | None = None
    coherent_mismatch: float | None = None
    energy: float | None = None

    FIELDS = ("purity", "se_m2", "qmi", "overlap", "coherent_mismatch", "energy")

    def to_dict(self) -> dict[str, float | None]:
        return asdict(self)


def metric_report(
    rho: np.ndarray,
    target: np.ndarray | None = None,
    hamiltonian: PauliSum | None = None,
    order: int = DEFAULT_PURIFICATION_ORDER,
    qmi_form: str = "watanabe",
    se_entropy: str = "renyi2",
) -> MetricReport:
    """Compute the metric suite for ``rho``; ``rho`` may be a state vector."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    report = MetricReport(
        purity=purity(rho),
        se_m2=stabilizer_renyi_2(rho, entropy=se_entropy),
        qmi=multipartite_qmi(rho, form=qmi_form),
    )
    if target is not None:
        report.overlap = state_fidelity(target, rho)
        report.coherent_mismatch = coherent_mismatch(target, rho, order)
    if hamiltonian is not None:
        report.energy = expectation(rho, hamiltonian)
    return report
