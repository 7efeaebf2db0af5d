"""Simulated single-qubit Pauli classical shadows.

A :class:`ShadowSet` stores one row per shot: the measured basis letter per
qubit (``0, 1, 2`` for ``X, Y, Z``), the outcome bits, an optional ancilla
bit from the parity check and whether the shot survives postselection.
Snapshots are ``prod_q (I + 3 (-1)**b_q P_q) / 2``, which is the same
operator as ``3 U^dag |b><b| U - I`` written in Pauli form.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, TextIO

import numpy as np

from .densesim.circuit import Circuit, Gate, run_circuit, run_statevector
from .densesim.linalg import as_density_matrix, hermitian_eig, n_qubits_of
from .errors import DimensionError, NumericalConsistencyError
from .metrics import bootstrap
from .pauli import PauliSum

LETTERS = "XYZ"
MAX_SHADOW_QUBITS = 10
ENUMERATE_MAX_QUBITS = 4
DEFAULT_RANDOM_BASES = 81
DEFAULT_SHOTS = 1000
DEFAULT_RESAMPLES = 250
FORMAT_TAG = "# noisefloor shadow set v1"

_S = 1 / math.sqrt(2)
# rows map the +1 / -1 eigenvector of the letter onto |0> / |1>
_ROTATE = {
    0: np.array([[_S, _S], [_S, -_S]], dtype=complex),  # H
    1: np.array([[_S, -1j * _S], [_S, 1j * _S]], dtype=complex),  # H S^dag
    2: np.eye(2, dtype=complex),
}
_PAULI = {
    0: np.array([[0, 1], [1, 0]], dtype=complex),
    1: np.array([[0, -1j], [1j, 0]], dtype=complex),
    2: np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class MeasurementRecord:
    """One shot: ``basis`` and ``outcome`` are strings such as ``"XYZZ"``, ``"0110"``."""

    basis: str
    outcome: str
    ancilla: int | None = None
    accepted: bool = True


@dataclass
class ShadowSet:
    """Array-backed collection of measurement records.

    Attributes:
        n_qubits: data qubits (the ancilla is not counted).
        bases: ``(shots, n)`` int8 array of basis codes.
        outcomes: ``(shots, n)`` uint8 array of outcome bits.
        ancilla: ``(shots,)`` int8 array, ``-1`` when no parity check ran.
        accepted: ``(shots,)`` bool array.
        seed: master seed used for sampling.
        shots_per_basis: shots drawn per basis.
        expected_ancilla: ancilla bit of the ideal state, or ``None``.
    """

    n_qubits: int
    bases: np.ndarray
    outcomes: np.ndarray
    ancilla: np.ndarray
    accepted: np.ndarray
    seed: int | None
    shots_per_basis: int
    expected_ancilla: int | None = None

    def __post_init__(self):
        self.bases = np.asarray(self.bases, dtype=np.int8).reshape(-1, self.n_qubits)
        self.outcomes = np.asarray(self.outcomes, dtype=np.uint8).reshape(-1, self.n_qubits)
        self.ancilla = np.asarray(self.ancilla, dtype=np.int8).reshape(-1)
        self.accepted = np.asarray(self.accepted, dtype=bool).reshape(-1)
        m = len(self.bases)
        if not (len(self.outcomes) == len(self.ancilla) == len(self.accepted) == m):
            raise DimensionError("shadow set arrays have inconsistent lengths")

    def __len__(self) -> int:
        return len(self.bases)

    @property
    def n_accepted(self) -> int:
        return int(self.accepted.sum())

    @property
    def postselected_ratio(self) -> float:
        """Fraction of shots rejected by the parity check."""
        if len(self) == 0:
            return 0.0
        return (len(self) - self.n_accepted) / len(self)

    def records(self) -> Iterator[MeasurementRecord]:
        for i in range(len(self)):
            anc = int(self.ancilla[i])
            yield MeasurementRecord(
                "".join(LETTERS[b] for b in self.bases[i]),
                "".join(str(int(b)) for b in self.outcomes[i]),
                None if anc < 0 else anc,
                bool(self.accepted[i]),
            )

    def subset(self, index: np.ndarray) -> "ShadowSet":
        """Rows selected (or resampled) by ``index``."""
        index = np.asarray(index, dtype=int)
        return ShadowSet(
            self.n_qubits,
            self.bases[index],
            self.outcomes[index],
            self.ancilla[index],
            self.accepted[index],
            self.seed,
            self.shots_per_basis,
            self.expected_ancilla,
        )

    def accepted_only(self) -> "ShadowSet":
        return self.subset(np.flatnonzero(self.accepted))

    def ratio_by_basis(self) -> np.ndarray:
        """Postselected ratio of each distinct basis, in order of first appearance."""
        _, first, inverse = np.unique(self.bases, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        order = np.argsort(first)
        rejected = np.bincount(inverse, weights=~self.accepted, minlength=len(first))
        total = np.bincount(inverse, minlength=len(first))
        return (rejected / total)[order]


def all_bases(n_qubits: int) -> np.ndarray:
    """Every basis string over ``{X, Y, Z}**n`` in lexicographic order."""
    return np.array(list(itertools.product(range(3), repeat=n_qubits)), dtype=np.int8).reshape(-1, n_qubits)


def _choose_bases(n_qubits: int, n_bases: int | None, seed: int | None) -> np.ndarray:
    if n_bases is None:
        if n_qubits <= ENUMERATE_MAX_QUBITS:
            return all_bases(n_qubits)
        n_bases = DEFAULT_RANDOM_BASES
    if n_bases < 1:
        raise ValueError("n_bases must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence([_seed_entropy(seed), 0xBA5E]))
    return rng.integers(0, 3, size=(n_bases, n_qubits)).astype(np.int8)


def _seed_entropy(seed: int | None) -> int:
    return 0 if seed is None else int(seed) & ((1 << 64) - 1)


def _rotation(basis: np.ndarray, extra_qubits: int = 0) -> np.ndarray:
    u = np.ones((1, 1), dtype=complex)
    for b in basis:
        u = np.kron(u, _ROTATE[int(b)])
    if extra_qubits:
        u = np.kron(u, np.eye(1 << extra_qubits))
    return u


def basis_probabilities(rho: np.ndarray, basis: np.ndarray | str, extra_qubits: int = 0) -> np.ndarray:
    """Born probabilities of measuring the leading qubits in ``basis``.

    Trailing ``extra_qubits`` (an ancilla) are measured in ``Z``.
    """
    if isinstance(basis, str):
        basis = np.array([LETTERS.index(c) for c in basis], dtype=np.int8)
    u = _rotation(basis, extra_qubits)
    probs = np.real(np.sum((u @ rho) * u.conj(), axis=1))
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8)


def _sample(
    rho: np.ndarray,
    n_qubits: int,
    extra: int,
    n_bases: int | None,
    shots_per_basis: int,
    seed: int | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if shots_per_basis < 1:
        raise ValueError("shots_per_basis must be at least 1")
    bases = _choose_bases(n_qubits, n_bases, seed)
    all_b, all_o, all_a = [], [], []
    for idx, basis in enumerate(bases):
        # one generator per basis so results do not depend on evaluation order
        rng = np.random.default_rng(np.random.SeedSequence([_seed_entropy(seed), idx]))
        probs = basis_probabilities(rho, basis, extra)
        draws = rng.choice(len(probs), size=shots_per_basis, p=probs)
        all_b.append(np.broadcast_to(basis, (shots_per_basis, n_qubits)))
        all_o.append(_bits(draws >> extra, n_qubits))
        all_a.append(draws & ((1 << extra) - 1) if extra else np.full(shots_per_basis, -1))
    return np.concatenate(all_b), np.concatenate(all_o), np.concatenate(all_a)


def sample_shadows(
    rho: np.ndarray,
    n_bases: int | None = None,
    shots_per_basis: int = DEFAULT_SHOTS,
    seed: int | None = 0,
) -> ShadowSet:
    """Randomized single-qubit Pauli measurements of ``rho``.

    Args:
        rho: density matrix or state vector.
        n_bases: number of uniformly random bases.  ``None`` enumerates all
            ``3**n`` bases for ``n <= 4`` and draws 81 random ones otherwise.
        shots_per_basis: bitstrings sampled per basis.
        seed: master seed; basis ``k`` uses the stream ``(seed, k)``.
    """
    rho = as_density_matrix(rho)
    n = n_qubits_of(rho)
    if n > MAX_SHADOW_QUBITS:
        raise DimensionError(f"shadow sampling is capped at {MAX_SHADOW_QUBITS} qubits, got {n}")
    bases, outcomes, anc = _sample(rho, n, 0, n_bases, shots_per_basis, seed)
    return ShadowSet(n, bases, outcomes, anc, np.ones(len(bases), dtype=bool), seed, shots_per_basis)


def _parity_qubits(circuit: Circuit, parity_qubits) -> list[int]:
    qs = sorted(set(int(q) for q in parity_qubits))
    if not qs:
        raise ValueError("parity check needs at least one qubit")
    if qs[0] < 0 or qs[-1] >= circuit.n_qubits:
        raise DimensionError(f"parity qubits {qs} out of range for {circuit.n_qubits} qubits")
    return qs


def parity_check_circuit(circuit: Circuit, parity_qubits: list[int] | tuple[int, ...]) -> Circuit:
    """CNOTs from each parity qubit onto the ancilla ``n`` of an ``n + 1``-qubit register.

    Carries the noise specification of ``circuit`` so that per-gate models
    also corrupt the check itself.
    """
    n = circuit.n_qubits
    qs = _parity_qubits(circuit, parity_qubits)
    return Circuit(n + 1, tuple(Gate.cnot(q, n) for q in qs), circuit.noise)


def _checked_state(circuit: Circuit, parity_qubits) -> np.ndarray:
    """Noisy data state with a fresh ``|0>`` ancilla (least significant) after the parity check."""
    check = parity_check_circuit(circuit, parity_qubits)
    rho = run_circuit(circuit)
    anc = np.zeros((2, 2), dtype=complex)
    anc[0, 0] = 1.0
    return run_circuit(check, np.kron(rho, anc))


def ideal_parity(circuit: Circuit, parity_qubits: list[int] | tuple[int, ...], tol: float = 1e-8) -> int:
    """Parity bit of the noiseless output over ``parity_qubits``.

    Raises:
        NumericalConsistencyError: the ideal state is not a parity eigenstate.
    """
    psi = run_statevector(circuit)
    idx = np.arange(len(psi))
    mask = 0
    for q in parity_qubits:
        mask |= 1 << (circuit.n_qubits - 1 - q)
    par = np.zeros(len(psi), dtype=int)
    m = idx & mask
    while np.any(m):
        par ^= m & 1
        m >>= 1
    odd = float(np.sum(np.abs(psi[par == 1]) ** 2))
    if min(odd, 1 - odd) > tol:
        raise NumericalConsistencyError(f"ideal state has no definite parity (odd weight {odd:.3g})")
    return int(odd > 0.5)


def rejection_rate(circuit: Circuit, parity_qubits: list[int] | tuple[int, ...]) -> float:
    """Exact probability that the ancilla disagrees with the ideal parity."""
    expected = ideal_parity(circuit, parity_qubits)
    rho = _checked_state(circuit, parity_qubits)
    diag = np.real(np.diag(rho))
    wrong = diag[(np.arange(len(diag)) & 1) != expected].sum()
    return float(wrong / diag.sum())


def postselected_state(circuit: Circuit, parity_qubits: list[int] | tuple[int, ...]) -> np.ndarray:
    """Exact data-qubit state conditioned on the ancilla showing the ideal parity."""
    expected = ideal_parity(circuit, parity_qubits)
    rho = _checked_state(circuit, parity_qubits)
    kept = rho[expected::2, expected::2]
    return kept / np.trace(kept).real


def sample_with_postselection(
    circuit: Circuit,
    parity_qubits: list[int] | tuple[int, ...],
    n_bases: int | None = None,
    shots_per_basis: int = DEFAULT_SHOTS,
    seed: int | None = 0,
) -> ShadowSet:
    """Shadows of a noisy circuit with an ancilla parity check.

    The circuit (with its own noise) is extended by CNOTs from every parity
    qubit onto a fresh ancilla, which is read out in ``Z`` with every shot.
    A shot is accepted iff its ancilla bit equals the parity of the noiseless
    output state.
    """
    if not parity_qubits:
        raise ValueError("parity set is empty")
    if circuit.n_qubits > MAX_SHADOW_QUBITS:
        raise DimensionError(f"shadow sampling is capped at {MAX_SHADOW_QUBITS} qubits")
    expected = ideal_parity(circuit, parity_qubits)
    rho = _checked_state(circuit, parity_qubits)
    n = circuit.n_qubits
    bases, outcomes, anc = _sample(rho, n, 1, n_bases, shots_per_basis, seed)
    return ShadowSet(n, bases, outcomes, anc, anc == expected, seed, shots_per_basis, expected)


def snapshot(record: MeasurementRecord) -> np.ndarray:
    """Dense single-shot estimator ``prod_q (3 U^dag |b><b| U - I)``.

    Raises:
        ValueError: the record was rejected by postselection.
    """
    if not record.accepted:
        raise ValueError("cannot build a snapshot from a rejected record")
    if len(record.basis) != len(record.outcome):
        raise DimensionError("basis and outcome lengths differ")
    out = np.ones((1, 1), dtype=complex)
    for letter, bit in zip(record.basis, record.outcome):
        code = LETTERS.index(letter)
        sign = -1.0 if bit == "1" else 1.0
        out = np.kron(out, (np.eye(2) + 3 * sign * _PAULI[code]) / 2)
    return out


def single_shot_estimates(shadows: ShadowSet, obs: PauliSum) -> np.ndarray:
    """Per-shot estimate of ``obs`` for every accepted shot.

    A word contributes ``3**|support| * (-1)**(sum of its outcome bits)`` when
    every support qubit was measured in the matching letter, else 0.
    """
    if obs.n_qubits != shadows.n_qubits:
        raise DimensionError(f"{obs.n_qubits}-qubit observable on {shadows.n_qubits}-qubit shadows")
    acc = shadows.accepted
    bases = shadows.bases[acc]
    outcomes = shadows.outcomes[acc].astype(np.int64)
    est = np.zeros(len(bases))
    for term in obs.terms:
        word = term.word
        coeff = float(np.real(term.coefficient))
        support = list(word.support)
        if not support:
            est += coeff
            continue
        codes = np.array([LETTERS.index(word.letter(q)) for q in support], dtype=np.int8)
        match = np.all(bases[:, support] == codes, axis=1)
        sign = 1 - 2 * (outcomes[:, support].sum(axis=1) & 1)
        est += coeff * (3.0 ** len(support)) * match * sign
    return est


def _group_means(values: np.ndarray, k_groups: int) -> np.ndarray:
    if k_groups < 1:
        raise ValueError("k_groups must be at least 1")
    if len(values) == 0:
        raise ValueError("no accepted records to estimate from")
    if k_groups > len(values):
        raise ValueError(f"k_groups={k_groups} exceeds {len(values)} accepted records")
    size = len(values) // k_groups
    # round-robin assignment keeps every group spread over all bases
    used = values[: size * k_groups]
    return used.reshape(size, k_groups).mean(axis=0)


def estimate_observable(shadows: ShadowSet, obs: PauliSum, k_groups: int = 10) -> float:
    """Median-of-means estimate of ``<obs>`` from the accepted shots.

    Accepted shots are dealt round-robin into ``k_groups`` equal groups (the
    remainder is dropped); the result is the median of the group means.
    With ``k_groups=1`` this is the plain mean over all accepted shots.
    """
    return float(np.median(_group_means(single_shot_estimates(shadows, obs), k_groups)))


def estimate_observable_with_error(shadows: ShadowSet, obs: PauliSum, k_groups: int = 10) -> tuple[float, float]:
    """Median-of-means estimate and its standard error ``std(group means) / sqrt(k)``."""
    if k_groups < 2:
        raise ValueError("a standard error needs at least two groups")
    means = _group_means(single_shot_estimates(shadows, obs), k_groups)
    return float(np.median(means)), float(means.std(ddof=1) / math.sqrt(k_groups))


def project_to_density_matrix(m: np.ndarray) -> np.ndarray:
    """Nearest state by eigenvalue clipping: negatives set to 0, trace renormalized.

    Matrices that are already positive semidefinite come back unchanged
    up to Hermitian symmetrization and trace normalization.
    """
    m = (np.asarray(m, dtype=complex) + np.asarray(m, dtype=complex).conj().T) / 2
    w, v = hermitian_eig(m)
    if w[-1] >= 0:
        return m / np.trace(m).real
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise NumericalConsistencyError("shadow average has no positive spectrum")
    out = (v * w) @ v.conj().T
    return out / np.trace(out).real


def mean_snapshot(shadows: ShadowSet) -> np.ndarray:
    """Average snapshot over the accepted shots, without physicality projection."""
    acc = shadows.accepted
    if not np.any(acc):
        raise ValueError("no accepted records")
    codes = shadows.bases[acc].astype(np.int64) * 2 + shadows.outcomes[acc]
    rows, counts = np.unique(codes, axis=0, return_counts=True)
    dim = 1 << shadows.n_qubits
    total = np.zeros((dim, dim), dtype=complex)
    # single-qubit factors (I + 3 (-1)**b P) / 2 indexed by 2 * basis + bit
    factors = [(np.eye(2) + 3 * (1 - 2 * (c % 2)) * _PAULI[c // 2]) / 2 for c in range(6)]
    for row, count in zip(rows, counts):
        snap = np.ones((1, 1), dtype=complex)
        for c in row:
            snap = np.kron(snap, factors[int(c)])
        total += count * snap
    return total / counts.sum()


def shadow_state(shadows: ShadowSet) -> np.ndarray:
    """Mean snapshot of the accepted shots projected onto valid density matrices."""
    return project_to_density_matrix(mean_snapshot(shadows))


def bootstrap_shadows(
    shadows: ShadowSet,
    stat: Callable[[ShadowSet], float],
    resamples: int = DEFAULT_RESAMPLES,
    seed: int | None = 0,
) -> tuple[float, float]:
    """Bootstrap mean and standard deviation of ``stat`` over resampled accepted shots."""
    acc = shadows.accepted_only()
    if len(acc) == 0:
        raise ValueError("no accepted records")
    return bootstrap(lambda idx: stat(acc.subset(idx)), np.arange(len(acc)), resamples, seed)


# --- serialization ----------------------------------------------------------

def write_shadows(shadows: ShadowSet, stream: TextIO) -> None:
    """Write the line format: header keys, then ``basis outcome ancilla accepted``."""
    exp = "-" if shadows.expected_ancilla is None else str(shadows.expected_ancilla)
    seed = "-" if shadows.seed is None else str(shadows.seed)
    stream.write(f"{FORMAT_TAG}\n")
    stream.write(f"qubits: {shadows.n_qubits}\n")
    stream.write(f"seed: {seed}\n")
    stream.write(f"shots_per_basis: {shadows.shots_per_basis}\n")
    stream.write(f"expected_ancilla: {exp}\n")
    for rec in shadows.records():
        anc = "-" if rec.ancilla is None else str(rec.ancilla)
        stream.write(f"{rec.basis} {rec.outcome} {anc} {int(rec.accepted)}\n")


def format_shadows(shadows: ShadowSet) -> str:
    buf = io.StringIO()
    write_shadows(shadows, buf)
    return buf.getvalue()


def read_shadows(stream: TextIO | str) -> ShadowSet:
    """Inverse of :func:`write_shadows`; errors name the offending line."""
    lines = stream.splitlines() if isinstance(stream, str) else stream.read().splitlines()
    header: dict[str, str] = {}
    bases, outcomes, anc, acc = [], [], [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" in line:
            key, _, value = line.partition(":")
            header[key.strip()] = value.strip()
            continue
        parts = line.split()
        try:
            n = int(header["qubits"])
            if len(parts) != 4 or len(parts[0]) != n or len(parts[1]) != n:
                raise ValueError("expected 'basis outcome ancilla accepted'")
            bases.append([LETTERS.index(c) for c in parts[0]])
            if set(parts[1]) - {"0", "1"}:
                raise ValueError(f"bad outcome {parts[1]!r}")
            outcomes.append([int(c) for c in parts[1]])
            anc.append(-1 if parts[2] == "-" else int(parts[2]))
            if parts[3] not in ("0", "1"):
                raise ValueError(f"bad accepted flag {parts[3]!r}")
            acc.append(parts[3] == "1")
        except KeyError:
            raise ValueError(f"line {lineno}: record before 'qubits:' header") from None
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    for key in ("qubits", "seed", "shots_per_basis"):
        if key not in header:
            raise ValueError(f"missing header key {key!r}")
    n = int(header["qubits"])
    seed = None if header["seed"] == "-" else int(header["seed"])
    exp = header.get("expected_ancilla", "-")
    return ShadowSet(
        n,
        np.array(bases, dtype=np.int8).reshape(-1, n),
        np.array(outcomes, dtype=np.uint8).reshape(-1, n),
        np.array(anc, dtype=np.int8),
        np.array(acc, dtype=bool),
        seed,
        int(header["shots_per_basis"]),
        None if exp == "-" else int(exp),
    )
