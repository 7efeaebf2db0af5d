"""Small circuit IR, Pauli-exponential compilation and density-matrix evolution."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from ..errors import CircuitParseError, DimensionError, PauliParseError
from ..pauli import PauliRotation, PauliWord, parse_word
from .linalg import as_density_matrix, basis_state, n_qubits_of


class NoiseModel(str, enum.Enum):
    """Where depolarizing noise is inserted by :func:`run_circuit`.

    ``GLOBAL_DEPOL_PER_EXP``: one global channel on the whole register after
    each Pauli exponential.  ``LOCAL_DEPOL_PER_GATE``: single-qubit channels on
    the qubits of every basis gate, exponentials always compiled.
    ``LOCAL_DEPOL_PER_EXP``: single-qubit channels on every qubit of the
    register after each Pauli exponential.
    """

    NONE = "none"
    GLOBAL_DEPOL_PER_EXP = "global_per_exp"
    LOCAL_DEPOL_PER_GATE = "local_per_gate"
    LOCAL_DEPOL_PER_EXP = "local_per_exp"


@dataclass(frozen=True)
class NoiseSpec:
    model: NoiseModel = NoiseModel.NONE
    strength: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "model", NoiseModel(self.model))
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"noise strength must lie in [0, 1], got {self.strength}")
        if self.model is NoiseModel.NONE:
            object.__setattr__(self, "strength", 0.0)

    @property
    def active(self) -> bool:
        return self.model is not NoiseModel.NONE and self.strength > 0


NOISELESS = NoiseSpec()

_SINGLE = {"h", "rx", "rz", "x"}


@dataclass(frozen=True)
class Gate:
    """One circuit operation.

    ``kind`` is one of ``h``, ``rx``, ``rz``, ``x``, ``cnot`` or ``exp``.
    ``qubits`` is ``(q,)`` for single-qubit gates, ``(control, target)`` for
    CNOT and the rotation's support for ``exp``.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    rotation: PauliRotation | None = None

    def __post_init__(self):
        if self.kind not in _SINGLE | {"cnot", "exp"}:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits) or any(q < 0 for q in self.qubits):
            raise ValueError(f"gate qubit indices must be distinct and non-negative: {self.qubits}")
        if self.kind in ("rx", "rz") and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")

    @classmethod
    def h(cls, q: int) -> "Gate":
        return cls("h", (q,))

    @classmethod
    def x(cls, q: int) -> "Gate":
        return cls("x", (q,))

    @classmethod
    def rx(cls, q: int, angle: float) -> "Gate":
        return cls("rx", (q,), float(angle))

    @classmethod
    def rz(cls, q: int, angle: float) -> "Gate":
        return cls("rz", (q,), float(angle))

    @classmethod
    def cnot(cls, control: int, target: int) -> "Gate":
        return cls("cnot", (control, target))

    @classmethod
    def pauli_exp(cls, rotation: PauliRotation) -> "Gate":
        return cls("exp", rotation.word.support, rotation.angle, rotation)

    def check_range(self, n_qubits: int) -> None:
        if self.kind == "exp" and self.rotation.n_qubits != n_qubits:
            raise DimensionError(
                f"{self.rotation.n_qubits}-qubit exponential in a {n_qubits}-qubit circuit"
            )
        if any(q >= n_qubits for q in self.qubits):
            raise DimensionError(f"gate {self.kind} on {self.qubits} exceeds {n_qubits} qubits")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[Gate, ...] = field(default_factory=tuple)
    noise: NoiseSpec = NOISELESS

    def __post_init__(self):
        ops = tuple(self.ops)
        for g in ops:
            g.check_range(self.n_qubits)
        object.__setattr__(self, "ops", ops)

    def with_noise(self, noise: NoiseSpec) -> "Circuit":
        return Circuit(self.n_qubits, self.ops, noise)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise DimensionError("cannot concatenate circuits on different registers")
        return Circuit(self.n_qubits, self.ops + other.ops, self.noise)

    def rotations(self) -> list[PauliRotation]:
        return [g.rotation for g in self.ops if g.kind == "exp"]


def product_formula(
    n_qubits: int,
    rotations: Sequence[PauliRotation],
    reference: str | None = None,
    noise: NoiseSpec = NOISELESS,
) -> Circuit:
    """X gates preparing ``reference`` followed by the rotations in application order."""
    ops: list[Gate] = []
    if reference is not None:
        if len(reference) != n_qubits:
            raise DimensionError(f"reference {reference!r} does not have {n_qubits} bits")
        ops.extend(Gate.x(q) for q, b in enumerate(reference) if b == "1")
    ops.extend(Gate.pauli_exp(r) for r in rotations)
    return Circuit(n_qubits, tuple(ops), noise)


def compile_pauli_exp(r: PauliRotation) -> list[Gate]:
    """Basis change, CNOT ladder onto the last active qubit, ``RZ(theta)``, mirror.

    X letters get ``H``, Y letters get ``RX(pi/2)`` before and ``RX(-pi/2)``
    after.  The result equals ``exp(-i theta/2 P)`` exactly.
    """
    support = r.word.support
    if not support:
        raise ValueError("cannot compile an identity rotation")
    pre: list[Gate] = []
    post: list[Gate] = []
    for q in support:
        letter = r.word.letter(q)
        if letter == "X":
            pre.append(Gate.h(q))
            post.append(Gate.h(q))
        elif letter == "Y":
            pre.append(Gate.rx(q, math.pi / 2))
            post.append(Gate.rx(q, -math.pi / 2))
    ladder = [Gate.cnot(a, b) for a, b in zip(support, support[1:])]
    return pre + ladder + [Gate.rz(support[-1], r.angle)] + ladder[::-1] + post


def compile_circuit(c: Circuit) -> Circuit:
    """Replace every ``exp`` macro-gate by its compiled basis-gate sequence."""
    ops: list[Gate] = []
    for g in c.ops:
        ops.extend(compile_pauli_exp(g.rotation) if g.kind == "exp" else [g])
    return Circuit(c.n_qubits, tuple(ops), c.noise)


# --- gate application --------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _single_matrix(g: Gate) -> np.ndarray:
    if g.kind == "h":
        return _H
    half = g.angle / 2
    if g.kind == "rx":
        return np.array([[math.cos(half), -1j * math.sin(half)], [-1j * math.sin(half), math.cos(half)]])
    if g.kind == "rz":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]])
    raise ValueError(g.kind)


def _apply_single(rho: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    t = np.moveaxis(np.tensordot(u.conj(), t, axes=([1], [n + q])), 0, n + q)
    return t.reshape(rho.shape)


def _apply_single_vec(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    return t.reshape(psi.shape)


def _permutation(g: Gate, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    if g.kind == "x":
        return idx ^ (1 << (n - 1 - g.qubits[0]))
    c, t = g.qubits
    cbit = (idx >> (n - 1 - c)) & 1
    return idx ^ (cbit << (n - 1 - t))


def _exp_conjugate(rho: np.ndarray, r: PauliRotation) -> np.ndarray:
    # U rho U^dag with U = cos I - i sin P, P applied as a signed permutation
    perm, phase = r.word.action()
    c, s = math.cos(r.angle / 2), math.sin(r.angle / 2)
    p_rho = phase[:, None] * rho[perm, :]
    rho_p = rho[:, perm] * phase[perm][None, :]
    p_rho_p = p_rho[:, perm] * phase[perm][None, :]
    return c * c * rho + 1j * c * s * (rho_p - p_rho) + s * s * p_rho_p


def apply_gate(rho: np.ndarray, g: Gate, compiled: bool = False) -> np.ndarray:
    """Return ``U rho U^dag`` for the gate's unitary ``U``.

    Pauli exponentials use the closed form ``cos(theta/2) I - i sin(theta/2) P``
    unless ``compiled`` is set, in which case their basis-gate expansion runs.
    A 1-D ``rho`` is treated as a state vector and evolved as ``U psi``.
    """
    n = n_qubits_of(rho)
    g.check_range(n)
    if rho.ndim == 1:
        return _apply_gate_vec(rho, g, compiled)
    if g.kind == "exp":
        if compiled:
            for sub in compile_pauli_exp(g.rotation):
                rho = apply_gate(rho, sub)
            return rho
        return _exp_conjugate(rho, g.rotation)
    if g.kind in ("x", "cnot"):
        perm = _permutation(g, n)
        return rho[np.ix_(perm, perm)]
    return _apply_single(rho, _single_matrix(g), g.qubits[0], n)


def _apply_gate_vec(psi: np.ndarray, g: Gate, compiled: bool) -> np.ndarray:
    n = n_qubits_of(psi)
    if g.kind == "exp":
        if compiled:
            for sub in compile_pauli_exp(g.rotation):
                psi = _apply_gate_vec(psi, sub, False)
            return psi
        perm, phase = g.rotation.word.action()
        half = g.rotation.angle / 2
        return math.cos(half) * psi - 1j * math.sin(half) * phase * psi[perm]
    if g.kind in ("x", "cnot"):
        return psi[_permutation(g, n)]
    return _apply_single_vec(psi, _single_matrix(g), g.qubits[0], n)


# --- noise -------------------------------------------------------------------

def depolarize(rho: np.ndarray, p: float, targets: Iterable[int] | None = None) -> np.ndarray:
    """Depolarizing channel.

    ``targets=None`` applies the global channel ``(1-p) rho + p I / 2**n``.
    Otherwise each listed qubit independently receives
    ``(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing strength must lie in [0, 1], got {p}")
    n = n_qubits_of(rho)
    if p == 0.0:
        return rho
    if targets is None:
        return (1 - p) * rho + p * np.eye(1 << n) / (1 << n)
    for q in targets:
        if not 0 <= q < n:
            raise DimensionError(f"qubit {q} out of range for {n} qubits")
        twirl = np.zeros_like(rho)
        for letter in "XYZ":
            perm, phase = PauliWord.from_letters({q: letter}, n).action()
            p_rho = phase[:, None] * rho[perm, :]
            twirl += p_rho[:, perm] * phase[perm][None, :]
        rho = (1 - p) * rho + (p / 3) * twirl
    return rho


def run_circuit(c: Circuit, initial: np.ndarray | None = None, compiled: bool = False) -> np.ndarray:
    """Evolve a density matrix through ``c`` with its noise specification.

    ``initial`` defaults to ``|0...0><0...0|``; a state vector is promoted to
    its projector.  ``LOCAL_DEPOL_PER_GATE`` always runs exponentials
    compiled so that noise follows every basis gate.
    """
    if initial is None:
        rho = as_density_matrix(basis_state("0" * c.n_qubits))
    else:
        rho = as_density_matrix(initial)
    if n_qubits_of(rho) != c.n_qubits:
        raise DimensionError(f"initial state has {n_qubits_of(rho)} qubits, circuit has {c.n_qubits}")
    noise = c.noise
    model = noise.model if noise.active else NoiseModel.NONE
    p = noise.strength
    all_qubits = range(c.n_qubits)
    for g in c.ops:
        if model is NoiseModel.LOCAL_DEPOL_PER_GATE:
            subs = compile_pauli_exp(g.rotation) if g.kind == "exp" else [g]
            for sub in subs:
                rho = apply_gate(rho, sub)
                rho = depolarize(rho, p, sub.qubits)
            continue
        rho = apply_gate(rho, g, compiled)
        if g.kind != "exp":
            continue
        if model is NoiseModel.GLOBAL_DEPOL_PER_EXP:
            rho = depolarize(rho, p)
        elif model is NoiseModel.LOCAL_DEPOL_PER_EXP:
            rho = depolarize(rho, p, all_qubits)
    return rho


def run_statevector(c: Circuit, initial: np.ndarray | None = None, compiled: bool = False) -> np.ndarray:
    """Noiseless evolution of a state vector (the circuit's noise is ignored)."""
    psi = basis_state("0" * c.n_qubits) if initial is None else np.asarray(initial, dtype=complex)
    if n_qubits_of(psi) != c.n_qubits or psi.ndim != 1:
        raise DimensionError("initial state vector does not match the circuit")
    for g in c.ops:
        psi = _apply_gate_vec(psi, g, compiled)
    return psi


def circuit_unitary(c: Circuit, compiled: bool = False) -> np.ndarray:
    """Dense unitary of the noiseless circuit (columns are evolved basis states)."""
    dim = 1 << c.n_qubits
    cols = [run_statevector(c, np.eye(dim, dtype=complex)[:, k], compiled) for k in range(dim)]
    return np.stack(cols, axis=1)


# --- text format -------------------------------------------------------------

def parse_circuit(stream: TextIO | str, noise: NoiseSpec = NOISELESS) -> Circuit:
    """Parse ``qubits: n`` followed by one operation per line.

    Operations: ``h q``, ``x q``, ``rx q angle``, ``rz q angle``,
    ``cnot c t`` and ``exp angle <word>`` with a dense or sparse word.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream.read().splitlines()
    n_qubits = None
    ops: list[Gate] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if n_qubits is None:
                key, _, value = line.partition(":")
                if key.strip().lower() != "qubits":
                    raise CircuitParseError("expected header 'qubits: n'")
                n_qubits = int(value)
                continue
            op, *args = line.split()
            op = op.lower()
            if op in ("h", "x") and len(args) == 1:
                ops.append(Gate(op, (int(args[0]),)))
            elif op in ("rx", "rz") and len(args) == 2:
                ops.append(Gate(op, (int(args[0]),), float(args[1])))
            elif op == "cnot" and len(args) == 2:
                ops.append(Gate.cnot(int(args[0]), int(args[1])))
            elif op == "exp" and len(args) >= 2:
                word = parse_word(" ".join(args[1:]), n_qubits)
                ops.append(Gate.pauli_exp(PauliRotation(float(args[0]), word)))
            else:
                raise CircuitParseError(f"cannot parse operation {line!r}")
            ops[-1].check_range(n_qubits)
        except (ValueError, PauliParseError, DimensionError) as exc:
            raise CircuitParseError(f"line {lineno}: {exc}") from None
    if n_qubits is None:
        raise CircuitParseError("missing 'qubits: n' header")
    return Circuit(n_qubits, tuple(ops), noise)


def format_circuit(c: Circuit) -> str:
    lines = [f"qubits: {c.n_qubits}"]
    for g in c.ops:
        if g.kind in ("h", "x"):
            lines.append(f"{g.kind} {g.qubits[0]}")
        elif g.kind in ("rx", "rz"):
            lines.append(f"{g.kind} {g.qubits[0]} {g.angle!r}")
        elif g.kind == "cnot":
            lines.append(f"cnot {g.qubits[0]} {g.qubits[1]}")
        else:
            lines.append(f"exp {g.rotation.angle!r} {g.rotation.word.sparse()}")
    return "\n".join(lines) + "\n"
