"""Symplectic Pauli algebra with exact phase tracking.

A Pauli word on ``n`` qubits is stored as two integer bit masks ``x`` and
``z`` plus a global phase ``i**phase``.  Qubit ``q`` corresponds to bit
``n - 1 - q`` of each mask, which is the same bit it occupies in a
computational-basis index (qubit 0 is the most significant bit, so
``|1100>`` is index 12).  With that layout a word acts on basis states as

    P |k> = i**phase * i**popcount(x & z) * (-1)**popcount(z & k) |k ^ x>

Rotation convention: ``PauliRotation(theta, P)`` is the unitary
``exp(-i * theta / 2 * P)``, the same convention as ``RZ(theta)``.  A
factor written ``exp(-i * a * P)`` is therefore ``PauliRotation(2 * a, P)``.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .errors import DimensionError, NumericalConsistencyError, PauliParseError

__all__ = [
    "PauliWord",
    "PauliTerm",
    "PauliSum",
    "PauliRotation",
    "multiply",
    "commutes",
    "parse_word",
    "parse_pauli_sum",
    "format_pauli_sum",
    "conjugate_by_rotation",
    "dress_hamiltonian",
    "MERGE_TOL",
]

MERGE_TOL = 1e-12
# imaginary residue allowed on a dressed Hermitian sum before it is an error
HERMITIAN_ERROR_TOL = 1e-8

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_I_POW = (1, 1j, -1, -1j)

_SPARSE_TOKEN = re.compile(r"^([IXYZ])(\d+)$")
_PREFIX_RE = re.compile(r"^\s*([+-]?i?)(?=[\[IXYZ\s]|$)")


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliWord:
    """``i**phase`` times a tensor product of I, X, Y, Z on ``n_qubits``."""

    n_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError("a Pauli word needs at least one qubit")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise DimensionError("bit masks exceed the qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliWord":
        return cls(n_qubits)

    @classmethod
    def from_letters(cls, letters: dict[int, str] | str, n_qubits: int | None = None) -> "PauliWord":
        """Build from a dense string (``"YXXX"``) or a ``{qubit: letter}`` map."""
        if isinstance(letters, str):
            n_qubits = len(letters) if n_qubits is None else n_qubits
            letters = dict(enumerate(letters))
        if n_qubits is None:
            raise DimensionError("n_qubits is required for a sparse letter map")
        x = z = 0
        for q, letter in letters.items():
            xb, zb = _LETTER_BITS[letter]
            bit = n_qubits - 1 - q
            x |= xb << bit
            z |= zb << bit
        return cls(n_qubits, x, z)

    def letter(self, q: int) -> str:
        bit = self.n_qubits - 1 - q
        return _BITS_LETTER[((self.x >> bit) & 1, (self.z >> bit) & 1)]

    @property
    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n_qubits) if (mask >> (self.n_qubits - 1 - q)) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def unsigned(self) -> "PauliWord":
        """The same word with the phase dropped."""
        return PauliWord(self.n_qubits, self.x, self.z)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        return multiply(self, other)

    def commutes_with(self, other: "PauliWord") -> bool:
        return commutes(self, other)

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase] + self.letters

    def sparse(self) -> str:
        """Indexed form, e.g. ``"Y0 Z1 X2"``; the identity prints as ``"I"``."""
        body = " ".join(f"{self.letter(q)}{q}" for q in self.support) or "I"
        return _PHASE_PREFIX[self.phase] + body

    def matrix(self) -> np.ndarray:
        """Dense ``2**n`` matrix built from Kronecker products."""
        single = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        for letter in self.letters:
            out = np.kron(out, single[letter])
        return _I_POW[self.phase] * out

    def action(self) -> tuple[np.ndarray, np.ndarray]:
        """Signed-permutation form of the word.

        Returns ``(perm, phase)`` with ``(P @ v)[j] == phase[j] * v[perm[j]]``
        for every vector ``v``; ``perm[j] == j ^ x``.
        """
        idx = np.arange(1 << self.n_qubits)
        perm = idx ^ self.x
        parity = _parity_vector(self.n_qubits, self.z)[perm]
        base = _I_POW[(self.phase + _popcount(self.x & self.z)) % 4]
        return perm, base * (1 - 2 * parity).astype(complex)


def _parity_vector(n_qubits: int, mask: int) -> np.ndarray:
    """popcount(mask & k) mod 2 for every basis index k."""
    idx = np.arange(1 << n_qubits)
    v = idx & mask
    par = np.zeros_like(idx)
    while mask:
        par ^= v & 1
        v >>= 1
        mask >>= 1
    return par


def _check_same(a: PauliWord, b: PauliWord) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliWord, b: PauliWord) -> PauliWord:
    """Operator product ``a @ b`` with the phase tracked exactly.

    Each letter is ``i**(x z) X**x Z**z``; moving ``Z**z1`` past ``X**x2``
    costs ``(-1)**(z1 x2)``, and the result is rewritten in the same form.
    """
    _check_same(a, b)
    x = a.x ^ b.x
    z = a.z ^ b.z
    k = (
        a.phase
        + b.phase
        + _popcount(a.x & a.z)
        + _popcount(b.x & b.z)
        + 2 * _popcount(a.z & b.x)
        - _popcount(x & z)
    )
    return PauliWord(a.n_qubits, x, z, k % 4)


def commutes(a: PauliWord, b: PauliWord) -> bool:
    """True when the symplectic product of ``a`` and ``b`` is even."""
    _check_same(a, b)
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


def parse_word(text: str, n_qubits: int | None = None) -> PauliWord:
    """Parse a dense (``"YXXX"``) or sparse (``"Y0 Z1 X2 X3 X5"``) Pauli word.

    An optional phase prefix (``-``, ``i``, ``-i``) and surrounding brackets
    are accepted, so ``parse_word(str(w), w.n_qubits) == w``.  The bare
    string ``"I"`` is the identity on any qubit count.
    """
    m = _PREFIX_RE.match(text)
    prefix = m.group(1) if m else ""
    body = text.strip()[len(prefix):].strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1].strip()
    phase = _PREFIX_PHASE[prefix]

    if any(ch.isdigit() for ch in body):
        if n_qubits is None:
            raise PauliParseError("sparse Pauli words need an explicit qubit count")
        letters: dict[int, str] = {}
        for token in body.replace(",", " ").split():
            tm = _SPARSE_TOKEN.match(token)
            if tm is None:
                raise PauliParseError(f"bad Pauli token {token!r}")
            letter, q = tm.group(1), int(tm.group(2))
            if q >= n_qubits:
                raise PauliParseError(f"qubit index {q} out of range for {n_qubits} qubits")
            if q in letters:
                raise PauliParseError(f"duplicate qubit index {q}")
            if letter != "I":
                letters[q] = letter
        w = PauliWord.from_letters(letters, n_qubits)
        return PauliWord(n_qubits, w.x, w.z, phase)

    dense = body.replace(" ", "")
    if not dense:
        raise PauliParseError("empty Pauli word")
    bad = set(dense) - set(_LETTER_BITS)
    if bad:
        raise PauliParseError(f"unknown Pauli letter(s) {''.join(sorted(bad))!r}")
    if dense == "I" and n_qubits is not None:
        return PauliWord(n_qubits, phase=phase)
    if n_qubits is not None and len(dense) != n_qubits:
        raise PauliParseError(f"dense word {dense!r} has length {len(dense)}, expected {n_qubits}")
    w = PauliWord.from_letters(dense)
    return PauliWord(w.n_qubits, w.x, w.z, phase)


@dataclass(frozen=True)
class PauliTerm:
    """``coefficient * word``; the word's phase is folded into the coefficient."""

    coefficient: complex
    word: PauliWord

    def __post_init__(self):
        c = complex(self.coefficient)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("Pauli term coefficient must be finite")
        if self.word.phase:
            c *= _I_POW[self.word.phase]
            object.__setattr__(self, "word", self.word.unsigned())
        object.__setattr__(self, "coefficient", c)


@dataclass(frozen=True)
class PauliSum:
    """Weighted sum of Pauli words on a common register."""

    n_qubits: int
    terms: tuple[PauliTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            if t.word.n_qubits != self.n_qubits:
                raise DimensionError(
                    f"term on {t.word.n_qubits} qubits in a {self.n_qubits}-qubit sum"
                )
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_pairs(cls, n_qubits: int, pairs: Iterable[tuple[complex, PauliWord | str]]) -> "PauliSum":
        terms = []
        for coef, word in pairs:
            if isinstance(word, str):
                word = parse_word(word, n_qubits)
            terms.append(PauliTerm(coef, word))
        return cls(n_qubits, tuple(terms)).simplify()

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def simplify(self, tol: float = MERGE_TOL) -> "PauliSum":
        """Merge repeated words (first-occurrence order) and drop ``|c| < tol``."""
        merged: dict[tuple[int, int], complex] = {}
        for t in self.terms:
            merged[t.word.key] = merged.get(t.word.key, 0j) + t.coefficient
        terms = tuple(
            PauliTerm(c, PauliWord(self.n_qubits, *key))
            for key, c in merged.items()
            if abs(c) >= tol
        )
        return PauliSum(self.n_qubits, terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise DimensionError("cannot add Pauli sums on different registers")
        return PauliSum(self.n_qubits, self.terms + other.terms).simplify()

    def scale(self, factor: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, tuple(PauliTerm(factor * t.coefficient, t.word) for t in self.terms))

    def coefficient(self, word: PauliWord | str) -> complex:
        if isinstance(word, str):
            word = parse_word(word, self.n_qubits)
        total = 0j
        for t in self.terms:
            if t.word.key == word.key:
                total += t.coefficient
        return total * _I_POW[word.phase].conjugate()

    def is_hermitian(self, tol: float = MERGE_TOL) -> bool:
        return all(abs(t.coefficient.imag) <= tol for t in self.terms)

    def matrix(self) -> np.ndarray:
        out = np.zeros((1 << self.n_qubits,) * 2, dtype=complex)
        for t in self.terms:
            out += t.coefficient * t.word.matrix()
        return out

    def __str__(self) -> str:
        return format_pauli_sum(self)


@dataclass(frozen=True)
class PauliRotation:
    """The unitary ``exp(-i * angle / 2 * word)``."""

    angle: float
    word: PauliWord

    def __post_init__(self):
        if self.word.phase != 0:
            raise ValueError("rotation generators must carry no phase")
        if self.word.is_identity():
            raise ValueError("identity rotations are a global phase and are rejected")
        object.__setattr__(self, "angle", float(self.angle))

    @classmethod
    def parse(cls, angle: float, text: str, n_qubits: int | None = None) -> "PauliRotation":
        return cls(angle, parse_word(text, n_qubits))

    @property
    def n_qubits(self) -> int:
        return self.word.n_qubits

    def inverse(self) -> "PauliRotation":
        return PauliRotation(-self.angle, self.word)

    def matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        half = self.angle / 2
        return math.cos(half) * np.eye(dim) - 1j * math.sin(half) * self.word.matrix()


def conjugate_by_rotation(h: PauliSum, r: PauliRotation, sign: int = 1) -> PauliSum:
    """``R^dag H R`` for ``sign=+1`` and ``R H R^dag`` for ``sign=-1``.

    With ``R = exp(-i theta/2 P)``, words commuting with ``P`` pass through
    and anticommuting ones become ``cos(theta) Q + i sign sin(theta) P Q``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if h.n_qubits != r.n_qubits:
        raise DimensionError(f"{h.n_qubits}-qubit sum vs {r.n_qubits}-qubit rotation")
    c = math.cos(r.angle)
    s = sign * math.sin(r.angle)
    out: list[PauliTerm] = []
    for t in h.terms:
        if commutes(r.word, t.word):
            out.append(t)
            continue
        out.append(PauliTerm(c * t.coefficient, t.word))
        out.append(PauliTerm(1j * s * t.coefficient, multiply(r.word, t.word)))
    return PauliSum(h.n_qubits, tuple(out)).simplify()


def dress_hamiltonian(h: PauliSum, d_sequence: Sequence[PauliRotation]) -> PauliSum:
    """``D^dag H D`` for ``D = d_sequence[0] @ d_sequence[1] @ ... @ d_sequence[-1]``.

    The list is in operator-product order, so the rightmost factor acts
    first on a state.  Conjugation folds over the list from the left.  For
    Hermitian input the imaginary residue of each coefficient is removed;
    residues above ``MERGE_TOL`` warn and above ``HERMITIAN_ERROR_TOL`` raise.
    """
    hermitian = h.is_hermitian()
    out = h
    for r in d_sequence:
        out = conjugate_by_rotation(out, r, sign=1)
    if not hermitian:
        return out
    worst = max((abs(t.coefficient.imag) for t in out.terms), default=0.0)
    if worst > HERMITIAN_ERROR_TOL:
        raise NumericalConsistencyError(f"dressed Hamiltonian lost Hermiticity (|Im c| = {worst:.3g})")
    if worst > MERGE_TOL:
        warnings.warn(f"discarding imaginary coefficient residue {worst:.3g}", RuntimeWarning, stacklevel=2)
    return PauliSum(out.n_qubits, tuple(PauliTerm(t.coefficient.real, t.word) for t in out.terms)).simplify()


def parse_pauli_sum(stream: TextIO | str) -> PauliSum:
    """Read the line format ``<re> [<im>] <word>`` after a ``qubits: n`` header.

    ``#`` starts a comment; blank lines are skipped; repeated words merge.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream.read().splitlines()
    n_qubits = None
    pairs: list[tuple[complex, PauliWord]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n_qubits is None:
            key, _, value = line.partition(":")
            if key.strip().lower() != "qubits" or not value.strip():
                raise PauliParseError("expected header 'qubits: n'", lineno)
            try:
                n_qubits = int(value)
            except ValueError:
                raise PauliParseError(f"bad qubit count {value.strip()!r}", lineno) from None
            if n_qubits < 1:
                raise PauliParseError("qubit count must be positive", lineno)
            continue
        tokens = line.split()
        try:
            re_part = float(tokens[0])
        except ValueError:
            raise PauliParseError(f"expected a coefficient, got {tokens[0]!r}", lineno) from None
        im_part = 0.0
        rest = tokens[1:]
        if rest:
            try:
                im_part = float(rest[0])
                rest = rest[1:]
            except ValueError:
                pass
        if not rest:
            raise PauliParseError("missing Pauli word", lineno)
        try:
            word = parse_word(" ".join(rest), n_qubits)
        except PauliParseError as exc:
            raise PauliParseError(str(exc), lineno) from None
        pairs.append((complex(re_part, im_part), word))
    if n_qubits is None:
        raise PauliParseError("missing 'qubits: n' header")
    return PauliSum(n_qubits, tuple(PauliTerm(c, w) for c, w in pairs)).simplify()


def format_pauli_sum(h: PauliSum, sparse: bool = False) -> str:
    """Inverse of :func:`parse_pauli_sum`; floats are written with ``repr``."""
    lines = [f"qubits: {h.n_qubits}"]
    for t in h.terms:
        word = t.word.sparse() if sparse else str(t.word)
        c = t.coefficient
        if c.imag == 0:
            lines.append(f"{c.real!r} {word}")
        else:
            lines.append(f"{c.real!r} {c.imag!r} {word}")
    return "\n".join(lines) + "\n"
