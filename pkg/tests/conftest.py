"""Shared fixtures, independent oracles and the acceptance summary hook."""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from noisefloor.densesim import Circuit, Gate

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# Hand-written single-qubit Paulis, kept apart from the package's own tables.
I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


def dense_pauli(letters):
    """Kronecker product of single-qubit Paulis, qubit 0 leftmost."""
    out = np.array([[1.0 + 0j]])
    for c in letters:
        out = np.kron(out, SINGLE[c])
    return out


def expm_hermitian(h, t):
    """``exp(-i t h)`` through the spectral decomposition of Hermitian ``h``."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def random_density(rng, n, rank=None):
    d = 1 << n
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def ghz(n):
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


def bell():
    return ghz(2)


def random_clifford_circuit(rng, n, depth=20):
    """Random circuit over H, RZ(pi/2) and CNOT."""
    ops = []
    for _ in range(depth):
        kind = rng.integers(3)
        if kind == 0 or (n == 1 and kind == 2):
            ops.append(Gate.h(int(rng.integers(n))))
        elif kind == 1:
            ops.append(Gate.rz(int(rng.integers(n)), math.pi / 2))
        else:
            a, b = rng.choice(n, size=2, replace=False)
            ops.append(Gate.cnot(int(a), int(b)))
    return Circuit(n, tuple(ops))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- acceptance summary ------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Append ``(criterion, passed, detail)``; lines are printed after the run."""

    def log(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
