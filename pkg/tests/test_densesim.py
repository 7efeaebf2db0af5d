"""Dense simulator: linear algebra helpers, gates, compilation and noise channels."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import X2, Z2, dense_pauli, expm_hermitian, ghz, random_density, random_state
from noisefloor.densesim import (
    Circuit,
    Gate,
    NoiseModel,
    NoiseSpec,
    apply_gate,
    basis_state,
    check_density_matrix,
    circuit_unitary,
    compile_circuit,
    compile_pauli_exp,
    depolarize,
    format_circuit,
    hermitian_eig,
    n_qubits_of,
    parse_circuit,
    partial_trace,
    product_formula,
    projector,
    run_circuit,
    run_statevector,
)
from noisefloor.errors import CircuitParseError, DimensionError, NumericalConsistencyError
from noisefloor.pauli import PauliRotation, parse_word

H2 = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def entropy_bits(rho):
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-14]
    return float(-(w * np.log2(w)).sum())


def random_rotation(rng, n):
    letters = "I" * n
    while set(letters) == {"I"}:
        letters = "".join(rng.choice(list("IXYZ"), size=n))
    return PauliRotation(float(rng.uniform(-2 * math.pi, 2 * math.pi)), parse_word(letters))


def global_phase_equal(u, v, tol=1e-10):
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    phase = u[k] / v[k]
    return abs(abs(phase) - 1) < tol and np.allclose(u, phase * v, atol=tol)


class TestLinalg:
    def test_basis_state_ordering(self):
        psi = basis_state("1100")
        assert psi[0b1100] == 1
        with pytest.raises(ValueError):
            basis_state("012")

    @pytest.mark.parametrize("shape", [(3,), (4, 2), (6, 6), (1,)])
    def test_bad_dimensions(self, shape):
        with pytest.raises(DimensionError):
            n_qubits_of(np.zeros(shape))

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_diag(self, method):
        w, v = hermitian_eig(np.diag([0.3, 0.7]), method)
        assert np.allclose(w, [0.7, 0.3])
        assert np.allclose(np.abs(v), [[0, 1], [1, 0]])

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_bell_spectrum(self, method):
        w, _ = hermitian_eig(projector(ghz(2)), method)
        assert np.allclose(w, [1, 0, 0, 0], atol=1e-12)

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_random_64_reconstruction(self, rng, method):
        a = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
        m = (a + a.conj().T) / 2
        w, v = hermitian_eig(m, method)
        assert np.max(np.abs((v * w) @ v.conj().T - m)) < 1e-8
        assert np.all(np.diff(w) <= 0)

    def test_jacobi_agrees_with_lapack(self, rng):
        for n in (1, 2, 3, 4):
            rho = random_density(rng, n)
            w1, _ = hermitian_eig(rho, "jacobi")
            w2, _ = hermitian_eig(rho, "lapack")
            assert np.allclose(w1, w2, atol=1e-10)
            assert abs(w1.sum() - 1) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(NumericalConsistencyError):
            hermitian_eig(np.array([[0, 1], [0, 0]]))
        with pytest.raises(ValueError):
            hermitian_eig(np.eye(2), "qr")

    def test_partial_trace_product(self, rng):
        a, b = random_density(rng, 1), random_density(rng, 2)
        rho = np.kron(a, b)
        assert np.allclose(partial_trace(rho, [0]), a)
        assert np.allclose(partial_trace(rho, [1, 2]), b)

    def test_partial_trace_bell(self):
        assert np.allclose(partial_trace(projector(ghz(2)), [0]), np.eye(2) / 2)

    def test_partial_trace_ghz4(self):
        expected = np.zeros((8, 8))
        expected[0, 0] = expected[7, 7] = 0.5
        assert np.allclose(partial_trace(projector(ghz(4)), [0, 1, 2]), expected)

    def test_partial_trace_matches_explicit_sum(self, rng):
        rho = random_density(rng, 3)
        # trace out qubit 1 by summing <b|_1 rho |b>_1
        t = rho.reshape(2, 2, 2, 2, 2, 2)
        expected = np.einsum("ajbcjd->abcd", t).reshape(4, 4)
        assert np.allclose(partial_trace(rho, [0, 2]), expected)

    @given(st.integers(2, 5), st.integers(0, 2**31 - 1))
    def test_complementary_entropies_of_pure_state(self, n, seed):
        rng = np.random.default_rng(seed)
        rho = projector(random_state(rng, n))
        keep = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
        rest = [q for q in range(n) if q not in keep]
        assert abs(entropy_bits(partial_trace(rho, keep)) - entropy_bits(partial_trace(rho, rest))) < 1e-8

    def test_check_density_matrix(self):
        check_density_matrix(np.eye(4) / 4)
        with pytest.raises(NumericalConsistencyError):
            check_density_matrix(np.diag([1.2, -0.2]))
        with pytest.raises(NumericalConsistencyError):
            check_density_matrix(np.eye(2))


class TestGates:
    def test_x_flips(self):
        rho = apply_gate(projector(basis_state("0")), Gate.x(0))
        assert np.allclose(rho, projector(basis_state("1")))

    def test_y_half_turn(self):
        g = Gate.pauli_exp(PauliRotation.parse(math.pi, "Y"))
        psi = apply_gate(basis_state("0"), g)
        assert abs(abs(psi[1]) - 1) < 1e-12
        assert np.allclose(apply_gate(projector(basis_state("0")), g), projector(basis_state("1")))

    def test_single_qubit_matrices(self):
        c = Circuit(1, (Gate.h(0),))
        assert np.allclose(circuit_unitary(c), H2)
        c = Circuit(1, (Gate.rz(0, 0.3),))
        assert np.allclose(circuit_unitary(c), expm_hermitian(Z2, 0.15))
        c = Circuit(1, (Gate.rx(0, 0.3),))
        assert np.allclose(circuit_unitary(c), expm_hermitian(X2, 0.15))

    def test_cnot_control_first(self):
        c = Circuit(2, (Gate.cnot(0, 1),))
        expected = np.eye(4)[:, [0, 1, 3, 2]]
        assert np.allclose(circuit_unitary(c), expected)

    def test_gate_validation(self):
        with pytest.raises(ValueError):
            Gate("swap", (0, 1))
        with pytest.raises(ValueError):
            Gate.cnot(1, 1)
        with pytest.raises(ValueError):
            Gate("rz", (0,))
        with pytest.raises(DimensionError):
            Circuit(2, (Gate.h(2),))
        with pytest.raises(DimensionError):
            Circuit(3, (Gate.pauli_exp(PauliRotation.parse(0.1, "XX")),))


class TestCompilation:
    def test_primitive_gate_list(self):
        theta = 0.7
        ops = compile_pauli_exp(PauliRotation.parse(theta, "YXXX"))
        kinds = [(g.kind, g.qubits, g.angle) for g in ops]
        assert kinds[:4] == [("rx", (0,), math.pi / 2), ("h", (1,), None), ("h", (2,), None), ("h", (3,), None)]
        assert kinds[4:7] == [("cnot", (0, 1), None), ("cnot", (1, 2), None), ("cnot", (2, 3), None)]
        assert kinds[7] == ("rz", (3,), theta)
        assert kinds[8:11] == [("cnot", (2, 3), None), ("cnot", (1, 2), None), ("cnot", (0, 1), None)]
        assert kinds[11:] == [("rx", (0,), -math.pi / 2), ("h", (1,), None), ("h", (2,), None), ("h", (3,), None)]

    def test_single_z(self):
        ops = compile_pauli_exp(PauliRotation.parse(0.4, "Z"))
        assert [(g.kind, g.angle) for g in ops] == [("rz", 0.4)]

    def test_sparse_six_qubit_word(self):
        r = PauliRotation(0.9, parse_word("Y3 X5", 6))
        ops = compile_pauli_exp(r)
        assert {q for g in ops if g.kind != "cnot" for q in g.qubits} == {3, 5}
        assert sum(g.kind == "cnot" for g in ops) == 2
        u = circuit_unitary(Circuit(6, tuple(ops)))
        assert np.allclose(u, expm_hermitian(dense_pauli("IIIYIX"), 0.45))

    def test_compiled_matches_exact_200(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 7))
            r = random_rotation(rng, n)
            psi = random_state(rng, n)
            c = Circuit(n, (Gate.pauli_exp(r),))
            exact = run_statevector(c, psi)
            compiled = run_statevector(c, psi, compiled=True)
            assert np.max(np.abs(projector(exact) - projector(compiled))) < 1e-9

    def test_compiled_density_matrices_match(self, rng):
        for _ in range(10):
            r = random_rotation(rng, 4)
            rho = random_density(rng, 4)
            c = Circuit(4, (Gate.pauli_exp(r),))
            a = run_circuit(c, rho)
            b = run_circuit(c, rho, compiled=True)
            assert np.max(np.abs(a - b)) < 1e-10

    def test_compile_circuit_unitary(self, rng):
        c = product_formula(3, [random_rotation(rng, 3) for _ in range(4)], "101")
        assert global_phase_equal(circuit_unitary(c), circuit_unitary(compile_circuit(c)))

    def test_identity_rotation_rejected(self):
        with pytest.raises(ValueError):
            compile_pauli_exp(PauliRotation(0.1, parse_word("II")))


class TestNoise:
    def test_zero_strength_is_identity(self, rng):
        rho = random_density(rng, 2)
        assert np.array_equal(depolarize(rho, 0.0), rho)
        assert np.array_equal(depolarize(rho, 0.0, [0]), rho)

    @pytest.mark.parametrize("n", [1, 2, 4])
    @pytest.mark.parametrize("p", [0.002, 0.1, 0.5])
    def test_global_purity_closed_form(self, rng, n, p):
        rho = depolarize(projector(random_state(rng, n)), p)
        expected = (1 - p) ** 2 + (2 * p * (1 - p) + p * p) / 2**n
        assert abs(np.trace(rho @ rho).real - expected) < 1e-12

    def test_full_strength_is_maximally_mixed(self, rng):
        rho = depolarize(projector(random_state(rng, 3)), 1.0)
        assert np.allclose(rho, np.eye(8) / 8)

    def test_local_channel_matches_kraus_sum(self, rng):
        rho = random_density(rng, 2)
        p = 0.3
        out = depolarize(rho, p, [1])
        expected = (1 - p) * rho
        for letters in ("IX", "IY", "IZ"):
            m = dense_pauli(letters)
            expected = expected + p / 3 * m @ rho @ m
        assert np.allclose(out, expected)

    def test_local_on_all_qubits_at_three_quarters_is_maximally_mixed(self, rng):
        rho = depolarize(random_density(rng, 2), 0.75, [0, 1])
        assert np.allclose(rho, np.eye(4) / 4)

    @given(st.floats(0, 1), st.integers(1, 3), st.booleans(), st.integers(0, 2**31 - 1))
    def test_cptp(self, p, n, local, seed):
        rho = random_density(np.random.default_rng(seed), n)
        out = depolarize(rho, p, range(n) if local else None)
        assert abs(np.trace(out) - 1) < 1e-12
        assert np.linalg.eigvalsh(out)[0] >= -1e-10

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            depolarize(np.eye(2) / 2, 1.5)
        with pytest.raises(DimensionError):
            depolarize(np.eye(2) / 2, 0.1, [1])
        with pytest.raises(ValueError):
            NoiseSpec("global_per_exp", -0.1)
        with pytest.raises(ValueError):
            NoiseSpec("nonsense", 0.1)

    def test_none_model_ignores_strength(self):
        assert NoiseSpec("none", 0.3).strength == 0.0
        assert not NoiseSpec("global_per_exp", 0.0).active

    def test_global_per_exp_matches_manual(self, rng):
        rots = [random_rotation(rng, 3) for _ in range(3)]
        c = product_formula(3, rots, "110", NoiseSpec("global_per_exp", 0.05))
        rho = projector(basis_state("110"))
        for r in rots:
            u = r.matrix()
            rho = 0.95 * u @ rho @ u.conj().T + 0.05 * np.eye(8) / 8
        assert np.allclose(run_circuit(c), rho)

    def test_local_per_exp_matches_manual(self, rng):
        rots = [random_rotation(rng, 2) for _ in range(2)]
        c = product_formula(2, rots, None, NoiseSpec("local_per_exp", 0.1))
        rho = projector(basis_state("00"))
        for r in rots:
            u = r.matrix()
            rho = depolarize(depolarize(u @ rho @ u.conj().T, 0.1, [0]), 0.1, [1])
        assert np.allclose(run_circuit(c), rho)

    def test_local_per_gate_counts_compiled_gates(self):
        # exp(-i theta/2 ZZ) compiles to cnot, rz, cnot: three noisy layers
        r = PauliRotation.parse(0.0, "ZZ")
        c = product_formula(2, [r], None, NoiseSpec("local_per_gate", 0.1))
        cnot = np.eye(4)[:, [0, 1, 3, 2]]
        rho = projector(basis_state("00"))
        for u, qubits in ((cnot, (0, 1)), (np.eye(4), (1,)), (cnot, (0, 1))):
            rho = depolarize(u @ rho @ u.T, 0.1, qubits)
        assert np.allclose(run_circuit(c), rho)

    @pytest.mark.parametrize("model", [m.value for m in NoiseModel if m is not NoiseModel.NONE])
    def test_purity_non_increasing_in_p(self, model):
        rot = PauliRotation.parse(math.pi / 4, "YXXX")
        purities = []
        for p in (0.0, 0.001, 0.01, 0.05, 0.1, 0.3):
            rho = run_circuit(product_formula(4, [rot], "1100", NoiseSpec(model, p)))
            purities.append(np.trace(rho @ rho).real)
        assert all(b <= a + 1e-12 for a, b in zip(purities, purities[1:]))


class TestRunCircuit:
    def test_empty_circuit_returns_initial(self, rng):
        rho = random_density(rng, 2)
        assert np.allclose(run_circuit(Circuit(2), rho), rho)

    def test_primitive_at_zero_angle(self):
        c = product_formula(4, [PauliRotation.parse(0.0, "YXXX")], "1100")
        assert np.allclose(run_circuit(c), projector(basis_state("1100")))

    def test_primitive_purity_anchor(self):
        c = product_formula(4, [PauliRotation.parse(math.pi / 4, "YXXX")], "1100",
                            NoiseSpec("global_per_exp", 0.002))
        rho = run_circuit(c, compiled=True)
        assert np.trace(rho @ rho).real > 0.8

    def test_unitarity(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 5))
            c = product_formula(n, [random_rotation(rng, n) for _ in range(5)])
            rho = run_circuit(c, random_density(rng, n, rank=1))
            assert abs(np.trace(rho) - 1) < 1e-10
            assert abs(np.trace(rho @ rho).real - 1) < 1e-10
            assert abs(np.linalg.norm(run_statevector(c)) - 1) < 1e-10

    def test_statevector_matches_density(self, rng):
        c = product_formula(3, [random_rotation(rng, 3) for _ in range(4)], "011")
        psi = run_statevector(c)
        assert np.allclose(projector(psi), run_circuit(c))

    def test_initial_dimension_checked(self):
        with pytest.raises(DimensionError):
            run_circuit(Circuit(2), np.eye(8) / 8)
        with pytest.raises(DimensionError):
            run_statevector(Circuit(2), basis_state("000"))
        with pytest.raises(DimensionError):
            product_formula(3, [], "10")


class TestCircuitText:
    def test_round_trip(self, rng):
        ops = [Gate.h(0), Gate.x(2), Gate.rx(1, 0.25), Gate.rz(2, -1.5), Gate.cnot(0, 2),
               Gate.pauli_exp(PauliRotation.parse(0.401, "YXZ"))]
        c = Circuit(3, tuple(ops))
        assert parse_circuit(format_circuit(c)) == c

    def test_sparse_exp(self):
        c = parse_circuit("qubits: 6\n# table entry\nexp 0.2 Y0 Z1 X2 X3 X5\n")
        assert c.ops[0].rotation.word.letters == "YZXXIX"

    @pytest.mark.parametrize(
        "text",
        ["h 0\n", "qubits: 2\nh 2\n", "qubits: 2\nswap 0 1\n", "qubits: 2\nrz 0\n", "qubits: 2\nexp 0.1 XXX\n",
         "qubits: 2\ncnot 1 1\n", ""],
    )
    def test_errors(self, text):
        with pytest.raises(CircuitParseError):
            parse_circuit(text)
