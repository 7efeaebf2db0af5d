"""Study drivers: primitive sweep, random circuits, paths, dressing, Be depth, records."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_pauli, random_state
from noisefloor.densesim import product_formula, projector, run_statevector
from noisefloor.errors import DimensionError, UndefinedCorrelationError
from noisefloor.experiments import (
    BE_CIRCUITS,
    H3_TABLE_PATHS,
    PathStudySpec,
    RunRecord,
    be_circuits,
    be_path_experiment,
    correlation_lookup,
    correlation_matrix,
    correlation_rows,
    dressing_sequence,
    dressing_study,
    h3_paths,
    path_study,
    primitive_circuit,
    primitive_points,
    primitive_sweep,
    random_circuit_study,
    random_hermitian_sum,
    sample_random_circuit,
    shadows_demo,
    stratified_subsets,
    table_to_csv,
)
from noisefloor.experiments.records import read_csv
from noisefloor.metrics import metric_report, stabilizer_renyi_2, state_fidelity
from noisefloor.pauli import PauliRotation, PauliSum, dress_hamiltonian

# upper 0.1% point of chi-square with 28 degrees of freedom
CHI2_28_999 = 56.89


@pytest.fixture(scope="module")
def sweep():
    return primitive_sweep([0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2], mismatch_levels=(0.01, 0.1))


@pytest.fixture(scope="module")
def study():
    return random_circuit_study(count=100, noise_levels=(0.01,), seed=2, n_subsets=2)


class TestPrimitive:
    def test_endpoints(self, sweep):
        first, last = sweep.rows[0], sweep.rows[-1]
        assert first["ideal_se_m2"] == pytest.approx(0, abs=1e-12)
        assert first["ideal_qmi"] == pytest.approx(0, abs=1e-12)
        assert first["ideal_overlap_reference"] == pytest.approx(1)
        assert last["ideal_se_m2"] == pytest.approx(0, abs=1e-12)
        assert last["ideal_qmi"] == pytest.approx(max(r["ideal_qmi"] for r in sweep.rows))
        assert last["ideal_qmi"] > 1

    def test_magic_peaks_at_quarter_turn(self, sweep):
        assert sweep.stats["se_argmax_theta"] == pytest.approx(math.pi / 4)

    def test_normalized_curves(self, sweep):
        curve = sweep.curves["normalized_mismatch"]
        for p in (0.01, 0.1):
            vals = [r["normalized_mismatch"] for r in curve if r["noise"] == p]
            assert max(vals) == pytest.approx(1.0)
            assert min(vals) >= 0

    def test_noisy_state_is_mixed(self, sweep):
        assert all(r["purity"] < 1 for r in sweep.rows)
        assert all(r["coherent_mismatch"] >= -1e-12 for r in sweep.rows)

    def test_circuit(self):
        c = primitive_circuit(0.3)
        assert [g.kind for g in c.ops] == ["x", "x", "exp"]

    @pytest.mark.parametrize("angles", [[], [-0.1], [1.6]])
    def test_bad_angles(self, angles):
        with pytest.raises(ValueError):
            primitive_sweep(angles)

    def test_rounded_half_pi_accepted(self):
        assert len(primitive_sweep([1.5708], mismatch_levels=()).rows) == 1


class TestRandomSamples:
    def test_structure(self):
        for i in range(200):
            s = sample_random_circuit(3, i)
            assert 2 <= s.n_paulis <= 30
            assert len(s.rotations) == s.n_paulis
            assert all(len(r.word.support) in (2, 4) for r in s.rotations)
            assert all(c in "XH" for c in s.reference_prep)

    def test_deterministic(self):
        a, b = sample_random_circuit(5, 17), sample_random_circuit(5, 17)
        assert a == b
        assert a != sample_random_circuit(6, 17)

    def test_n_uniform(self):
        counts = np.bincount([sample_random_circuit(0, i).n_paulis for i in range(10_000)], minlength=31)[2:]
        expected = 10_000 / 29
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < CHI2_28_999

    def test_clifford_angles_give_zero_magic(self):
        s = sample_random_circuit(1, 0)
        rots = tuple(PauliRotation(math.pi / 2 * (k % 4), r.word) for k, r in enumerate(s.rotations))
        prep = tuple("X" for _ in s.reference_prep)
        clifford = type(s)(s.n_paulis, rots, prep, s.seed, s.index)
        assert stabilizer_renyi_2(projector(run_statevector(clifford.circuit()))) == pytest.approx(0, abs=1e-10)


class TestStratified:
    @given(st.integers(20, 300), st.integers(1, 5), st.integers(1, 10), st.integers(0, 1000))
    def test_disjoint_exact_sizes(self, n_rows, n_subsets, size, seed):
        if size * n_subsets > n_rows:
            size = n_rows // n_subsets
        rng = np.random.default_rng(seed)
        subsets = stratified_subsets(rng.random(n_rows), rng.random(n_rows), size, n_subsets, seed)
        flat = [i for s in subsets for i in s.indices]
        assert all(len(s.indices) == size for s in subsets)
        assert len(set(flat)) == len(flat)
        assert all(0 <= i < n_rows for i in flat)

    def test_partition(self):
        rng = np.random.default_rng(0)
        subsets = stratified_subsets(rng.random(10_000), rng.random(10_000), 1000, 10)
        assert len(subsets) == 10
        assert sorted(i for s in subsets for i in s.indices) == list(range(10_000))

    def test_cells_balanced(self):
        # uniform data: every subset should hit all 100 cells about equally
        rng = np.random.default_rng(2)
        q, s = rng.random(5000), rng.random(5000)
        subsets = stratified_subsets(q, s, 200, 5, seed=1)
        for sub in subsets:
            qb = np.clip((q[list(sub.indices)] * 10).astype(int), 0, 9)
            sb = np.clip((s[list(sub.indices)] * 10).astype(int), 0, 9)
            counts = np.bincount(qb * 10 + sb, minlength=100)
            assert counts.min() >= 1 and counts.max() <= 3

    def test_oversamples_rare_cells(self):
        # a small cluster far from the bulk is represented well above its share
        rng = np.random.default_rng(3)
        q = np.concatenate([rng.random(990) * 0.1, 0.9 + rng.random(10) * 0.1])
        s = rng.random(1000)
        sub = stratified_subsets(q, s, 100, 1)[0]
        assert sum(q[i] > 0.5 for i in sub.indices) >= 5

    def test_marginal_mode(self):
        rng = np.random.default_rng(4)
        subsets = stratified_subsets(rng.random(500), rng.random(500), 50, 3, mode="marginal")
        flat = [i for s in subsets for i in s.indices]
        assert len(set(flat)) == 150

    def test_errors(self):
        with pytest.raises(ValueError):
            stratified_subsets([0.1] * 10, [0.2] * 10, 5, 3)
        with pytest.raises(ValueError):
            stratified_subsets([0.1] * 10, [0.2] * 9, 1, 1)
        with pytest.raises(ValueError):
            stratified_subsets([0.1] * 10, [0.2] * 10, 1, 1, mode="bogus")


class TestRandomStudy:
    def test_rows(self, study):
        assert len(study.rows) == 100
        assert all(r["abs_err_se"] >= 0 and r["abs_err_qmi"] >= 0 for r in study.rows)

    def test_correlations(self, study):
        r = correlation_lookup(study, 0.01, "purity")
        assert -1 <= r <= 1
        with pytest.raises(KeyError):
            correlation_lookup(study, 0.5, "purity")

    def test_histogram(self, study):
        assert sum(study.stats["n_paulis_histogram"]) == 100

    def test_parallel_matches_serial(self, study):
        par = random_circuit_study(count=100, noise_levels=(0.01,), seed=2, n_subsets=2, workers=2)
        assert par.metrics_csv() == study.metrics_csv()
        assert par.to_json() == study.to_json()

    def test_too_few(self):
        with pytest.raises(ValueError):
            random_circuit_study(count=50)


class TestPathStudy:
    def test_table(self):
        assert len(H3_TABLE_PATHS) == 4 and all(len(p) == 7 for p in H3_TABLE_PATHS)
        paths = h3_paths()
        assert paths[0][0].angle == pytest.approx(2 * 0.243)
        assert paths[0][0].n_qubits == 6

    def test_zero_noise_target_mismatch(self):
        paths = h3_paths()
        target = run_statevector(product_formula(6, paths[0], "111000"))
        rec = path_study(PathStudySpec(paths[1:3], "111000", target_state=target, noise_per_g=0.0))
        for row in rec.rows:
            assert row["target_mismatch"] == pytest.approx(1 - row["ideal_overlap"], abs=1e-9)
            assert row["coherent_mismatch"] == pytest.approx(0, abs=1e-9)
            assert row["purity"] == pytest.approx(1)

    def test_steps_and_stats(self):
        rec = path_study(PathStudySpec(h3_paths()[:2], "111000", noise_per_g=0.001))
        assert len(rec.rows) == 16
        assert set(rec.stats["final_coherent_mismatch"]) == {"path0", "path1"}
        assert len(rec.stats["pairwise_final_overlap"]) == 1

    def test_energy_columns(self):
        h = PauliSum.from_pairs(6, [(0.5, "ZZIIII"), (-0.2, "XXIIII")])
        rec = path_study(PathStudySpec([h3_paths()[0][:2]], "111000", hamiltonian=h, noise_per_g=0.001,
                                       reference_energy=-0.7))
        assert {"energy", "purified_energy", "within_chemical_accuracy"} <= set(rec.rows[-1])

    def test_dimension_errors(self):
        with pytest.raises(DimensionError):
            PathStudySpec(h3_paths()[:1], "1110")
        with pytest.raises(DimensionError):
            PathStudySpec(h3_paths()[:1], "111000", target_state=np.ones(4))
        with pytest.raises(DimensionError):
            PathStudySpec(h3_paths()[:1], "111000", hamiltonian=PauliSum.from_pairs(2, [(1.0, "ZZ")]))
        with pytest.raises(ValueError):
            PathStudySpec([], "111000")


class TestDressing:
    def test_sequence_identity_when_fixed_is_original(self, rng):
        rots = [PauliRotation.parse(float(rng.uniform(0, 6)), w) for w in ("YXXX", "XYZI", "ZZXY")]
        h = random_hermitian_sum(4, 10, rng)
        dressed = dress_hamiltonian(h, dressing_sequence(rots, rots))
        assert np.allclose(dressed.matrix(), h.matrix(), atol=1e-10)

    def test_dressed_energy_matches_undressed(self):
        points = primitive_points((0.2, 0.8, 1.3), seed=3)
        fixed = [PauliRotation.parse(0.401, "YXXX")]
        rec = dressing_study(points, fixed, "1100", noise=0.0, model="none", shots_per_basis=50)
        assert rec.stats["max_identity_residual"] < 1e-10
        for row in rec.rows:
            assert row["dressed_noisy_energy"] == pytest.approx(row["exact_energy"], abs=1e-10)
            assert row["dressed_terms"] <= row["growth_bound"]

    def test_dense_conjugation(self, rng):
        rots = [PauliRotation.parse(0.7, "YXXX"), PauliRotation.parse(-0.3, "ZYIX")]
        h = random_hermitian_sum(4, 8, rng)
        d = np.eye(16, dtype=complex)
        for r in rots:
            d = d @ (math.cos(r.angle / 2) * np.eye(16) - 1j * math.sin(r.angle / 2) * dense_pauli(r.word.letters))
        expected = d.conj().T @ h.matrix() @ d
        assert np.allclose(dress_hamiltonian(h, rots).matrix(), expected, atol=1e-10)

    def test_random_sum(self, rng):
        h = random_hermitian_sum(2, 16, rng)
        assert len(h) == 16
        assert np.allclose(h.matrix(), h.matrix().conj().T)
        with pytest.raises(ValueError):
            random_hermitian_sum(1, 5, rng)

    def test_errors(self):
        with pytest.raises(ValueError):
            dressing_study([], [PauliRotation.parse(0.4, "YXXX")], "1100")
        with pytest.raises(DimensionError):
            dressing_study(primitive_points((0.2,)), [PauliRotation.parse(0.4, "YX")], "11")
        with pytest.raises(ValueError):
            primitive_points((0.2, 0.3), hamiltonians=[PauliSum.from_pairs(4, [(1.0, "ZZZZ")])])


class TestBe:
    def test_angles(self):
        assert [len(c) for c in BE_CIRCUITS] == [1, 2, 3]
        assert BE_CIRCUITS[2][0][0] == BE_CIRCUITS[2][2][0] == 0.200

    def test_noiseless_single_exponential(self):
        psi = run_statevector(be_circuits()[0])
        c, s = math.cos(0.401), math.sin(0.401)
        # exp(-i 0.401 YX) on |11>: cos |11> plus sin times -i YX|11> = -|00>
        expected = np.zeros(16, dtype=complex)
        expected[0b1111] = c
        expected[0b0011] = -s
        assert state_fidelity(expected, psi) == pytest.approx(1)
        # two-qubit part has <ZZ>=1, <ZI>=<IZ>=-cos(phi), <XX>=-<YY>=-sin(phi); the |11> tail is a stabilizer state
        phi = 0.802
        assert stabilizer_renyi_2(projector(psi)) == pytest.approx(-math.log2((1 + math.cos(phi) ** 4 + math.sin(phi) ** 4) / 2))

    def test_exact_trends(self):
        rec = be_path_experiment(shots_per_basis=50, resamples=0)
        ov = rec.stats["exact_overlap_by_depth"]
        pov = rec.stats["exact_purified_overlap_by_depth"]
        ratios = [r["exact_postselected_ratio"] for r in rec.rows]
        assert ov[0] > ov[1] > ov[2]
        assert pov[0] < pov[1] < pov[2]
        assert ratios[0] < ratios[1] < ratios[2]
        assert rec.rows[-1]["ideal_overlap"] == pytest.approx(1)


class TestShadowsDemo:
    def test_converges(self):
        rec, shadows = shadows_demo(shot_grid=(20, 2000), seed=1)
        assert [r["shots_per_basis"] for r in rec.rows] == [20, 2000]
        assert rec.rows[1]["trace_distance"] < rec.rows[0]["trace_distance"]
        assert shadows.shots_per_basis == 2000
        assert rec.rows[1]["postselected_ratio"] == pytest.approx(rec.rows[1]["exact_postselected_ratio"], abs=0.01)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            shadows_demo(shot_grid=())


class TestStats:
    def test_matrix(self):
        rows = [{"a": x, "b": 2 * x + 1, "c": -x, "d": (x % 3)} for x in range(10)]
        labels, m = correlation_matrix(rows, ["a", "b", "c", "d"])
        assert labels == ["a", "b", "c", "d"]
        assert m[0, 1] == pytest.approx(1) and m[0, 2] == pytest.approx(-1)
        assert np.allclose(m, m.T) and np.allclose(np.diag(m), 1)
        long = correlation_rows(labels, m)
        assert len(long) == 16 and long[1] == {"a": "a", "b": "b", "r": pytest.approx(1)}

    def test_errors(self):
        with pytest.raises(ValueError):
            correlation_matrix([{"a": 1, "b": 2}] * 2, ["a", "b"])
        with pytest.raises(UndefinedCorrelationError):
            correlation_matrix([{"a": x, "b": 1} for x in range(5)], ["a", "b"])


class TestRecords:
    def test_csv_dialect(self):
        text = table_to_csv([{"x": 1.5, "y": None, "z": "a,b", "w": True}])
        assert text.splitlines()[0] == "x,y,z,w"
        assert "\r" not in text
        assert text == 'x,y,z,w\n1.5,,"a,b",1\n'
        assert read_csv(text) == [{"x": "1.5", "y": "", "z": "a,b", "w": "1"}]

    def test_float_round_trip(self):
        v = 0.1 + 0.2
        assert float(read_csv(table_to_csv([{"v": v}]))[0]["v"]) == v

    def test_json_round_trip(self, tmp_path):
        rec = RunRecord("demo", 3, {"a": 1}, [{"x": np.float64(1.25)}], {"c": [{"y": 2}]}, {"s": np.int64(4)}, {})
        back = RunRecord.from_json(rec.to_json())
        assert back.to_json() == rec.to_json()
        rec.write(str(tmp_path))
        assert json.loads((tmp_path / "run.json").read_text())["stats"]["s"] == 4
        assert (tmp_path / "curves" / "c.csv").exists()
        assert (tmp_path / "metrics.csv").read_text() == rec.metrics_csv()


def test_metric_report_random_state(rng):
    psi = random_state(rng, 4)
    rep = metric_report(psi, psi)
    assert rep.purity == pytest.approx(1) and rep.overlap == pytest.approx(1)
