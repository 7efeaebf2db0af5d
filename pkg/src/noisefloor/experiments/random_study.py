"""Randomized Pauli product formulas on four qubits and their correlation study."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..densesim import Circuit, Gate, NoiseSpec, run_circuit, run_statevector
from ..errors import UndefinedCorrelationError
from ..metrics import DEFAULT_PURIFICATION_ORDER, metric_report, pearson
from ..pauli import PauliRotation, PauliWord
from ._parallel import ordered_map
from .records import RunRecord

DEFAULT_LEVELS = (0.0005, 0.001, 0.002, 0.005, 0.01, 0.02)
DEFAULT_MODEL = "local_per_exp"
CORRELATED_FIELDS = ("purity", "ideal_qmi", "ideal_se_m2", "abs_err_qmi", "abs_err_se")
CORNER_QMI = 0.5
CORNER_SE = 1.5


@dataclass(frozen=True)
class RandomCircuitSample:
    """One random product formula.

    ``reference_prep`` holds ``"X"`` or ``"H"`` per qubit, applied to ``|0>``
    before the rotations.
    """

    n_paulis: int
    rotations: tuple[PauliRotation, ...]
    reference_prep: tuple[str, ...]
    seed: int
    index: int

    @property
    def n_qubits(self) -> int:
        return len(self.reference_prep)

    def circuit(self, noise: NoiseSpec = NoiseSpec()) -> Circuit:
        ops = [Gate.x(q) if c == "X" else Gate.h(q) for q, c in enumerate(self.reference_prep) if c != "I"]
        ops += [Gate.pauli_exp(r) for r in self.rotations]
        return Circuit(self.n_qubits, tuple(ops), noise)


def sample_random_circuit(
    seed: int,
    index: int,
    n_qubits: int = 4,
    n_range: tuple[int, int] = (2, 30),
    support_sizes: Sequence[int] = (2, 4),
) -> RandomCircuitSample:
    """Draw sample ``index`` from the stream ``(seed, index)``.

    ``N`` is uniform on ``n_range`` (inclusive); each word acts with X, Y or
    Z on every qubit of a uniformly chosen support whose size is drawn
    uniformly from ``support_sizes``; angles are uniform on ``[0, 2 pi)``.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))
    n_paulis = int(rng.integers(n_range[0], n_range[1] + 1))
    rots = []
    for _ in range(n_paulis):
        k = int(support_sizes[rng.integers(len(support_sizes))])
        support = sorted(int(q) for q in rng.choice(n_qubits, size=k, replace=False))
        letters = {q: "XYZ"[int(rng.integers(3))] for q in support}
        rots.append(PauliRotation(float(rng.uniform(0.0, 2 * math.pi)), PauliWord.from_letters(letters, n_qubits)))
    prep = tuple("X" if b == 0 else "H" for b in rng.integers(2, size=n_qubits))
    return RandomCircuitSample(n_paulis, tuple(rots), prep, int(seed), int(index))


def _evaluate(job: tuple) -> list[dict[str, Any]]:
    sample, levels, model, order, qmi_form, se_entropy = job
    psi = run_statevector(sample.circuit())
    ideal = metric_report(psi, qmi_form=qmi_form, se_entropy=se_entropy)
    rows = []
    for p in levels:
        rho = run_circuit(sample.circuit(NoiseSpec(model, p)))
        rep = metric_report(rho, psi, order=order, qmi_form=qmi_form, se_entropy=se_entropy)
        rows.append(
            {
                "sample": sample.index,
                "n_paulis": sample.n_paulis,
                "noise": p,
                "ideal_se_m2": ideal.se_m2,
                "ideal_qmi": ideal.qmi,
                "purity": rep.purity,
                "se_m2": rep.se_m2,
                "qmi": rep.qmi,
                "overlap": rep.overlap,
                "coherent_mismatch": rep.coherent_mismatch,
                "abs_err_se": abs(rep.se_m2 - ideal.se_m2),
                "abs_err_qmi": abs(rep.qmi - ideal.qmi),
            }
        )
    return rows


@dataclass(frozen=True)
class StratifiedSubset:
    bin_count: int
    indices: tuple[int, ...]
    qmi_edges: tuple[float, ...]
    se_edges: tuple[float, ...]


def _edges(values: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, bins + 1)


def _bin(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    bins = len(edges) - 1
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, bins - 1)


def stratified_subsets(
    qmi: Sequence[float],
    se: Sequence[float],
    subset_size: int,
    n_subsets: int,
    seed: int | None = 0,
    bins: int = 10,
    mode: str = "joint",
) -> list[StratifiedSubset]:
    """Disjoint subsets drawn round-robin across QMI / SE bins.

    ``mode="joint"`` uses a ``bins x bins`` grid of equal-width cells over
    the observed ranges; ``mode="marginal"`` alternates between the ``bins``
    QMI bins and the ``bins`` SE bins.  Rows within each cell are visited in
    a seeded random order, and each subset takes one unused row from every
    nonempty cell per round until it is full.
    """
    q = np.asarray(qmi, dtype=float)
    s = np.asarray(se, dtype=float)
    if q.shape != s.shape or q.ndim != 1:
        raise ValueError("qmi and se must be 1-D sequences of equal length")
    if subset_size < 1 or n_subsets < 1:
        raise ValueError("subset_size and n_subsets must be positive")
    if len(q) < subset_size * n_subsets:
        raise ValueError(f"{len(q)} rows cannot fill {n_subsets} subsets of {subset_size}")
    qe, se_ = _edges(q, bins), _edges(s, bins)
    qb, sb = _bin(q, qe), _bin(s, se_)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(q))
    if mode == "joint":
        cells: dict[Any, list[int]] = {}
        for i in order:
            cells.setdefault((int(qb[i]), int(sb[i])), []).append(int(i))
    elif mode == "marginal":
        cells = {}
        for i in order:
            cells.setdefault(("q", int(qb[i])), []).append(int(i))
            cells.setdefault(("s", int(sb[i])), []).append(int(i))
    else:
        raise ValueError(f"unknown stratification mode {mode!r}")
    keys = sorted(cells, key=str)
    cursor = {k: 0 for k in keys}
    used = np.zeros(len(q), dtype=bool)
    out = []
    for _ in range(n_subsets):
        chosen: list[int] = []
        while len(chosen) < subset_size:
            progress = False
            for k in keys:
                pool = cells[k]
                while cursor[k] < len(pool) and used[pool[cursor[k]]]:
                    cursor[k] += 1
                if cursor[k] < len(pool):
                    i = pool[cursor[k]]
                    used[i] = True
                    chosen.append(i)
                    progress = True
                    if len(chosen) == subset_size:
                        break
            if not progress:
                raise ValueError("ran out of rows while filling subsets")
        out.append(StratifiedSubset(bins, tuple(chosen), tuple(qe.tolist()), tuple(se_.tolist())))
    return out


def random_circuit_study(
    count: int = 1000,
    noise_levels: Sequence[float] = DEFAULT_LEVELS,
    seed: int = 0,
    model: str = DEFAULT_MODEL,
    n_subsets: int = 5,
    subset_size: int | None = None,
    bins: int = 10,
    stratify: str = "joint",
    order: int = DEFAULT_PURIFICATION_ORDER,
    qmi_form: str = "watanabe",
    se_entropy: str = "renyi2",
    workers: int = 1,
    config: dict | None = None,
) -> RunRecord:
    """Sample ``count`` random circuits and correlate coherent mismatch with the metrics.

    For every noise level the mean and standard deviation of the Pearson
    correlation between coherent mismatch and each of
    :data:`CORRELATED_FIELDS` are taken over ``n_subsets`` disjoint stratified
    subsets of ``subset_size`` rows (default ``count // n_subsets``).
    """
    if count < 100:
        raise ValueError("the random study needs at least 100 circuits")
    levels = [float(p) for p in noise_levels]
    if not levels:
        raise ValueError("noise_levels is empty")
    size = subset_size if subset_size is not None else count // n_subsets
    samples = [sample_random_circuit(seed, i) for i in range(count)]
    jobs = [(s, levels, model, order, qmi_form, se_entropy) for s in samples]
    per_sample = ordered_map(_evaluate, jobs, workers)
    rows = [row for rs in per_sample for row in rs]

    ideal_qmi = np.array([rs[0]["ideal_qmi"] for rs in per_sample])
    ideal_se = np.array([rs[0]["ideal_se_m2"] for rs in per_sample])
    subsets = stratified_subsets(ideal_qmi, ideal_se, size, n_subsets, seed, bins, stratify)

    corr_rows = []
    for j, p in enumerate(levels):
        table = [rs[j] for rs in per_sample]
        c = np.array([r["coherent_mismatch"] for r in table])
        for name in CORRELATED_FIELDS:
            vals = np.array([r[name] for r in table])
            rs_ = []
            for sub in subsets:
                idx = list(sub.indices)
                try:
                    rs_.append(pearson(c[idx], vals[idx]))
                except UndefinedCorrelationError:
                    rs_.append(float("nan"))
            arr = np.array(rs_)
            ok = arr[np.isfinite(arr)]
            corr_rows.append(
                {
                    "noise": p,
                    "metric": name,
                    "mean_r": float(ok.mean()) if len(ok) else None,
                    "std_r": float(ok.std(ddof=1)) if len(ok) > 1 else None,
                    "n_subsets": int(len(ok)),
                }
            )
    scatter = [{"sample": i, "n_paulis": s.n_paulis, "ideal_qmi": float(q), "ideal_se_m2": float(e),
                "in_subset": int(any(i in set(sub.indices) for sub in subsets[:1]))}
               for i, (s, q, e) in enumerate(zip(samples, ideal_qmi, ideal_se))]
    corner = int(np.sum((ideal_qmi < CORNER_QMI) & (ideal_se > CORNER_SE)))
    stats = {
        "corner_count": corner,
        "corner_definition": f"ideal_qmi < {CORNER_QMI} and ideal_se_m2 > {CORNER_SE}",
        "correlations": corr_rows,
        "subset_size": size,
        "n_subsets": n_subsets,
        "n_paulis_histogram": np.bincount([s.n_paulis for s in samples], minlength=31).tolist(),
    }
    metadata = {
        "noise_model": model,
        "stratification": stratify,
        "qmi_form": qmi_form,
        "se_entropy": se_entropy,
        "purification_order": order,
        "note": "scatter marks membership in the first stratified subset",
    }
    cfg = config if config is not None else {
        "count": count, "noise_levels": levels, "seed": seed, "model": model, "n_subsets": n_subsets,
        "subset_size": size, "bins": bins, "stratify": stratify, "order": order, "qmi_form": qmi_form,
        "se_entropy": se_entropy,
    }
    return RunRecord("random", seed, cfg, rows, {"correlations": corr_rows, "scatter": scatter}, stats, metadata)


def correlation_lookup(record: RunRecord, noise: float, metric: str) -> float | None:
    """Mean subset correlation for one noise level and metric from a random-study record."""
    for row in record.stats["correlations"]:
        if math.isclose(row["noise"], noise) and row["metric"] == metric:
            return row["mean_r"]
    raise KeyError((noise, metric))
