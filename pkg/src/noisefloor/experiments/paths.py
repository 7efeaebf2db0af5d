"""Operator-ordering path studies: the H3 table paths and the Be circuits.

Table angles are coefficients of the exponent, ``exp(-i a P)``, so they map
to ``PauliRotation(2 a, P)``.  With this reading the noiseless path 0 and
path 2 states overlap at 0.99726, which sits inside the window allowed by the
published target overlaps (0.99997 and 0.99725); the literal reading
``PauliRotation(a, P)`` gives 0.99995, which does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..densesim import Circuit, NoiseSpec, product_formula, run_circuit, run_statevector
from ..errors import DimensionError
from ..metrics import (
    DEFAULT_PURIFICATION_ORDER,
    coherent_mismatch,
    expectation,
    metric_report,
    purify,
    state_fidelity,
)
from ..pauli import PauliRotation, PauliSum, parse_word
from ..shadows import (
    DEFAULT_RESAMPLES,
    bootstrap_shadows,
    postselected_state,
    rejection_rate,
    sample_with_postselection,
    shadow_state,
)
from .records import CHEMICAL_ACCURACY, RunRecord

TABLE_ANGLE_SCALE = 2.0
H3_REFERENCE = "111000"
H3_QUBITS = 6

# (exponent coefficient, word) in application order, verbatim from the table
H3_TABLE_PATHS: tuple[tuple[tuple[float, str], ...], ...] = (
    (
        (0.243, "Y0 Z1 X2 X3 X5"),
        (0.197, "Y1 X2 X3 X4"),
        (-0.0965, "Y0 X2 Z3"),
        (0.183, "Y3 X5"),
        (-0.0965, "Y0 X2 Z3"),
        (0.197, "Y1 X2 X3 X4"),
        (0.243, "Y0 Z1 X2 X3 X5"),
    ),
    (
        (0.0913, "Y3 X5"),
        (0.243, "Y0 Z1 X2 X3 X5"),
        (0.197, "Y1 X2 X3 X4"),
        (-0.193, "Y0 X2 Z3"),
        (0.197, "Y1 X2 X3 X4"),
        (0.243, "Y0 Z1 X2 X3 X5"),
        (0.0913, "Y3 X5"),
    ),
    (
        (-0.0965, "Y0 X2 Z3"),
        (0.0913, "Y3 X5"),
        (0.243, "Y0 Z1 X2 X3 X5"),
        (0.394, "Y1 X2 X3 X4"),
        (0.243, "Y0 Z1 X2 X3 X5"),
        (0.0913, "Y3 X5"),
        (-0.0965, "Y0 X2 Z3"),
    ),
    (
        (0.197, "Y1 X2 X3 X4"),
        (-0.0965, "Y0 X2 Z3"),
        (0.0913, "Y3 X5"),
        (0.486, "Y0 Z1 X2 X3 X5"),
        (0.0913, "Y3 X5"),
        (-0.0965, "Y0 X2 Z3"),
        (0.197, "Y1 X2 X3 X4"),
    ),
)

# Be circuits in application order (rightmost exponential first)
BE_REFERENCE = "1111"
BE_CIRCUITS: tuple[tuple[tuple[float, str], ...], ...] = (
    ((0.401, "Y0 X1"),),
    ((0.334, "YXXX"), (0.334, "YZXZ")),
    ((0.200, "YZXZ"), (0.400, "XYXX"), (0.200, "YZXZ")),
)
BE_PARITY_QUBITS = (0, 1, 2, 3)


def rotations_from_table(
    entries: Sequence[tuple[float, str]], n_qubits: int, scale: float = TABLE_ANGLE_SCALE
) -> list[PauliRotation]:
    return [PauliRotation(scale * a, parse_word(w, n_qubits)) for a, w in entries]


def h3_paths(scale: float = TABLE_ANGLE_SCALE) -> list[list[PauliRotation]]:
    return [rotations_from_table(p, H3_QUBITS, scale) for p in H3_TABLE_PATHS]


@dataclass
class PathStudySpec:
    """Inputs of :func:`path_study`.

    Attributes:
        paths: rotation sequences in application order.
        reference: computational-basis bitstring prepared with X gates.
        target_state: optional target vector; defaults to each path's own
            noiseless final state.
        hamiltonian: optional Pauli sum for energies.
        noise_per_g: depolarizing strength inserted after each exponential.
        model: noise placement, see :class:`~noisefloor.densesim.NoiseModel`.
        labels: names used in the output tables.
    """

    paths: list[list[PauliRotation]]
    reference: str = H3_REFERENCE
    target_state: np.ndarray | None = None
    hamiltonian: PauliSum | None = None
    noise_per_g: float = 0.0005
    model: str = "local_per_exp"
    labels: list[str] = field(default_factory=list)
    reference_energy: float | None = None

    def __post_init__(self):
        if not self.paths:
            raise ValueError("path study needs at least one path")
        if not 0.0 <= self.noise_per_g <= 1.0:
            raise ValueError("noise_per_g must lie in [0, 1]")
        n = len(self.reference)
        for path in self.paths:
            for r in path:
                if r.n_qubits != n:
                    raise DimensionError(f"rotation on {r.n_qubits} qubits, reference has {n}")
        if self.target_state is not None and len(self.target_state) != 1 << n:
            raise DimensionError(f"target state has length {len(self.target_state)}, expected {1 << n}")
        if self.hamiltonian is not None and self.hamiltonian.n_qubits != n:
            raise DimensionError(f"Hamiltonian acts on {self.hamiltonian.n_qubits} qubits, expected {n}")
        if not self.labels:
            self.labels = [f"path{i}" for i in range(len(self.paths))]


def path_study(spec: PathStudySpec, order: int = DEFAULT_PURIFICATION_ORDER, config: dict | None = None) -> RunRecord:
    """Metrics after every exponential of every path, noiseless and noisy.

    Each step ``k`` reports noiseless and noisy purity, SE and QMI, the
    overlap of both states with the target and, with a Hamiltonian, the raw
    and purified energies.  ``coherent_mismatch`` compares the purified
    noisy state with the noiseless state of the same step (the noise floor);
    ``target_mismatch`` compares it with the target, so without noise it
    equals ``1 - ideal_overlap``.  Step 0 is the reference state.
    """
    n = len(spec.reference)
    noise = NoiseSpec(spec.model, spec.noise_per_g)
    rows: list[dict[str, Any]] = []
    finals = []
    target_note = "user target" if spec.target_state is not None else "each path's noiseless final state"
    for label, path in zip(spec.labels, spec.paths):
        final = run_statevector(product_formula(n, path, spec.reference))
        finals.append(final)
        target = spec.target_state if spec.target_state is not None else final
        target = np.asarray(target, dtype=complex)
        target = target / np.linalg.norm(target)
        for k in range(len(path) + 1):
            psi = run_statevector(product_formula(n, path[:k], spec.reference))
            rho = run_circuit(product_formula(n, path[:k], spec.reference, noise))
            ideal = metric_report(psi, target, spec.hamiltonian, order)
            noisy = metric_report(rho, target, spec.hamiltonian, order)
            floor = coherent_mismatch(psi, rho, order)
            row = {
                "path": label,
                "step": k,
                "noise_per_g": noise.strength,
                "ideal_overlap": ideal.overlap,
                "ideal_qmi": ideal.qmi,
                "ideal_se_m2": ideal.se_m2,
                "purity": noisy.purity,
                "overlap": noisy.overlap,
                "purified_overlap": 1.0 - noisy.coherent_mismatch,
                "qmi": noisy.qmi,
                "se_m2": noisy.se_m2,
                "coherent_mismatch": floor,
                "target_mismatch": noisy.coherent_mismatch,
            }
            if spec.hamiltonian is not None:
                pure = purify(rho, order).purified_state
                row["ideal_energy"] = ideal.energy
                row["energy"] = noisy.energy
                row["purified_energy"] = expectation(pure, spec.hamiltonian)
                if spec.reference_energy is not None:
                    row["purified_energy_error"] = row["purified_energy"] - spec.reference_energy
                    row["within_chemical_accuracy"] = abs(row["purified_energy_error"]) <= CHEMICAL_ACCURACY
            rows.append(row)
    overlaps = [
        {"path_a": spec.labels[i], "path_b": spec.labels[j], "overlap": state_fidelity(finals[i], finals[j])}
        for i in range(len(finals))
        for j in range(i + 1, len(finals))
    ]
    final_c = {label: [r for r in rows if r["path"] == label][-1]["coherent_mismatch"] for label in spec.labels}
    stats = {"final_coherent_mismatch": final_c, "pairwise_final_overlap": overlaps}
    metadata = {
        "target": target_note,
        "noise_model": spec.model,
        "chemical_accuracy_hartree": CHEMICAL_ACCURACY,
        "note": "the table lists 7 exponentials per path; all 7 steps are simulated",
    }
    curves = {label: [r for r in rows if r["path"] == label] for label in spec.labels}
    curves["pairwise_overlap"] = overlaps
    cfg = config if config is not None else {
        "reference": spec.reference, "noise_per_g": spec.noise_per_g, "model": spec.model, "labels": spec.labels,
    }
    return RunRecord("path", None, cfg, rows, curves, stats, metadata)


def be_circuits(scale: float = TABLE_ANGLE_SCALE, noise: NoiseSpec = NoiseSpec()) -> list[Circuit]:
    return [product_formula(4, rotations_from_table(c, 4, scale), BE_REFERENCE, noise) for c in BE_CIRCUITS]


BE_DEFAULT_NOISE = 0.035


def be_path_experiment(
    noise: float = BE_DEFAULT_NOISE,
    model: str = "local_per_gate",
    shots_per_basis: int = 1000,
    n_bases: int | None = None,
    seed: int = 0,
    resamples: int = DEFAULT_RESAMPLES,
    order: int = DEFAULT_PURIFICATION_ORDER,
    scale: float = TABLE_ANGLE_SCALE,
    config: dict | None = None,
) -> RunRecord:
    """Simulated analogue of the Be depth experiment.

    Each of the ``N = 1, 2, 3`` circuits runs noisily with the parity check
    on all four qubits; the accepted shots form a shadow state from which
    overlap (against the noiseless ``N = 3`` state), purified overlap,
    purity, SE and QMI are computed, with bootstrap error bars over
    ``resamples`` resampled shadow sets (``resamples=0`` skips them).
    Columns prefixed ``exact_`` come from the dense postselected state and
    carry no sampling noise.
    """
    target = run_statevector(be_circuits(scale)[-1])
    spec = NoiseSpec(model, noise)
    rows = []
    for depth, circuit in enumerate(be_circuits(scale, spec), start=1):
        psi = run_statevector(circuit)
        ideal = metric_report(psi, target, order=order)
        shadows = sample_with_postselection(circuit, BE_PARITY_QUBITS, n_bases, shots_per_basis, seed + depth)
        rho = shadow_state(shadows)
        rep = metric_report(rho, target, order=order)
        by_basis = shadows.ratio_by_basis()
        exact = postselected_state(circuit, BE_PARITY_QUBITS)
        row = {
            "n_exponentials": depth,
            "noise": spec.strength,
            "ideal_overlap": ideal.overlap,
            "ideal_qmi": ideal.qmi,
            "ideal_se_m2": ideal.se_m2,
            "overlap": rep.overlap,
            "purified_overlap": 1.0 - rep.coherent_mismatch,
            "coherent_mismatch": rep.coherent_mismatch,
            "purity": rep.purity,
            "qmi": rep.qmi,
            "se_m2": rep.se_m2,
            "postselected_ratio": shadows.postselected_ratio,
            "postselected_ratio_std": float(by_basis.std(ddof=1)) if len(by_basis) > 1 else 0.0,
            "exact_overlap": state_fidelity(target, exact),
            "exact_purified_overlap": 1.0 - metric_report(exact, target, order=order).coherent_mismatch,
            "exact_postselected_ratio": rejection_rate(circuit, BE_PARITY_QUBITS),
        }
        if resamples:
            for name, fn in (("overlap", lambda s: state_fidelity(target, shadow_state(s))),
                             ("purity", lambda s: metric_report(shadow_state(s)).purity)):
                mean, std = bootstrap_shadows(shadows, fn, resamples, seed)
                row[f"{name}_boot_mean"] = mean
                row[f"{name}_boot_std"] = std
        rows.append(row)
    stats = {
        "overlap_by_depth": [r["overlap"] for r in rows],
        "purified_overlap_by_depth": [r["purified_overlap"] for r in rows],
        "postselected_ratio_by_depth": [r["postselected_ratio"] for r in rows],
        "exact_overlap_by_depth": [r["exact_overlap"] for r in rows],
        "exact_purified_overlap_by_depth": [r["exact_purified_overlap"] for r in rows],
    }
    metadata = {
        "target": "noiseless N=3 state",
        "angle_convention": f"PauliRotation angle = {scale} x printed coefficient",
        "angles_note": "printed 0.0.401, 0.0.200 and 0.2007 read as 0.401, 0.200 and 0.200",
        "parity_qubits": list(BE_PARITY_QUBITS),
        "noise_calibration": "default strength sits inside the window where raw overlap falls and "
        "purified overlap rises with depth",
    }
    cfg = config if config is not None else {
        "noise": noise, "model": model, "shots_per_basis": shots_per_basis, "n_bases": n_bases, "seed": seed,
        "resamples": resamples, "order": order, "scale": scale,
    }
    return RunRecord("be-path", seed, cfg, rows, {"depth": rows}, stats, metadata)
