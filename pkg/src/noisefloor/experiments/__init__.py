"""Drivers for the numerical studies.

Every driver returns a :class:`RunRecord`; see :mod:`noisefloor.cli` for the
command-line front end that writes them to disk.
"""

from .dressing import DressingPoint, dressing_sequence, dressing_study, primitive_points, random_hermitian_sum
from .paths import (
    BE_CIRCUITS,
    H3_REFERENCE,
    H3_TABLE_PATHS,
    TABLE_ANGLE_SCALE,
    PathStudySpec,
    be_circuits,
    be_path_experiment,
    h3_paths,
    path_study,
)
from .primitive import primitive_circuit, primitive_sweep
from .random_study import (
    RandomCircuitSample,
    StratifiedSubset,
    correlation_lookup,
    random_circuit_study,
    sample_random_circuit,
    stratified_subsets,
)
from .records import CHEMICAL_ACCURACY, RunRecord, table_to_csv
from .shadows_demo import shadows_demo, trace_distance
from .stats import correlation_matrix, correlation_rows

__all__ = [
    "BE_CIRCUITS",
    "CHEMICAL_ACCURACY",
    "DressingPoint",
    "H3_REFERENCE",
    "H3_TABLE_PATHS",
    "PathStudySpec",
    "RandomCircuitSample",
    "RunRecord",
    "StratifiedSubset",
    "TABLE_ANGLE_SCALE",
    "be_circuits",
    "be_path_experiment",
    "correlation_lookup",
    "correlation_matrix",
    "correlation_rows",
    "dressing_sequence",
    "dressing_study",
    "h3_paths",
    "path_study",
    "primitive_circuit",
    "primitive_points",
    "primitive_sweep",
    "random_circuit_study",
    "random_hermitian_sum",
    "sample_random_circuit",
    "shadows_demo",
    "stratified_subsets",
    "table_to_csv",
    "trace_distance",
]
