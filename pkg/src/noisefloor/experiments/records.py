"""Run records and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

CHEMICAL_ACCURACY = 1.59e-3  # Hartree


def _plain(value: Any) -> Any:
    """Convert numpy scalars and containers to JSON-friendly Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def table_to_csv(rows: Iterable[dict[str, Any]]) -> str:
    """Comma-separated table with a header row and LF endings.

    Columns follow first appearance across rows; floats use ``repr`` so the
    text round-trips exactly and is identical across runs.
    """
    rows = list(rows)
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


@dataclass
class RunRecord:
    """One study's configuration, flat metric table, plot curves and statistics.

    Attributes:
        study: study name, e.g. ``"primitive"``.
        seed: master seed (``None`` for deterministic studies).
        config: resolved configuration the run used.
        rows: flat metric table written to ``metrics.csv``.
        curves: named tables written to ``curves/<name>.csv``.
        stats: derived statistics (correlations, ratios, checks).
        metadata: notes on conventions used by the run.
    """

    study: str
    seed: int | None
    config: dict[str, Any]
    rows: list[dict[str, Any]] = field(default_factory=list)
    curves: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return _plain(
            {
                "study": self.study,
                "seed": self.seed,
                "config": self.config,
                "rows": self.rows,
                "curves": self.curves,
                "stats": self.stats,
                "metadata": self.metadata,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        d = json.loads(text)
        return cls(d["study"], d["seed"], d["config"], d["rows"], d["curves"], d["stats"], d["metadata"])

    def metrics_csv(self) -> str:
        return table_to_csv(self.rows)

    def write(self, out_dir: str) -> None:
        """Write ``run.json``, ``metrics.csv`` and ``curves/*.csv`` under ``out_dir``."""
        os.makedirs(os.path.join(out_dir, "curves"), exist_ok=True)
        _write_text(os.path.join(out_dir, "run.json"), self.to_json())
        _write_text(os.path.join(out_dir, "metrics.csv"), self.metrics_csv())
        for name, rows in self.curves.items():
            _write_text(os.path.join(out_dir, "curves", f"{name}.csv"), table_to_csv(rows))


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
