"""Correlation matrices over flat metric tables."""

from __future__ import annotations

from typing import Any, Mapping, Sequence

import numpy as np

from ..errors import UndefinedCorrelationError
from ..metrics import pearson


def correlation_matrix(rows: Sequence[Mapping[str, Any]], fields: Sequence[str]) -> tuple[list[str], np.ndarray]:
    """Pairwise Pearson correlations of the named columns.

    Returns the labels and a symmetric matrix with unit diagonal.

    Raises:
        ValueError: fewer than three rows.
        UndefinedCorrelationError: a column is constant.
    """
    if len(rows) < 3:
        raise ValueError("correlation matrix needs at least three rows")
    cols = [np.array([float(r[f]) for r in rows]) for f in fields]
    for f, c in zip(fields, cols):
        if np.ptp(c) == 0:
            raise UndefinedCorrelationError(f"column {f!r} is constant")
    k = len(fields)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = pearson(cols[i], cols[j])
    return list(fields), out


def correlation_rows(labels: Sequence[str], matrix: np.ndarray) -> list[dict[str, Any]]:
    """Long-form table ``(a, b, r)`` for CSV output."""
    return [{"a": a, "b": b, "r": float(matrix[i, j])} for i, a in enumerate(labels) for j, b in enumerate(labels)]
