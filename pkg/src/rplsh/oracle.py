"""Exact brute-force k-nearest-neighbor search (Euclidean)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rplsh.dataset import Dataset

__all__ = ["ExactResult", "euclidean", "row_distances", "knn_exact", "rank_by_distance"]


@dataclass(frozen=True, eq=False)
class ExactResult:
    """Exact neighbors, ascending by ``(distance, id)``."""

    ids: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return self.ids.shape[0]

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.ids.tolist(), self.distances.tolist()))


def _as_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    return v


def euclidean(a, b) -> float:
    a = _as_vector(a, "a")
    b = _as_vector(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(row_distances(a[None, :], b)[0])


def row_distances(rows: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Euclidean distance from ``query`` to each row of ``rows``.

    Every output element depends only on its own row, so distances computed
    over a subset of rows are bit-identical to those over the full matrix.
    The LSH query path relies on this to agree exactly with the oracle.
    """
    diff = rows - query
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def rank_by_distance(ids: np.ndarray, distances: np.ndarray, k: int) -> np.ndarray:
    """Positions of the ``k`` smallest distances, ties broken by ascending id."""
    order = np.lexsort((ids, distances))
    return order[:k]


def knn_exact(dataset: Dataset, vector, k: int) -> ExactResult:
    """Scan all ``n`` points and return the ``min(k, n)`` nearest."""
    q = _as_vector(vector)
    if q.shape[0] != dataset.d:
        raise ValueError(f"query has dimension {q.shape[0]}, dataset has {dataset.d}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dist = row_distances(dataset.vectors, q)
    top = rank_by_distance(dataset.ids, dist, k)
    return ExactResult(dataset.ids[top], dist[top])
