"""Fixed-order projection kernel.

BLAS matrix products are not row-consistent: the same row can project to
slightly different bits depending on how many rows share the call. Bucket
keys and projected distances must agree exactly between build and query,
so projections accumulate each dot product strictly left to right.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

_CHUNK_ROWS = 2048


def _project_rows_numpy(rows: np.ndarray, planes: np.ndarray) -> np.ndarray:
    n, d = rows.shape
    h = planes.shape[0]
    out = np.zeros((n, h), dtype=np.float64)
    tmp = np.empty((min(n, _CHUNK_ROWS), h), dtype=np.float64)
    for start in range(0, n, _CHUNK_ROWS):
        block = rows[start:start + _CHUNK_ROWS]
        acc = out[start:start + _CHUNK_ROWS]
        scratch = tmp[: block.shape[0]]
        for j in range(d):
            np.multiply(block[:, j:j + 1], planes[:, j], out=scratch)
            acc += scratch
    return out


if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _project_rows_numba(rows, planes):  # pragma: no cover - compiled
        n, d = rows.shape
        h = planes.shape[0]
        out = np.empty((n, h), dtype=np.float64)
        for i in range(n):
            for k in range(h):
                s = 0.0
                for j in range(d):
                    s += rows[i, j] * planes[k, j]
                out[i, k] = s
        return out


def project_rows(rows: np.ndarray, planes: np.ndarray, use_numba: bool = True) -> np.ndarray:
    """Return ``rows @ planes.T`` with each entry summed in index order."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    planes = np.ascontiguousarray(planes, dtype=np.float64)
    if use_numba and numba is not None:
        return _project_rows_numba(rows, planes)
    return _project_rows_numpy(rows, planes)
