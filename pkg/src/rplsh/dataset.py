"""Feature-vector datasets: CSV ingestion and seeded synthetic generation.

A dataset is an ordered collection of ``(id, vector)`` rows. Vectors are
stored row-major as an ``n x d`` float64 array; ids are unique non-negative
integers. Both arrays are made read-only on construction so a dataset can
be shared freely between an index, the oracle and the evaluation code.

The canonical on-disk layout is a flat CSV: ``id,f1,...,fd`` with an
optional single header row.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Dataset",
    "DatasetError",
    "load_csv",
    "write_csv",
    "generate_synthetic",
]


class DatasetError(ValueError):
    """Raised when input data violates the dataset invariants."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable ``n x d`` matrix of feature vectors with unique integer ids.

    Attributes:
        ids: int64 array of shape (n,), unique and non-negative.
        vectors: float64 array of shape (n, d), all entries finite.
    """

    ids: np.ndarray
    vectors: np.ndarray

    def __post_init__(self) -> None:
        ids = np.array(self.ids, dtype=np.int64, copy=True).reshape(-1)
        vectors = np.array(self.vectors, dtype=np.float64, copy=True, order="C")
        if vectors.ndim != 2:
            raise DatasetError(f"vectors must be 2-D, got shape {vectors.shape}")
        n, d = vectors.shape
        if n < 1 or d < 1:
            raise DatasetError(f"dataset must have n >= 1 and d >= 1, got n={n}, d={d}")
        if ids.shape[0] != n:
            raise DatasetError(f"{ids.shape[0]} ids for {n} vectors")
        if (ids < 0).any():
            raise DatasetError(f"negative id {int(ids[ids < 0][0])}")
        if np.unique(ids).shape[0] != n:
            raise DatasetError(f"duplicate id {_first_duplicate(ids)}")
        if not np.isfinite(vectors).all():
            row, col = np.argwhere(~np.isfinite(vectors))[0]
            raise DatasetError(f"non-finite value at row {row}, column {col}")
        ids.flags.writeable = False
        vectors.flags.writeable = False
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "vectors", vectors)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.vectors.shape == other.vectors.shape
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.vectors, other.vectors)
        )

    __hash__ = None  # type: ignore[assignment]

    def row_of(self, point_id: int) -> int:
        """Row position of ``point_id``; raises KeyError if absent."""
        return self.id_to_row()[int(point_id)]

    def id_to_row(self) -> dict[int, int]:
        cached = self.__dict__.get("_id_to_row")
        if cached is None:
            cached = {int(i): r for r, i in enumerate(self.ids.tolist())}
            object.__setattr__(self, "_id_to_row", cached)
        return cached

    def vector_of(self, point_id: int) -> np.ndarray:
        return self.vectors[self.row_of(point_id)]


def _first_duplicate(ids: np.ndarray) -> int:
    seen: set[int] = set()
    for i in ids.tolist():
        if i in seen:
            return i
        seen.add(i)
    raise AssertionError("no duplicate found")


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def load_csv(path: str | os.PathLike) -> Dataset:
    """Load a flat ``id,f1,...,fd`` CSV file.

    A single header row is skipped when the first field of the first row is
    not numeric. Row numbers in error messages are 1-based file line numbers.

    Raises:
        DatasetError: on an empty file, ragged rows, non-numeric cells,
            non-integer or duplicate ids, or non-finite feature values.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()

    # trailing blank lines are tolerated, interior ones are not
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DatasetError(f"{path}: empty file")

    start = 0
    if not _is_number(lines[0].split(",", 1)[0].strip()):
        start = 1
    if start >= len(lines):
        raise DatasetError(f"{path}: no data rows after header")

    width = None
    ids: list[int] = []
    rows: list[list[float]] = []
    first_seen: dict[int, int] = {}
    for lineno, line in enumerate(lines[start:], start=start + 1):
        fields = line.split(",")
        if width is None:
            width = len(fields)
            if width < 2:
                raise DatasetError(f"{path}: row {lineno}: need an id and at least one feature")
        elif len(fields) != width:
            raise DatasetError(
                f"{path}: row {lineno}: expected {width} columns, found {len(fields)}"
            )
        try:
            point_id = int(fields[0].strip())
        except ValueError:
            raise DatasetError(
                f"{path}: row {lineno}, column 1: id {fields[0]!r} is not an integer"
            ) from None
        if point_id < 0:
            raise DatasetError(f"{path}: row {lineno}, column 1: negative id {point_id}")
        if point_id in first_seen:
            raise DatasetError(
                f"{path}: duplicate id {point_id} in rows {first_seen[point_id]} and {lineno}"
            )
        first_seen[point_id] = lineno
        values = []
        for col, field in enumerate(fields[1:], start=2):
            try:
                value = float(field)
            except ValueError:
                raise DatasetError(
                    f"{path}: row {lineno}, column {col}: non-numeric value {field!r}"
                ) from None
            if not np.isfinite(value):
                raise DatasetError(f"{path}: row {lineno}, column {col}: non-finite value {field!r}")
            values.append(value)
        ids.append(point_id)
        rows.append(values)

    return Dataset(np.asarray(ids, dtype=np.int64), np.asarray(rows, dtype=np.float64))


def write_csv(dataset: Dataset, path: str | os.PathLike, header: bool = True) -> None:
    """Write ``dataset`` in the canonical flat layout.

    Values are formatted with ``repr`` so every float64 survives a
    :func:`load_csv` roundtrip exactly. The file is written to a temporary
    sibling and renamed into place.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            if header:
                fh.write(",".join(["id"] + [f"f{j + 1}" for j in range(dataset.d)]) + "\n")
            for point_id, row in zip(dataset.ids.tolist(), dataset.vectors.tolist()):
                fh.write(str(point_id) + "," + ",".join(map(repr, row)) + "\n")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def generate_synthetic(
    n: int,
    d: int,
    clusters: int = 1,
    spread: float = 1.0,
    seed: int = 0,
    centered: bool = False,
) -> Dataset:
    """Seeded Gaussian-blob dataset.

    Cluster centers are drawn uniformly from ``[-10, 10]^d``; point ``i``
    belongs to cluster ``i % clusters`` and equals its center plus isotropic
    Gaussian noise with standard deviation ``spread``. Ids are ``0..n-1``.

    With ``centered=True`` every center is shifted by the mean of all
    centers, so the blobs straddle the origin (for ``clusters=1`` the data is
    plain zero-mean Gaussian noise). The random draws are identical either way.
    """
    if d < 1:
        raise DatasetError(f"d must be >= 1, got {d}")
    if clusters < 1:
        raise DatasetError(f"clusters must be >= 1, got {clusters}")
    if n < clusters:
        raise DatasetError(f"n ({n}) must be >= clusters ({clusters})")
    if not spread >= 0.0:
        raise DatasetError(f"spread must be non-negative, got {spread}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-10.0, 10.0, size=(clusters, d))
    if centered:
        centers = centers - centers.mean(axis=0)
    noise = rng.standard_normal((n, d)) * spread
    labels = np.arange(n) % clusters
    return Dataset(np.arange(n, dtype=np.int64), centers[labels] + noise)
