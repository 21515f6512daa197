"""Random-projection LSH index.

Each table owns a Gaussian matrix whose rows are hyperplane normals. A point
is projected onto those normals, the signs of the projections form a bit
signature, and the packed signature is the key of the bucket the point is
filed under. A query is hashed the same way in every table; the members of
its exact bucket in each table become candidates, which are ranked by
Euclidean distance either in the table's projected space or in the original
space.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from rplsh._kernels import project_rows
from rplsh.dataset import Dataset
from rplsh.oracle import rank_by_distance, row_distances

__all__ = [
    "RankSpace",
    "Provenance",
    "IndexParams",
    "ProjectionSet",
    "LshIndex",
    "CandidateList",
    "generate_projections",
    "set_projections",
    "project",
    "project_dataset",
    "signature",
    "encode_key",
    "decode_key",
    "build_index",
    "query",
]

MAX_SEED = 2**64 - 1


class RankSpace(enum.Enum):
    PROJECTED = "projected"
    ORIGINAL = "original"


class Provenance(enum.Enum):
    GAUSSIAN_SEEDED = "gaussian_seeded"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class IndexParams:
    """Hash size (hyperplanes per table), table count, seed and ranking space."""

    hash_size: int
    num_tables: int = 1
    seed: int = 0
    rank_space: RankSpace = RankSpace.PROJECTED

    def __post_init__(self) -> None:
        if int(self.hash_size) != self.hash_size or self.hash_size < 1:
            raise ValueError(f"hash_size must be a positive integer, got {self.hash_size}")
        if int(self.num_tables) != self.num_tables or self.num_tables < 1:
            raise ValueError(f"num_tables must be a positive integer, got {self.num_tables}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed}")
        object.__setattr__(self, "rank_space", RankSpace(self.rank_space))

    @property
    def key_bytes(self) -> int:
        return (self.hash_size + 7) // 8


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    """One ``hash_size x d`` hyperplane matrix per table, stacked as (t, h, d)."""

    matrices: np.ndarray
    provenance: Provenance = Provenance.GAUSSIAN_SEEDED

    def __post_init__(self) -> None:
        m = np.array(self.matrices, dtype=np.float64, copy=True, order="C")
        if m.ndim != 3 or 0 in m.shape:
            raise ValueError(f"projection matrices must have shape (t, h, d), got {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("projection matrices contain non-finite values")
        m.flags.writeable = False
        object.__setattr__(self, "matrices", m)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def num_tables(self) -> int:
        return self.matrices.shape[0]

    @property
    def hash_size(self) -> int:
        return self.matrices.shape[1]

    @property
    def d(self) -> int:
        return self.matrices.shape[2]

    def __getitem__(self, table: int) -> np.ndarray:
        return self.matrices[table]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProjectionSet):
            return NotImplemented
        return self.provenance == other.provenance and np.array_equal(
            self.matrices, other.matrices
        )

    __hash__ = None  # type: ignore[assignment]


def generate_projections(d: int, params: IndexParams) -> ProjectionSet:
    """Standard-normal hyperplanes; table ``i`` draws from a stream seeded by ``(seed, i)``.

    Sub-seeding per table means growing ``num_tables`` never changes the
    matrices of the tables that already existed.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    mats = np.empty((params.num_tables, params.hash_size, d), dtype=np.float64)
    for table in range(params.num_tables):
        rng = np.random.default_rng([params.seed, table])
        mats[table] = rng.standard_normal((params.hash_size, d))
    return ProjectionSet(mats, Provenance.GAUSSIAN_SEEDED)


def set_projections(d: int, params: IndexParams, matrices) -> ProjectionSet:
    """Wrap caller-supplied hyperplanes, checking them against ``params`` and ``d``."""
    m = np.asarray(matrices, dtype=np.float64)
    expected = (params.num_tables, params.hash_size, d)
    if m.shape != expected:
        raise ValueError(f"projection shape {m.shape} does not match expected {expected}")
    return ProjectionSet(m, Provenance.EXPLICIT)


def project(vector, table_matrix) -> np.ndarray:
    """Dot product of ``vector`` with every hyperplane row of ``table_matrix``."""
    v = np.asarray(vector, dtype=np.float64)
    m = np.asarray(table_matrix, dtype=np.float64)
    if v.ndim != 1 or m.ndim != 2 or m.shape[1] != v.shape[0]:
        raise ValueError(f"cannot project vector of shape {v.shape} with matrix {m.shape}")
    out = project_rows(v[None, :], m)[0]
    if not np.isfinite(out).all():
        raise ValueError("projection overflowed to a non-finite value")
    return out


def signature(projected) -> np.ndarray:
    """Bit ``i`` is set iff ``projected[i] >= 0``; zero counts as above the plane."""
    return np.asarray(projected, dtype=np.float64) >= 0.0


def encode_key(sig) -> bytes:
    """Pack a signature MSB-first into ``ceil(len/8)`` bytes with zero padding."""
    return np.packbits(np.asarray(sig, dtype=bool), bitorder="big").tobytes()


def decode_key(key: bytes, hash_size: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8), bitorder="big")
    if bits.shape[0] != 8 * ((hash_size + 7) // 8):
        raise ValueError(f"key of {len(key)} bytes cannot hold a {hash_size}-bit signature")
    return bits[:hash_size].astype(bool)


@dataclass(frozen=True, eq=False)
class CandidateList:
    """Ranked query result.

    Attributes:
        ids: candidate ids, ascending by ``(distance, id)``, truncated to k.
        distances: matching Euclidean distances in ``rank_space``.
        rank_space: space the distances were measured in.
        tables_hit: number of tables whose bucket for the query was non-empty.
        num_candidates: distinct candidates before truncation to k.
        query: the query vector.
    """

    ids: np.ndarray
    distances: np.ndarray
    rank_space: RankSpace
    tables_hit: int
    num_candidates: int
    query: np.ndarray

    def __len__(self) -> int:
        return self.ids.shape[0]

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.ids.tolist(), self.distances.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CandidateList):
            return NotImplemented
        return (
            self.rank_space == other.rank_space
            and self.tables_hit == other.tables_hit
            and self.num_candidates == other.num_candidates
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.distances, other.distances)
            and np.array_equal(self.query, other.query)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(eq=False)
class LshIndex:
    """Built multi-table index.

    ``tables[t]`` maps a packed bucket key to an int64 array of dataset row
    positions, in dataset order; buckets themselves appear in order of first
    occupancy. Use :meth:`bucket_ids` for the id view.
    """

    params: IndexParams
    projections: ProjectionSet
    tables: list[dict[bytes, np.ndarray]]
    dataset: Dataset
    projected: list[np.ndarray] | None = None
    build_seconds: list[float] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def d(self) -> int:
        return self.dataset.d

    def bucket_ids(self, table: int) -> dict[bytes, list[int]]:
        ids = self.dataset.ids
        return {key: ids[rows].tolist() for key, rows in self.tables[table].items()}

    def bucket_sizes(self, table: int) -> np.ndarray:
        return np.fromiter((len(m) for m in self.tables[table].values()), dtype=np.int64)

    def query(self, vector, k: int) -> CandidateList:
        return query(self, vector, k)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LshIndex):
            return NotImplemented
        if (
            self.params != other.params
            or self.projections != other.projections
            or self.dataset != other.dataset
            or len(self.tables) != len(other.tables)
        ):
            return False
        for mine, theirs in zip(self.tables, other.tables):
            if list(mine) != list(theirs):
                return False
            if not all(np.array_equal(mine[key], theirs[key]) for key in mine):
                return False
        return True

    __hash__ = None  # type: ignore[assignment]


def project_dataset(vectors: np.ndarray, planes: np.ndarray) -> np.ndarray:
    coords = project_rows(vectors, planes)
    if not np.isfinite(coords).all():
        raise ValueError("projection overflowed to a non-finite value")
    return coords


def _bucketize(coords: np.ndarray) -> dict[bytes, np.ndarray]:
    packed = np.packbits(coords >= 0.0, axis=1, bitorder="big")
    width = packed.shape[1]
    as_void = np.ascontiguousarray(packed).view(np.dtype((np.void, width))).ravel()
    _, first, inverse = np.unique(as_void, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    members = np.argsort(inverse, kind="stable")
    bounds = np.cumsum(np.bincount(inverse))[:-1]
    groups = np.split(members, bounds)
    return {packed[first[b]].tobytes(): groups[b] for b in np.argsort(first, kind="stable")}


def build_index(
    dataset: Dataset,
    params: IndexParams,
    projections: ProjectionSet | None = None,
) -> LshIndex:
    """Hash every point of ``dataset`` into one bucket per table."""
    if projections is None:
        projections = generate_projections(dataset.d, params)
    if projections.d != dataset.d:
        raise ValueError(
            f"projections have dimension {projections.d}, dataset has {dataset.d}"
        )
    if (projections.num_tables, projections.hash_size) != (params.num_tables, params.hash_size):
        raise ValueError(
            f"projections are {projections.num_tables} x {projections.hash_size}, "
            f"params ask for {params.num_tables} x {params.hash_size}"
        )

    keep_coords = params.rank_space is RankSpace.PROJECTED
    tables: list[dict[bytes, np.ndarray]] = []
    cache: list[np.ndarray] = []
    seconds: list[float] = []
    for table in range(params.num_tables):
        start = time.perf_counter()
        coords = project_dataset(dataset.vectors, projections[table])
        tables.append(_bucketize(coords))
        seconds.append(time.perf_counter() - start)
        if keep_coords:
            coords.flags.writeable = False
            cache.append(coords)
    return LshIndex(
        params=params,
        projections=projections,
        tables=tables,
        dataset=dataset,
        projected=cache if keep_coords else None,
        build_seconds=seconds,
    )


def query(index: LshIndex, vector, k: int) -> CandidateList:
    """Collect the query's bucket from every table, merge, rank and truncate to ``k``.

    In projected rank space a candidate found in several tables keeps its
    smallest projected distance. Queries that land only in empty buckets
    return an empty list; neighboring buckets are never probed.
    """
    q = np.asarray(vector, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != index.d:
        raise ValueError(f"query has shape {q.shape}, index expects ({index.d},)")
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not np.isfinite(q).all():
        raise ValueError("query contains non-finite values")

    projected_space = index.params.rank_space is RankSpace.PROJECTED
    if projected_space and index.projected is None:
        raise ValueError("index was built without projected coordinates")

    hit_rows: list[np.ndarray] = []
    hit_dist: list[np.ndarray] = []
    for table, buckets in enumerate(index.tables):
        coords = project(q, index.projections[table])
        rows = buckets.get(encode_key(signature(coords)))
        if rows is None:
            continue
        hit_rows.append(rows)
        if projected_space:
            hit_dist.append(row_distances(index.projected[table][rows], coords))

    if not hit_rows:
        empty = np.empty(0, dtype=np.int64)
        return CandidateList(
            empty, np.empty(0), index.params.rank_space, 0, 0, q.copy()
        )

    if projected_space:
        rows = np.concatenate(hit_rows)
        dist = np.concatenate(hit_dist)
        order = np.lexsort((dist, rows))
        rows, dist = rows[order], dist[order]
        first = np.ones(rows.shape[0], dtype=bool)
        first[1:] = rows[1:] != rows[:-1]
        rows, dist = rows[first], dist[first]
    else:
        rows = np.unique(np.concatenate(hit_rows))
        dist = row_distances(index.dataset.vectors[rows], q)

    ids = index.dataset.ids[rows]
    top = rank_by_distance(ids, dist, int(k))
    return CandidateList(
        ids=ids[top],
        distances=dist[top],
        rank_space=index.params.rank_space,
        tables_hit=len(hit_rows),
        num_candidates=int(rows.shape[0]),
        query=q.copy(),
    )
