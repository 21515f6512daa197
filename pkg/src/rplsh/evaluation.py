"""Accuracy metrics and the timing benchmark behind the build/query/accuracy sweeps."""

from __future__ import annotations

import csv
import enum
import io
import logging
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from rplsh.dataset import Dataset
from rplsh.lsh import CandidateList, IndexParams, RankSpace, build_index, query
from rplsh.oracle import ExactResult, knn_exact, row_distances

__all__ = [
    "Experiment",
    "BenchRecord",
    "monotonicity_accuracy",
    "recall_at_k",
    "sample_queries",
    "run_benchmark",
    "records_to_csv",
    "BENCH_HEADER",
]

logger = logging.getLogger(__name__)

BENCH_HEADER = ("experiment", "hash_size", "num_tables", "n", "d", "seed", "queries", "value")


class Experiment(enum.Enum):
    BUILD_TIME = 0
    QUERY_TIME = 1
    ACCURACY = 2
    RECALL = 3
    CANDIDATE_COUNT = 4


TIMINGS = frozenset({Experiment.BUILD_TIME, Experiment.QUERY_TIME})


@dataclass(frozen=True)
class BenchRecord:
    experiment: Experiment
    hash_size: int
    num_tables: int
    n: int
    d: int
    seed: int
    queries: int
    value: float

    def __post_init__(self) -> None:
        if self.experiment in (Experiment.ACCURACY, Experiment.RECALL):
            if not 0.0 <= self.value <= 1.0:
                raise ValueError(f"{self.experiment.name} value {self.value} outside [0, 1]")
        elif self.value < 0.0:
            raise ValueError(f"{self.experiment.name} value {self.value} is negative")

    def sort_key(self) -> tuple[int, int, int]:
        return (self.hash_size, self.num_tables, self.experiment.value)

    def row(self) -> list[str]:
        return [
            self.experiment.name,
            str(self.hash_size),
            str(self.num_tables),
            str(self.n),
            str(self.d),
            str(self.seed),
            str(self.queries),
            repr(float(self.value)),
        ]


def monotonicity_accuracy(
    candidates: CandidateList | Sequence[int], dataset: Dataset, query_vector
) -> float:
    """Fraction of adjacent candidate pairs whose original-space distances do not decrease.

    Distances to the query are recomputed in the original space regardless
    of how the list was ranked. Lists of fewer than two candidates score 1.0.
    """
    ids = candidates.ids if isinstance(candidates, CandidateList) else np.asarray(candidates)
    m = len(ids)
    lookup = dataset.id_to_row()
    try:
        rows = np.fromiter((lookup[int(i)] for i in ids), dtype=np.int64, count=m)
    except KeyError as exc:
        raise KeyError(f"candidate id {exc.args[0]} is not in the dataset") from None
    if m <= 1:
        return 1.0
    q = np.asarray(query_vector, dtype=np.float64)
    dist = row_distances(dataset.vectors[rows], q)
    return float(np.count_nonzero(dist[:-1] <= dist[1:])) / (m - 1)


def recall_at_k(candidates: CandidateList | Sequence[int], exact: ExactResult, k: int) -> float:
    """Share of the exact top-k present in the candidates' top-k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    found = candidates.ids if isinstance(candidates, CandidateList) else np.asarray(candidates)
    truth = exact.ids[:k]
    if len(truth) == 0:
        return 1.0
    hits = np.intersect1d(np.asarray(found[:k]), truth).shape[0]
    return hits / min(k, len(truth))


def sample_queries(dataset: Dataset, num_queries: int, seed: int) -> np.ndarray:
    """Seeded row positions to use as queries; the same for every grid cell."""
    rng = np.random.default_rng(seed)
    replace = num_queries > dataset.n
    return rng.choice(dataset.n, size=num_queries, replace=replace)


def _drop_id(ids: np.ndarray, point_id: int, k: int) -> np.ndarray:
    return ids[ids != point_id][:k]


def _without_self(exact: ExactResult, point_id: int, k: int) -> ExactResult:
    keep = exact.ids != point_id
    return ExactResult(exact.ids[keep][:k], exact.distances[keep][:k])


def run_benchmark(
    dataset: Dataset,
    hash_sizes: Iterable[int],
    num_tables: Iterable[int],
    num_queries: int = 100,
    seed: int = 0,
    k: int = 10,
    rank_space: RankSpace | str = RankSpace.PROJECTED,
    repeats: int = 1,
) -> list[BenchRecord]:
    """Sweep ``hash_sizes x num_tables`` and emit five records per cell.

    For each cell the index is built once untimed and then ``repeats`` timed
    times; BUILD_TIME is the mean per-table build time. Queries are dataset
    rows sampled once from ``seed``. Each is run once to warm up and then
    ``repeats`` timed times (QUERY_TIME is the mean seconds per query).
    CANDIDATE_COUNT is the mean number of distinct candidates before
    truncation. ACCURACY (monotonicity) and RECALL (recall@k against the
    exact oracle) are computed after removing the query's own id.

    Cells whose parameters are invalid are logged and skipped.
    """
    hash_sizes = list(hash_sizes)
    num_tables = list(num_tables)
    if not hash_sizes or not num_tables:
        raise ValueError("benchmark grid must be non-empty")
    if num_queries < 1:
        raise ValueError(f"num_queries must be >= 1, got {num_queries}")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    rank_space = RankSpace(rank_space)

    picks = sample_queries(dataset, num_queries, seed)
    query_ids = dataset.ids[picks]
    query_vecs = dataset.vectors[picks]
    truths = [
        _without_self(knn_exact(dataset, v, k + 1), int(qid), k)
        for qid, v in zip(query_ids.tolist(), query_vecs)
    ]

    records: list[BenchRecord] = []
    for h in hash_sizes:
        for t in num_tables:
            try:
                params = IndexParams(h, t, seed, rank_space)
            except ValueError as exc:
                logger.warning("skipping cell hash_size=%s num_tables=%s: %s", h, t, exc)
                continue
            records.extend(
                _run_cell(dataset, params, query_ids, query_vecs, truths, k, repeats)
            )
    records.sort(key=BenchRecord.sort_key)
    return records


def _run_cell(dataset, params, query_ids, query_vecs, truths, k, repeats):
    index = build_index(dataset, params)
    build_times = []
    for _ in range(repeats):
        index = build_index(dataset, params)
        build_times.append(sum(index.build_seconds) / params.num_tables)

    query(index, query_vecs[0], k + 1)
    elapsed = 0.0
    for _ in range(repeats):
        start = time.perf_counter()
        for v in query_vecs:
            query(index, v, k + 1)
        elapsed += time.perf_counter() - start
    query_time = elapsed / (repeats * len(query_vecs))

    counts, accuracy, recall = [], [], []
    for qid, v, truth in zip(query_ids.tolist(), query_vecs, truths):
        result = query(index, v, k + 1)
        kept = _drop_id(result.ids, qid, k)
        counts.append(result.num_candidates)
        accuracy.append(monotonicity_accuracy(kept, dataset, v))
        recall.append(recall_at_k(kept, truth, k))

    common = dict(
        hash_size=params.hash_size,
        num_tables=params.num_tables,
        n=dataset.n,
        d=dataset.d,
        seed=params.seed,
        queries=len(query_vecs),
    )
    return [
        BenchRecord(Experiment.BUILD_TIME, value=float(np.mean(build_times)), **common),
        BenchRecord(Experiment.QUERY_TIME, value=query_time, **common),
        BenchRecord(Experiment.ACCURACY, value=float(np.mean(accuracy)), **common),
        BenchRecord(Experiment.RECALL, value=float(np.mean(recall)), **common),
        BenchRecord(Experiment.CANDIDATE_COUNT, value=float(np.mean(counts)), **common),
    ]


def records_to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()
