"""Command-line entry point.

Subcommands::

    rplsh ingest --in features.csv --out data.csv
    rplsh synth  --n 20000 --d 128 --clusters 16 --spread 1.0 --seed 1 --out data.csv
    rplsh build  --data data.csv --out data.lshi --hash-size 16 --tables 4 --seed 7
    rplsh query  --data data.csv --index data.lshi (--id I | --vector v1,v2,...) --k 5
    rplsh oracle --data data.csv (--id I | --vector v1,v2,...) --k 5
    rplsh bench  --data data.csv --hash-sizes 4,8,16 --tables 1,2,4 --queries 100 --seed 7

Exit status is 0 on success, 1 on usage errors and 2 on data or format errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from rplsh.dataset import DatasetError, generate_synthetic
from rplsh.evaluation import records_to_csv, run_benchmark
from rplsh.lsh import IndexParams, RankSpace, build_index, query
from rplsh.oracle import knn_exact
from rplsh.persistence import IndexFormatError, load_dataset, load_index, save_dataset, save_index

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

DEFAULT_HASH_SIZES = "4,8,16,32,64,128,250"
DEFAULT_TABLES = "1,2,4,8"

log = logging.getLogger("rplsh")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_query_flags(p: argparse.ArgumentParser) -> None:
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--id", type=int, help="query with the vector of this dataset id")
    target.add_argument("--vector", type=_float_list, help="inline query vector v1,v2,...")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default="-", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rplsh", description="Random-projection LSH toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a feature CSV and write it in canonical form")
    p.add_argument("--in", dest="src", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--clusters", type=int, default=1)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--centered", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("build", help="build an index and save it")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--hash-size", type=int, required=True)
    p.add_argument("--tables", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rank-space", choices=[r.value for r in RankSpace], default="projected")

    p = sub.add_parser("query", help="approximate neighbors from a saved index")
    p.add_argument("--data", required=True)
    p.add_argument("--index", required=True)
    _add_query_flags(p)

    p = sub.add_parser("oracle", help="exact neighbors by brute force")
    p.add_argument("--data", required=True)
    p.add_argument("--index", help="accepted for flag parity with query; unused")
    _add_query_flags(p)

    p = sub.add_parser("bench", help="sweep hash sizes and table counts, emit CSV records")
    p.add_argument("--data", required=True)
    p.add_argument("--hash-sizes", type=_int_list, default=_int_list(DEFAULT_HASH_SIZES))
    p.add_argument("--tables", type=_int_list, default=_int_list(DEFAULT_TABLES))
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--rank-space", choices=[r.value for r in RankSpace], default="projected")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default="-")
    return parser


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _format_neighbors(ids: np.ndarray, distances: np.ndarray) -> str:
    lines = ["rank,id,distance"]
    for rank, (i, dist) in enumerate(zip(ids.tolist(), distances.tolist()), start=1):
        lines.append(f"{rank},{i},{dist!r}")
    return "\n".join(lines) + "\n"


def _query_vector(args, dataset) -> np.ndarray:
    if args.id is not None:
        try:
            return dataset.vector_of(args.id)
        except KeyError:
            raise DatasetError(f"id {args.id} is not in the dataset") from None
    vec = np.asarray(args.vector, dtype=np.float64)
    if vec.shape[0] != dataset.d:
        raise DatasetError(f"query vector has {vec.shape[0]} entries, dataset has d={dataset.d}")
    return vec


def _check_k(k: int) -> None:
    if k < 1:
        raise UsageError(f"--k must be >= 1, got {k}")


def _run(args) -> None:
    cmd = args.command
    if cmd == "ingest":
        save_dataset(load_dataset(args.src), args.out)
    elif cmd == "synth":
        ds = generate_synthetic(
            args.n, args.d, args.clusters, args.spread, args.seed, centered=args.centered
        )
        save_dataset(ds, args.out)
    elif cmd == "build":
        try:
            params = IndexParams(args.hash_size, args.tables, args.seed, RankSpace(args.rank_space))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        ds = load_dataset(args.data)
        index = build_index(ds, params)
        save_index(index, args.out)
        log.info("built %d tables in %.3fs", params.num_tables, sum(index.build_seconds))
    elif cmd == "query":
        _check_k(args.k)
        ds = load_dataset(args.data)
        index = load_index(args.index, ds)
        result = query(index, _query_vector(args, ds), args.k)
        log.info("tables hit: %d, candidates: %d", result.tables_hit, result.num_candidates)
        _emit(_format_neighbors(result.ids, result.distances), args.out)
    elif cmd == "oracle":
        _check_k(args.k)
        ds = load_dataset(args.data)
        result = knn_exact(ds, _query_vector(args, ds), args.k)
        _emit(_format_neighbors(result.ids, result.distances), args.out)
    elif cmd == "bench":
        if args.queries < 1 or args.k < 1 or args.repeats < 1:
            raise UsageError("--queries, --k and --repeats must be >= 1")
        ds = load_dataset(args.data)
        records = run_benchmark(
            ds,
            args.hash_sizes,
            args.tables,
            num_queries=args.queries,
            seed=args.seed,
            k=args.k,
            rank_space=args.rank_space,
            repeats=args.repeats,
        )
        _emit(records_to_csv(records), args.out)


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv`` and execute one subcommand; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        _run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, IndexFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
