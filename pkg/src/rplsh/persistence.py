"""Binary index files and dataset CSV files.

Index layout (all little-endian, fixed width)::

    header   magic "LSHI" | version u16 | d u32 | n u32 | hash_size u32
             | num_tables u32 | seed u64 | rank_space u8 | provenance u8
    per table:
             hash_size * d float64 (row-major projection matrix)
             bucket count u32
             per bucket: key length u16 | key bytes | member count u32
                         | member ids u32 each, insertion order

Original vectors are not stored; :func:`load_index` takes the dataset the
index was built from and checks it against the header and bucket ids.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from rplsh.dataset import Dataset, load_csv, write_csv
from rplsh.lsh import (
    IndexParams,
    LshIndex,
    ProjectionSet,
    Provenance,
    RankSpace,
    project_dataset,
)

__all__ = [
    "IndexFormatError",
    "MAGIC",
    "VERSION",
    "save_index",
    "load_index",
    "save_dataset",
    "load_dataset",
]

MAGIC = b"LSHI"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIIQBB")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U32_MAX = 2**32 - 1

_RANK_CODES = {RankSpace.PROJECTED: 0, RankSpace.ORIGINAL: 1}
_PROVENANCE_CODES = {Provenance.GAUSSIAN_SEEDED: 0, Provenance.EXPLICIT: 1}


class IndexFormatError(ValueError):
    """The file is not a valid index for the given dataset."""


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise OSError(f"cannot write index to {path}: {exc.strerror or exc}") from exc


def save_index(index: LshIndex, path: str | os.PathLike) -> None:
    params = index.params
    ds = index.dataset
    for name, value in (("d", ds.d), ("n", ds.n), ("hash_size", params.hash_size),
                        ("num_tables", params.num_tables)):
        if value > _U32_MAX:
            raise IndexFormatError(f"{name}={value} does not fit in 32 bits")
    if ds.ids.max() > _U32_MAX:
        raise IndexFormatError(f"id {int(ds.ids.max())} does not fit in 32 bits")

    parts = [
        _HEADER.pack(
            MAGIC,
            VERSION,
            ds.d,
            ds.n,
            params.hash_size,
            params.num_tables,
            params.seed,
            _RANK_CODES[params.rank_space],
            _PROVENANCE_CODES[index.projections.provenance],
        )
    ]
    ids = ds.ids
    for table, buckets in enumerate(index.tables):
        parts.append(index.projections[table].astype("<f8").tobytes())
        parts.append(_U32.pack(len(buckets)))
        for key, rows in buckets.items():
            parts.append(_U16.pack(len(key)))
            parts.append(key)
            parts.append(_U32.pack(len(rows)))
            parts.append(ids[rows].astype("<u4").tobytes())
    _atomic_write(Path(path), b"".join(parts))


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = memoryview(data)
        self.pos = 0

    def take(self, size: int) -> memoryview:
        end = self.pos + size
        if end > len(self.data):
            raise IndexFormatError("unexpected end of file")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def unpack(self, fmt: struct.Struct):
        return fmt.unpack(self.take(fmt.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt)


def load_index(path: str | os.PathLike, dataset: Dataset) -> LshIndex:
    """Read an index written by :func:`save_index` and attach ``dataset``.

    Raises:
        IndexFormatError: bad magic, unknown version, truncation, header or
            id mismatch with ``dataset``, or buckets that do not partition
            the dataset.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read index from {path}: {exc.strerror or exc}") from exc
    reader = _Reader(data)

    if len(data) < 4 or bytes(data[:4]) != MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    if len(data) >= 6:
        (version,) = _U16.unpack(data[4:6])
        if version != VERSION:
            raise IndexFormatError(f"{path}: unsupported index version {version}")
    _, _, d, n, hash_size, num_tables, seed, rank_code, prov_code = reader.unpack(_HEADER)

    if (n, d) != (dataset.n, dataset.d):
        raise IndexFormatError(
            f"{path}: index was built for n={n}, d={d}; dataset has n={dataset.n}, d={dataset.d}"
        )
    try:
        rank_space = {v: k for k, v in _RANK_CODES.items()}[rank_code]
        provenance = {v: k for k, v in _PROVENANCE_CODES.items()}[prov_code]
        params = IndexParams(hash_size, num_tables, seed, rank_space)
    except (KeyError, ValueError) as exc:
        raise IndexFormatError(f"{path}: invalid header field ({exc})") from None

    lookup = dataset.id_to_row()
    key_len = params.key_bytes
    matrices = np.empty((num_tables, hash_size, d), dtype=np.float64)
    tables: list[dict[bytes, np.ndarray]] = []
    for table in range(num_tables):
        matrices[table] = reader.array("<f8", hash_size * d).reshape(hash_size, d)
        (bucket_count,) = reader.unpack(_U32)
        buckets: dict[bytes, np.ndarray] = {}
        seen = np.zeros(n, dtype=bool)
        for _ in range(bucket_count):
            (length,) = reader.unpack(_U16)
            if length != key_len:
                raise IndexFormatError(
                    f"{path}: table {table}: key of {length} bytes, expected {key_len}"
                )
            key = bytes(reader.take(length))
            (count,) = reader.unpack(_U32)
            member_ids = reader.array("<u4", count)
            try:
                rows = np.fromiter(
                    (lookup[i] for i in member_ids.tolist()), dtype=np.int64, count=count
                )
            except KeyError as exc:
                raise IndexFormatError(
                    f"{path}: table {table}: id {exc.args[0]} is not in the dataset"
                ) from None
            if key in buckets or count == 0 or seen[rows].any():
                raise IndexFormatError(f"{path}: table {table}: buckets do not partition the ids")
            seen[rows] = True
            buckets[key] = rows
        if not seen.all():
            raise IndexFormatError(f"{path}: table {table}: buckets do not cover every id")
        tables.append(buckets)
    if reader.pos != len(data):
        raise IndexFormatError(f"{path}: {len(data) - reader.pos} trailing bytes")

    try:
        projections = ProjectionSet(matrices, provenance)
    except ValueError as exc:
        raise IndexFormatError(f"{path}: {exc}") from None
    cached = None
    if rank_space is RankSpace.PROJECTED:
        cached = []
        for table in range(num_tables):
            coords = project_dataset(dataset.vectors, projections[table])
            coords.flags.writeable = False
            cached.append(coords)
    return LshIndex(params, projections, tables, dataset, cached)


def save_dataset(dataset: Dataset, path: str | os.PathLike) -> None:
    write_csv(dataset, path)


def load_dataset(path: str | os.PathLike) -> Dataset:
    return load_csv(path)
