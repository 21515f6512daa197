"""
Saving an index for later
=========================

Indexes are written in a small versioned binary format. The vectors
themselves travel separately as a CSV file, which the loader checks the
index against.
"""

import tempfile
from pathlib import Path

from rplsh import (
    IndexParams,
    build_index,
    generate_synthetic,
    load_dataset,
    load_index,
    save_dataset,
    save_index,
)

workdir = Path(tempfile.mkdtemp())
data = generate_synthetic(n=2000, d=32, clusters=4, spread=0.5, seed=11)
index = build_index(data, IndexParams(hash_size=24, num_tables=3, seed=2))

save_dataset(data, workdir / "data.csv")
save_index(index, workdir / "data.lshi")
print("index file:", (workdir / "data.lshi").stat().st_size, "bytes")

reloaded_data = load_dataset(workdir / "data.csv")
reloaded = load_index(workdir / "data.lshi", reloaded_data)
print("identical index:", reloaded == index)

q = data.vector_of(5) + 0.05
print("identical answers:", reloaded.query(q, 10) == index.query(q, 10))
