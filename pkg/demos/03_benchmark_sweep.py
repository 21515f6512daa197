"""
Sweeping hash size and table count
==================================

Reproduces the shape of the build-time, query-time and ordering-accuracy
trends on a desk-sized synthetic dataset. Output is plot-ready CSV; pass a
path as the first argument to write it to a file.
"""

import sys

from rplsh import Experiment, generate_synthetic, run_benchmark
from rplsh.evaluation import records_to_csv

data = generate_synthetic(n=20_000, d=128, clusters=16, spread=1.0, seed=1)
records = run_benchmark(data, hash_sizes=[4, 8, 16, 32, 64], num_tables=[1, 4],
                        num_queries=100, seed=1)

csv_text = records_to_csv(records)
if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(csv_text)

# a compact table for the terminal
by_cell = {}
for rec in records:
    by_cell.setdefault((rec.hash_size, rec.num_tables), {})[rec.experiment] = rec.value
print("h   t  build ms/table  query us  accuracy  recall  candidates")
for (h, t), v in sorted(by_cell.items()):
    print(f"{h:<3} {t:<2} {v[Experiment.BUILD_TIME] * 1e3:>14.1f} "
          f"{v[Experiment.QUERY_TIME] * 1e6:>9.1f} {v[Experiment.ACCURACY]:>9.3f} "
          f"{v[Experiment.RECALL]:>7.3f} {v[Experiment.CANDIDATE_COUNT]:>11.1f}")
