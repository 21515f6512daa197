"""
Ranking space, tables and recall
================================

Candidates can be ranked by their distance in each table's projected space
(the default) or by their true distance in the original space. More tables
mean more candidates; ranking them in the original space turns that
directly into recall.
"""

import numpy as np

from rplsh import (
    IndexParams,
    build_index,
    generate_synthetic,
    knn_exact,
    recall_at_k,
    set_projections,
)
from rplsh.evaluation import sample_queries

data = generate_synthetic(n=10_000, d=64, clusters=16, spread=1.0, seed=3)
rows = sample_queries(data, 100, seed=3)
queries = data.vectors[rows] + np.random.default_rng(0).normal(0, 0.2, (100, data.d))
truth = [knn_exact(data, q, 10) for q in queries]

print("hash_size  tables  rank_space  recall@10  mean candidates")
for rank_space in ("projected", "original"):
    for tables in (1, 2, 4, 8):
        index = build_index(data, IndexParams(16, tables, seed=5, rank_space=rank_space))
        results = [index.query(q, 10) for q in queries]
        recall = np.mean([recall_at_k(r, e, 10) for r, e in zip(results, truth)])
        cands = np.mean([r.num_candidates for r in results])
        print(f"{16:>9}  {tables:>6}  {rank_space:>10}  {recall:>9.3f}  {cands:>15.1f}")

# With all-zero hyperplanes every point shares one bucket and the query
# degenerates into an exhaustive scan: recall is exactly 1.
params = IndexParams(4, 1, rank_space="original")
flat = build_index(data, params, set_projections(data.d, params, np.zeros((1, 4, data.d))))
print("single-bucket recall:", np.mean([recall_at_k(flat.query(q, 10), e, 10)
                                        for q, e in zip(queries, truth)]))
