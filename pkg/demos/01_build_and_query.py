"""
Building an index and querying it
=================================

Hash a clustered dataset into a few random-projection tables, then look up
the neighbours of one of its points.
"""

import numpy as np

from rplsh import IndexParams, build_index, generate_synthetic, knn_exact

# 5000 points in 64 dimensions, spread over 8 Gaussian blobs
data = generate_synthetic(n=5000, d=64, clusters=8, spread=1.0, seed=1)

# 16 hyperplanes per table gives at most 2**16 buckets per table
params = IndexParams(hash_size=16, num_tables=4, seed=7)
index = build_index(data, params)

for t in range(params.num_tables):
    sizes = index.bucket_sizes(t)
    print(f"table {t}: {len(sizes)} buckets, largest {sizes.max()}, mean {sizes.mean():.1f}")

# query with a point that is in the index; it comes back first at distance 0
q = data.vector_of(123)
result = index.query(q, k=5)
print("tables hit:", result.tables_hit, "candidates:", result.num_candidates)
for rank, (point_id, dist) in enumerate(result.entries(), start=1):
    print(f"  {rank}. id={point_id}  projected distance={dist:.3f}")

# the same question answered exactly, for comparison
exact = knn_exact(data, q, k=5)
print("exact neighbours:", exact.ids.tolist())
print("overlap:", len(np.intersect1d(result.ids, exact.ids)), "of 5")
