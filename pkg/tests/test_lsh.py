import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rplsh import (
    Dataset,
    IndexParams,
    Provenance,
    RankSpace,
    build_index,
    decode_key,
    encode_key,
    generate_projections,
    generate_synthetic,
    knn_exact,
    project,
    query,
    recall_at_k,
    set_projections,
    signature,
)
from rplsh._kernels import project_rows


def naive_dot(vector, rows):
    out = []
    for row in rows:
        s = 0.0
        for a, b in zip(row, vector):
            s += a * b
        out.append(s)
    return out


def zero_index(ds, hash_size=3, tables=2, rank_space=RankSpace.ORIGINAL):
    params = IndexParams(hash_size, tables, seed=0, rank_space=rank_space)
    zeros = np.zeros((tables, hash_size, ds.d))
    return build_index(ds, params, set_projections(ds.d, params, zeros))


# projections ----------------------------------------------------------------


def test_projections_deterministic():
    params = IndexParams(hash_size=2, num_tables=2, seed=9)
    a = generate_projections(3, params)
    b = generate_projections(3, params)
    assert a == b
    assert a.matrices.tobytes() == b.matrices.tobytes()
    assert a.provenance is Provenance.GAUSSIAN_SEEDED


def test_projections_differ_between_tables():
    p = generate_projections(3, IndexParams(hash_size=2, num_tables=2, seed=9))
    assert not np.array_equal(p[0], p[1])


def test_projections_standard_normal_moments():
    m = generate_projections(50, IndexParams(hash_size=16, num_tables=1, seed=3)).matrices
    assert m.size == 800
    assert abs(m.mean()) < 0.15
    assert abs(m.var() - 1.0) < 0.25


def test_adding_tables_keeps_existing_ones():
    small = generate_projections(8, IndexParams(4, 2, seed=5))
    large = generate_projections(8, IndexParams(4, 5, seed=5))
    assert np.array_equal(small.matrices, large.matrices[:2])


def test_set_projections_shape_checked():
    params = IndexParams(2, 1)
    with pytest.raises(ValueError, match="does not match"):
        set_projections(3, params, np.zeros((1, 2, 4)))
    p = set_projections(3, params, np.ones((1, 2, 3)))
    assert p.provenance is Provenance.EXPLICIT
    assert (p.matrices == 1.0).all()


@pytest.mark.parametrize("bad", [dict(hash_size=0), dict(hash_size=1, num_tables=0),
                                 dict(hash_size=1, seed=-1), dict(hash_size=1, seed=2**64)])
def test_params_validated(bad):
    with pytest.raises(ValueError):
        IndexParams(**bad)


# project / signature / keys --------------------------------------------------


def test_project_by_hand():
    assert project([1, 2], [[1, 0], [0, 1], [1, 1]]).tolist() == [1.0, 2.0, 3.0]


def test_project_zero_vector():
    m = np.random.default_rng(1).standard_normal((5, 4))
    assert project(np.zeros(4), m).tolist() == [0.0] * 5


def test_project_matches_naive_loop():
    rng = np.random.default_rng(2)
    v, m = rng.standard_normal(10), rng.standard_normal((6, 10))
    expected = naive_dot(v.tolist(), m.tolist())
    np.testing.assert_allclose(project(v, m), expected, rtol=1e-12)


def test_project_rejects_overflow_and_mismatch():
    with pytest.raises(ValueError, match="non-finite"):
        project([1e308, 1e308], [[10.0, 10.0]])
    with pytest.raises(ValueError):
        project([1.0, 2.0], [[1.0, 2.0, 3.0]])


def test_batch_projection_is_row_consistent():
    rng = np.random.default_rng(4)
    rows, planes = rng.standard_normal((300, 37)), rng.standard_normal((19, 37))
    batch = project_rows(rows, planes)
    for i in range(0, 300, 13):
        assert batch[i].tobytes() == project(rows[i], planes).tobytes()
    assert batch.tobytes() == project_rows(rows, planes, use_numba=False).tobytes()


def test_signature_examples():
    assert signature([1.0, -2.0, 3.0]).tolist() == [True, False, True]
    assert signature([0.0, 0.0]).tolist() == [True, True]
    assert signature([-1e-300, 1e-300]).tolist() == [False, True]
    assert signature([-0.0]).tolist() == [True]


def test_encode_examples():
    assert encode_key([1, 0, 1]) == b"\xa0"
    assert encode_key([0] * 8) == b"\x00"
    key = encode_key([1] * 250)
    # 248 bits fill 31 bytes; the last byte holds 2 set bits then 6 zero pad bits
    assert key == b"\xff" * 31 + b"\xc0"
    assert len(key) == 32


@settings(max_examples=200)
@given(st.lists(st.booleans(), min_size=1, max_size=300))
def test_key_roundtrip_and_padding(bits):
    key = encode_key(bits)
    assert len(key) == (len(bits) + 7) // 8
    assert decode_key(key, len(bits)).tolist() == bits
    pad = 8 * len(key) - len(bits)
    assert key[-1] & ((1 << pad) - 1) == 0


@settings(max_examples=100)
@given(st.integers(1, 40).flatmap(
    lambda n: st.tuples(st.lists(st.booleans(), min_size=n, max_size=n),
                        st.lists(st.booleans(), min_size=n, max_size=n))))
def test_key_injective(pair):
    a, b = pair
    assert (encode_key(a) == encode_key(b)) == (a == b)


def test_axis_aligned_hyperplanes():
    ds = Dataset([0, 1, 2], [[1.0, -1.0, 0.0], [-2.0, 3.0, -0.5], [0.0, 0.0, 0.0]])
    params = IndexParams(hash_size=3, num_tables=1)
    idx = build_index(ds, params, set_projections(3, params, np.eye(3)[None]))
    buckets = idx.bucket_ids(0)
    for key, members in buckets.items():
        for i in members:
            expected = (ds.vector_of(i) >= 0).tolist()
            assert decode_key(key, 3).tolist() == expected


# build ------------------------------------------------------------------------


def test_single_point_index():
    ds = Dataset([42], [[1.0, 2.0, 3.0]])
    idx = build_index(ds, IndexParams(8, 3, seed=1))
    for t in range(3):
        assert idx.bucket_ids(t) == {next(iter(idx.tables[t])): [42]}


def test_zero_projections_single_bucket():
    ds = generate_synthetic(100, 5, 3, 1.0, seed=0)
    idx = zero_index(ds)
    for t in range(2):
        (key,) = idx.tables[t]
        assert key == b"\xe0"  # three set bits
        assert idx.bucket_ids(t)[key] == list(range(100))


def test_build_rejects_mismatched_projections(blobs):
    params = IndexParams(4, 1)
    bad = set_projections(5, params, np.ones((1, 4, 5)))
    with pytest.raises(ValueError, match="dimension"):
        build_index(blobs, params, bad)


def test_build_deterministic(blobs):
    params = IndexParams(10, 3, seed=21)
    assert build_index(blobs, params) == build_index(blobs, params)
    explicit = set_projections(blobs.d, params, np.random.default_rng(0).standard_normal((3, 10, 12)))
    assert build_index(blobs, params, explicit) == build_index(blobs, params, explicit)


def test_buckets_keep_dataset_order(blobs):
    idx = build_index(blobs, IndexParams(3, 1, seed=2))
    firsts = [rows[0] for rows in idx.tables[0].values()]
    assert firsts == sorted(firsts)
    for rows in idx.tables[0].values():
        assert np.all(np.diff(rows) > 0)


def test_occupancy_near_model_on_centered_gaussian():
    ds = generate_synthetic(4096, 16, clusters=1, spread=1.0, seed=8, centered=True)
    idx = build_index(ds, IndexParams(4, 1, seed=8))
    sizes = idx.bucket_sizes(0)
    assert len(sizes) <= 16
    assert 256 / 3 <= sizes.mean() <= 256 * 3


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 80), st.integers(1, 6), st.integers(1, 20), st.integers(1, 3),
       st.integers(0, 2**32))
def test_partition_and_bucket_bound(n, d, hash_size, tables, seed):
    ds = generate_synthetic(n, d, clusters=1, spread=1.0, seed=seed, centered=True)
    idx = build_index(ds, IndexParams(hash_size, tables, seed))
    for t in range(tables):
        members = np.concatenate(list(idx.tables[t].values()))
        assert np.array_equal(np.sort(members), np.arange(n))
        assert len(idx.tables[t]) <= min(n, 2**hash_size)
        assert all(len(k) == (hash_size + 7) // 8 for k in idx.tables[t])


# query --------------------------------------------------------------------------


@pytest.mark.parametrize("rank_space", list(RankSpace))
def test_self_retrieval(blobs, rank_space):
    idx = build_index(blobs, IndexParams(16, 3, seed=4, rank_space=rank_space))
    for row in (0, 17, 599):
        res = query(idx, blobs.vectors[row], k=5)
        assert res.ids[0] == blobs.ids[row]
        assert res.distances[0] == 0.0
        assert res.tables_hit == 3


def test_zero_projections_equal_oracle(blobs):
    idx = zero_index(blobs)
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = rng.normal(0, 5, blobs.d)
        for k in (1, 5, 10, 600, 1000):
            got = query(idx, q, k)
            exact = knn_exact(blobs, q, k)
            assert got.ids.tolist() == exact.ids.tolist()
            assert got.distances.tobytes() == exact.distances.tobytes()
            assert got.num_candidates == blobs.n


def test_more_tables_raise_recall_on_tight_clusters():
    ds = generate_synthetic(5000, 16, clusters=5, spread=0.1, seed=3)
    centers = generate_synthetic(5, 16, clusters=5, spread=0.0, seed=3).vectors
    queries = [centers[j % 5] for j in range(100)]
    truths = [knn_exact(ds, q, 10) for q in queries]

    def mean_recall(tables):
        idx = build_index(ds, IndexParams(16, tables, seed=11))
        return np.mean([recall_at_k(query(idx, q, 10), e, 10) for q, e in zip(queries, truths)])

    assert mean_recall(4) > mean_recall(1)


def test_empty_bucket_gives_empty_list():
    ds = Dataset([0, 1], [[1.0, 1.0], [2.0, 2.0]])
    params = IndexParams(2, 1)
    idx = build_index(ds, params, set_projections(2, params, np.eye(2)[None]))
    res = query(idx, [-1.0, -1.0], 3)
    assert len(res) == 0 and res.tables_hit == 0 and res.num_candidates == 0


def test_fewer_candidates_than_k_not_padded():
    ds = Dataset([0, 1, 2], [[1.0, 1.0], [2.0, 2.0], [-1.0, -1.0]])
    params = IndexParams(2, 1, rank_space=RankSpace.ORIGINAL)
    idx = build_index(ds, params, set_projections(2, params, np.eye(2)[None]))
    res = query(idx, [3.0, 3.0], 10)
    assert res.ids.tolist() == [1, 0]
    assert res.num_candidates == 2


def test_projected_merge_keeps_min_distance():
    # table 0 sees the candidate along x, table 1 along y; query at origin
    ds = Dataset([5], [[3.0, 4.0]])
    params = IndexParams(1, 2)
    mats = np.array([[[1.0, 0.0]], [[0.0, 1.0]]])
    idx = build_index(ds, params, set_projections(2, params, mats))
    res = query(idx, [0.0, 0.0], 1)
    assert res.entries() == [(5, 3.0)]
    assert res.tables_hit == 2


def test_query_validation(blobs):
    idx = build_index(blobs, IndexParams(4, 1))
    with pytest.raises(ValueError):
        query(idx, np.zeros(blobs.d + 1), 3)
    with pytest.raises(ValueError):
        query(idx, np.zeros(blobs.d), 0)


def test_query_deterministic(blobs):
    idx = build_index(blobs, IndexParams(6, 2, seed=1))
    q = blobs.vectors[3] + 0.01
    assert query(idx, q, 7) == query(idx, q, 7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 12), st.integers(1, 5), st.integers(1, 30),
       st.sampled_from(list(RankSpace)))
def test_query_properties(seed, hash_size, tables, k, rank_space):
    ds = generate_synthetic(150, 6, clusters=3, spread=2.0, seed=seed, centered=True)
    rng = np.random.default_rng(seed)
    q = rng.normal(0, 3, 6)
    full = build_index(ds, IndexParams(hash_size, tables, seed, rank_space))
    res = query(full, q, k)

    assert len(set(res.ids.tolist())) == len(res)
    order = np.lexsort((res.ids, res.distances))
    assert np.array_equal(order, np.arange(len(res)))

    # every candidate shares the query's bucket in at least one table
    member_sets = []
    for t in range(tables):
        key = encode_key(signature(project(q, full.projections[t])))
        member_sets.append(set(full.bucket_ids(t).get(key, [])))
    union = set().union(*member_sets)
    assert set(res.ids.tolist()) <= union
    assert res.num_candidates == len(union)
    assert res.tables_hit == sum(bool(s) for s in member_sets)

    # a prefix of the tables yields a subset of the candidates
    fewer = build_index(ds, IndexParams(hash_size, max(1, tables - 1), seed, rank_space))
    everything = query(fewer, q, 10_000)
    assert set(everything.ids.tolist()) <= set(query(full, q, 10_000).ids.tolist())
