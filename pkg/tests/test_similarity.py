import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _graphs import complete, cycle, path, star
from graphop.datagen import BAParams, generate_dataset
from graphop.errors import ConfigError, GraphOpError
from graphop.graph import Graph, GraphDataset, degree_vectors
from graphop.partition import (bhattacharyya, build_partitioner, build_tree, project)
from graphop.similarity import (MeasureConfig, SimilarityMatrix, all_pairs_matrix, cluster_dataset,
                                clustered_matrix, compose, degree_similarity, export_csv,
                                load_matrix, prepare_measure, save_matrix, vertex_count_similarity)


def complete_bipartite(a, b):
    return Graph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


@pytest.fixture(scope="module")
def ba50():
    return generate_dataset(50, BAParams(200, 1, 8), seed=3)


# -- partitioner / histograms ---------------------------------------------------

def test_single_leaf_when_capacity_covers_sample():
    ds = GraphDataset([cycle(7)])
    p = build_partitioner(ds, 0, sample_ratio=1.0, leaf_capacity=7)
    assert p.leaf_count == 1
    assert project(cycle(7), p).tolist() == [1.0]


def test_level_zero_tree_is_one_dimensional():
    ds = GraphDataset([star(5), path(6)])
    p = build_partitioner(ds, 0, sample_ratio=1.0, leaf_capacity=1)
    assert p.dims == 1
    # distinct degrees {1, 2, 5} -> three cells
    assert p.leaf_count == 3


def test_disjoint_degree_ranges_give_disjoint_support():
    low, high = path(30), complete_bipartite(100, 200)
    assert set(low.degrees.tolist()) == {1, 2}
    assert set(high.degrees.tolist()) == {100, 200}
    p = build_partitioner(GraphDataset([low, high]), 0, sample_ratio=1.0, leaf_capacity=1)
    q, r = project(low, p), project(high, p)
    assert not (q > 0)[r > 0].any()
    assert bhattacharyya(q, r) == 0.0


def test_tree_routes_every_point_to_one_leaf():
    rng = np.random.default_rng(0)
    pts = rng.integers(0, 20, size=(500, 3))
    tree = build_tree(pts, 8, 2)
    probe = rng.integers(-50, 80, size=(2000, 3))
    leaves = tree.route(probe)
    assert leaves.min() >= 0 and leaves.max() < tree.leaf_count
    # each sampled point lands in a leaf holding <= capacity distinct sample positions
    counts = np.bincount(tree.route(pts), minlength=tree.leaf_count)
    assert counts.sum() == 500


def test_tree_leaves_respect_capacity_for_distinct_points():
    pts = np.arange(100, dtype=float).reshape(-1, 1)
    tree = build_tree(pts, 4, 0)
    assert np.bincount(tree.route(pts)).max() <= 4


def test_empty_sample_rejected():
    with pytest.raises(GraphOpError):
        build_tree(np.empty((0, 1)), 4, 0)


def test_regular_graph_histogram_has_one_cell(ba50):
    p = build_partitioner(ba50, 1, sample_ratio=0.5, leaf_capacity=4)
    h = project(cycle(12), p)
    assert h.max() == 1.0 and (h > 0).sum() == 1
    assert np.array_equal(project(ba50[0], p), project(ba50[0], p))


def test_partitioner_deterministic(ba50):
    a = build_partitioner(ba50, 2, 0.2, 16, seed=9)
    b = build_partitioner(ba50, 2, 0.2, 16, seed=9)
    assert np.array_equal(a.threshold, b.threshold) and np.array_equal(a.axis, b.axis)


def test_bhattacharyya():
    assert bhattacharyya([0.25, 0.75], [0.25, 0.75]) == pytest.approx(1.0)
    assert bhattacharyya([1, 0], [0, 1]) == 0.0
    assert bhattacharyya([0.5, 0.5], [1, 0]) == pytest.approx(math.sqrt(0.5))
    with pytest.raises(GraphOpError):
        bhattacharyya([1.0], [0.5, 0.5])


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=40))
def test_bhattacharyya_bounded(pairs):
    q = np.array([a for a, _ in pairs])
    r = np.array([b for _, b in pairs])
    if q.sum() == 0 or r.sum() == 0:
        return
    bc = bhattacharyya(q / q.sum(), r / r.sum())
    assert -1e-12 <= bc <= 1 + 1e-12


# -- pairwise measures ----------------------------------------------------------

def test_degree_similarity():
    g, h = star(10), cycle(10)
    relabeled = Graph.from_edges(10, [((a + 3) % 10, (b + 3) % 10) for a, b in star(9).edges.tolist()])
    p = build_partitioner(GraphDataset([g, h]), 0, sample_ratio=1.0, leaf_capacity=1)
    assert degree_similarity(g, g, p) == pytest.approx(1.0, abs=1e-12)
    assert degree_similarity(star(9), relabeled, p) == pytest.approx(1.0, abs=1e-12)
    s = degree_similarity(g, h, p)
    assert 0.0 <= s < 1.0


def test_vertex_count_similarity():
    assert vertex_count_similarity(path(5), cycle(5)) == 1.0
    assert vertex_count_similarity(path(50), path(100)) == 0.5
    ba = generate_dataset(3, BAParams(40, 1, 4), seed=0)
    assert vertex_count_similarity(ba[0], ba[2]) == 1.0


def test_measure_config_parse():
    assert MeasureConfig.parse("level2").max_level == 2
    combo = MeasureConfig.parse("level0+size")
    assert combo.kind == "composite" and combo.weights == (0.5, 0.5)
    assert combo.name == "level0+size"
    with pytest.raises(ConfigError):
        MeasureConfig.parse("level0+size", weights=[0.7, 0.7])
    with pytest.raises(ConfigError):
        MeasureConfig.parse("edit-distance")


# -- matrices -------------------------------------------------------------------

def check_invariants(R: SimilarityMatrix):
    M = R.to_dense()
    assert np.array_equal(M, M.T)
    assert np.all(np.diag(M) == 1.0)
    assert M.min() >= 0.0 and M.max() <= 1.0


def test_compose_examples():
    a = SimilarityMatrix.dense(np.array([[1.0, 0.8], [0.8, 1.0]]))
    b = SimilarityMatrix.dense(np.array([[1.0, 0.4], [0.4, 1.0]]))
    assert np.array_equal(compose([a], [1.0]).to_dense(), a.to_dense())
    np.testing.assert_allclose(compose([a, a], [0.5, 0.5]).to_dense(), a.to_dense(), atol=1e-15)
    assert compose([a, b], [0.5, 0.5])[0, 1] == pytest.approx(0.6)
    with pytest.raises(ConfigError):
        compose([a, b], [0.5, 0.6])
    with pytest.raises(GraphOpError):
        compose([a, SimilarityMatrix.dense(np.eye(3))], [0.5, 0.5])


@settings(max_examples=30)
@given(st.integers(2, 6), st.floats(0, 1), st.randoms(use_true_random=False))
def test_compose_preserves_invariants(n, w, rnd):
    mats = []
    for _ in range(2):
        M = np.array([[rnd.random() for _ in range(n)] for _ in range(n)])
        M = np.triu(M, 1)
        M = M + M.T + np.eye(n)
        mats.append(SimilarityMatrix.dense(M))
    check_invariants(compose(mats, [w, 1 - w]))


def test_all_pairs_single_and_identical():
    one = all_pairs_matrix(GraphDataset([path(4)]), MeasureConfig())
    assert one.to_dense().tolist() == [[1.0]]
    same = all_pairs_matrix(GraphDataset([cycle(6)] * 4), MeasureConfig(sample_ratio=1.0))
    np.testing.assert_allclose(same.to_dense(), np.ones((4, 4)), atol=1e-12)


@pytest.mark.parametrize("measure", ["level0", "level1", "level2", "size", "level0+size"])
def test_all_pairs_invariants(ba50, measure):
    cfg = MeasureConfig.parse(measure, sample_ratio=0.3, leaf_capacity=8, seed=1)
    R = all_pairs_matrix(ba50, cfg)
    check_invariants(R)
    assert R.evaluations == 50 * 49 // 2
    scorer = prepare_measure(ba50, cfg)
    for i in range(len(ba50)):
        assert abs(scorer.score(i, np.array([i]))[0] - 1.0) <= 1e-9


def test_all_pairs_matches_pairwise_function(ba50):
    cfg = MeasureConfig(max_level=1, sample_ratio=0.3, leaf_capacity=8, seed=4)
    R = all_pairs_matrix(ba50, cfg)
    vectors = [degree_vectors(g, 1) for g in ba50]
    p = build_partitioner(ba50, 1, 0.3, 8, seed=4, vectors=vectors)
    for i, j in [(0, 1), (5, 17), (49, 3)]:
        assert R[i, j] == pytest.approx(degree_similarity(ba50[i], ba50[j], p), abs=1e-15)
        assert R[i, j] == R[j, i]


def test_composite_matrix_equals_composed_children(ba50):
    kw = dict(sample_ratio=0.3, leaf_capacity=8, seed=2)
    combo = all_pairs_matrix(ba50, MeasureConfig.parse("level0+size", **kw))
    parts = [all_pairs_matrix(ba50, MeasureConfig.parse(m, **kw)) for m in ("level0", "size")]
    assert np.array_equal(combo.to_dense(), compose(parts, [0.5, 0.5]).to_dense())


def test_workers_do_not_change_matrix(ba50):
    cfg = MeasureConfig(max_level=1, sample_ratio=0.3, leaf_capacity=8)
    a = all_pairs_matrix(ba50, cfg, workers=1).to_dense()
    b = all_pairs_matrix(ba50, cfg, workers=3).to_dense()
    assert a.tobytes() == b.tobytes()


# -- clustering -----------------------------------------------------------------

def test_cluster_extremes(ba50):
    cfg = MeasureConfig(sample_ratio=0.3)
    every = cluster_dataset(ba50, 50, cfg, seed=0)
    assert sorted(every.labels.tolist()) == list(range(50))
    single = cluster_dataset(ba50, 1, cfg, seed=0)
    assert set(single.labels.tolist()) == {0}
    with pytest.raises(ConfigError):
        cluster_dataset(ba50, 51, cfg)


def test_clustering_separates_families():
    rng = np.random.default_rng(1)
    k12 = complete(12).edges.tolist()
    near_cliques = [Graph.from_edges(12, [e for e in k12 if rng.random() > 0.05]) for _ in range(7)]
    trees = [Graph.from_edges(12, [(v, int(rng.integers(v))) for v in range(1, 12)]) for _ in range(8)]
    ds = GraphDataset(near_cliques + trees)
    clus = cluster_dataset(ds, 2, MeasureConfig(sample_ratio=1.0, leaf_capacity=1), seed=3)
    a = set(clus.labels[:7].tolist())
    b = set(clus.labels[7:].tolist())
    assert len(a) == 1 and len(b) == 1 and a != b


def test_clustered_matrix_extremes(ba50):
    cfg = MeasureConfig(max_level=1, sample_ratio=0.3, leaf_capacity=8, seed=5)
    dense = all_pairs_matrix(ba50, cfg)
    one = clustered_matrix(ba50, cfg, c=1, seed=5)
    assert np.array_equal(one.to_dense(), dense.to_dense())
    diag = clustered_matrix(ba50, cfg, c=50, seed=5)
    assert np.array_equal(diag.to_dense(), np.eye(50))
    check_invariants(clustered_matrix(ba50, cfg, c=7, seed=5))


def test_clustered_matrix_zero_across_clusters(ba50):
    R = clustered_matrix(ba50, MeasureConfig(sample_ratio=0.3), c=5, seed=8)
    M = R.to_dense()
    cross = R.labels[:, None] != R.labels[None, :]
    assert np.all(M[cross] == 0)
    sizes = np.bincount(R.labels)
    assert R.evaluations == 5 * 50 + int((sizes * (sizes - 1) // 2).sum())
    assert np.array_equal(R.row(3), M[3])


def test_clustered_matrix_evaluation_budget():
    ds = generate_dataset(1024, BAParams(60, 1, 6), seed=12)
    R = clustered_matrix(ds, MeasureConfig(), c=32, seed=1)
    assert R.evaluations <= 0.25 * 1024 * 1023 / 2


# -- persistence ----------------------------------------------------------------

@pytest.mark.parametrize("clustered", [False, True])
def test_matrix_file_round_trip(tmp_path, ba50, clustered):
    cfg = MeasureConfig(sample_ratio=0.3)
    R = clustered_matrix(ba50, cfg, c=6, seed=1) if clustered else all_pairs_matrix(ba50, cfg)
    save_matrix(R, tmp_path / "m.bin")
    back = load_matrix(tmp_path / "m.bin")
    assert back.structure == R.structure
    assert back.evaluations == R.evaluations
    assert np.array_equal(back.to_dense(), R.to_dense())
    if clustered:
        assert np.array_equal(back.labels, R.labels)
    raw = (tmp_path / "m.bin").read_bytes()
    assert raw[:8] == b"GSIMMAT\0"
    assert int.from_bytes(raw[12:20], "little") == 50


def test_matrix_file_rejects_garbage(tmp_path):
    (tmp_path / "bad.bin").write_bytes(b"not a matrix at all")
    with pytest.raises(GraphOpError):
        load_matrix(tmp_path / "bad.bin")


def test_csv_export(tmp_path):
    R = SimilarityMatrix.dense(np.array([[1.0, 0.25], [0.25, 1.0]]))
    export_csv(R, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines() == [
        "2", "0,0,1.0", "0,1,0.25", "1,0,0.25", "1,1,1.0"]
