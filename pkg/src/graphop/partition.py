"""k-d tree space partitioning of level-degree vectors into histogram cells."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GraphOpError
from .graph import Graph, GraphDataset, degree_vectors


@dataclass(frozen=True)
class DegreePartitioner:
    """Median-split k-d tree; every point of R^dims lands in exactly one leaf.

    Internal node ``i`` sends a point left when ``x[axis[i]] <= threshold[i]``.
    Leaves have ``axis == -1`` and carry their cell number in ``leaf``.
    """
    max_level: int
    axis: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf: np.ndarray
    sample_size: int

    @property
    def dims(self) -> int:
        return self.max_level + 1

    @property
    def leaf_count(self) -> int:
        return int(self.leaf.max()) + 1

    def route(self, points: np.ndarray) -> np.ndarray:
        """Leaf number of each row of ``points``."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.dims)
        node = np.zeros(len(points), dtype=np.int64)
        rows = np.arange(len(points))
        while True:
            inner = self.axis[node] >= 0
            if not inner.any():
                return self.leaf[node]
            idx = rows[inner]
            cur = node[idx]
            go_left = points[idx, self.axis[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])


def _split_value(vals: np.ndarray):
    """Lower-median cut that leaves both sides non-empty, or None."""
    mid = (len(vals) - 1) // 2
    t = np.partition(vals, mid)[mid]
    if t >= vals.max():
        below = vals[vals < t]
        if below.size == 0:
            return None
        t = below.max()
    return t


def build_tree(points: np.ndarray, leaf_capacity: int, max_level: int) -> DegreePartitioner:
    if leaf_capacity < 1:
        raise GraphOpError("leaf_capacity must be at least 1")
    points = np.asarray(points, dtype=np.float64).reshape(-1, max_level + 1)
    if len(points) == 0:
        raise GraphOpError("cannot build a partitioner from an empty sample")
    dims = points.shape[1]
    axis, thr, left, right, leaf = [], [], [], [], []
    n_leaves = 0

    def new_node():
        for lst, v in ((axis, -1), (thr, 0.0), (left, -1), (right, -1), (leaf, -1)):
            lst.append(v)
        return len(axis) - 1

    # Iterative pre-order construction keeps leaf numbering left-to-right.
    root = new_node()
    stack = [(root, np.arange(len(points)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        split = None
        if len(idx) > leaf_capacity:
            for k in range(dims):
                ax = (depth + k) % dims
                t = _split_value(points[idx, ax])
                if t is not None:
                    split = ax, t
                    break
        if split is None:
            leaf[node] = n_leaves
            n_leaves += 1
            continue
        ax, t = split
        mask = points[idx, ax] <= t
        lo, hi = new_node(), new_node()
        axis[node], thr[node], left[node], right[node] = ax, float(t), lo, hi
        stack.append((hi, idx[~mask], depth + 1))
        stack.append((lo, idx[mask], depth + 1))

    return DegreePartitioner(
        max_level=max_level,
        axis=np.array(axis, dtype=np.int64),
        threshold=np.array(thr, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        leaf=np.array(leaf, dtype=np.int64),
        sample_size=len(points),
    )


def sample_vectors(vectors: list[np.ndarray], sample_ratio: float, seed: int) -> np.ndarray:
    """Uniform sample (without replacement) of ``ceil(ratio * total)`` rows."""
    if not 0.0 < sample_ratio <= 1.0:
        raise GraphOpError(f"sample_ratio must lie in (0, 1], got {sample_ratio}")
    allv = np.concatenate(vectors, axis=0)
    if len(allv) == 0:
        raise GraphOpError("dataset has no vertices to sample")
    size = max(1, int(np.ceil(round(sample_ratio * len(allv), 9))))
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(len(allv), size=size, replace=False))
    return allv[pick]


def build_partitioner(dataset: GraphDataset, max_level: int = 0, sample_ratio: float = 0.1,
                      leaf_capacity: int = 32, seed: int = 0,
                      vectors: list[np.ndarray] | None = None) -> DegreePartitioner:
    """Build the shared k-d tree from a vertex sample across the whole dataset.

    ``vectors`` may carry precomputed ``degree_vectors`` for each graph.
    """
    if vectors is None:
        vectors = [degree_vectors(g, max_level) for g in dataset]
    sample = sample_vectors(vectors, sample_ratio, seed)
    return build_tree(sample, leaf_capacity, max_level)


def histogram_from_vectors(vectors: np.ndarray, p: DegreePartitioner) -> np.ndarray:
    counts = np.bincount(p.route(vectors), minlength=p.leaf_count).astype(np.float64)
    total = counts.sum()
    return counts / total if total else counts


def project(g: Graph, p: DegreePartitioner) -> np.ndarray:
    """Normalized histogram of ``g``'s level-degree vectors over the leaves of ``p``."""
    return histogram_from_vectors(degree_vectors(g, p.max_level), p)


def bhattacharyya(q, r) -> float:
    """Bhattacharyya coefficient ``sum(sqrt(q_i * r_i))`` of two histograms."""
    q = np.asarray(q, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if q.shape != r.shape:
        raise GraphOpError(f"histogram length mismatch: {q.shape} vs {r.shape}")
    return float(np.sqrt(q * r).sum())
