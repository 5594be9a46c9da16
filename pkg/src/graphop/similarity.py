"""Graph similarity measures and similarity-matrix construction.

A matrix is stored as a list of symmetric blocks, one per cluster. The dense
(all-pairs) case is a single block spanning the dataset; in the clustered
case every cross-cluster entry is implicitly zero.
"""
from __future__ import annotations

import math
import re
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, GraphOpError
from .graph import Graph, GraphDataset, degree_vectors
from .parallel import map_ordered
from .partition import DegreePartitioner, build_tree, histogram_from_vectors, project, sample_vectors


@dataclass(frozen=True)
class MeasureConfig:
    """Which similarity to compute.

    ``kind`` is ``"degree"`` (leveled degree distributions up to
    ``max_level``), ``"vertex-count"`` or ``"composite"`` (weighted sum of
    ``children``).
    """
    kind: str = "degree"
    max_level: int = 0
    children: tuple["MeasureConfig", ...] = ()
    weights: tuple[float, ...] = ()
    sample_ratio: float = 0.1
    leaf_capacity: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("degree", "vertex-count", "composite"):
            raise ConfigError(f"unknown measure kind {self.kind!r}")
        if self.kind == "composite":
            _check_weights(self.weights, len(self.children))
        if self.max_level < 0:
            raise ConfigError("max_level must be non-negative")

    @classmethod
    def parse(cls, text: str, weights=None, **kw) -> "MeasureConfig":
        """Build a config from names like ``level0``, ``size`` or ``level0+size``."""
        parts = [s.strip() for s in text.split("+") if s.strip()]
        if not parts:
            raise ConfigError("empty measure name")
        children = []
        for name in parts:
            m = re.fullmatch(r"level(\d+)", name)
            if m:
                children.append(cls("degree", max_level=int(m.group(1)), **kw))
            elif name in ("size", "vertex-count"):
                children.append(cls("vertex-count", **kw))
            else:
                raise ConfigError(f"unknown measure {name!r}")
        if len(children) == 1:
            if weights is not None and tuple(weights) != (1.0,):
                raise ConfigError("weights given for a single measure")
            return children[0]
        if weights is None:
            weights = (1.0 / len(children),) * len(children)
        return cls("composite", children=tuple(children), weights=tuple(float(w) for w in weights), **kw)

    @property
    def name(self) -> str:
        if self.kind == "degree":
            return f"level{self.max_level}"
        if self.kind == "vertex-count":
            return "size"
        return "+".join(c.name for c in self.children)


def _check_weights(weights, count):
    w = np.asarray(weights, dtype=np.float64)
    if len(w) != count or count == 0:
        raise ConfigError(f"expected {count} weights, got {len(w)}")
    if (w < 0).any() or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
        raise ConfigError(f"weights must be non-negative and sum to 1, got {list(weights)}")


# -- pairwise measures ----------------------------------------------------------

def vertex_count_similarity(a: Graph, b: Graph) -> float:
    na, nb = a.vertex_count, b.vertex_count
    if na == 0 or nb == 0:
        raise GraphOpError("vertex-count similarity is undefined for empty graphs")
    return min(na, nb) / max(na, nb)


def degree_similarity(a: Graph, b: Graph, p: DegreePartitioner) -> float:
    return float(np.sqrt(project(a, p) * project(b, p)).sum())


class _Scorer:
    """Measure prepared for one dataset: ``score(i, js)`` gives ``s(G_i, G_j)`` for each j."""

    def score(self, i: int, js: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class _DegreeScorer(_Scorer):
    def __init__(self, hist: np.ndarray, partitioner: DegreePartitioner):
        self.hist = hist
        self.partitioner = partitioner

    def score(self, i, js):
        return np.clip(np.sqrt(self.hist[i] * self.hist[js]).sum(axis=1), 0.0, 1.0)


class _SizeScorer(_Scorer):
    def __init__(self, sizes: np.ndarray):
        if (sizes == 0).any():
            raise GraphOpError("vertex-count similarity is undefined for empty graphs")
        self.sizes = sizes.astype(np.float64)

    def score(self, i, js):
        a, b = self.sizes[i], self.sizes[js]
        return np.minimum(a, b) / np.maximum(a, b)


class _CompositeScorer(_Scorer):
    def __init__(self, children, weights):
        self.children = children
        self.weights = weights

    def score(self, i, js):
        out = np.zeros(len(js))
        for w, child in zip(self.weights, self.children):
            out = out + w * child.score(i, js)
        return np.clip(out, 0.0, 1.0)


def prepare_measure(dataset: GraphDataset, cfg: MeasureConfig, workers: int = 1) -> _Scorer:
    """Extract per-graph features (degree histograms, sizes) for ``cfg``."""
    if cfg.kind == "vertex-count":
        return _SizeScorer(np.array([g.vertex_count for g in dataset]))
    if cfg.kind == "composite":
        return _CompositeScorer([prepare_measure(dataset, c, workers) for c in cfg.children],
                                cfg.weights)
    vectors = map_ordered(_vectors_task, [(g, cfg.max_level) for g in dataset], workers)
    sample = sample_vectors(vectors, cfg.sample_ratio, cfg.seed)
    p = build_tree(sample, cfg.leaf_capacity, cfg.max_level)
    hist = np.stack([histogram_from_vectors(v, p) for v in vectors])
    return _DegreeScorer(hist, p)


def _vectors_task(args):
    g, level = args
    return degree_vectors(g, level)


# -- matrices -------------------------------------------------------------------

@dataclass
class SimilarityMatrix:
    """Symmetric similarity scores in ``[0, 1]`` with unit diagonal.

    ``labels`` is ``None`` for a dense matrix, otherwise the cluster of each
    graph; ``blocks[k]`` holds the sorted member indices of cluster ``k`` and
    their all-pairs scores.
    """
    n: int
    blocks: list[tuple[np.ndarray, np.ndarray]]
    labels: np.ndarray | None = None
    evaluations: int = 0
    _pos: np.ndarray = field(init=False, repr=False)
    _owner: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._pos = np.full(self.n, -1, dtype=np.int64)
        self._owner = np.full(self.n, -1, dtype=np.int64)
        for k, (members, vals) in enumerate(self.blocks):
            if vals.shape != (len(members), len(members)):
                raise GraphOpError("block shape does not match its member list")
            self._pos[members] = np.arange(len(members))
            self._owner[members] = k
        if (self._owner < 0).any():
            raise GraphOpError("blocks do not cover every graph")

    @classmethod
    def dense(cls, values: np.ndarray, evaluations: int | None = None) -> "SimilarityMatrix":
        values = np.asarray(values, dtype=np.float64)
        n = len(values)
        if evaluations is None:
            evaluations = n * (n - 1) // 2
        return cls(n, [(np.arange(n), values)], None, evaluations)

    @property
    def structure(self) -> str:
        return "dense" if self.labels is None else "block"

    @property
    def cluster_count(self) -> int:
        return len(self.blocks)

    def row(self, i: int) -> np.ndarray:
        out = np.zeros(self.n)
        members, vals = self.blocks[self._owner[i]]
        out[members] = vals[self._pos[i]]
        return out

    def __getitem__(self, ij):
        i, j = ij
        if self._owner[i] != self._owner[j]:
            return 0.0
        _, vals = self.blocks[self._owner[i]]
        return float(vals[self._pos[i], self._pos[j]])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for members, vals in self.blocks:
            out[np.ix_(members, members)] = vals
        return out

    def same_layout(self, other: "SimilarityMatrix") -> bool:
        if self.n != other.n or self.structure != other.structure:
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)


def _block_values(scorer: _Scorer, members: np.ndarray, workers: int = 1) -> np.ndarray:
    """All-pairs block with unit diagonal; one measure call per unordered pair."""
    m = len(members)
    out = np.eye(m)

    def fill(rows):
        for a in rows:
            if a + 1 < m:
                out[a, a + 1:] = scorer.score(members[a], members[a + 1:])

    rows = np.arange(m)
    if workers > 1 and m > 1:
        # Rows are written by exactly one task each, so the result does not
        # depend on scheduling.
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, np.array_split(rows, workers)))
    else:
        fill(rows)
    iu = np.triu_indices(m, 1)
    out[(iu[1], iu[0])] = out[iu]
    return out


def compose(matrices: list[SimilarityMatrix], weights) -> SimilarityMatrix:
    """Entrywise weighted sum of similarity matrices."""
    if not matrices:
        raise GraphOpError("nothing to compose")
    _check_weights(weights, len(matrices))
    first = matrices[0]
    if any(m.n != first.n for m in matrices):
        raise GraphOpError("cannot compose matrices of different sizes")
    evals = max(m.evaluations for m in matrices)
    if all(first.same_layout(m) for m in matrices[1:]):
        blocks = []
        for k, (members, _) in enumerate(first.blocks):
            acc = np.zeros((len(members), len(members)))
            for w, m in zip(weights, matrices):
                acc = acc + w * m.blocks[k][1]
            blocks.append((members, np.clip(acc, 0.0, 1.0)))
        return SimilarityMatrix(first.n, blocks, first.labels, evals)
    acc = np.zeros((first.n, first.n))
    for w, m in zip(weights, matrices):
        acc = acc + w * m.to_dense()
    return SimilarityMatrix.dense(np.clip(acc, 0.0, 1.0), evals)


def _all_pairs(scorer, cfg, n, workers):
    if cfg.kind == "composite":
        parts = [_all_pairs(s, c, n, workers) for s, c in zip(scorer.children, cfg.children)]
        return compose(parts, cfg.weights)
    return SimilarityMatrix.dense(_block_values(scorer, np.arange(n), workers))


def all_pairs_matrix(dataset: GraphDataset, cfg: MeasureConfig, workers: int = 1,
                     scorer: _Scorer | None = None) -> SimilarityMatrix:
    """Dense matrix from ``N(N-1)/2`` measure evaluations."""
    scorer = scorer or prepare_measure(dataset, cfg, workers)
    mat = _all_pairs(scorer, cfg, len(dataset), workers)
    mat.evaluations = len(dataset) * (len(dataset) - 1) // 2
    return mat


@dataclass(frozen=True)
class Clustering:
    labels: np.ndarray
    medoids: tuple[int, ...]
    evaluations: int

    @property
    def count(self) -> int:
        return len(self.medoids)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)


def _kmeanspp(scorer: _Scorer, n: int, c: int, seed: int) -> Clustering:
    if not 1 <= c <= n:
        raise ConfigError(f"cluster count must lie in 1..{n}, got {c}")
    rng = np.random.default_rng(seed)
    everything = np.arange(n)
    medoids = [int(rng.integers(n))]
    dist = []
    nearest = np.full(n, np.inf)
    while True:
        m = medoids[-1]
        d = 1.0 - scorer.score(m, everything)
        d[m] = 0.0
        dist.append(d)
        nearest = np.minimum(nearest, d)
        if len(medoids) == c:
            break
        weight = nearest ** 2
        weight[medoids] = 0.0
        total = weight.sum()
        if total <= 0.0:
            weight = np.ones(n)
            weight[medoids] = 0.0
            total = weight.sum()
        medoids.append(int(rng.choice(n, p=weight / total)))
    labels = np.argmin(np.stack(dist), axis=0)
    labels[medoids] = np.arange(c)
    return Clustering(labels.astype(np.int64), tuple(medoids), c * n)


def cluster_dataset(dataset: GraphDataset, c: int, cfg: MeasureConfig, seed: int = 0,
                    workers: int = 1, scorer: _Scorer | None = None) -> Clustering:
    """Pick ``c`` medoids by k-means++ seeding under ``d = 1 - s`` and assign each graph.

    A single assignment pass: each graph joins its nearest medoid (ties go
    to the earlier medoid) and medoids always belong to their own cluster.
    """
    scorer = scorer or prepare_measure(dataset, cfg, workers)
    return _kmeanspp(scorer, len(dataset), c, seed)


def default_cluster_count(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n)))


def clustered_matrix(dataset: GraphDataset, cfg: MeasureConfig, c: int | None = None,
                     seed: int = 0, workers: int = 1,
                     scorer: _Scorer | None = None) -> SimilarityMatrix:
    """Block matrix: all-pairs scores inside each cluster, zeros across clusters.

    ``evaluations`` counts the ``c * N`` seeding distances plus every
    intra-cluster pair.
    """
    n = len(dataset)
    c = default_cluster_count(n) if c is None else c
    scorer = scorer or prepare_measure(dataset, cfg, workers)
    clus = _kmeanspp(scorer, n, c, seed)
    blocks = []
    evals = clus.evaluations
    for k in range(clus.count):
        members = clus.members(k)
        blocks.append((members, _block_values(scorer, members, workers)))
        evals += len(members) * (len(members) - 1) // 2
    return SimilarityMatrix(n, blocks, clus.labels, evals)


# -- persistence ----------------------------------------------------------------

MAGIC = b"GSIMMAT\0"
VERSION = 1
_HEADER = struct.Struct("<8sIQB")


def save_matrix(mat: SimilarityMatrix, path) -> None:
    """Binary layout, little-endian: magic, u32 version, u64 N, u8 structure
    (0 dense, 1 block), then for block matrices N int64 cluster labels, then
    each block's float64 entries row-major in cluster order."""
    tag = 0 if mat.labels is None else 1
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, mat.n, tag))
        if tag:
            fh.write(np.asarray(mat.labels, dtype="<i8").tobytes())
        for _, vals in mat.blocks:
            fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())


def load_matrix(path) -> SimilarityMatrix:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise GraphOpError(f"{path}: truncated matrix file")
    magic, version, n, tag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise GraphOpError(f"{path}: not a similarity-matrix file")
    if version != VERSION:
        raise GraphOpError(f"{path}: unsupported matrix format version {version}")
    off = _HEADER.size
    if tag == 0:
        if len(data) != off + 8 * n * n:
            raise GraphOpError(f"{path}: payload size does not match N={n}")
        vals = np.frombuffer(data, dtype="<f8", count=n * n, offset=off).reshape(n, n)
        return SimilarityMatrix.dense(vals.astype(np.float64))
    if tag != 1:
        raise GraphOpError(f"{path}: unknown structure tag {tag}")
    labels = np.frombuffer(data, dtype="<i8", count=n, offset=off).astype(np.int64)
    off += 8 * n
    blocks = []
    evals = (labels.max() + 1) * n
    for k in range(int(labels.max()) + 1):
        members = np.flatnonzero(labels == k)
        m = len(members)
        vals = np.frombuffer(data, dtype="<f8", count=m * m, offset=off).reshape(m, m)
        off += 8 * m * m
        blocks.append((members, vals.astype(np.float64)))
        evals += m * (m - 1) // 2
    if off != len(data):
        raise GraphOpError(f"{path}: trailing bytes after matrix payload")
    return SimilarityMatrix(n, blocks, labels, int(evals))


def export_csv(mat: SimilarityMatrix, path) -> None:
    """``N`` on the first line, then ``i,j,score`` for every stored entry."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{mat.n}\n")
        for members, vals in mat.blocks:
            for a, i in enumerate(members.tolist()):
                fh.writelines(f"{i},{j},{v!r}\n" for j, v in zip(members.tolist(), vals[a].tolist()))
