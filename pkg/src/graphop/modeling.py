"""Training-set sampling and similarity-weighted kNN estimation of operator values."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError, GraphOpError, InfeasibleQuotaError
from .graph import GraphDataset
from .operators import DEFAULT_DAMPING, OperatorKind, evaluate_operator
from .parallel import map_ordered
from .similarity import SimilarityMatrix


@dataclass(frozen=True)
class ModelConfig:
    p: float = 0.1
    k: int = 3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"sampling ratio p must lie in (0, 1], got {self.p}")
        if self.k < 1:
            raise ConfigError(f"k must be at least 1, got {self.k}")


@dataclass(frozen=True)
class TrainingSet:
    """Exact operator values keyed by graph index (insertion order = sampling order)."""
    entries: Mapping[int, float]

    @property
    def indices(self) -> np.ndarray:
        return np.fromiter(self.entries.keys(), dtype=np.int64, count=len(self.entries))

    @property
    def values(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=np.float64, count=len(self.entries))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, i):
        return i in self.entries


def sample_size(p: float, n: int) -> int:
    # round() absorbs float noise such as 0.1 * 30 = 3.0000000000000004
    return min(n, max(1, math.ceil(round(p * n, 9))))


def sample_indices(n: int, p: float, seed: int, k: int = 1, labels=None,
                   strict: bool = False) -> np.ndarray:
    """Indices of the training graphs, drawn without replacement.

    A seeded permutation is consumed in order, so a larger ``p`` with the same
    seed yields a superset. With cluster ``labels``, the first ``k`` members
    of each cluster in permutation order are taken before the uniform fill.
    A cluster with fewer than ``k`` graphs is taken whole, and the sample
    grows past ``ceil(p*N)`` if the quotas need more room. ``strict=True``
    raises instead in both cases.
    """
    size = sample_size(p, n)
    if size < k and (labels is None or strict):
        raise InfeasibleQuotaError(f"ceil(p*N) = {size} is smaller than k = {k}")
    perm = np.random.default_rng(seed).permutation(n)
    if labels is None:
        return perm[:size]
    labels = np.asarray(labels)
    chosen = []
    for c in np.unique(labels):
        members = perm[labels[perm] == c]
        if strict and len(members) < k:
            raise InfeasibleQuotaError(
                f"cluster {c} has {len(members)} graphs, fewer than k = {k}", cluster=int(c))
        chosen.extend(members[:k].tolist())
    if strict and len(chosen) > size:
        raise InfeasibleQuotaError(
            f"ceil(p*N) = {size} cannot hold the {len(chosen)} per-cluster quota samples")
    taken = set(chosen)
    rest = [i for i in perm.tolist() if i not in taken]
    chosen.extend(rest[:max(0, size - len(chosen))])
    return np.array(chosen, dtype=np.int64)


def _operator_task(args):
    g, kind, damping = args
    return evaluate_operator(g, kind, damping)


def evaluate_many(dataset: GraphDataset, indices, kind, damping=DEFAULT_DAMPING,
                  workers: int = 1) -> list[float]:
    return map_ordered(_operator_task, [(dataset[i], kind, damping) for i in indices], workers)


def sample_training(dataset: GraphDataset, operator, p: float, seed: int = 0,
                    clusters=None, k: int = 1, damping: float = DEFAULT_DAMPING,
                    workers: int = 1, strict: bool = False) -> TrainingSet:
    """Sample ``ceil(p*N)`` graphs (see ``sample_indices``) and run ``operator`` exactly on each."""
    kind = OperatorKind(operator)
    idx = sample_indices(len(dataset), p, seed, k, clusters, strict)
    values = evaluate_many(dataset, idx, kind, damping, workers)
    return TrainingSet(dict(zip(idx.tolist(), values)))


def select_neighbors(weights: np.ndarray, k: int) -> np.ndarray:
    """Positions of the ``k`` largest weights; ties go to the lower position."""
    order = np.lexsort((np.arange(len(weights)), -weights))
    return order[:k]


def weighted_estimate(values: np.ndarray, weights: np.ndarray) -> float:
    """Similarity-weighted mean; the plain mean when all weights are zero.

    Written as an offset from the first value so that equal neighbour values
    come back bit-exact.
    """
    total = weights.sum()
    if total <= 0.0:
        weights, total = np.ones(len(values)), float(len(values))
    base = values[0]
    return float(base + (weights * (values - base)).sum() / total)


def knn_predict(R: SimilarityMatrix, t: TrainingSet, k: int, x: int) -> float:
    """Estimate the operator value of graph ``x`` from its ``k`` most similar training graphs."""
    if len(t) == 0:
        raise GraphOpError("empty training set")
    idx = t.indices
    order = np.argsort(idx, kind="stable")
    idx, vals = idx[order], t.values[order]
    w = R.row(x)[idx]
    nb = select_neighbors(w, k)
    return weighted_estimate(vals[nb], w[nb])


@dataclass(frozen=True)
class Approximation:
    values: np.ndarray
    exact: np.ndarray  # bool per graph
    training: TrainingSet

    def source(self, i: int) -> str:
        return "exact" if self.exact[i] else "predicted"


def approximate_all(dataset: GraphDataset, operator, R: SimilarityMatrix, cfg: ModelConfig,
                    clusters=None, damping: float = DEFAULT_DAMPING,
                    workers: int = 1, training: TrainingSet | None = None) -> Approximation:
    """Exact values on the sampled graphs, kNN estimates everywhere else."""
    n = len(dataset)
    if R.n != n:
        raise GraphOpError(f"matrix size {R.n} does not match dataset size {n}")
    if clusters is None and R.labels is not None:
        clusters = R.labels
    if training is None:
        training = sample_training(dataset, operator, cfg.p, cfg.seed, clusters, cfg.k,
                                   damping, workers)
    values = np.zeros(n)
    exact = np.zeros(n, dtype=bool)
    for i, v in training.entries.items():
        values[i] = v
        exact[i] = True
    for x in range(n):
        if not exact[x]:
            values[x] = knn_predict(R, training, cfg.k, x)
    return Approximation(values, exact, training)


def write_model_csv(approx: Approximation, names, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["graph_name", "value", "source"])
        for i, name in enumerate(names):
            w.writerow([name, repr(float(approx.values[i])), approx.source(i)])
