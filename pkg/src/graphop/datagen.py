"""Synthetic Barabási–Albert datasets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .graph import Graph, GraphDataset


@dataclass(frozen=True)
class BAParams:
    """Preferential-attachment settings.

    With ``per_graph=False`` (default) every new vertex draws its own initial
    outdegree from ``[outdegree_min, outdegree_max]``; with ``per_graph=True``
    one draw fixes the outdegree for the whole graph.
    """
    vertex_count: int
    outdegree_min: int = 1
    outdegree_max: int = 32
    seed: int = 0
    per_graph: bool = False

    def __post_init__(self):
        if not 1 <= self.outdegree_min <= self.outdegree_max < self.vertex_count:
            raise ConfigError(
                "need 1 <= outdegree_min <= outdegree_max < vertex_count, got "
                f"{self.outdegree_min}, {self.outdegree_max}, {self.vertex_count}")


def generate_ba(params: BAParams, id: str = "") -> Graph:
    """Grow a preferential-attachment graph one vertex at a time.

    Vertex 0 starts alone and vertex 1 attaches to it. Vertex ``t >= 2``
    links to ``min(m, t)`` distinct earlier vertices picked with probability
    proportional to their current degree (repeat draws are rejected).
    """
    rng = np.random.default_rng(params.seed)
    n = params.vertex_count
    lo, hi = params.outdegree_min, params.outdegree_max
    fixed = int(rng.integers(lo, hi + 1)) if params.per_graph else None
    # every edge endpoint once: uniform draws from it are degree-proportional
    ends = np.empty(2 * n * hi, dtype=np.int64)
    ends[0], ends[1] = 0, 1
    filled = 2
    edges = [(1, 0)]
    for t in range(2, n):
        m = fixed if fixed is not None else int(rng.integers(lo, hi + 1))
        m = min(m, t)
        if m == t:
            targets = list(range(t))
        else:
            picked = {}
            while len(picked) < m:
                for v in ends[rng.integers(0, filled, size=2 * (m - len(picked)))].tolist():
                    picked.setdefault(v, None)
                    if len(picked) == m:
                        break
            targets = list(picked)
        for v in targets:
            edges.append((t, v))
            ends[filled] = t
            ends[filled + 1] = v
            filled += 2
    return Graph.from_edges(n, edges, id=id)


def generate_dataset(n_graphs: int, params: BAParams, seed: int = 0, name: str = "ba") -> GraphDataset:
    """``n_graphs`` independent BA graphs with seeds spawned from ``seed``."""
    if n_graphs < 1:
        raise ConfigError("n_graphs must be at least 1")
    children = np.random.SeedSequence(seed).spawn(n_graphs)
    width = len(str(n_graphs - 1))
    graphs = []
    for i, ss in enumerate(children):
        p = BAParams(params.vertex_count, params.outdegree_min, params.outdegree_max,
                     int(ss.generate_state(1)[0]), params.per_graph)
        graphs.append(generate_ba(p, id=f"{name}_{i:0{width}d}"))
    return GraphDataset(graphs, name=name)
