"""Simple undirected graphs, edge-list I/O and (leveled) vertex degrees.

A :class:`Graph` is stored in CSR form: ``indptr`` and ``indices`` hold the
sorted neighbour lists of vertices ``0..n-1``. Graphs are immutable once
constructed.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import GraphOpError, ParseError

log = logging.getLogger(__name__)

MANIFEST = "manifest.txt"


@dataclass(frozen=True, eq=False)
class Graph:
    id: str
    indptr: np.ndarray
    indices: np.ndarray
    dropped_edges: int = field(default=0, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], id: str = "") -> "Graph":
        """Build a graph on ``n`` vertices, dropping self-loops and duplicates."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise GraphOpError(f"edge endpoint outside 0..{n - 1}")
        total = len(arr)
        arr = arr[arr[:, 0] != arr[:, 1]]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        pairs = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(arr) else arr
        dropped = total - len(pairs)
        src = np.concatenate([pairs[:, 0], pairs[:, 1]])
        dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        g = cls(id, indptr, dst.astype(np.int64), dropped)
        g.indptr.setflags(write=False)
        g.indices.setflags(write=False)
        return g

    @property
    def vertex_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, u: int) -> np.ndarray:
        self._check_vertex(u)
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.vertex_count)]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def edges(self) -> np.ndarray:
        """Edges as an ``(E, 2)`` array of ``(min, max)`` pairs in lexicographic order."""
        src = np.repeat(np.arange(self.vertex_count), self.degrees)
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    @cached_property
    def csr(self) -> sp.csr_array:
        n = self.vertex_count
        data = np.ones(len(self.indices))
        return sp.csr_array((data, self.indices, self.indptr), shape=(n, n))

    def _check_vertex(self, u):
        if not 0 <= u < self.vertex_count:
            raise GraphOpError(f"vertex {u} out of range for graph with "
                               f"{self.vertex_count} vertices")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.id == other.id
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None

    def __repr__(self):
        return f"Graph(id={self.id!r}, vertices={self.vertex_count}, edges={self.edge_count})"


@dataclass(frozen=True)
class GraphDataset:
    graphs: tuple[Graph, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if not self.graphs:
            raise GraphOpError("a dataset needs at least one graph")

    def __len__(self):
        return len(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    def __iter__(self):
        return iter(self.graphs)

    @property
    def names(self) -> list[str]:
        return [g.id for g in self.graphs]


# -- edge lists ---------------------------------------------------------------

def parse_edge_list(text: str, id: str = "") -> Graph:
    """Parse whitespace-separated ``u v`` lines into a normalized graph.

    Lines starting with ``#`` are comments. Vertex labels are remapped to
    ``0..n-1`` in order of first appearance; self-loops and duplicate edges
    are dropped and their number stored in ``Graph.dropped_edges``.
    """
    remap: dict[int, int] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 vertex ids, got {len(tokens)}", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"non-integer vertex id in {line!r}", lineno) from None
        u = remap.setdefault(u, len(remap))
        v = remap.setdefault(v, len(remap))
        edges.append((u, v))
    if not remap:
        raise ParseError("empty edge list")
    g = Graph.from_edges(len(remap), edges, id=id)
    if g.dropped_edges:
        log.info("graph %r: dropped %d self-loop/duplicate edges", id, g.dropped_edges)
    return g


def format_edge_list(g: Graph) -> str:
    """Serialize ``g`` so that :func:`parse_edge_list` reproduces it exactly.

    Edges are written ordered by their larger endpoint, which keeps first
    appearance in id order for most graphs. Where it would not (and for
    isolated vertices) a ``v v`` line is emitted: the parser registers the
    vertex and drops the self-loop.
    """
    lines = []
    seen = 0  # vertices 0..seen-1 have appeared
    edges = g.edges
    for a, b in edges[np.lexsort((edges[:, 0], edges[:, 1]))].tolist():
        new = [t for t in (a, b) if t >= seen]
        if new == list(range(seen, seen + len(new))):
            seen += len(new)
        else:
            lines.extend(f"{v} {v}" for v in range(seen, b))
            seen = b + 1
        lines.append(f"{a} {b}")
    lines.extend(f"{v} {v}" for v in range(seen, g.vertex_count))
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> Graph:
    path = Path(path)
    return parse_edge_list(path.read_text(encoding="utf-8"), id=path.stem)


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8")


def load_dataset(directory) -> GraphDataset:
    """Load a dataset directory: edge-list files listed in ``manifest.txt``.

    Without a manifest, all ``*.txt``/``*.edges`` files are loaded in sorted
    name order.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {directory}")
    manifest = directory / MANIFEST
    if manifest.exists():
        names = [ln.strip() for ln in manifest.read_text(encoding="utf-8").splitlines()
                 if ln.strip() and not ln.startswith("#")]
    else:
        names = sorted(p.name for p in directory.iterdir()
                       if p.suffix in (".txt", ".edges") and p.name != MANIFEST)
    return GraphDataset([read_edge_list(directory / n) for n in names], name=directory.name)


def save_dataset(ds: GraphDataset, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for g in ds:
        fname = f"{g.id}.txt"
        write_edge_list(g, directory / fname)
        names.append(fname)
    (directory / MANIFEST).write_text("\n".join(names) + "\n", encoding="utf-8")


# -- degrees ------------------------------------------------------------------

def degree(g: Graph, u: int) -> int:
    return len(g.neighbors(u))


def leveled_degree(g: Graph, u: int, level: int) -> int:
    """Degree of the supernode made of ``u`` and every vertex within ``level`` hops.

    Counts edges from a vertex at distance exactly ``level`` to one at
    distance ``level + 1``; edges among border vertices are internal.
    """
    if level < 0:
        raise GraphOpError("level must be non-negative")
    g._check_vertex(u)
    dist = {u: 0}
    queue = deque([u])
    while queue:
        v = queue.popleft()
        if dist[v] > level:
            break
        for w in g.neighbors(v).tolist():
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return sum(1 for v, d in dist.items() if d == level
               for w in g.neighbors(v).tolist() if dist.get(w) == level + 1)


def degree_vectors(g: Graph, max_level: int, chunk: int | None = None) -> np.ndarray:
    """Leveled degrees of every vertex, shape ``(vertex_count, max_level + 1)``.

    Runs a breadth-first expansion from a block of sources at a time using
    sparse products, so column ``l`` equals ``leveled_degree(g, v, l)``.
    """
    if max_level < 0:
        raise GraphOpError("max_level must be non-negative")
    n = g.vertex_count
    out = np.zeros((n, max_level + 1), dtype=np.int64)
    out[:, 0] = g.degrees
    if max_level == 0 or n == 0:
        return out
    A = g.csr
    chunk = chunk or max(1, min(n, 2_000_000 // max(n, 1)))
    for start in range(0, n, chunk):
        src = np.arange(start, min(n, start + chunk))
        cols = np.arange(len(src))
        visited = np.zeros((n, len(src)), dtype=bool)
        visited[src, cols] = True
        shells = [visited.astype(np.float64)]
        for _ in range(max_level + 1):
            reach = (A @ shells[-1]) > 0
            new = reach & ~visited
            visited |= new
            shells.append(new.astype(np.float64))
        for lvl in range(1, max_level + 1):
            out[src, lvl] = np.rint((shells[lvl] * (A @ shells[lvl + 1])).sum(axis=0)).astype(np.int64)
    return out
