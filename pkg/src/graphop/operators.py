"""Exact graph-level operators.

Shortest-path quantities (betweenness, edge betweenness, closeness) are
computed with a level-synchronous Brandes pass that handles a block of BFS
sources at once through sparse-dense products. Spectral quantities use power
iteration. All per-vertex centralities are reduced to one number per graph by
Freeman centralization.
"""
from __future__ import annotations

from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError, GraphOpError
from .graph import Graph

TOL = 1e-9
MAX_ITER = 1000
DEFAULT_DAMPING = 0.85

# Upper bound on entries of the dense (vertices x sources) work arrays.
_BLOCK_ENTRIES = 4_000_000


class OperatorKind(str, Enum):
    sr = "sr"
    ec = "ec"
    bc = "bc"
    ebc = "ebc"
    cc = "cc"
    pr = "pr"

    @classmethod
    def parse(cls, names) -> list["OperatorKind"]:
        if isinstance(names, str):
            names = [s for s in names.split(",") if s.strip()]
        try:
            return [cls(s.strip()) for s in names]
        except ValueError as exc:
            raise GraphOpError(f"unknown operator: {exc}; expected one of "
                               f"{', '.join(k.value for k in cls)}") from None


def _source_blocks(g: Graph, width: int):
    n = g.vertex_count
    size = max(1, min(n, _BLOCK_ENTRIES // max(width, 1)))
    for start in range(0, n, size):
        yield np.arange(start, min(n, start + size))


def _bfs(A, n, sources):
    """Hop distances (-1 = unreachable) and shortest-path counts, shape (n, S)."""
    S = len(sources)
    cols = np.arange(S)
    dist = np.full((n, S), -1, dtype=np.int64)
    sigma = np.zeros((n, S))
    dist[sources, cols] = 0
    sigma[sources, cols] = 1.0
    frontier = sigma.copy()
    level = 0
    while True:
        reach = A @ frontier
        new = (reach > 0) & (dist < 0)
        if not new.any():
            return dist, sigma, level
        level += 1
        dist[new] = level
        frontier = np.where(new, reach, 0.0)
        sigma += frontier


def _dependencies(A, dist, sigma, depth):
    """Brandes back-propagation; returns per-vertex (1 + delta) / sigma."""
    delta = np.zeros_like(sigma)
    coef = np.zeros_like(sigma)
    for lvl in range(depth, 0, -1):
        at = dist == lvl
        np.divide(1.0 + delta, sigma, out=coef, where=at)
        coef[~at] = 0.0
        delta += np.where(dist == lvl - 1, sigma * (A @ coef), 0.0)
    coef = np.zeros_like(sigma)
    np.divide(1.0 + delta, sigma, out=coef, where=dist >= 1)
    return delta, coef


def betweenness(g: Graph) -> np.ndarray:
    """Unnormalized shortest-path betweenness, each unordered pair counted once."""
    n = g.vertex_count
    out = np.zeros(n)
    A = g.csr
    for src in _source_blocks(g, n):
        dist, sigma, depth = _bfs(A, n, src)
        delta, _ = _dependencies(A, dist, sigma, depth)
        delta[src, np.arange(len(src))] = 0.0
        out += delta.sum(axis=1)
    return out / 2.0


def edge_betweenness(g: Graph) -> dict[tuple[int, int], float]:
    """Betweenness accumulated on edges, keyed by ``(min, max)`` vertex pairs."""
    n = g.vertex_count
    edges = g.edges
    u, v = edges[:, 0], edges[:, 1]
    total = np.zeros(len(edges))
    A = g.csr
    for src in _source_blocks(g, max(n, len(edges))):
        dist, sigma, depth = _bfs(A, n, src)
        _, coef = _dependencies(A, dist, sigma, depth)
        du, dv = dist[u], dist[v]
        fwd = (du >= 0) & (dv == du + 1)
        bwd = (dv >= 0) & (du == dv + 1)
        flow = np.where(fwd, sigma[u] * coef[v], 0.0) + np.where(bwd, sigma[v] * coef[u], 0.0)
        total += flow.sum(axis=1)
    total /= 2.0
    return {(int(a), int(b)): float(x) for a, b, x in zip(u, v, total)}


def closeness(g: Graph) -> np.ndarray:
    """``1 / sum of distances`` to reachable vertices; isolated vertices score 0."""
    n = g.vertex_count
    out = np.zeros(n)
    A = g.csr
    for src in _source_blocks(g, n):
        dist, _, _ = _bfs(A, n, src)
        farness = np.where(dist > 0, dist, 0).sum(axis=0)
        out[src] = np.divide(1.0, farness, out=np.zeros(len(src)), where=farness > 0)
    return out


def _perron(A: sp.csr_array, tol=TOL, max_iter=MAX_ITER):
    """Perron vector (max entry 1) and eigenvalue of a connected adjacency matrix.

    Iterates on ``A + I``, which has the same eigenvectors but no
    ``-lambda_max`` competitor on bipartite graphs.
    """
    n = A.shape[0]
    if n == 1:
        return np.ones(1), 0.0
    x = np.ones(n)
    for it in range(1, max_iter + 1):
        y = A @ x + x
        y /= y.max()
        if np.abs(y - x).max() < tol:
            x = y
            break
        x = y
    else:
        raise ConvergenceError("power iteration did not converge", max_iter)
    Ax = A @ x
    return x, float(x @ Ax / (x @ x))


def _component_perron(g: Graph):
    """Per-component Perron vectors and eigenvalues."""
    ncomp, labels = connected_components(g.csr, directed=False)
    A = g.csr
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        sub = A[members][:, members] if ncomp > 1 else A
        vec, lam = _perron(sp.csr_array(sub))
        yield members, vec, lam


def spectral_radius(g: Graph) -> float:
    """Largest adjacency eigenvalue (Rayleigh quotient of the power-iteration vector)."""
    if g.edge_count == 0:
        return 0.0
    return max(lam for _, _, lam in _component_perron(g))


def eigenvector_centrality(g: Graph) -> np.ndarray:
    """Principal adjacency eigenvector, scaled to a maximum entry of 1.

    On disconnected graphs the vector is supported on the component(s) whose
    eigenvalue equals the spectral radius.
    """
    if g.edge_count == 0:
        raise GraphOpError("eigenvector centrality needs at least one edge")
    parts = list(_component_perron(g))
    top = max(lam for _, _, lam in parts)
    out = np.zeros(g.vertex_count)
    for members, vec, lam in parts:
        if lam >= top - 1e-9 * max(1.0, top):
            out[members] = vec
    return out


def pagerank(g: Graph, damping: float = DEFAULT_DAMPING, tol=TOL, max_iter=MAX_ITER) -> np.ndarray:
    """PageRank with each undirected edge as two arcs; dangling mass spread uniformly."""
    if not 0.0 < damping < 1.0:
        raise GraphOpError(f"damping must lie in (0, 1), got {damping}")
    n = g.vertex_count
    deg = g.degrees.astype(np.float64)
    dangling = deg == 0
    inv = np.divide(1.0, deg, out=np.zeros(n), where=~dangling)
    A = g.csr
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        y = damping * (A @ (x * inv)) + (damping * x[dangling].sum() + 1.0 - damping) / n
        y /= y.sum()
        if np.abs(y - x).max() < tol:
            return y
        x = y
    raise ConvergenceError("pagerank did not converge", max_iter)


def centralize(scores, vertex_count: int) -> float:
    """Freeman centralization: ``sum(max(c) - c_i) / (vertex_count - 1)``.

    ``scores`` may be an array of vertex scores or an edge-score mapping.
    """
    if vertex_count < 2:
        raise GraphOpError("centralization needs at least two vertices")
    if isinstance(scores, dict):
        scores = list(scores.values())
    c = np.asarray(scores, dtype=np.float64)
    if c.size == 0:
        return 0.0
    return float((c.max() - c).sum() / (vertex_count - 1))


def evaluate_operator(g: Graph, kind, damping: float = DEFAULT_DAMPING) -> float:
    """Graph-level value of operator ``kind`` on ``g``."""
    kind = OperatorKind(kind)
    if kind is OperatorKind.sr:
        return spectral_radius(g)
    if kind is OperatorKind.ec:
        scores = eigenvector_centrality(g)
    elif kind is OperatorKind.bc:
        scores = betweenness(g)
    elif kind is OperatorKind.ebc:
        scores = edge_betweenness(g)
    elif kind is OperatorKind.cc:
        scores = closeness(g)
    else:
        scores = pagerank(g, damping)
    return centralize(scores, g.vertex_count)
