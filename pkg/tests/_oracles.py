"""Independent reference implementations used only by the tests.

Everything here is deliberately naive: exhaustive simple-path enumeration,
exact rational arithmetic, dense eigensolvers and direct linear solves.
"""
from fractions import Fraction
from itertools import combinations

import numpy as np

from graphop.graph import Graph


def random_graph(rng, n_max=8, id=""):
    n = int(rng.integers(1, n_max + 1))
    density = rng.uniform(0.15, 0.85)
    edges = [(a, b) for a, b in combinations(range(n), 2) if rng.random() < density]
    return Graph.from_edges(n, edges, id=id)


def all_simple_paths(adj, s, t):
    out = []
    stack = [(s, [s])]
    while stack:
        v, path = stack.pop()
        if v == t:
            out.append(path)
            continue
        for w in adj[v]:
            if w not in path:
                stack.append((w, path + [w]))
    return out


def shortest_paths(g):
    """{(s, t): list of shortest paths} for every unordered connected pair s < t."""
    adj = g.adjacency
    res = {}
    for s, t in combinations(range(g.vertex_count), 2):
        paths = all_simple_paths(adj, s, t)
        if paths:
            best = min(len(p) for p in paths)
            res[s, t] = [p for p in paths if len(p) == best]
    return res


def brute_betweenness(g, sp=None):
    sp = sp or shortest_paths(g)
    bc = [Fraction(0)] * g.vertex_count
    for paths in sp.values():
        for p in paths:
            for v in p[1:-1]:
                bc[v] += Fraction(1, len(paths))
    return [float(x) for x in bc]


def brute_edge_betweenness(g, sp=None):
    sp = sp or shortest_paths(g)
    eb = {tuple(e): Fraction(0) for e in g.edges.tolist()}
    for paths in sp.values():
        for p in paths:
            for a, b in zip(p, p[1:]):
                eb[min(a, b), max(a, b)] += Fraction(1, len(paths))
    return {e: float(x) for e, x in eb.items()}


def brute_closeness(g, sp=None):
    sp = sp or shortest_paths(g)
    far = [0] * g.vertex_count
    for (s, t), paths in sp.items():
        d = len(paths[0]) - 1
        far[s] += d
        far[t] += d
    return [1.0 / f if f else 0.0 for f in far]


def dense_adjacency(g):
    A = np.zeros((g.vertex_count, g.vertex_count))
    for a, b in g.edges.tolist():
        A[a, b] = A[b, a] = 1.0
    return A


def dense_spectrum(g):
    """(largest eigenvalue, its max-scaled non-negative eigenvector, spectral gap)."""
    w, V = np.linalg.eigh(dense_adjacency(g))
    vec = np.abs(V[:, -1])
    gap = w[-1] - w[-2] if len(w) > 1 else np.inf
    return w[-1], vec / vec.max(), gap


def pagerank_linear(g, damping):
    """Solve (I - d M) x = (1 - d)/n * 1 (+ dangling redistribution) directly."""
    n = g.vertex_count
    A = dense_adjacency(g)
    deg = A.sum(axis=0)
    M = np.zeros((n, n))
    for j in range(n):
        M[:, j] = A[:, j] / deg[j] if deg[j] else 1.0 / n
    x = np.linalg.solve(np.eye(n) - damping * M, np.full(n, (1 - damping) / n))
    return x / x.sum()


def bfs_distances(g, s):
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for v in frontier:
            for w in g.neighbors(v).tolist():
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist
