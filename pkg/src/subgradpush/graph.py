"""
Time-varying directed graphs.

Nodes are 0-based internally; the config/CLI surface is 1-based. Self-loops
are implicit: ``edges`` only stores pairs ``(i, j)`` with ``i != j`` and every
neighborhood/degree query adds the node itself.
"""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rng import philox

__all__ = [
    "Digraph",
    "GraphSequence",
    "StaticSequence",
    "CyclicSequence",
    "RandomBConnectedSequence",
    "RegularCirculantSequence",
    "make_sequence",
    "is_strongly_connected",
    "union_graph",
    "window_verdicts",
    "verify_b_connected",
]


@dataclass(frozen=True)
class Digraph:
    """Directed graph on ``n`` nodes; ``(i, j)`` in ``edges`` means i sends to j."""

    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"explicit self-loop ({i}, {j}); self-loops are implicit")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edge_list(cls, n, edges, one_based=True):
        """Build from ``[[i, j], ...]``, dropping any explicit self-loops."""
        off = 1 if one_based else 0
        return cls(n, frozenset((i - off, j - off) for i, j in edges if i != j))

    @classmethod
    def complete(cls, n):
        return cls(n, frozenset((i, j) for i in range(n) for j in range(n) if i != j))

    @classmethod
    def cycle(cls, n):
        if n == 1:
            return cls(1)
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    def _check(self, i):
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for n={self.n}")

    def out_neighbors(self, i):
        self._check(i)
        return {j for a, j in self.edges if a == i} | {i}

    def in_neighbors(self, i):
        self._check(i)
        return {a for a, j in self.edges if j == i} | {i}

    def out_degree(self, i):
        """|N_i^out| including the implicit self-loop; always >= 1."""
        self._check(i)
        return 1 + sum(1 for a, _ in self.edges if a == i)

    def out_degrees(self):
        d = np.ones(self.n, dtype=np.int64)
        for i, _ in self.edges:
            d[i] += 1
        return d

    def in_degrees(self):
        d = np.ones(self.n, dtype=np.int64)
        for _, j in self.edges:
            d[j] += 1
        return d

    def to_edge_list(self, one_based=True):
        off = 1 if one_based else 0
        return sorted([i + off, j + off] for i, j in self.edges)


def _reachable(n, adj, start):
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return seen


def is_strongly_connected(g):
    """Two reachability sweeps from node 0: forward and on the reversed graph."""
    if g.n == 1:
        return True
    fwd = [[] for _ in range(g.n)]
    rev = [[] for _ in range(g.n)]
    for i, j in g.edges:
        fwd[i].append(j)
        rev[j].append(i)
    return bool(_reachable(g.n, fwd, 0).all() and _reachable(g.n, rev, 0).all())


def union_graph(graphs):
    graphs = list(graphs)
    edges = frozenset().union(*(g.edges for g in graphs))
    return Digraph(graphs[0].n, edges)


class GraphSequence:
    """
    Deterministic sequence of digraphs G(0), G(1), ...

    Subclasses implement ``_graph(t)``. ``B`` is the connectivity window the
    sequence claims; protocol code never reads it.
    """

    model = "abstract"

    def __init__(self, n, B=1, seed=0):
        if n < 1:
            raise ValueError("n must be >= 1")
        if B < 1:
            raise ValueError("B must be >= 1")
        self.n = int(n)
        self.B = int(B)
        self.seed = int(seed)

    def graph_at(self, t):
        """Return G(t); a pure function of the sequence and ``t``."""
        if t < 0:
            raise ValueError("t must be >= 0")
        return self._graph(int(t))

    def _graph(self, t):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, B={self.B}, seed={self.seed})"


class StaticSequence(GraphSequence):
    model = "static"

    def __init__(self, graph, B=1, seed=0):
        super().__init__(graph.n, B, seed)
        self.graph = graph

    def _graph(self, t):
        return self.graph


class CyclicSequence(GraphSequence):
    """Periodic schedule: G(t) = graphs[t mod period]."""

    model = "cyclic-schedule"

    def __init__(self, graphs, B=None, seed=0):
        graphs = tuple(graphs)
        if not graphs:
            raise ValueError("cyclic schedule needs at least one graph")
        n = graphs[0].n
        if any(g.n != n for g in graphs):
            raise ValueError("all graphs in a schedule must share n")
        super().__init__(n, len(graphs) if B is None else B, seed)
        self.graphs = graphs

    def _graph(self, t):
        return self.graphs[t % len(self.graphs)]


class RandomBConnectedSequence(GraphSequence):
    """
    Random sequence whose every aligned B-window union is strongly connected.

    Window k draws a random Hamiltonian cycle, scatters its n edges over the
    B rounds of the window, then adds every other ordered pair independently
    with probability ``p`` in each round.
    """

    model = "random-B-connected"

    def __init__(self, n, B=1, seed=0, p=0.1):
        super().__init__(n, B, seed)
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        self.p = float(p)
        self._window = lru_cache(maxsize=256)(self._make_window)

    def _make_window(self, k):
        n, B = self.n, self.B
        rng = philox(self.seed, 0x6772, k)
        perm = rng.permutation(n)
        rounds = [set() for _ in range(B)]
        if n > 1:
            slot = rng.integers(0, B, size=n)
            for m in range(n):
                rounds[slot[m]].add((int(perm[m]), int(perm[(m + 1) % n])))
        off_diag = ~np.eye(n, dtype=bool)
        for r in range(B):
            extra = (rng.random((n, n)) < self.p) & off_diag
            rows, cols = np.nonzero(extra)
            rounds[r].update(zip(rows.tolist(), cols.tolist()))
        return tuple(Digraph(n, frozenset(e)) for e in rounds)

    def _graph(self, t):
        return self._window(t // self.B)[t % self.B]


class RegularCirculantSequence(GraphSequence):
    """
    Circulant graphs: node i points to i+1, ..., i+c(t) (mod n).

    ``c(t)`` cycles through ``degrees`` when given, otherwise is drawn per
    round from ``[c_min, c_max]`` with the sequence seed. Every in- and
    out-degree equals c(t) + 1, so each A(t) is doubly stochastic.
    """

    model = "regular-family"

    def __init__(self, n, B=1, seed=0, degrees=None, c_min=1, c_max=1):
        super().__init__(n, B, seed)
        top = max(n - 1, 0)
        if degrees is not None:
            degrees = tuple(int(c) for c in degrees)
            if not degrees or any(c < 0 or c > top for c in degrees):
                raise ValueError(f"circulant degrees must lie in [0, {top}]")
        elif not 0 <= c_min <= c_max <= top:
            raise ValueError(f"need 0 <= c_min <= c_max <= {top}")
        self.degrees = degrees
        self.c_min, self.c_max = int(c_min), int(c_max)

    def degree_at(self, t):
        if self.degrees is not None:
            return self.degrees[t % len(self.degrees)]
        if self.c_min == self.c_max:
            return self.c_min
        return int(philox(self.seed, 0x7265, t).integers(self.c_min, self.c_max + 1))

    def _graph(self, t):
        c, n = self.degree_at(t), self.n
        return Digraph(n, frozenset((i, (i + k) % n) for i in range(n) for k in range(1, c + 1)))


def make_sequence(model, n, B=1, seed=0, **params):
    """Factory keyed by model name (the names used in run configs)."""
    if model == "static":
        graph = params.pop("graph", None)
        if graph is None:
            graph = Digraph.from_edge_list(n, params.pop("edges", []))
        seq = StaticSequence(graph, B, seed)
    elif model == "cyclic-schedule":
        graphs = params.pop("graphs")
        graphs = [g if isinstance(g, Digraph) else Digraph.from_edge_list(n, g) for g in graphs]
        seq = CyclicSequence(graphs, B, seed)
    elif model == "random-B-connected":
        seq = RandomBConnectedSequence(n, B, seed, p=params.pop("p", 0.1))
    elif model == "regular-family":
        seq = RegularCirculantSequence(
            n, B, seed,
            degrees=params.pop("degrees", None),
            c_min=params.pop("c_min", 1),
            c_max=params.pop("c_max", 1),
        )
    else:
        raise ValueError(f"unknown graph model {model!r}")
    if params:
        raise ValueError(f"unexpected parameters for {model}: {sorted(params)}")
    return seq


def window_verdicts(seq, B, k_max):
    """Strong-connectivity verdict of the union over rounds kB..(k+1)B-1, for each k."""
    if B < 1 or k_max < 1:
        raise ValueError("B and k_max must be >= 1")
    return [
        is_strongly_connected(union_graph(seq.graph_at(t) for t in range(k * B, (k + 1) * B)))
        for k in range(k_max)
    ]


def verify_b_connected(seq, B, k_max):
    """
    Check the first ``k_max`` aligned windows of length ``B``.

    Returns
    -------
    ok : bool
    first_failure : int or None
        Index k of the first disconnected window.
    """
    if B < 1 or k_max < 1:
        raise ValueError("B and k_max must be >= 1")
    for k in range(k_max):
        window = union_graph(seq.graph_at(t) for t in range(k * B, (k + 1) * B))
        if not is_strongly_connected(window):
            return False, k
    return True, None
