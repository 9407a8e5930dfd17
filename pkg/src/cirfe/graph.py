"""Undirected communication graphs, Laplacians and i.i.d. random link failures.

Node indices are 0-based inside the library. The JSON form uses 1-based
indices, see :meth:`Graph.to_dict`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

EIG_TOL = 1e-10
CONNECTIVITY_TOL = 1e-8


class EmptyInterestError(ValueError):
    """Raised when a component has no agent interested in it."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on ``n`` nodes."""

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs at least one node, got n={self.n}")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside [0, {self.n})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def neighbors(self, node: int) -> list[int]:
        return [j if i == node else i for i, j in self.edges if node in (i, j)]

    def hop_distances(self, source: int) -> np.ndarray:
        """BFS hop counts from ``source``; unreachable nodes get -1."""
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        dist = np.full(self.n, -1, dtype=int)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        return bool(np.all(self.hop_distances(0) >= 0))

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[i + 1, j + 1] for i, j in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        return cls(int(d["n"]), tuple((int(i) - 1, int(j) - 1) for i, j in d["edges"]))


def ring_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a ring needs at least 3 nodes")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def laplacian(g: Graph) -> np.ndarray:
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


def algebraic_connectivity(lap: np.ndarray) -> float:
    """Second-smallest eigenvalue of a Laplacian (0.0 for a single node)."""
    if lap.shape[0] < 2:
        return 0.0
    return float(np.linalg.eigvalsh(lap)[1])


def is_connected_spectral(lap: np.ndarray) -> bool:
    if lap.shape[0] == 1:
        return True
    return algebraic_connectivity(lap) > CONNECTIVITY_TOL


def induced_subgraph(g: Graph, nodes) -> tuple[Graph, dict[int, int]]:
    """Subgraph on ``nodes`` plus the map from original to new labels.

    New labels follow the sorted order of ``nodes``.
    """
    nodes = sorted(set(int(v) for v in nodes))
    if not nodes:
        raise EmptyInterestError("induced subgraph requested on an empty node set")
    for v in nodes:
        if not 0 <= v < g.n:
            raise ValueError(f"node {v} outside [0, {g.n})")
    relabel = {v: k for k, v in enumerate(nodes)}
    edges = tuple(
        (relabel[i], relabel[j]) for i, j in g.edges if i in relabel and j in relabel
    )
    return Graph(len(nodes), edges), relabel


@dataclass(frozen=True)
class LaplacianProcess:
    """Each base-graph edge is active independently with probability ``p`` at every step.

    The mean Laplacian is ``p * laplacian(base)``. ``p = 1`` gives a static graph.
    """

    base: Graph
    p: float = 1.0
    seed: int = 0
    _base_lap: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"edge activation probability must lie in (0, 1], got {self.p}")
        object.__setattr__(self, "_base_lap", laplacian(self.base))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def static(self) -> bool:
        return self.p == 1.0

    def mean_laplacian(self) -> np.ndarray:
        return self.p * self._base_lap

    def edge_array(self) -> np.ndarray:
        return np.array(self.base.edges, dtype=int).reshape(-1, 2)

    def adjacency_from_mask(self, active: np.ndarray) -> np.ndarray:
        """Adjacency matrices for boolean edge masks of shape (..., n_edges)."""
        e = self.edge_array()
        active = np.asarray(active, dtype=float)
        a = np.zeros(active.shape[:-1] + (self.n, self.n))
        a[..., e[:, 0], e[:, 1]] = active
        a[..., e[:, 1], e[:, 0]] = active
        return a

    def sample_adjacency(self, t: int) -> np.ndarray:
        if self.static:
            return self.base.adjacency()
        rng = np.random.default_rng([self.seed, t])
        return self.adjacency_from_mask(rng.random(len(self.base.edges)) < self.p)

    def sample_laplacian(self, t: int) -> np.ndarray:
        """Laplacian at step ``t``; a pure function of ``(seed, t)``."""
        a = self.sample_adjacency(t)
        return np.diag(a.sum(axis=1)) - a

    def to_dict(self) -> dict:
        return {"graph": self.base.to_dict(), "p": self.p, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "LaplacianProcess":
        return cls(Graph.from_dict(d["graph"]), float(d.get("p", 1.0)), int(d.get("seed", 0)))


def sample_laplacian(proc: LaplacianProcess, t: int) -> np.ndarray:
    """Laplacian of the graph active at step ``t``; same (seed, t) gives the same matrix."""
    return proc.sample_laplacian(t)
