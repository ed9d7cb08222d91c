"""Communication digraph of an Energy Router (node 0) and N ICUs.

Edge convention: ``icu_adjacency[i, j] > 0`` means ICU ``j`` can send to ICU
``i`` (``j`` is a parent of ``i``). This is the transpose of the
``adj[src, dst]`` layout used by many graph libraries. ICUs are indexed
``0..N-1`` in code; configuration files and trace columns use ``1..N``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

STABILITY_MARGIN = 1e-9

Absorption = Literal["C", "C'"]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridGraph:
    """Weighted digraph over the ER (node 0) and ICUs 1..N.

    Attributes:
        icu_adjacency: N x N weights ``a_ij`` (``j`` sends to ``i``).
        er_to_icu: ``a_i0`` in {0, 1}; the ER sends to ICU ``i``.
        icu_to_er: ``a_0i`` in {0, 1}; ICU ``i`` sends to the ER.
    """

    icu_adjacency: np.ndarray
    er_to_icu: np.ndarray
    icu_to_er: np.ndarray

    def __post_init__(self):
        adj = _frozen(self.icu_adjacency)
        to_icu = _frozen(self.er_to_icu)
        to_er = _frozen(self.icu_to_er)
        n = adj.shape[0]
        if adj.ndim != 2 or adj.shape != (n, n) or n < 1:
            raise ValueError(f"icu_adjacency must be a non-empty square matrix, got shape {adj.shape}")
        if to_icu.shape != (n,) or to_er.shape != (n,):
            raise ValueError("er_to_icu and icu_to_er must have length n_icus")
        if not np.all(np.isfinite(adj)) or np.any(adj < 0):
            raise ValueError("adjacency weights must be finite and non-negative")
        if np.any(np.diag(adj) != 0):
            raise ValueError("self-loops are not allowed (a_ii must be 0)")
        for name, vec in (("er_to_icu", to_icu), ("icu_to_er", to_er)):
            if not np.all((vec == 0) | (vec == 1)):
                raise ValueError(f"{name} entries must be exactly 0 or 1")
        object.__setattr__(self, "icu_adjacency", adj)
        object.__setattr__(self, "er_to_icu", to_icu)
        object.__setattr__(self, "icu_to_er", to_er)

    @property
    def n_icus(self) -> int:
        return self.icu_adjacency.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.icu_adjacency, self.icu_adjacency.T))

    @cached_property
    def in_neighbors(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per ICU, the ``(j, a_ij)`` pairs of ICUs it receives from."""
        adj = self.icu_adjacency
        return tuple(
            tuple((int(j), float(adj[i, j])) for j in np.flatnonzero(adj[i]))
            for i in range(self.n_icus)
        )

    @classmethod
    def from_edges(cls, n_icus: int, edges, er_to=(), er_from=(), undirected: bool = False) -> "GridGraph":
        """Build from ``(src, dst, weight)`` triples with 0-based ICU indices.

        ``er_to`` lists ICUs the ER sends to, ``er_from`` ICUs that send to the ER.
        With ``undirected=True`` every edge is added in both directions.
        """
        adj = np.zeros((n_icus, n_icus))
        for src, dst, w in edges:
            adj[dst, src] = w
            if undirected:
                adj[src, dst] = w
        to_icu = np.zeros(n_icus)
        to_icu[list(er_to)] = 1.0
        to_er = np.zeros(n_icus)
        to_er[list(er_from)] = 1.0
        return cls(adj, to_icu, to_er)


@dataclass(frozen=True, eq=False)
class DerivedMatrices:
    laplacian: np.ndarray
    leader_matrix: np.ndarray
    absorption_c: np.ndarray
    absorption_c_prime: np.ndarray


def laplacian(graph: GridGraph) -> np.ndarray:
    adj = graph.icu_adjacency
    return np.diag(adj.sum(axis=1)) - adj


def build_derived(graph: GridGraph, undirected: bool = False) -> DerivedMatrices:
    """Laplacian, leader matrix ``L + diag(a_i0)`` and the absorption matrices.

    Raises:
        ValueError: if ``undirected`` is requested but the ICU adjacency is
            not symmetric.
    """
    if undirected and not graph.is_symmetric:
        raise ValueError("icu_adjacency is not symmetric but undirected semantics were requested")
    lap = laplacian(graph)
    mats = (
        lap,
        lap + np.diag(graph.er_to_icu),
        np.diag(graph.icu_to_er),
        np.diag(graph.er_to_icu * graph.icu_to_er),
    )
    for m in mats:
        m.setflags(write=False)
    return DerivedMatrices(*mats)


def _bfs(starts, successors) -> set[int]:
    seen = set(starts)
    queue = deque(seen)
    while queue:
        node = queue.popleft()
        for nxt in successors(node):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def check_spanning_tree_from_er(graph: GridGraph) -> bool:
    """True iff every ICU is reachable from the ER along directed edges."""
    adj = graph.icu_adjacency
    starts = np.flatnonzero(graph.er_to_icu).tolist()
    reached = _bfs(starts, lambda j: np.flatnonzero(adj[:, j]).tolist())
    return len(reached) == graph.n_icus


def check_paths_to_er(graph: GridGraph) -> bool:
    """True iff every ICU has a directed path to the ER."""
    adj = graph.icu_adjacency
    starts = np.flatnonzero(graph.icu_to_er).tolist()
    # walk edges backwards: from j to every parent i of j
    reached = _bfs(starts, lambda j: np.flatnonzero(adj[j]).tolist())
    return len(reached) == graph.n_icus


def is_strongly_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    fwd = _bfs([0], lambda j: np.flatnonzero(adj[:, j]).tolist())
    bwd = _bfs([0], lambda j: np.flatnonzero(adj[j]).tolist())
    return len(fwd) == n and len(bwd) == n


def check_bidirectional_er_neighbor(graph: GridGraph) -> bool:
    """Some ICU talks to the ER both ways and the ICU graph is connected.

    Connectivity is tested as strong connectivity, which coincides with
    ordinary connectivity for symmetric adjacency.
    """
    if not np.any(graph.er_to_icu * graph.icu_to_er):
        return False
    return is_strongly_connected(graph.icu_adjacency)


def step_size_bounds(graph: GridGraph) -> tuple[np.ndarray, float]:
    """Open upper bounds for the per-ICU price step and the mismatch step.

    An ICU with no incoming weight gets ``inf`` (unconstrained).
    """
    in_weight = graph.icu_adjacency.sum(axis=1)
    with np.errstate(divide="ignore"):
        eps_max = 1.0 / (in_weight + graph.er_to_icu)
    max_deg = in_weight.max()
    mu_max = float("inf") if max_deg == 0 else 1.0 / max_deg
    return eps_max, mu_max


def absorption_matrix(graph: GridGraph, absorption: Absorption) -> np.ndarray:
    if absorption == "C":
        return np.diag(graph.icu_to_er)
    if absorption == "C'":
        return np.diag(graph.er_to_icu * graph.icu_to_er)
    raise ValueError(f"absorption must be 'C' or \"C'\", got {absorption!r}")


def lemma1_spectral_check(
    graph: GridGraph, mu: float, absorption: Absorption = "C", margin: float = STABILITY_MARGIN
) -> tuple[float, bool]:
    """Spectral radius of ``(I - C_sel)(I - mu L)`` and whether it is < 1 - margin.

    Raises:
        ValueError: if ``mu`` is outside ``(0, mu_max)``.
    """
    _, mu_max = step_size_bounds(graph)
    if not (0.0 < mu < mu_max):
        raise ValueError(f"mu={mu} outside the open interval (0, {mu_max})")
    n = graph.n_icus
    eye = np.eye(n)
    m = (eye - absorption_matrix(graph, absorption)) @ (eye - mu * laplacian(graph))
    radius = float(np.max(np.abs(np.linalg.eigvals(m))))
    return radius, radius < 1.0 - margin
