"""Two-phase modularity optimisation (Blondel et al.) on the symmetrised citation graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .corpus import CitationMatrix
from .errors import ValidationError
from .partition import Partition, relabel

log = logging.getLogger(__name__)

Order = Literal["by_index", "seeded_shuffle"]


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected weighted graph.

    ``weights`` is a dense symmetric matrix with a zero diagonal; self-loop
    weight lives in ``self_loops`` and counts twice towards a node's degree.
    """

    weights: np.ndarray
    self_loops: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        s = np.asarray(self.self_loops, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or s.shape != (w.shape[0],):
            raise ValidationError("weights must be n x n and self_loops length n")
        if not np.array_equal(w, w.T):
            raise ValidationError("weights must be symmetric")
        if (w < 0).any() or (s < 0).any():
            raise ValidationError("weights must be non-negative")
        if np.diag(w).any():
            raise ValidationError("self-loop weight belongs in self_loops, not on the diagonal")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "self_loops", s)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1) + 2.0 * self.self_loops

    def total_weight(self) -> float:
        """m = half the off-diagonal weight plus all self-loop weight."""
        return float(self.weights.sum() / 2.0 + self.self_loops.sum())


def from_edges(n: int, edges, self_loops=None, names=()) -> WeightedGraph:
    """Build a graph from (i, j, w) triples; repeated pairs add up."""
    w = np.zeros((n, n))
    s = np.zeros(n) if self_loops is None else np.asarray(self_loops, dtype=np.float64)
    for i, j, x in edges:
        if i == j:
            s[i] += x
        else:
            w[i, j] += x
            w[j, i] += x
    return WeightedGraph(w, s, tuple(names))


def symmetrize(m: CitationMatrix, include_self: bool = False) -> WeightedGraph:
    a = m.square().astype(np.float64)
    w = a + a.T
    np.fill_diagonal(w, 0.0)
    s = np.diag(a).copy() if include_self else np.zeros(m.n)
    g = WeightedGraph(w, s, tuple(m.abbreviations))
    if g.total_weight() <= 0:
        raise ValidationError("citation graph has no edge weight (m = 0)")
    return g


def _one_hot(labels: np.ndarray, n_groups: int) -> np.ndarray:
    s = np.zeros((labels.size, n_groups))
    s[np.arange(labels.size), labels] = 1.0
    return s


def modularity(g: WeightedGraph, p: Partition | np.ndarray) -> float:
    labels = p.labels if isinstance(p, Partition) else relabel(p)
    if labels.size != g.n:
        raise ValidationError(f"partition covers {labels.size} nodes, graph has {g.n}")
    two_m = 2.0 * g.total_weight()
    if two_m == 0:
        raise ValidationError("modularity undefined for a graph with no edge weight")
    ng = int(labels.max()) + 1
    s = _one_hot(labels, ng)
    inside = np.einsum("ic,ij,jc->c", s, g.weights, s) + 2.0 * (s.T @ g.self_loops)
    tot = s.T @ g.degrees()
    return float(np.sum(inside / two_m - (tot / two_m) ** 2))


def aggregate(g: WeightedGraph, p: Partition | np.ndarray) -> WeightedGraph:
    """Collapse each community to a single node, keeping internal weight as a self-loop."""
    labels = p.labels if isinstance(p, Partition) else relabel(p)
    ng = int(labels.max()) + 1
    s = _one_hot(labels, ng)
    w = s.T @ g.weights @ s
    loops = np.diag(w) / 2.0 + s.T @ g.self_loops
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w, loops)


def _local_moves(g: WeightedGraph, order: np.ndarray, tol: float) -> tuple[np.ndarray, bool]:
    n = g.n
    k = g.degrees()
    two_m = k.sum()
    comm = np.arange(n)
    tot = k.copy()
    moved_any = False
    while True:
        moved = False
        for node in order:
            ci = comm[node]
            ki = k[node]
            k_in = np.bincount(comm, weights=g.weights[node], minlength=n)
            tot[ci] -= ki
            # gain of inserting node into c, up to the common factor 2/two_m
            gains = k_in - tot * ki / two_m
            cands = np.flatnonzero(k_in > 0)
            best, best_gain = ci, gains[ci]
            if cands.size:
                c = cands[np.argmax(gains[cands])]
                if gains[c] > best_gain and (gains[c] - gains[ci]) * 2.0 / two_m > tol:
                    best, best_gain = c, gains[c]
            tot[best] += ki
            if best != ci:
                comm[node] = best
                moved = True
        if not moved:
            break
        moved_any = True
    return comm, moved_any


@dataclass(frozen=True)
class LouvainResult:
    partition: Partition
    q_history: tuple[float, ...]

    @property
    def modularity(self) -> float:
        return self.q_history[-1]


def louvain(
    g: WeightedGraph,
    order: Order = "by_index",
    seed: int = 0,
    tol: float = 1e-9,
) -> LouvainResult:
    """Alternate local moves and aggregation until a pass no longer improves Q.

    ``q_history`` holds Q after every improving outer pass, or just the
    singleton Q when the first pass already finds no improving move.
    """
    if g.total_weight() <= 0:
        raise ValidationError("louvain needs a graph with positive total weight")
    if order not in ("by_index", "seeded_shuffle"):
        raise ValidationError(f"unknown node order {order!r}")
    rng = np.random.default_rng(seed)
    level = g
    assign = np.arange(g.n)
    q_prev = modularity(g, np.arange(g.n))
    history: list[float] = []
    while True:
        visit = rng.permutation(level.n) if order == "seeded_shuffle" else np.arange(level.n)
        comm, moved = _local_moves(level, visit, tol)
        if not moved:
            break
        comm = relabel(comm)
        q = modularity(level, comm)
        if q - q_prev <= tol:
            break
        history.append(q)
        log.debug("louvain pass %d: %d -> %d nodes, Q=%.6f", len(history), level.n, comm.max() + 1, q)
        assign = comm[assign]
        level = aggregate(level, comm)
        q_prev = q
    if not history:
        history.append(q_prev)
    return LouvainResult(Partition.from_labels(assign, g.names), tuple(history))
