"""Agglomerative clustering with Ward's method.

Ward is defined for Euclidean distances. Cosine-derived distances are not
guaranteed to embed in Euclidean space; the Lance-Williams update is applied
to squared distances regardless, which is the usual practice, and merge
monotonicity is only promised when :func:`is_euclidean` holds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .partition import Partition


class Merge(NamedTuple):
    left: int
    right: int
    cost: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge history in the scipy linkage convention.

    Leaves are clusters ``0..n-1``; the cluster created by merge ``t`` gets id
    ``n + t``. ``cost`` is the Ward distance (square root of the updated
    squared distance), so two points merge at their plain distance.
    """

    merges: tuple[Merge, ...]
    n_leaves: int
    names: tuple[str, ...] = ()

    def costs(self) -> np.ndarray:
        return np.array([m.cost for m in self.merges])

    def is_monotone(self) -> bool:
        c = self.costs()
        return bool(np.all(np.diff(c) >= -1e-12 * max(1.0, float(np.abs(c).max(initial=0.0)))))

    def as_linkage(self) -> np.ndarray:
        return np.array([[m.left, m.right, m.cost, m.size] for m in self.merges], dtype=np.float64).reshape(-1, 4)


def check_distance(d: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {d.shape}")
    if not np.allclose(d, d.T, rtol=0.0, atol=atol):
        raise ValidationError("distance matrix is not symmetric")
    if (d < 0).any():
        raise ValidationError("distance matrix has negative entries")
    if np.abs(np.diag(d)).max(initial=0.0) > atol:
        raise ValidationError("distance matrix has a non-zero diagonal")
    return d


def is_euclidean(d: np.ndarray, tol: float = 1e-9) -> bool:
    """True if the distances embed in Euclidean space (classical MDS Gram matrix is PSD)."""
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if n < 3:
        return True
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (d**2) @ j
    w = np.linalg.eigvalsh((b + b.T) / 2)
    return bool(w.min() >= -tol * max(1.0, float(np.abs(w).max())))


def ward_cluster(d: np.ndarray, names: Sequence[str] = ()) -> Dendrogram:
    """Full Ward agglomeration of a distance matrix.

    Each merged cluster keeps the slot of its lower-indexed part, so a slot
    is always the smallest leaf of its cluster; nearest-pair ties go to the
    lexicographically smallest (slot_i, slot_j).
    """
    d = check_distance(d)
    n = d.shape[0]
    d2 = d**2
    active = np.ones(n, dtype=bool)
    size = np.ones(n)
    cid = np.arange(n)
    merges = []
    big = np.inf
    work = d2.copy()
    np.fill_diagonal(work, big)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    for t in range(n - 1):
        # row-major argmin returns the lexicographically first minimum
        flat = int(np.argmin(np.where(upper, work, big)))
        i, j = divmod(flat, n)
        dij = work[i, j]
        ni, nj = size[i], size[j]
        nk = size
        upd = ((ni + nk) * work[:, i] + (nj + nk) * work[:, j] - nk * dij) / (ni + nj + nk)
        merges.append(Merge(int(cid[i]), int(cid[j]), float(np.sqrt(max(dij, 0.0))), int(ni + nj)))
        active[j] = False
        work[:, i] = np.where(active, upd, big)
        work[i, :] = work[:, i]
        work[i, i] = big
        work[:, j] = big
        work[j, :] = big
        size[i] = ni + nj
        cid[i] = n + t
    return Dendrogram(tuple(merges), n, tuple(names))


def cut(dg: Dendrogram, k: int) -> Partition:
    """Undo the last k-1 merges.

    Groups are numbered by size descending, ties by lowest member index.
    """
    n = dg.n_leaves
    if not 1 <= k <= max(n, 1):
        raise ValidationError(f"k must be in 1..{n}, got {k}")
    parent = list(range(2 * n))
    for t, mg in enumerate(dg.merges[: n - k]):
        parent[mg.left] = n + t
        parent[mg.right] = n + t

    def root(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    labels = np.array([root(i) for i in range(n)])
    return Partition.from_labels(labels, dg.names, order="size")


def write_dendrogram_csv(dg: Dendrogram, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "left", "right", "cost", "size"])
        for t, m in enumerate(dg.merges):
            w.writerow([t, m.left, m.right, repr(m.cost), m.size])


def read_dendrogram_csv(path: str | Path, names: Sequence[str] = ()) -> Dendrogram:
    merges = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["step", "left", "right", "cost", "size"]:
            raise ParseError(f"{path}:1: unexpected dendrogram header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            try:
                _, left, right, cost, size = row
                merges.append(Merge(int(left), int(right), float(cost), int(size)))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: malformed merge row {row!r}") from None
    return Dendrogram(tuple(merges), len(merges) + 1 if merges else len(names), tuple(names))
