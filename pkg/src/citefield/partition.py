"""Group assignments shared by all three methods, and their CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ISOLATE
from .errors import ParseError, ValidationError

ISOLATE_TOKEN = "ISOLATE"


def relabel(labels, order: str = "first") -> np.ndarray:
    """Map arbitrary group keys to dense ids 0..g-1.

    ``order="first"`` numbers groups by their lowest member index,
    ``order="size"`` by size descending with ties going to the group whose
    lowest member index is smaller. Negative keys (isolates) are left as
    ``ISOLATE``.
    """
    labels = np.asarray(labels)
    keys = []
    first = {}
    size = {}
    for i, lab in enumerate(labels.tolist()):
        if lab < 0:
            continue
        if lab not in first:
            first[lab] = i
            keys.append(lab)
        size[lab] = size.get(lab, 0) + 1
    if order == "size":
        keys.sort(key=lambda k: (-size[k], first[k]))
    elif order != "first":
        raise ValidationError(f"unknown relabel order {order!r}")
    mapping = {k: g for g, k in enumerate(keys)}
    return np.array([mapping[lab] if lab >= 0 else ISOLATE for lab in labels.tolist()], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Partition:
    """Every journal in exactly one group; group ids are dense 0..g-1."""

    labels: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.size and labels.min() < 0:
            raise ValidationError("partition labels must be non-negative")
        if labels.size and set(np.unique(labels).tolist()) != set(range(int(labels.max()) + 1)):
            raise ValidationError("partition group ids must be dense 0..g-1")
        if self.names and len(self.names) != labels.size:
            raise ValidationError("names and labels differ in length")

    @classmethod
    def from_labels(cls, labels, names: Sequence[str] = (), order: str = "first") -> "Partition":
        return cls(relabel(labels, order), tuple(names))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def n_groups(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == g) for g in range(self.n_groups)]

    def sizes(self) -> list[int]:
        return np.bincount(self.labels, minlength=self.n_groups).tolist() if self.n else []

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels) and self.names == other.names

    __hash__ = None


def adjusted_rand_index(a, b) -> float:
    """Adjusted Rand index between two flat labelings (any hashable labels)."""
    a = list(a)
    b = list(b)
    if len(a) != len(b):
        raise ValidationError("labelings differ in length")
    n = len(a)
    table: dict[tuple, int] = {}
    rows: dict = {}
    cols: dict = {}
    for x, y in zip(a, b):
        table[(x, y)] = table.get((x, y), 0) + 1
        rows[x] = rows.get(x, 0) + 1
        cols[y] = cols.get(y, 0) + 1
    index = sum(comb(v, 2) for v in table.values())
    sum_a = sum(comb(v, 2) for v in rows.values())
    sum_b = sum(comb(v, 2) for v in cols.values())
    total = comb(n, 2)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        return 1.0
    return (index - expected) / (max_index - expected)


def write_assignment_csv(
    path: str | Path,
    names: Sequence[str],
    labels,
    loadings: Sequence[float] | None = None,
) -> None:
    """``abbreviation,group[,loading]`` with isolates written as ``ISOLATE``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["abbreviation", "group"] + (["loading"] if loadings is not None else []))
        for i, (name, lab) in enumerate(zip(names, np.asarray(labels).tolist())):
            row = [name, ISOLATE_TOKEN if lab < 0 else str(lab)]
            if loadings is not None:
                row.append(repr(float(loadings[i])))
            w.writerow(row)


def write_partition_csv(p: Partition, path: str | Path) -> None:
    write_assignment_csv(path, p.names, p.labels)


def read_assignment_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray, np.ndarray | None]:
    """Returns (names, labels with ISOLATE=-1, loadings or None)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["abbreviation", "group"]:
            raise ParseError(f"{path}:1: expected header 'abbreviation,group'")
        has_loading = len(header) > 2 and header[2] == "loading"
        names, labels, loads = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ParseError(f"{path}:{lineno}: expected at least 2 fields")
            names.append(row[0])
            try:
                labels.append(ISOLATE if row[1] == ISOLATE_TOKEN else int(row[1]))
                if has_loading:
                    loads.append(float(row[2]))
            except (ValueError, IndexError):
                raise ParseError(f"{path}:{lineno}: malformed row {row!r}") from None
    return tuple(names), np.array(labels, dtype=np.int64), (np.array(loads) if has_loading else None)
