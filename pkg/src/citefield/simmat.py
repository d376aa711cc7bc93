"""Salton cosine, Pearson correlation and distances over citation profiles."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .corpus import CitationMatrix
from .errors import ParseError, ValidationError

Axis = Literal["cited", "citing"]


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    kind: str
    degenerate: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.labels)


def profiles(m: CitationMatrix, axis: Axis = "cited", include_self: bool = False) -> tuple[np.ndarray, tuple[str, ...]]:
    """Profile matrix with one column per journal.

    For ``cited`` each journal's profile is its column of incoming citations
    over the citing rows; for ``citing`` it is its outgoing row.
    """
    dense = m.dense().astype(np.int64)
    if not include_self:
        for r, i in enumerate(m.citing):
            dense[r, i] = 0
    names = m.abbreviations
    if axis == "cited":
        return dense, tuple(names)
    if axis == "citing":
        return dense.T.copy(), tuple(names[i] for i in m.citing)
    raise ValidationError(f"unknown axis {axis!r}")


def cosine(u, v) -> float:
    u = np.asarray(u)
    v = np.asarray(v)
    nu = float(np.sqrt(np.dot(u, u)))
    nv = float(np.sqrt(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v)) / (nu * nv)


def cosine_matrix(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cosine between the columns of ``x``; returns (values, zero-norm mask).

    Integer input is multiplied in int64 so the result does not depend on
    summation order.
    """
    x = np.asarray(x)
    gram = x.T @ x
    sq = np.diag(gram).astype(np.float64)
    zero = sq == 0
    norms = np.sqrt(sq)
    norms[zero] = 1.0
    s = gram.astype(np.float64) / np.outer(norms, norms)
    s = np.clip(s, -1.0, 1.0)
    s[zero, :] = 0.0
    s[:, zero] = 0.0
    np.fill_diagonal(s, np.where(zero, 0.0, 1.0))
    return s, zero


def pearson_matrix(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Product-moment correlation between columns; constant columns get 0."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        raise ValidationError(f"pearson correlation needs at least 2 observations, got {x.shape[0]}")
    xc = x - x.mean(axis=0)
    ss = np.einsum("ij,ij->j", xc, xc)
    const = ss == 0
    sd = np.sqrt(ss)
    sd[const] = 1.0
    z = xc / sd
    r = z.T @ z
    r = (r + r.T) / 2.0
    r = np.clip(r, -1.0, 1.0)
    r[const, :] = 0.0
    r[:, const] = 0.0
    np.fill_diagonal(r, np.where(const, 0.0, 1.0))
    return r, const


def cosine_similarity(m: CitationMatrix, axis: Axis = "cited", include_self: bool = False) -> SimilarityMatrix:
    if m.n == 0 or not m.citing:
        raise ValidationError("cosine similarity of an empty matrix")
    x, labels = profiles(m, axis, include_self)
    s, zero = cosine_matrix(x)
    return SimilarityMatrix(labels, s, "cosine", tuple(a for a, z in zip(labels, zero) if z))


def pearson_correlation(m: CitationMatrix, include_self: bool = False) -> SimilarityMatrix:
    """Correlation between cited journals (variables) over citing journals (cases)."""
    x, labels = profiles(m, "cited", include_self)
    r, const = pearson_matrix(x)
    return SimilarityMatrix(labels, r, "pearson", tuple(a for a, c in zip(labels, const) if c))


def distance_from_similarity(s: SimilarityMatrix | np.ndarray) -> np.ndarray:
    values = s.values if isinstance(s, SimilarityMatrix) else np.asarray(s, dtype=np.float64)
    d = np.clip(1.0 - values, 0.0, 2.0)
    np.fill_diagonal(d, 0.0)
    return d


def write_matrix_csv(labels, values: np.ndarray, path: str | Path, corner: str = "") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([corner, *labels])
        for lab, row in zip(labels, values):
            w.writerow([lab, *(repr(float(v)) for v in row)])


def read_matrix_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty matrix file")
    labels = tuple(rows[0][1:])
    body = rows[1:]
    if len(body) != len(labels):
        raise ParseError(f"{path}: expected {len(labels)} rows, got {len(body)}")
    values = np.empty((len(labels), len(labels)))
    for k, row in enumerate(body, start=2):
        if len(row) != len(labels) + 1 or row[0] != labels[k - 2]:
            raise ParseError(f"{path}:{k}: row label or width mismatch")
        try:
            values[k - 2] = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}:{k}: {exc}") from None
    return labels, values


def write_similarity_csv(s: SimilarityMatrix, path: str | Path) -> None:
    write_matrix_csv(s.labels, s.values, path, corner=s.kind)


def read_similarity_csv(path: str | Path) -> SimilarityMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        first = next(csv.reader(fh), [""])
    labels, values = read_matrix_csv(path)
    return SimilarityMatrix(labels, values, first[0] or "cosine")
