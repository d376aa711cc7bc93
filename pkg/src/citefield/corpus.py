"""Journal registry and citing -> cited count matrix.

Edge lists are CSV files with the header ``citing,cited,count``. The optional
registry file has the header ``abbreviation,name,external_label``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import ParseError, ValidationError

EDGE_HEADER = ("citing", "cited", "count")
REGISTRY_HEADER = ("abbreviation", "name", "external_label")


@dataclass(frozen=True)
class Journal:
    id: int
    abbreviation: str
    name: str = ""
    external_label: str | None = None


@dataclass(frozen=True, eq=False)
class CitationMatrix:
    """Citation counts between journals of one registry.

    ``counts[i, j]`` is the number of citations from journal ``i`` to journal
    ``j`` (registry ids). Every registry journal is a cited-side column;
    ``citing`` lists the registry ids that remain as citing rows, so after
    cleaning the matrix can be rectangular (fewer citing than cited journals).
    """

    registry: tuple[Journal, ...]
    counts: sparse.csr_array
    citing: tuple[int, ...]
    year_label: str = ""
    dropped: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = len(self.registry)
        if self.counts.shape != (n, n):
            raise ValidationError(f"counts shape {self.counts.shape} does not match registry size {n}")
        for pos, j in enumerate(self.registry):
            if j.id != pos:
                raise ValidationError(f"journal ids must be contiguous 0..n-1, got {j.id} at {pos}")
        abbrevs = [j.abbreviation for j in self.registry]
        if any(not a for a in abbrevs):
            raise ValidationError("empty journal abbreviation")
        if len(set(abbrevs)) != n:
            raise ValidationError("duplicate journal abbreviation in registry")
        if self.counts.nnz and self.counts.data.min() < 0:
            raise ValidationError("negative citation count")

    @property
    def n(self) -> int:
        return len(self.registry)

    @property
    def abbreviations(self) -> list[str]:
        return [j.abbreviation for j in self.registry]

    def index(self) -> dict[str, int]:
        return {j.abbreviation: j.id for j in self.registry}

    def square(self) -> np.ndarray:
        """Dense n x n counts over the whole registry."""
        return self.counts.toarray()

    def dense(self) -> np.ndarray:
        """Dense (n_citing x n_cited) array: rows = citing journals, columns = all journals."""
        return self.counts.toarray()[list(self.citing), :]

    def triples(self) -> list[tuple[str, str, int]]:
        """Strictly positive entries as sorted (citing, cited, count) triples."""
        coo = self.counts.tocoo()
        names = self.abbreviations
        out = [(names[i], names[j], int(c)) for i, j, c in zip(coo.row, coo.col, coo.data) if c > 0]
        return sorted(out)

    def __eq__(self, other):
        if not isinstance(other, CitationMatrix):
            return NotImplemented
        return (
            self.registry == other.registry
            and self.citing == other.citing
            and self.year_label == other.year_label
            and self.dropped == other.dropped
            and self.triples() == other.triples()
        )

    __hash__ = None


def from_dense(
    counts: np.ndarray | Sequence[Sequence[int]],
    abbreviations: Sequence[str] | None = None,
    year_label: str = "",
) -> CitationMatrix:
    arr = np.asarray(counts, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]
    if abbreviations is None:
        abbreviations = [f"J{i}" for i in range(n)]
    registry = tuple(Journal(i, a) for i, a in enumerate(abbreviations))
    mat = sparse.csr_array(arr)
    mat.eliminate_zeros()
    return CitationMatrix(registry, mat, tuple(range(n)), year_label)


def _build(
    registry: tuple[Journal, ...],
    rows: list[int],
    cols: list[int],
    vals: list[int],
    year_label: str,
) -> CitationMatrix:
    n = len(registry)
    coo = sparse.coo_array(
        (np.asarray(vals, dtype=np.int64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n, n),
    )
    mat = coo.tocsr()  # sums duplicate (citing, cited) pairs
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return CitationMatrix(registry, mat, tuple(range(n)), year_label)


def load_registry(path: str | Path) -> tuple[Journal, ...]:
    journals = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return ()
        if tuple(h.strip() for h in header[:1]) != ("abbreviation",):
            raise ParseError(f"{path}:1: registry header must start with 'abbreviation'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            abbrev = row[0]
            if not abbrev:
                raise ValidationError(f"{path}:{lineno}: empty abbreviation")
            if abbrev in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate abbreviation {abbrev!r}")
            seen.add(abbrev)
            name = row[1] if len(row) > 1 else ""
            label = row[2] if len(row) > 2 and row[2] != "" else None
            journals.append(Journal(len(journals), abbrev, name, label))
    return tuple(journals)


def _read_edges(path: str | Path) -> Iterable[tuple[int, str, str, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return
        if tuple(h.strip() for h in header) != EDGE_HEADER:
            raise ParseError(f"{path}:1: expected header 'citing,cited,count', got {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            citing, cited, raw = row
            if not citing or not cited:
                raise ParseError(f"{path}:{lineno}: empty journal abbreviation")
            try:
                count = int(raw)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: count {raw!r} is not an integer") from None
            if count < 0:
                raise ValidationError(f"{path}:{lineno}: negative count {count}")
            yield lineno, citing, cited, count


def ingest_edges(
    path: str | Path,
    registry_path: str | Path | None = None,
    year_label: str = "",
) -> CitationMatrix:
    """Read an edge-list CSV into a :class:`CitationMatrix`.

    Duplicate (citing, cited) rows are summed. Without a registry file the
    journal set is the union of abbreviations in order of first appearance.
    With one, unknown abbreviations are rejected.
    """
    edges = list(_read_edges(path))
    if registry_path is not None:
        registry = load_registry(registry_path)
        index = {j.abbreviation: j.id for j in registry}
        for lineno, citing, cited, _ in edges:
            for a in (citing, cited):
                if a not in index:
                    raise ValidationError(f"{path}:{lineno}: unknown journal {a!r} (not in {registry_path})")
    else:
        index = {}
        for _, citing, cited, _ in edges:
            for a in (citing, cited):
                if a not in index:
                    index[a] = len(index)
        registry = tuple(Journal(i, a) for a, i in index.items())
    rows = [index[e[1]] for e in edges]
    cols = [index[e[2]] for e in edges]
    vals = [e[3] for e in edges]
    return _build(registry, rows, cols, vals, year_label)


def export_edges(m: CitationMatrix, path: str | Path) -> None:
    """Write positive entries as a ``citing,cited,count`` CSV in registry order."""
    coo = m.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    names = m.abbreviations
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for t in order:
            if coo.data[t] > 0:
                w.writerow((names[coo.row[t]], names[coo.col[t]], int(coo.data[t])))


def export_registry(m: CitationMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REGISTRY_HEADER)
        for j in m.registry:
            w.writerow((j.abbreviation, j.name, j.external_label or ""))


def clean(m: CitationMatrix, drop_inactive_citing: bool = True) -> CitationMatrix:
    """Drop citing rows with no outgoing citations.

    Cited-side columns are never removed, so a journal that cites nothing
    keeps its column. Dropped journals are appended to ``dropped``, which is
    the cleaning log.
    """
    if not drop_inactive_citing:
        return m
    out_totals = np.asarray(m.counts.sum(axis=1)).ravel()
    keep = tuple(i for i in m.citing if out_totals[i] > 0)
    if keep == m.citing:
        return m
    gone = tuple(m.registry[i].abbreviation for i in m.citing if out_totals[i] == 0)
    return replace(m, citing=keep, dropped=m.dropped + gone)


def write_cleaning_log(m: CitationMatrix, path: str | Path) -> None:
    Path(path).write_text("".join(f"{a}\n" for a in m.dropped), encoding="utf-8")


@dataclass(frozen=True)
class SparsityStats:
    n_citing: int
    n_cited: int
    nnz: int
    sparsity: float
    total_citations: int
    diagonal_total: int


def sparsity_stats(m: CitationMatrix) -> SparsityStats:
    sub = m.counts[list(m.citing), :] if m.citing else sparse.csr_array((0, m.n), dtype=np.int64)
    nnz = int(np.count_nonzero(sub.data > 0)) if sub.nnz else 0
    cells = len(m.citing) * m.n
    diag = m.counts.diagonal()
    return SparsityStats(
        n_citing=len(m.citing),
        n_cited=m.n,
        nnz=nnz,
        sparsity=1.0 - nnz / cells if cells else 1.0,
        total_citations=int(sub.sum()) if sub.nnz else 0,
        diagonal_total=int(diag[list(m.citing)].sum()) if m.citing else 0,
    )


def cites_received(m: CitationMatrix, include_self: bool = False) -> np.ndarray:
    """Column sums over the citing rows, one entry per registry journal."""
    dense = m.dense().astype(np.int64)
    totals = dense.sum(axis=0)
    if not include_self:
        for r, i in enumerate(m.citing):
            totals[i] -= dense[r, i]
    return totals
