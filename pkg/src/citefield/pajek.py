"""Pajek ``.net`` export and a minimal reader for round-tripping."""

from __future__ import annotations

import shlex
from pathlib import Path

import numpy as np

from .corpus import CitationMatrix, from_dense
from .errors import ParseError
from .louvain import WeightedGraph


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _quote(label: str) -> str:
    return '"' + label.replace('"', "'") + '"'


def pajek_lines(obj: CitationMatrix | WeightedGraph) -> list[str]:
    """Directed counts go under ``*Arcs``, symmetrised weights under ``*Edges``.

    Vertices are numbered from 1; zero-weight pairs are omitted.
    """
    if isinstance(obj, CitationMatrix):
        names = obj.abbreviations
        a = obj.square()
        lines = [f"*Vertices {len(names)}"] + [f"{i + 1} {_quote(nm)}" for i, nm in enumerate(names)]
        if a.size and a.any():
            lines.append("*Arcs")
            rows, cols = np.nonzero(a)
            for i, j in zip(rows, cols):
                lines.append(f"{i + 1} {j + 1} {_fmt(a[i, j])}")
        return lines
    names = obj.names or tuple(f"v{i + 1}" for i in range(obj.n))
    lines = [f"*Vertices {obj.n}"] + [f"{i + 1} {_quote(nm)}" for i, nm in enumerate(names)]
    w = obj.weights
    pairs = [(i, j, w[i, j]) for i, j in zip(*np.nonzero(np.triu(w, 1)))]
    loops = [(i, i, obj.self_loops[i]) for i in np.flatnonzero(obj.self_loops)]
    edges = sorted(pairs + loops)
    if edges:
        lines.append("*Edges")
        lines += [f"{i + 1} {j + 1} {_fmt(x)}" for i, j, x in edges]
    return lines


def export_pajek(obj: CitationMatrix | WeightedGraph, path: str | Path) -> None:
    Path(path).write_text("\n".join(pajek_lines(obj)) + "\n", encoding="utf-8")


def read_pajek(path: str | Path) -> tuple[list[str], np.ndarray, str | None]:
    """Parse vertices and one arc or edge section.

    Returns (labels, dense weight matrix, section) where section is
    ``"arcs"``, ``"edges"`` or None. Edge weights are stored on both
    triangles.
    """
    labels: list[str] = []
    w = None
    section = None
    n = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if low.startswith("*vertices"):
                try:
                    n = int(line.split()[1])
                except (IndexError, ValueError):
                    raise ParseError(f"{path}:{lineno}: bad *Vertices line") from None
                labels = [str(i + 1) for i in range(n)]
                w = np.zeros((n, n))
                section = "vertices"
                continue
            if low.startswith("*arcs") or low.startswith("*edges"):
                section = "arcs" if low.startswith("*arcs") else "edges"
                continue
            if w is None:
                raise ParseError(f"{path}:{lineno}: data before *Vertices")
            parts = shlex.split(line)
            try:
                if section == "vertices":
                    labels[int(parts[0]) - 1] = parts[1] if len(parts) > 1 else parts[0]
                else:
                    i, j = int(parts[0]) - 1, int(parts[1]) - 1
                    x = float(parts[2]) if len(parts) > 2 else 1.0
                    w[i, j] += x
                    if section == "edges" and i != j:
                        w[j, i] += x
            except (IndexError, ValueError):
                raise ParseError(f"{path}:{lineno}: malformed line {line!r}") from None
    if w is None:
        raise ParseError(f"{path}: no *Vertices section")
    return labels, w, (section if section in ("arcs", "edges") else None)


def read_pajek_matrix(path: str | Path) -> CitationMatrix:
    labels, w, _ = read_pajek(path)
    return from_dense(np.rint(w).astype(np.int64), labels)
