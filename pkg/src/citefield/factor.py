"""Principal components of the cited-journal correlation matrix, orthomax
rotation and journal-to-field assignment."""

from __future__ import annotations

import csv
import logging
from functools import lru_cache
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ISOLATE
from .errors import ParseError, ValidationError
from .simmat import SimilarityMatrix

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# eigensolver


def _next_round(players: list[int]) -> list[int]:
    """Circle-method tournament step: fix the first player, rotate the rest."""
    return [players[0], players[-1], *players[1:-1]]


def _layout(players: list[int]) -> np.ndarray:
    """Order players so that position a is paired with position a + m/2."""
    m = len(players)
    h = m // 2
    return np.array(players[:h] + players[::-1][:h], dtype=np.int64)


@lru_cache(maxsize=32)
def _schedule(m: int) -> tuple[np.ndarray, ...]:
    """Layouts for the m - 1 rounds of one sweep (the schedule is periodic)."""
    players = list(range(m))
    out = []
    for _ in range(m - 1):
        out.append(_layout(players))
        players = _next_round(players)
    return tuple(out)


def _rotate_halves(x, c, s, b1, b2, axis):
    """In place: (first, second) <- (first*c - second*s, first*s + second*c) along ``axis``."""
    if axis == 1:
        h = x.shape[1] // 2
        first, second = x[:, :h], x[:, h:]
        cc, ss = c, s
    else:
        h = x.shape[0] // 2
        first, second = x[:h, :], x[h:, :]
        cc, ss = c[:, None], s[:, None]
    np.multiply(second, ss, out=b1)
    np.multiply(first, ss, out=b2)
    first *= cc
    first -= b1
    second *= cc
    second += b2


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray, int]:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Index pairs are scheduled as a round-robin tournament: each of the
    ``m - 1`` rounds of a sweep rotates ``m / 2`` disjoint pairs at once, and
    every pair is visited exactly once per sweep. The working matrix is kept
    permuted so that paired indices sit in the two halves, which turns each
    round into slice arithmetic. Odd sizes are padded with an inert zero row.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * |trace|`` (``tol`` times the Frobenius norm if the trace is 0).
    Returns unsorted eigenvalues, eigenvectors as columns, and sweeps used.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if n < 2:
        return np.diag(a).copy(), np.eye(n), 0
    scale = abs(np.trace(a)) or np.linalg.norm(a)
    if scale == 0:
        return np.zeros(n), np.eye(n), 0
    m = n + (n % 2)
    h = m // 2
    layouts = _schedule(m)
    layout = layouts[0]
    x = np.zeros((m, m))
    x[:n, :n] = a
    x = x[np.ix_(layout, layout)]
    v = np.eye(m)[:, layout]
    idx = np.arange(h)
    cbuf = np.empty((m, h))
    rbuf = np.empty((m, h))
    offmask = ~np.eye(m, dtype=bool)
    sweeps = 0
    while sweeps < max_sweeps:
        off = np.sqrt(np.sum(x[offmask] ** 2))
        if off < tol * scale:
            break
        sweeps += 1
        for r in range(m - 1):
            apq = x[idx, idx + h].copy()
            app = x[idx, idx].copy()
            aqq = x[idx + h, idx + h].copy()
            live = apq != 0.0
            safe = np.where(live, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(live, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            _rotate_halves(x, c, s, cbuf, rbuf, axis=1)
            _rotate_halves(x, c, s, cbuf.T, rbuf.T, axis=0)
            x[idx, idx] = app - t * apq
            x[idx + h, idx + h] = aqq + t * apq
            x[idx, idx + h] = np.where(live, 0.0, x[idx, idx + h])
            x[idx + h, idx] = x[idx, idx + h]
            _rotate_halves(v, c, s, cbuf, rbuf, axis=1)
            nxt = layouts[(r + 1) % (m - 1)]
            where = np.empty(m, dtype=np.int64)
            where[layout] = np.arange(m)
            perm = where[nxt]
            x = x.take(perm, axis=0).take(perm, axis=1)
            v = v.take(perm, axis=1)
            layout = nxt
    keep = layout < n
    return np.diag(x)[keep].copy(), v[:n, keep], sweeps


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    trace: float
    labels: tuple[str, ...] = ()
    sweeps: int = 0

    @property
    def p(self) -> int:
        return self.eigenvalues.size

    def percent(self) -> np.ndarray:
        return 100.0 * self.eigenvalues / self.p

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.percent())


def eigendecompose(c: np.ndarray | SimilarityMatrix, labels: Sequence[str] = ()) -> EigenSpectrum:
    """Full spectrum, eigenvalues descending.

    Eigenvalues within 1e-10 below zero are clamped to 0. Each eigenvector is
    signed so that its largest-magnitude entry (first one on ties) is positive.
    """
    if isinstance(c, SimilarityMatrix):
        labels = labels or c.labels
        c = c.values
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError(f"correlation matrix must be square, got shape {c.shape}")
    if np.abs(c - c.T).max(initial=0.0) > 1e-9:
        raise ValidationError("correlation matrix is not symmetric (tolerance 1e-9)")
    c = (c + c.T) / 2.0
    w, v, sweeps = jacobi_eigh(c)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    w[(w < 0) & (w >= -1e-10)] = 0.0
    for f in range(v.shape[1]):
        top = int(np.argmax(np.abs(v[:, f])))
        if v[top, f] < 0:
            v[:, f] = -v[:, f]
    return EigenSpectrum(w, v, float(np.trace(c)), tuple(labels), sweeps)


def kaiser_count(s: EigenSpectrum) -> int:
    return int(np.count_nonzero(s.eigenvalues > 1.0))


def factoring_matrix(sim: SimilarityMatrix) -> np.ndarray:
    """Correlation values with a unit diagonal, including degenerate variables.

    A constant column has zero correlation with everything; giving it a unit
    diagonal makes it a separate unit-eigenvalue component so the spectrum
    still sums to p.
    """
    c = sim.values.copy()
    np.fill_diagonal(c, 1.0)
    return c


# --------------------------------------------------------------------------
# loadings and rotation


@dataclass(frozen=True, eq=False)
class LoadingMatrix:
    """Journals x factors loadings with the rotation that produced them.

    ``loadings == base @ rotation`` where ``base`` is the unrotated matrix.
    """

    loadings: np.ndarray
    rotation: np.ndarray
    criterion_kind: str = "unrotated"
    labels: tuple[str, ...] = ()
    base: np.ndarray | None = None
    gamma: float | None = None
    criterion_history: tuple[float, ...] = field(default=())

    @property
    def p(self) -> int:
        return self.loadings.shape[0]

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    def communalities(self) -> np.ndarray:
        return np.sum(self.loadings**2, axis=1)


def extract_loadings(s: EigenSpectrum, k: int) -> LoadingMatrix:
    if not 1 <= k <= s.p:
        raise ValidationError(f"number of factors must be in 1..{s.p}, got {k}")
    lam = np.clip(s.eigenvalues[:k], 0.0, None)
    loadings = s.eigenvectors[:, :k] * np.sqrt(lam)
    return LoadingMatrix(loadings, np.eye(k), "unrotated", s.labels, loadings.copy())


def orthomax_criterion(loadings: np.ndarray, gamma: float) -> float:
    """sum L^4 - (gamma / p) * sum_f (sum_j L[j, f]^2)^2"""
    l2 = np.asarray(loadings) ** 2
    p = l2.shape[0]
    return float(np.sum(l2**2) - gamma / p * np.sum(np.sum(l2, axis=0) ** 2))


def _pair_criterion(x, y, gamma, p):
    x2, y2 = x * x, y * y
    return float(np.sum(x2 * x2) + np.sum(y2 * y2) - gamma / p * (np.sum(x2) ** 2 + np.sum(y2) ** 2))


def best_pair_angle(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """Angle maximising the orthomax criterion of the column pair.

    The pair rotates as ``x' = cos(t) x + sin(t) y``, ``y' = -sin(t) x + cos(t) y``.
    """
    p = x.size
    u = x * x - y * y
    v = 2.0 * x * y
    su, sv = u.sum(), v.sum()
    num = 2.0 * (np.dot(u, v) - gamma * su * sv / p)
    den = np.dot(u, u) - np.dot(v, v) - gamma * (su * su - sv * sv) / p
    return float(np.arctan2(num, den) / 4.0)


_KIND = {0.0: "quartimax", 1.0: "varimax"}


def orthomax_rotate(
    lm: LoadingMatrix,
    gamma: float = 0.0,
    tol: float = 1e-10,
    max_sweeps: int = 1000,
    reflect: bool = True,
) -> LoadingMatrix:
    """Orthomax rotation by pairwise plane rotations.

    Factor pairs are visited as (0,1), (0,2), ..., (k-2,k-1). A rotation is
    applied only when it raises the pair criterion, so the criterion never
    decreases between sweeps. Sweeping stops when a sweep gains less than
    ``tol``. With ``reflect`` each factor is finally signed so its loadings
    sum to a non-negative value (criterion and communalities are unaffected).

    gamma = 0 is quartimax, gamma = 1 varimax.
    """
    k = lm.k
    if k < 2:
        raise ValidationError("rotation needs at least 2 factors")
    L = lm.loadings.copy()
    R = lm.rotation.copy()
    p = L.shape[0]
    history = [orthomax_criterion(L, gamma)]
    for sweep in range(max_sweeps):
        for a in range(k - 1):
            for b in range(a + 1, k):
                x, y = L[:, a], L[:, b]
                theta = best_pair_angle(x, y, gamma)
                if theta == 0.0:
                    continue
                c, s = np.cos(theta), np.sin(theta)
                nx, ny = c * x + s * y, -s * x + c * y
                before = _pair_criterion(x, y, gamma, p)
                if _pair_criterion(nx, ny, gamma, p) - before <= 1e-13 * max(1.0, abs(before)):
                    continue
                L[:, a], L[:, b] = nx, ny
                ra, rb = R[:, a].copy(), R[:, b].copy()
                R[:, a], R[:, b] = c * ra + s * rb, -s * ra + c * rb
        history.append(orthomax_criterion(L, gamma))
        if history[-1] - history[-2] < tol:
            break
    else:
        log.warning("orthomax rotation hit max_sweeps=%d before converging", max_sweeps)
    if reflect:
        flip = np.where(L.sum(axis=0) < 0, -1.0, 1.0)
        L = L * flip
        R = R * flip
    base = lm.base if lm.base is not None else lm.loadings
    kind = _KIND.get(float(gamma), f"orthomax({gamma:g})")
    return LoadingMatrix(L, R, kind, lm.labels, base, gamma, tuple(history))


@dataclass(frozen=True)
class VarianceTable:
    ss_loadings: np.ndarray
    percent: np.ndarray
    cumulative: np.ndarray


def explained_variance(lm: LoadingMatrix | np.ndarray) -> VarianceTable:
    L = lm.loadings if isinstance(lm, LoadingMatrix) else np.asarray(lm)
    ss = np.sum(L**2, axis=0)
    pct = 100.0 * ss / L.shape[0]
    return VarianceTable(ss, pct, np.cumsum(pct))


# --------------------------------------------------------------------------
# assignment


@dataclass(frozen=True, eq=False)
class FieldAssignment:
    """Per-journal factor id (``ISOLATE`` = -1) and the loading it was chosen on."""

    labels: np.ndarray
    loading: np.ndarray
    names: tuple[str, ...]
    membership_threshold: float
    n_factors: int

    @property
    def n(self) -> int:
        return int(self.labels.size)

    def isolates(self) -> list[str]:
        return [self.names[i] for i in np.flatnonzero(self.labels == ISOLATE)]

    def members(self, f: int) -> np.ndarray:
        """Member indices of factor ``f``, highest loading first."""
        idx = np.flatnonzero(self.labels == f)
        return idx[np.argsort(-self.loading[idx], kind="stable")]


def assign_journals(lm: LoadingMatrix, membership_threshold: float = 0.3) -> FieldAssignment:
    """Assign each journal to the factor with its highest positive loading.

    Journals whose best loading is not positive or falls below the threshold
    become isolates.
    """
    L = lm.loadings
    if L.shape[1] == 0:
        best = np.full(L.shape[0], ISOLATE)
        top = np.zeros(L.shape[0])
    else:
        best = np.argmax(L, axis=1)
        top = L[np.arange(L.shape[0]), best]
    ok = (top > 0) & (top >= membership_threshold)
    labels = np.where(ok, best, ISOLATE).astype(np.int64)
    names = lm.labels or tuple(f"V{i}" for i in range(L.shape[0]))
    return FieldAssignment(labels, top, tuple(names), float(membership_threshold), lm.k)


def interdisciplinary(
    lm: LoadingMatrix,
    load_floor: float = 0.1,
    min_fields: int = 7,
) -> list[tuple[str, int]]:
    """Journals loading above ``load_floor`` on at least ``min_fields`` factors.

    Sorted by the number of such factors (descending), then abbreviation.
    """
    counts = np.sum(lm.loadings > load_floor, axis=1)
    names = lm.labels or tuple(f"V{i}" for i in range(lm.p))
    hits = [(names[i], int(counts[i])) for i in range(lm.p) if counts[i] >= min_fields]
    return sorted(hits, key=lambda t: (-t[1], t[0]))


# --------------------------------------------------------------------------
# end-to-end


@dataclass(frozen=True, eq=False)
class FactorSolution:
    spectrum: EigenSpectrum
    unrotated: LoadingMatrix
    rotated: LoadingMatrix
    assignment: FieldAssignment
    interdisciplinary: list[tuple[str, int]]


def factor_analysis(
    corr: SimilarityMatrix,
    k: int,
    gamma: float = 0.0,
    membership_threshold: float = 0.3,
    load_floor: float = 0.1,
    min_fields: int = 7,
    tol: float = 1e-10,
    max_sweeps: int = 1000,
) -> FactorSolution:
    spectrum = eigendecompose(factoring_matrix(corr), corr.labels)
    unrot = extract_loadings(spectrum, k)
    rot = orthomax_rotate(unrot, gamma, tol, max_sweeps) if k >= 2 else unrot
    return FactorSolution(
        spectrum,
        unrot,
        rot,
        assign_journals(rot, membership_threshold),
        interdisciplinary(rot, load_floor, min_fields),
    )


# --------------------------------------------------------------------------
# CSV


def write_loadings_csv(lm: LoadingMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["abbreviation", *(str(f) for f in range(lm.k))])
        for name, row in zip(lm.labels, lm.loadings):
            w.writerow([name, *(repr(float(x)) for x in row)])


def read_loadings_csv(path: str | Path) -> LoadingMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["abbreviation"]:
        raise ParseError(f"{path}:1: expected header starting with 'abbreviation'")
    k = len(rows[0]) - 1
    names, vals = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != k + 1:
            raise ParseError(f"{path}:{lineno}: expected {k + 1} fields")
        names.append(row[0])
        try:
            vals.append([float(x) for x in row[1:]])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric loading") from None
    L = np.array(vals, dtype=np.float64).reshape(len(names), k)
    return LoadingMatrix(L, np.eye(k), "unknown", tuple(names), None)


SPECTRUM_HEADER = [
    "component",
    "initial_total",
    "initial_pct_variance",
    "initial_cumulative_pct",
    "rotated_total",
    "rotated_pct_variance",
    "rotated_cumulative_pct",
]


def write_spectrum_csv(s: EigenSpectrum, path: str | Path, rotated: LoadingMatrix | None = None) -> None:
    """Initial eigenvalues next to rotated sums of squared loadings, one row per component."""
    pct = s.percent()
    cum = s.cumulative()
    rv = explained_variance(rotated) if rotated is not None else None
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for i in range(s.p):
            row = [i + 1, f"{s.eigenvalues[i]:.6f}", f"{pct[i]:.6f}", f"{cum[i]:.6f}"]
            if rv is not None and i < rv.ss_loadings.size:
                row += [f"{rv.ss_loadings[i]:.6f}", f"{rv.percent[i]:.6f}", f"{rv.cumulative[i]:.6f}"]
            else:
                row += ["", "", ""]
            w.writerow(row)
