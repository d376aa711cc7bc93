"""Planted-field citation matrices and exhaustive oracles for small inputs.

Sampling procedure (fixed so fixtures are reproducible):

1. ``numpy.random.Generator(PCG64(SeedSequence(seed)))`` is created and its
   stream split with ``SeedSequence.spawn(2)``: child 0 draws journal sizes,
   child 1 draws citation counts.
2. Each journal gets a size multiplier ``1 + size_spread * (2u - 1)`` with
   ``u ~ U[0, 1)``; it scales every count the journal *cites*.
3. The base rate of cell (i, j) is ``within_rate`` when both journals are in
   the same field, ``cross_rate`` across fields, ``(within_rate + cross_rate) / 2``
   when either is a generalist, and 0 when either is silent.
4. Counts are drawn cell by cell in row-major order by inverse-transform
   Poisson sampling of one uniform per cell.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import ISOLATE
from .corpus import CitationMatrix, from_dense
from .errors import ValidationError
from .louvain import WeightedGraph
from .partition import Partition


@dataclass(frozen=True)
class PlantedSpec:
    n_fields: int = 5
    journals_per_field: int = 20
    within_rate: float = 10.0
    cross_rate: float = 1.0
    generalist_count: int = 0
    silent_count: int = 0
    size_spread: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_fields < 1 or self.journals_per_field < 1:
            raise ValidationError("need at least one field with at least one journal")
        if not self.within_rate > self.cross_rate >= 0:
            raise ValidationError("require within_rate > cross_rate >= 0")
        if self.generalist_count < 0 or self.silent_count < 0:
            raise ValidationError("generalist and silent counts must be non-negative")
        if not 0 <= self.size_spread < 1:
            raise ValidationError("size_spread must be in [0, 1)")

    @property
    def generalist_rate(self) -> float:
        return (self.within_rate + self.cross_rate) / 2.0

    @property
    def n_journals(self) -> int:
        return self.n_fields * self.journals_per_field + self.generalist_count + self.silent_count


@dataclass(frozen=True, eq=False)
class Planted:
    matrix: CitationMatrix
    labels: np.ndarray  # field id per journal, ISOLATE for generalists and silent journals
    generalists: tuple[int, ...]
    silent: tuple[int, ...]

    @property
    def field_ids(self) -> np.ndarray:
        return np.flatnonzero(self.labels != ISOLATE)

    def truth(self) -> Partition:
        """Ground-truth partition restricted to field journals."""
        ids = self.field_ids
        return Partition(self.labels[ids], tuple(self.matrix.abbreviations[i] for i in ids))


def poisson_inverse_transform(rates: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Smallest k with Poisson CDF(k; rate) >= u, elementwise."""
    rates = np.asarray(rates, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    k = np.zeros(rates.shape, dtype=np.int64)
    pmf = np.exp(-rates)
    cdf = pmf.copy()
    todo = u > cdf
    step = 0
    while todo.any():
        step += 1
        pmf = np.where(todo, pmf * rates / step, pmf)
        cdf = np.where(todo, cdf + pmf, cdf)
        k = np.where(todo, step, k)
        # stop once the pmf underflows; the remaining tail mass is below rounding
        todo = todo & (u > cdf) & (pmf > 0)
    return k


def rate_matrix(spec: PlantedSpec, sizes: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Expected counts and the per-journal field labels (ISOLATE for non-field journals)."""
    nf = spec.n_fields * spec.journals_per_field
    n = spec.n_journals
    labels = np.full(n, ISOLATE, dtype=np.int64)
    labels[:nf] = np.repeat(np.arange(spec.n_fields), spec.journals_per_field)
    rates = np.where(labels[:, None] == labels[None, :], spec.within_rate, spec.cross_rate).astype(np.float64)
    gen = slice(nf, nf + spec.generalist_count)
    rates[gen, :] = spec.generalist_rate
    rates[:, gen] = spec.generalist_rate
    sil = slice(nf + spec.generalist_count, n)
    rates[sil, :] = 0.0
    rates[:, sil] = 0.0
    if sizes is not None:
        rates = rates * sizes[:, None]
    return rates, labels


def generate_planted(spec: PlantedSpec) -> Planted:
    seq = np.random.SeedSequence(spec.seed)
    size_seq, count_seq = seq.spawn(2)
    n = spec.n_journals
    sizes = 1.0 + spec.size_spread * (2.0 * np.random.Generator(np.random.PCG64(size_seq)).random(n) - 1.0)
    rates, labels = rate_matrix(spec, sizes)
    u = np.random.Generator(np.random.PCG64(count_seq)).random((n, n))
    counts = poisson_inverse_transform(rates, u)
    nf = spec.n_fields * spec.journals_per_field
    names = [f"F{f}J{j:02d}" for f in range(spec.n_fields) for j in range(spec.journals_per_field)]
    names += [f"GEN{g}" for g in range(spec.generalist_count)]
    names += [f"SIL{s}" for s in range(spec.silent_count)]
    m = from_dense(counts, names, year_label=f"synthetic-seed{spec.seed}")
    gens = tuple(range(nf, nf + spec.generalist_count))
    sil = tuple(range(nf + spec.generalist_count, n))
    return Planted(m, labels, gens, sil)


def expected_sparsity(spec: PlantedSpec) -> float:
    """Expected fraction of zero cells over the full square matrix.

    Averages P(count = 0) = E[exp(-size * rate)] over the uniform size
    distribution: exp(-r) * sinh(s r) / (s r) for spread s.
    """
    base, _ = rate_matrix(spec)
    s = spec.size_spread
    if s == 0:
        p0 = np.exp(-base)
    else:
        sr = s * base
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(sr > 0, np.sinh(sr) / np.where(sr > 0, sr, 1.0), 1.0)
        p0 = np.exp(-base) * ratio
    return float(p0.mean())


# --------------------------------------------------------------------------
# oracles


def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of n items as restricted growth strings, in lexicographic order."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for g in range(top + 2):
            prefix.append(g)
            yield from rec(prefix, max(top, g))
            prefix.pop()

    yield from rec([0], 0)


def brute_force_best_partition(g: WeightedGraph, chunk: int = 8192) -> tuple[Partition, float]:
    """Exhaustive modularity maximum; ties go to the lexicographically least labelling."""
    n = g.n
    if n > 10:
        raise ValidationError(f"exhaustive search is limited to n <= 10, got {n}")
    two_m = 2.0 * g.total_weight()
    if two_m <= 0:
        raise ValidationError("graph has no edge weight (m = 0)")
    k = g.degrees()
    adj = g.weights + np.diag(2.0 * g.self_loops)
    b = (adj - np.outer(k, k) / two_m) / two_m
    best_q = -np.inf
    best = None
    it = set_partitions(n)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        lab = np.array(block, dtype=np.int8)
        same = lab[:, :, None] == lab[:, None, :]
        q = np.tensordot(same, b, axes=([1, 2], [0, 1]))
        i = int(np.argmax(q))
        if q[i] > best_q + 1e-12:
            best_q = float(q[i])
            best = block[i]
    return Partition(np.array(best), g.names), best_q


def ward_cost(d2: np.ndarray, a: frozenset, b: frozenset) -> float:
    """Squared Ward distance between clusters from scratch, from member distances only.

    2 |A||B| / (|A| + |B|) * (mean cross d^2 - mean within-A d^2 / 2 - mean within-B d^2 / 2),
    the means over ordered pairs, which for Euclidean input is
    2 |A||B| / (|A| + |B|) * ||centroid_A - centroid_B||^2.
    """
    ia, ib = sorted(a), sorted(b)
    na, nb = len(ia), len(ib)
    cross = d2[np.ix_(ia, ib)].mean()
    wa = d2[np.ix_(ia, ia)].sum() / (na * na)
    wb = d2[np.ix_(ib, ib)].sum() / (nb * nb)
    return 2.0 * na * nb / (na + nb) * (cross - wa / 2.0 - wb / 2.0)


def brute_force_ward(d: np.ndarray) -> list[tuple[frozenset, frozenset, float]]:
    """Greedy Ward agglomeration recomputing every candidate cost from scratch.

    Returns (cluster_a, cluster_b, cost) per step with ``min(a) < min(b)``;
    ties go to the lexicographically least (min(a), min(b)).
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if n > 6:
        raise ValidationError(f"brute-force Ward is limited to n <= 6, got {n}")
    d2 = d**2
    clusters = [frozenset([i]) for i in range(n)]
    out = []
    while len(clusters) > 1:
        clusters.sort(key=min)
        best = None
        for x, y in itertools.combinations(range(len(clusters)), 2):
            c = ward_cost(d2, clusters[x], clusters[y])
            if best is None or c < best[0] - 1e-12 * max(1.0, abs(best[0])):
                best = (c, x, y)
        c, x, y = best
        a, b = clusters[x], clusters[y]
        out.append((a, b, float(np.sqrt(max(c, 0.0)))))
        clusters = [cl for i, cl in enumerate(clusters) if i not in (x, y)] + [a | b]
    return out
