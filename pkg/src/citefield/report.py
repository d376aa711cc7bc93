"""Field reports: membership, mean citations per group, tiers, isolates and
comparisons between solutions."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import ISOLATE
from .errors import ValidationError
from .partition import ISOLATE_TOKEN, adjusted_rand_index

MOVED_WHOLE = "MOVED_WHOLE"
SPREAD = "SPREAD"
DISSOLVED = "DISSOLVED"

# fixed migration thresholds, echoed into every report
WHOLE_SHARE = 0.9
SPREAD_SHARE = 0.9
SPREAD_MAX_GROUPS = 3


def _labels(x) -> np.ndarray:
    return np.asarray(getattr(x, "labels", x), dtype=np.int64)


def group_mean_citations(assignment, cites) -> dict[int, float]:
    """Arithmetic mean of ``cites`` over the members of each non-isolate group."""
    labels = _labels(assignment)
    cites = np.asarray(cites, dtype=np.float64)
    if cites.size != labels.size:
        raise ValidationError(f"citation vector has {cites.size} entries for {labels.size} journals")
    out = {}
    for g in sorted(set(labels.tolist()) - {ISOLATE}):
        out[g] = float(cites[labels == g].mean())
    return out


def tier_classification(means: Sequence[float] | dict, cutpoints: Sequence[float]) -> list[int] | dict:
    """Tier = number of cutpoints the mean strictly exceeds (0 is the bottom tier)."""
    cuts = np.asarray(cutpoints, dtype=np.float64)
    if np.any(np.diff(cuts) <= 0):
        raise ValidationError(f"cutpoints must be strictly increasing, got {list(cutpoints)}")
    if isinstance(means, dict):
        return {g: int(np.sum(m > cuts)) for g, m in means.items()}
    return [int(np.sum(m > cuts)) for m in means]


@dataclass(frozen=True)
class Migration:
    fine_group: int
    size: int
    distribution: dict[str, int]
    target: str
    status: str


def compare_solutions(coarse, fine) -> list[Migration]:
    """Where each group of the finer solution ends up in the coarser one.

    MOVED_WHOLE: at least 90% of members land in one coarse group.
    SPREAD: at least 90% land in at most three coarse groups.
    DISSOLVED: anything else, or a majority become isolates.
    """
    a, b = _labels(coarse), _labels(fine)
    if a.size != b.size:
        raise ValidationError(f"solutions cover different journal sets ({a.size} vs {b.size})")
    na, nb = getattr(coarse, "names", ()), getattr(fine, "names", ())
    if na and nb and tuple(na) != tuple(nb):
        raise ValidationError("solutions cover different journal sets")
    out = []
    for g in sorted(set(b.tolist()) - {ISOLATE}):
        members = a[b == g]
        size = int(members.size)
        counts = Counter(members.tolist())
        iso = counts.pop(ISOLATE, 0)
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        dist = {str(k): v for k, v in ranked}
        if iso:
            dist[ISOLATE_TOKEN] = iso
        top = ranked[0][1] if ranked else 0
        top3 = sum(v for _, v in ranked[:SPREAD_MAX_GROUPS])
        if iso > size / 2:
            status = DISSOLVED
        elif top >= WHOLE_SHARE * size:
            status = MOVED_WHOLE
        elif top3 >= SPREAD_SHARE * size:
            status = SPREAD
        else:
            status = DISSOLVED
        target = str(ranked[0][0]) if ranked else ISOLATE_TOKEN
        out.append(Migration(int(g), size, dist, target, status))
    return out


@dataclass(frozen=True)
class CrossTab:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    counts: np.ndarray
    ari: float
    n_labeled: int
    n_unlabeled: int


def cross_tabulate(assignment, external: Sequence[str | None]) -> CrossTab:
    """Contingency table against external labels, plus the adjusted Rand index.

    Journals without an external label are left out and counted. Isolates
    take part as their own row.
    """
    labels = _labels(assignment)
    if len(external) != labels.size:
        raise ValidationError("external labels do not cover the journal set")
    keep = [i for i, e in enumerate(external) if e not in (None, "")]
    if not keep:
        raise ValidationError("no journal has an external label")
    ours = [ISOLATE_TOKEN if labels[i] == ISOLATE else str(labels[i]) for i in keep]
    theirs = [str(external[i]) for i in keep]
    rows = tuple(sorted(set(ours), key=lambda s: (s == ISOLATE_TOKEN, int(s) if s.isdigit() else 0, s)))
    cols = tuple(sorted(set(theirs)))
    ri = {r: i for i, r in enumerate(rows)}
    ci = {c: j for j, c in enumerate(cols)}
    table = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for x, y in zip(ours, theirs):
        table[ri[x], ci[y]] += 1
    return CrossTab(rows, cols, table, adjusted_rand_index(ours, theirs), len(keep), labels.size - len(keep))


# --------------------------------------------------------------------------
# report assembly


@dataclass
class Member:
    abbreviation: str
    loading: float | None = None


@dataclass
class Group:
    label: str
    mean_cites: float
    tier: int
    members: list[Member]


@dataclass
class FieldReport:
    solution_id: str
    thresholds: dict[str, Any]
    groups: list[Group]
    isolates: list[str]
    interdisciplinary: list[dict[str, Any]] = field(default_factory=list)
    migration: list[dict[str, Any]] | None = None
    cites_basis: str = ""
    universe: int = 0

    def reconcile(self) -> tuple[int, int, int]:
        """(journals in groups, isolates, universe size)."""
        in_groups = sum(len(g.members) for g in self.groups)
        return in_groups, len(self.isolates), self.universe

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for g in d["groups"]:
            for m in g["members"]:
                if m["loading"] is None:
                    del m["loading"]
        if d["migration"] is None:
            del d["migration"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def to_text(self) -> str:
        """Plain table: group, size, mean cites, tier, leading members."""
        lines = [f"Solution {self.solution_id}", f"Citation basis: {self.cites_basis}"]
        lines.append("Thresholds: " + ", ".join(f"{k}={v}" for k, v in self.thresholds.items()))
        lines.append("")
        lines.append(f"{'Group':<8}{'N':>5}{'Mean cites':>13}{'Tier':>6}  Members")
        for g in self.groups:
            head = ", ".join(m.abbreviation for m in g.members[:6])
            more = f" (+{len(g.members) - 6})" if len(g.members) > 6 else ""
            lines.append(f"{g.label:<8}{len(g.members):>5}{g.mean_cites:>13.1f}{g.tier:>6}  {head}{more}")
        n_in, n_iso, n = self.reconcile()
        lines.append(f"{'Total':<8}{n_in:>5}")
        lines.append("")
        lines.append(f"Isolates ({n_iso}): " + (", ".join(self.isolates) or "none"))
        if self.interdisciplinary:
            lines.append(
                "Interdisciplinary: " + ", ".join(f"{d['abbreviation']} ({d['fields']})" for d in self.interdisciplinary)
            )
        lines.append(f"Reconciliation: {n_in} in groups + {n_iso} isolates = {n_in + n_iso} of {n} journals")
        if self.migration:
            lines.append("")
            lines.append("Migration to coarser solution:")
            for m in self.migration:
                lines.append(f"  group {m['fine_group']} ({m['size']}) -> {m['target']}: {m['status']}")
        return "\n".join(lines) + "\n"

    def write(self, json_path: str | Path, text_path: str | Path | None = None) -> None:
        Path(json_path).write_text(self.to_json(), encoding="utf-8")
        if text_path is not None:
            Path(text_path).write_text(self.to_text(), encoding="utf-8")


def build_report(
    solution_id: str,
    labels,
    names: Sequence[str],
    cites,
    cutpoints: Sequence[float] = (1000.0, 2000.0),
    loadings=None,
    prefix: str = "G",
    thresholds: dict[str, Any] | None = None,
    interdisciplinary: Sequence[tuple[str, int]] = (),
    cites_basis: str = "",
    coarser=None,
) -> FieldReport:
    """Assemble a report from a flat labelling (``ISOLATE`` for unassigned journals).

    Members are listed by loading (descending) when loadings are given,
    otherwise by abbreviation.
    """
    lab = _labels(labels)
    if lab.size != len(names):
        raise ValidationError("labels and names differ in length")
    means = group_mean_citations(lab, cites)
    tiers = tier_classification(means, cutpoints)
    groups = []
    for g, mean in means.items():
        idx = np.flatnonzero(lab == g)
        if loadings is not None:
            ld = np.asarray(loadings, dtype=np.float64)
            idx = idx[np.lexsort((np.array([names[i] for i in idx]), -ld[idx]))]
            members = [Member(names[i], float(ld[i])) for i in idx]
        else:
            members = [Member(names[i]) for i in sorted(idx, key=lambda i: names[i])]
        groups.append(Group(f"{prefix}{g + 1}", mean, tiers[g], members))
    th = dict(thresholds or {})
    th["tier_cutpoints"] = [float(c) for c in cutpoints]
    migration = None
    if coarser is not None:
        th["migration"] = {
            "moved_whole_share": WHOLE_SHARE,
            "spread_share": SPREAD_SHARE,
            "spread_max_groups": SPREAD_MAX_GROUPS,
        }
        migration = [asdict(m) for m in compare_solutions(coarser, lab)]
    return FieldReport(
        solution_id=solution_id,
        thresholds=th,
        groups=groups,
        isolates=sorted(names[i] for i in np.flatnonzero(lab == ISOLATE)),
        interdisciplinary=[{"abbreviation": a, "fields": int(c)} for a, c in interdisciplinary],
        migration=migration,
        cites_basis=cites_basis,
        universe=lab.size,
    )
