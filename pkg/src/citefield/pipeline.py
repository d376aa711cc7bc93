"""End-to-end runs driven by a flat ``key = value`` configuration file.

Recognised keys (defaults in brackets)::

    edges                  edge-list CSV (required; relative to the config file)
    registry               optional registry CSV
    year_label             provenance label [""]
    method                 louvain | hac | factor (required)
    output_dir             where artifacts go (required)
    solution_id            report id [<method>-k<k> or louvain]
    drop_inactive_citing   drop citing rows with no citations [true]
    include_self           keep self-citations in profiles / graph [false]
    cites_include_self     count self-citations in mean cites [false]
    axis                   cited | citing, cosine profiles for hac [cited]
    k                      groups (hac) or factors (factor)
    compare_k              optional coarser k for a migration table
    gamma                  orthomax gamma, 0 quartimax, 1 varimax [0]
    membership_threshold   factor assignment cutoff [0.3]
    load_floor             interdisciplinary loading floor [0.1]
    min_fields             interdisciplinary minimum factor count [7]
    order                  by_index | seeded_shuffle [by_index]
    seed                   louvain shuffle seed [0]
    tol                    louvain gain tolerance [1e-9]
    rotation_tol           orthomax sweep tolerance [1e-10]
    max_sweeps             orthomax sweep cap [1000]
    cutpoints              comma-separated tier cutpoints [1000,2000]
    figures                write PNG figures [true]
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable

from . import corpus, factor, hac, louvain, pajek, report, simmat
from .errors import CitefieldError, ValidationError
from .partition import write_assignment_csv, write_partition_csv

log = logging.getLogger(__name__)

METHODS = ("louvain", "hac", "factor")


class PipelineError(CitefieldError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def _bool(v: str) -> bool:
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {v!r}")


def _floats(v) -> tuple[float, ...]:
    if isinstance(v, (list, tuple)):
        return tuple(float(x) for x in v)
    return tuple(float(x) for x in str(v).split(",") if x.strip())


@dataclass
class PipelineConfig:
    edges: Path
    method: str
    output_dir: Path
    registry: Path | None = None
    year_label: str = ""
    solution_id: str = ""
    drop_inactive_citing: bool = True
    include_self: bool = False
    cites_include_self: bool = False
    axis: str = "cited"
    k: int | None = None
    compare_k: int | None = None
    gamma: float = 0.0
    membership_threshold: float = 0.3
    load_floor: float = 0.1
    min_fields: int = 7
    order: str = "by_index"
    seed: int = 0
    tol: float = 1e-9
    rotation_tol: float = 1e-10
    max_sweeps: int = 1000
    cutpoints: tuple[float, ...] = (1000.0, 2000.0)
    figures: bool = True

    @classmethod
    def from_mapping(cls, values: dict[str, Any], base_dir: Path | None = None) -> "PipelineConfig":
        conv: dict[str, Callable[[Any], Any]] = {
            "edges": Path,
            "registry": Path,
            "output_dir": Path,
            "drop_inactive_citing": _bool,
            "include_self": _bool,
            "cites_include_self": _bool,
            "figures": _bool,
            "k": int,
            "compare_k": int,
            "min_fields": int,
            "seed": int,
            "max_sweeps": int,
            "gamma": float,
            "membership_threshold": float,
            "load_floor": float,
            "tol": float,
            "rotation_tol": float,
            "cutpoints": _floats,
        }
        known = {f.name for f in fields(cls) if f.init}
        kw = {}
        for key, raw in values.items():
            if key not in known:
                raise ValidationError(f"unknown configuration key {key!r}")
            if raw is None or raw == "":
                if key in ("registry", "k", "compare_k"):
                    continue
            try:
                val = conv.get(key, str)(raw) if not isinstance(raw, (Path, bool, int, float, tuple)) else raw
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"bad value for {key}: {raw!r} ({exc})") from None
            if isinstance(val, Path) and base_dir is not None and not val.is_absolute():
                val = base_dir / val
            kw[key] = val
        for req in ("edges", "method", "output_dir"):
            if req not in kw:
                raise ValidationError(f"missing required key {req!r}")
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict[str, Any] | None = None) -> "PipelineConfig":
        values = read_config(path)
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(values, Path(path).resolve().parent)

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if not Path(self.edges).is_file():
            raise ValidationError(f"edge list not found: {self.edges}")
        if self.registry is not None and not Path(self.registry).is_file():
            raise ValidationError(f"registry not found: {self.registry}")
        if self.method in ("hac", "factor") and (self.k is None or self.k < 1):
            raise ValidationError(f"{self.method} needs k >= 1")
        if self.compare_k is not None and (self.compare_k < 1 or self.method == "louvain"):
            raise ValidationError("compare_k needs method hac or factor and a value >= 1")
        if self.axis not in ("cited", "citing"):
            raise ValidationError(f"axis must be cited or citing, got {self.axis!r}")
        if self.order not in ("by_index", "seeded_shuffle"):
            raise ValidationError(f"order must be by_index or seeded_shuffle, got {self.order!r}")
        if self.min_fields < 1:
            raise ValidationError("min_fields must be >= 1")
        if self.tol < 0 or self.rotation_tol < 0 or self.max_sweeps < 1:
            raise ValidationError("tolerances must be >= 0 and max_sweeps >= 1")
        if any(b <= a for a, b in zip(self.cutpoints, self.cutpoints[1:])):
            raise ValidationError("cutpoints must be strictly increasing")

    def echo(self) -> dict[str, Any]:
        """Parameters for the manifest, with paths reduced to file names."""
        out = {}
        for f in fields(self):
            if not f.init:
                continue
            v = getattr(self, f.name)
            if isinstance(v, Path):
                v = v.name
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        out.pop("output_dir", None)
        return out


def read_config(path: str | Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = val
    return values


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class ArtifactWriter:
    """Writes each artifact to a temp file in the target directory and renames it into place."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.written: list[Path] = []

    def write(self, name: str, writer: Callable[[Path], Any]) -> Path:
        final = self.out_dir / name
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", suffix=final.suffix, dir=self.out_dir)
        os.close(fd)
        try:
            writer(Path(tmp))
            os.replace(tmp, final)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        self.written.append(final)
        return final

    def text(self, name: str, content: str) -> Path:
        return self.write(name, lambda p: p.write_text(content, encoding="utf-8"))

    def rollback(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)
        self.written.clear()

    def manifest(self, inputs: dict[str, Path], params: dict[str, Any]) -> dict[str, Any]:
        return {
            "inputs": {k: {"file": p.name, "sha256": sha256_file(p)} for k, p in sorted(inputs.items())},
            "parameters": params,
            "outputs": [
                {"file": p.name, "sha256": sha256_file(p), "bytes": p.stat().st_size}
                for p in sorted(self.written, key=lambda p: p.name)
            ],
        }


class _Stage:
    """Re-raise anything inside the block as a PipelineError tagged with the stage."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, PipelineError):
            return False
        if isinstance(exc, (CitefieldError, OSError, ValueError, ArithmeticError)):
            raise PipelineError(self.name, str(exc)) from exc
        return False


@dataclass
class PipelineResult:
    report: report.FieldReport
    manifest: dict[str, Any]
    out_dir: Path


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """ingest -> clean -> method -> report; all artifacts plus ``manifest.json`` in ``cfg.output_dir``.

    On failure every file written by this run is removed and a
    :class:`PipelineError` names the failing stage.
    """
    with _Stage("config"):
        cfg.validate()
    out = ArtifactWriter(cfg.output_dir)
    try:
        return _run(cfg, out)
    except BaseException:
        out.rollback()
        raise


def _run(cfg: PipelineConfig, out: ArtifactWriter) -> PipelineResult:
    with _Stage("ingest"):
        m = corpus.ingest_edges(cfg.edges, cfg.registry, cfg.year_label)
        if m.n == 0:
            raise ValidationError("edge list contains no journals")
    with _Stage("clean"):
        m = corpus.clean(m, cfg.drop_inactive_citing)
        stats = corpus.sparsity_stats(m)
        out.write("cleaning_log.txt", lambda p: corpus.write_cleaning_log(m, p))
        out.text("stats.json", json.dumps(asdict(stats), indent=2) + "\n")
        cites = corpus.cites_received(m, cfg.cites_include_self)
        names = m.abbreviations
    with _Stage("export"):
        out.write("citations.net", lambda p: pajek.export_pajek(m, p))

    basis = f"citations received within the loaded journal set ({'including' if cfg.cites_include_self else 'excluding'} self-citations)"
    common = {"include_self": cfg.include_self, "drop_inactive_citing": cfg.drop_inactive_citing}
    figures = []

    if cfg.method == "louvain":
        with _Stage("louvain"):
            g = louvain.symmetrize(m, cfg.include_self)
            res = louvain.louvain(g, cfg.order, cfg.seed, cfg.tol)
            out.write("partition.csv", lambda p: write_partition_csv(res.partition, p))
            out.text("q_history.csv", "pass,modularity\n" + "".join(f"{i + 1},{q!r}\n" for i, q in enumerate(res.q_history)))
            out.write("graph.net", lambda p: pajek.export_pajek(g, p))
        labels, loads, prefix = res.partition.labels, None, "L"
        sol_id = cfg.solution_id or "louvain"
        th = {**common, "order": cfg.order, "seed": cfg.seed, "tol": cfg.tol, "modularity": res.modularity}
        inter: list = []
        coarser = None
        if cfg.figures:
            from . import plotting

            figures.append(("q_history.png", lambda p: plotting.q_history_plot(res.q_history, p)))

    elif cfg.method == "hac":
        with _Stage("similarity"):
            sim = simmat.cosine_similarity(m, cfg.axis, cfg.include_self)
            out.write("similarity.csv", lambda p: simmat.write_similarity_csv(sim, p))
            dist = simmat.distance_from_similarity(sim)
        with _Stage("hac"):
            if cfg.k > sim.n:
                raise ValidationError(f"k = {cfg.k} exceeds {sim.n} journals")
            dg = hac.ward_cluster(dist, sim.labels)
            out.write("dendrogram.csv", lambda p: hac.write_dendrogram_csv(dg, p))
            part = hac.cut(dg, cfg.k)
            out.write("partition.csv", lambda p: write_partition_csv(part, p))
            coarser = None
            if cfg.compare_k is not None:
                coarser = hac.cut(dg, cfg.compare_k)
                out.write(f"partition_k{cfg.compare_k}.csv", lambda p: write_partition_csv(coarser, p))
        if cfg.axis == "citing":
            # cluster labels cover citing journals only; re-index cites accordingly
            index = m.index()
            cites = cites[[index[a] for a in sim.labels]]
            names = list(sim.labels)
        labels, loads, prefix = part.labels, None, "C"
        sol_id = cfg.solution_id or f"hac-k{cfg.k}"
        th = {**common, "axis": cfg.axis, "k": cfg.k, "distance": "1 - cosine", "euclidean_input": hac.is_euclidean(dist)}
        inter = []
        if cfg.figures:
            from . import plotting

            figures.append(("dendrogram.png", lambda p: plotting.dendrogram_plot(dg.as_linkage(), p, dg.names, cfg.k)))

    else:
        with _Stage("similarity"):
            corr = simmat.pearson_correlation(m, cfg.include_self)
        with _Stage("factor"):
            if cfg.k > corr.n:
                raise ValidationError(f"k = {cfg.k} exceeds {corr.n} variables")
            sol = factor.factor_analysis(
                corr, cfg.k, cfg.gamma, cfg.membership_threshold, cfg.load_floor, cfg.min_fields, cfg.rotation_tol, cfg.max_sweeps
            )
            out.write("loadings.csv", lambda p: factor.write_loadings_csv(sol.rotated, p))
            out.write("spectrum.csv", lambda p: factor.write_spectrum_csv(sol.spectrum, p, sol.rotated))
            a = sol.assignment
            out.write("assignment.csv", lambda p: write_assignment_csv(p, a.names, a.labels, a.loading))
            coarser = None
            if cfg.compare_k is not None:
                if cfg.compare_k > corr.n:
                    raise ValidationError(f"compare_k = {cfg.compare_k} exceeds {corr.n} variables")
                rot = factor.extract_loadings(sol.spectrum, cfg.compare_k)
                if cfg.compare_k >= 2:
                    rot = factor.orthomax_rotate(rot, cfg.gamma, cfg.rotation_tol, cfg.max_sweeps)
                coarser = factor.assign_journals(rot, cfg.membership_threshold)
                out.write(
                    f"assignment_k{cfg.compare_k}.csv",
                    lambda p: write_assignment_csv(p, coarser.names, coarser.labels, coarser.loading),
                )
        labels, loads, prefix = a.labels, a.loading, "F"
        sol_id = cfg.solution_id or f"factor-k{cfg.k}"
        th = {
            **common,
            "k": cfg.k,
            "rotation": sol.rotated.criterion_kind,
            "gamma": cfg.gamma,
            "membership_threshold": cfg.membership_threshold,
            "load_floor": cfg.load_floor,
            "min_fields": cfg.min_fields,
            "kaiser_count": factor.kaiser_count(sol.spectrum),
            "cumulative_pct": float(factor.explained_variance(sol.rotated).cumulative[-1]),
            "degenerate_variables": len(corr.degenerate),
        }
        inter = sol.interdisciplinary
        if cfg.figures:
            from . import plotting

            figures.append(("scree.png", lambda p: plotting.scree_plot(sol.spectrum.eigenvalues, p, k=cfg.k)))
            figures.append(("loadings.png", lambda p: plotting.loadings_heatmap(sol.rotated.loadings, a.labels, p)))

    with _Stage("report"):
        rep = report.build_report(
            sol_id,
            labels,
            names,
            cites,
            cfg.cutpoints,
            loadings=loads,
            prefix=prefix,
            thresholds=th,
            interdisciplinary=inter,
            cites_basis=basis,
            coarser=coarser,
        )
        n_in, n_iso, n = rep.reconcile()
        if n_in + n_iso != n:
            raise ValidationError(f"report does not reconcile: {n_in} + {n_iso} != {n}")
        out.text("report.json", rep.to_json())
        out.text("report.txt", rep.to_text())
        if cfg.figures:
            from . import plotting

            g_labels = [g.label for g in rep.groups]
            g_means = [g.mean_cites for g in rep.groups]
            g_sizes = [len(g.members) for g in rep.groups]
            figures.append(
                ("group_means.png", lambda p: plotting.group_means_plot(g_labels, g_means, g_sizes, p, cfg.cutpoints))
            )
        for name, fn in figures:
            out.write(name, fn)
        inputs = {"edges": Path(cfg.edges)}
        if cfg.registry is not None:
            inputs["registry"] = Path(cfg.registry)
        manifest = out.manifest(inputs, cfg.echo())
        out.text("manifest.json", json.dumps(manifest, indent=2) + "\n")
    return PipelineResult(rep, manifest, Path(cfg.output_dir))
