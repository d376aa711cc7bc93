"""Command-line entry point: ``citefield <subcommand> ...``.

Every subcommand reads and writes the CSV artifacts of the other stages, so
each step can be run and inspected on its own. ``run`` chains them from a
configuration file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, corpus, factor, hac, louvain, pajek, report, simmat, synth
from .errors import CitefieldError, ValidationError
from .partition import read_assignment_csv, write_assignment_csv, write_partition_csv
from .pipeline import PipelineConfig, PipelineError, run_pipeline

log = logging.getLogger("citefield")


def _load(args) -> corpus.CitationMatrix:
    m = corpus.ingest_edges(args.edges, args.registry, getattr(args, "year_label", ""))
    return corpus.clean(m, not args.keep_inactive)


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("edges", type=Path, help="edge-list CSV (citing,cited,count)")
    p.add_argument("--registry", type=Path, help="registry CSV (abbreviation,name,external_label)")
    p.add_argument("--keep-inactive", action="store_true", help="keep citing rows with no citations")


def cmd_ingest(args) -> int:
    m = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus.export_edges(m, out / "edges.csv")
    corpus.export_registry(m, out / "registry.csv")
    corpus.write_cleaning_log(m, out / "cleaning_log.txt")
    stats = corpus.sparsity_stats(m)
    (out / "stats.json").write_text(json.dumps(asdict(stats), indent=2) + "\n", encoding="utf-8")
    print(
        f"{stats.n_citing} citing x {stats.n_cited} cited journals, {stats.nnz} non-zero cells, "
        f"sparsity {stats.sparsity:.3f}, {stats.total_citations} citations, {len(m.dropped)} dropped"
    )
    return 0


def cmd_similarity(args) -> int:
    m = _load(args)
    if args.kind == "cosine":
        s = simmat.cosine_similarity(m, args.axis, args.include_self)
    else:
        s = simmat.pearson_correlation(m, args.include_self)
    if args.distance:
        simmat.write_matrix_csv(s.labels, simmat.distance_from_similarity(s), args.out, corner="distance")
    else:
        simmat.write_similarity_csv(s, args.out)
    if s.degenerate:
        print(f"{len(s.degenerate)} degenerate profiles: {', '.join(s.degenerate)}", file=sys.stderr)
    return 0


def cmd_louvain(args) -> int:
    m = _load(args)
    g = louvain.symmetrize(m, args.include_self)
    res = louvain.louvain(g, args.order, args.seed, args.tol)
    write_partition_csv(res.partition, args.out)
    if args.history:
        Path(args.history).write_text(
            "pass,modularity\n" + "".join(f"{i + 1},{q!r}\n" for i, q in enumerate(res.q_history)), encoding="utf-8"
        )
    print(f"{res.partition.n_groups} communities, Q = {res.modularity:.6f} after {len(res.q_history)} pass(es)")
    return 0


def cmd_hac(args) -> int:
    labels, values = simmat.read_matrix_csv(args.similarity)
    d = values if args.is_distance else simmat.distance_from_similarity(values)
    dg = hac.ward_cluster(d, labels)
    if args.dendrogram:
        hac.write_dendrogram_csv(dg, args.dendrogram)
    ks = args.k
    for k in ks:
        part = hac.cut(dg, k)
        path = Path(args.out) if len(ks) == 1 else Path(args.out).with_name(f"{Path(args.out).stem}_k{k}.csv")
        write_partition_csv(part, path)
        print(f"k={k}: group sizes {part.sizes()}")
    if not hac.is_euclidean(d):
        print("note: distances are not Euclidean-embeddable; Ward merge heights may be non-monotone", file=sys.stderr)
    return 0


def cmd_factor(args) -> int:
    m = _load(args)
    corr = simmat.pearson_correlation(m, args.include_self)
    sol = factor.factor_analysis(corr, args.k, args.gamma, args.threshold, args.load_floor, args.min_fields)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    factor.write_loadings_csv(sol.rotated, out / "loadings.csv")
    factor.write_spectrum_csv(sol.spectrum, out / "spectrum.csv", sol.rotated)
    a = sol.assignment
    write_assignment_csv(out / "assignment.csv", a.names, a.labels, a.loading)
    ev = factor.explained_variance(sol.rotated)
    print(
        f"{args.k} factors ({sol.rotated.criterion_kind}), cumulative {ev.cumulative[-1]:.3f}% of variance; "
        f"eigenvalues > 1: {factor.kaiser_count(sol.spectrum)}; "
        f"{int(np.sum(a.labels >= 0))} assigned, {len(a.isolates())} isolates, "
        f"{len(sol.interdisciplinary)} interdisciplinary"
    )
    return 0


def cmd_report(args) -> int:
    m = _load(args)
    names, labels, loads = read_assignment_csv(args.assignment)
    index = m.index()
    missing = [a for a in names if a not in index]
    if missing:
        raise ValidationError(f"assignment names journals not in the edge list: {', '.join(missing[:5])}")
    cites_all = corpus.cites_received(m, args.include_self)
    cites = cites_all[[index[a] for a in names]]
    coarser = None
    if args.coarser:
        cn, cl, _ = read_assignment_csv(args.coarser)
        if cn != names:
            raise ValidationError("coarser solution covers a different journal list")
        coarser = cl
    inter = []
    if args.loadings:
        lm = factor.read_loadings_csv(args.loadings)
        inter = factor.interdisciplinary(lm, args.load_floor, args.min_fields)
    rep = report.build_report(
        args.solution_id or Path(args.assignment).stem,
        labels,
        names,
        cites,
        args.cutpoints,
        loadings=loads,
        prefix=args.prefix,
        thresholds={"load_floor": args.load_floor, "min_fields": args.min_fields} if args.loadings else {},
        interdisciplinary=inter,
        cites_basis=f"citations received within the loaded journal set ({'including' if args.include_self else 'excluding'} self-citations)",
        coarser=coarser,
    )
    rep.write(args.out, args.text)
    if args.figures:
        from . import plotting

        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        plotting.group_means_plot(
            [g.label for g in rep.groups],
            [g.mean_cites for g in rep.groups],
            [len(g.members) for g in rep.groups],
            fig_dir / "group_means.png",
            args.cutpoints,
        )
    if args.external:
        ext = [m.registry[index[a]].external_label for a in names]
        ct = report.cross_tabulate(labels, ext)
        print(f"ARI vs external labels: {ct.ari:.4f} over {ct.n_labeled} journals ({ct.n_unlabeled} unlabeled)")
    if not args.text:
        sys.stdout.write(rep.to_text())
    return 0


def cmd_synth(args) -> int:
    spec = synth.PlantedSpec(
        args.fields, args.per_field, args.within, args.cross, args.generalists, args.silent, args.spread, args.seed
    )
    pl = synth.generate_planted(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus.export_edges(pl.matrix, out / "edges.csv")
    corpus.export_registry(pl.matrix, out / "registry.csv")
    write_assignment_csv(out / "truth.csv", pl.matrix.abbreviations, pl.labels)
    print(f"{spec.n_journals} journals, {pl.matrix.counts.nnz} non-zero cells -> {out}")
    return 0


def cmd_export(args) -> int:
    m = _load(args)
    obj = louvain.symmetrize(m, args.include_self) if args.edges_mode else m
    pajek.export_pajek(obj, args.out)
    return 0


def cmd_run(args) -> int:
    overrides = {k: getattr(args, k) for k in RUN_KEYS if getattr(args, k, None) is not None}
    # paths given on the command line are relative to the working directory, not the config file
    for k in ("edges", "registry", "output_dir"):
        if k in overrides:
            overrides[k] = Path(overrides[k]).resolve()
    try:
        cfg = PipelineConfig.from_file(args.config, overrides)
    except CitefieldError as exc:
        raise PipelineError("config", str(exc)) from exc
    res = run_pipeline(cfg)
    n_in, n_iso, n = res.report.reconcile()
    print(f"{res.report.solution_id}: {len(res.report.groups)} groups, {n_in} journals grouped, {n_iso} isolates of {n}")
    print(f"{len(res.manifest['outputs'])} artifacts in {res.out_dir}")
    return 0


RUN_KEYS = (
    "edges registry year_label method output_dir solution_id drop_inactive_citing include_self "
    "cites_include_self axis k compare_k gamma membership_threshold load_floor min_fields order seed tol "
    "rotation_tol max_sweeps cutpoints figures"
).split()


def _cutpoints(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citefield", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read, clean and summarise an edge list")
    _add_input(p)
    p.add_argument("--year-label", default="")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("similarity", help="cosine or Pearson matrix as CSV")
    _add_input(p)
    p.add_argument("--kind", choices=("cosine", "pearson"), default="cosine")
    p.add_argument("--axis", choices=("cited", "citing"), default="cited")
    p.add_argument("--include-self", action="store_true")
    p.add_argument("--distance", action="store_true", help="write 1 - similarity instead")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("louvain", help="modularity communities")
    _add_input(p)
    p.add_argument("--order", choices=("by_index", "seeded_shuffle"), default="by_index")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--include-self", action="store_true")
    p.add_argument("--history", help="CSV of Q after each outer pass")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_louvain)

    p = sub.add_parser("hac", help="Ward clustering of a similarity CSV")
    p.add_argument("similarity", type=Path)
    p.add_argument("--is-distance", action="store_true", help="input already holds distances")
    p.add_argument("--k", type=int, action="append", required=True, help="groups; repeat for several cuts")
    p.add_argument("--dendrogram")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hac)

    p = sub.add_parser("factor", help="PCA + orthomax rotation + assignment")
    _add_input(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, default=0.0, help="0 quartimax, 1 varimax")
    p.add_argument("--threshold", type=float, default=0.3)
    p.add_argument("--load-floor", type=float, default=0.1)
    p.add_argument("--min-fields", type=int, default=7)
    p.add_argument("--include-self", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("report", help="field report from an assignment CSV")
    _add_input(p)
    p.add_argument("assignment", type=Path)
    p.add_argument("--loadings", type=Path)
    p.add_argument("--coarser", type=Path, help="assignment CSV of a coarser solution")
    p.add_argument("--cutpoints", type=_cutpoints, default=(1000.0, 2000.0))
    p.add_argument("--load-floor", type=float, default=0.1)
    p.add_argument("--min-fields", type=int, default=7)
    p.add_argument("--include-self", action="store_true", help="count self-citations in mean cites")
    p.add_argument("--prefix", default="G")
    p.add_argument("--solution-id")
    p.add_argument("--external", action="store_true", help="cross-tabulate against registry external labels")
    p.add_argument("--figures", help="directory for PNG figures")
    p.add_argument("--text")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="planted-field synthetic edge list")
    p.add_argument("--fields", type=int, default=5)
    p.add_argument("--per-field", type=int, default=20)
    p.add_argument("--within", type=float, default=10.0)
    p.add_argument("--cross", type=float, default=1.0)
    p.add_argument("--generalists", type=int, default=0)
    p.add_argument("--silent", type=int, default=0)
    p.add_argument("--spread", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export", help="Pajek .net export")
    _add_input(p)
    p.add_argument("--edges-mode", action="store_true", help="symmetrised *Edges instead of directed *Arcs")
    p.add_argument("--include-self", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("run", help="full pipeline from a key = value config file")
    p.add_argument("config", type=Path)
    for key in RUN_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"citefield: error {exc}", file=sys.stderr)
        return 2
    except (CitefieldError, OSError) as exc:
        print(f"citefield: error [{args.command}] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
