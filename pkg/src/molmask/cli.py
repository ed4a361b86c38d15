"""Command line front end.

Exit codes: 0 success, 1 usage problem, 2 data problem (unreadable or
malformed inputs).  All analysis outputs land under --out-dir with
deterministic bytes for a fixed seed, whatever --workers says.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from ._version import __version__
from .errors import DataError
from .infotheory import DEFAULT_TAUS
from .masking import (
    MaskConfig,
    STRATEGIES,
    build_plan_fn,
    export_views,
)
from .molgraph import parse_smiles
from .motif import build_vocab, decompose, motif_signatures
from .scoring import load_external_scores
from .svg import render_svg
from .targets import (
    TARGET_KINDS,
    argmax_targets,
    atom_type_targets,
    load_codebook,
    load_embeddings,
    motif_targets,
    vq_targets,
)
from .workbench import (
    DatasetManifest,
    build_vocab_tsv,
    ingest,
    load_vocab_tsv,
    read_report_csv,
    run_coverage,
    run_jsd_analysis,
    run_mask_sim,
    run_mi_analysis,
    run_shuffle_control,
    write_report_csv,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise _UsageError(message)


def _add_dataset_flags(sub: argparse.ArgumentParser, labeled: bool = True) -> None:
    sub.add_argument("--input", required=True, help="CSV corpus path")
    sub.add_argument("--smiles-col", default="smiles", help="SMILES column name")
    sub.add_argument("--dataset-name", default="", help="name used in report rows")
    if labeled:
        sub.add_argument("--label-col", default="", help="binary task column name")


def _add_mask_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--strategy", default="uniform", choices=STRATEGIES)
    sub.add_argument("--ratio", type=float, default=0.15, help="mask ratio gamma")
    sub.add_argument("--beta", type=float, default=None,
                     help="candidate bonus (default 0.25 pagerank, 0.5 external)")
    sub.add_argument("--epoch", type=int, default=None, help="annealing epoch i (default: final)")
    sub.add_argument("--max-epoch", type=int, default=100, help="annealing horizon E")
    sub.add_argument("--intra-frac", type=float, default=0.5,
                     help="fraction of atoms masked inside a selected motif")
    sub.add_argument("--scores", default="", help="external per-atom score CSV")


def _mask_config(args, strategy: str) -> MaskConfig:
    beta = args.beta
    if beta is None:
        beta = 0.5 if strategy == "external" else 0.25
    return MaskConfig(
        ratio=args.ratio,
        beta=beta,
        epoch=args.epoch,
        max_epoch=args.max_epoch,
        intra_motif_fraction=args.intra_frac,
        seed=args.seed,
    )


def _manifest(args) -> DatasetManifest:
    label = getattr(args, "label_col", "")
    return DatasetManifest(
        path=args.input,
        smiles_column=args.smiles_col,
        task_columns=(label,) if label else (),
        name=args.dataset_name,
    )


def _ingest_for_analysis(args):
    manifest = _manifest(args)
    records, stats = ingest(manifest, workers=args.workers)
    if not records:
        raise DataError(f"no parseable molecules in {args.input}")
    return manifest, records, stats


def _out_path(args, default_name: str) -> Path:
    explicit = getattr(args, "output", "")
    if explicit:
        path = Path(explicit)
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        return path
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def _split_list(raw: str, allowed: Sequence[str], what: str) -> list[str]:
    items = [piece.strip() for piece in raw.split(",") if piece.strip()]
    if not items:
        raise _UsageError(f"no {what} given")
    for item in items:
        if item not in allowed:
            raise _UsageError(f"unknown {what} {item!r}; choose from {', '.join(allowed)}")
    return items


def _load_target_resources(args, records):
    """Vocab, embeddings, codebook, logits as requested by flags."""
    vocab = None
    if getattr(args, "vocab", ""):
        vocab = load_vocab_tsv(args.vocab)
    embeddings = load_embeddings(args.embeddings) if getattr(args, "embeddings", "") else None
    codebook = load_codebook(args.codebook) if getattr(args, "codebook", "") else None
    logits = load_embeddings(args.logits) if getattr(args, "logits", "") else None
    return vocab, embeddings, codebook, logits


def _self_vocab(records):
    return build_vocab([rec.graph for rec in records])


def cmd_parse_check(args) -> int:
    manifest = _manifest(args)
    records, stats = ingest(manifest, workers=args.workers)
    print(f"dataset: {manifest.display_name}")
    print(f"rows: {stats.rows_total}")
    print(f"parsed: {stats.parsed}")
    print(f"failed: {stats.rows_total - stats.parsed}")
    for reason in sorted(stats.parse_failures):
        print(f"  {reason}: {stats.parse_failures[reason]}")
    print(f"singleton molecules: {stats.singletons}")
    print(f"invalid label cells: {stats.invalid_labels}")
    return 0


def cmd_decompose(args) -> int:
    if args.smiles:
        sources = args.smiles
    elif args.input:
        manifest = _manifest(args)
        records, _ = ingest(manifest, workers=args.workers)
        sources = [rec.graph.source_smiles for rec in records]
    else:
        raise _UsageError("decompose needs --smiles or --input")
    for smiles in sources:
        graph = parse_smiles(smiles)
        partition = decompose(graph)
        sigs = motif_signatures(graph, partition)
        print(smiles)
        for m, (atoms, sig) in enumerate(zip(partition.motifs, sigs)):
            atom_list = ",".join(str(a) for a in atoms)
            print(f"  motif {m}: atoms {atom_list}  signature {sig}")
    return 0


def cmd_vocab_build(args) -> int:
    manifest, records, _ = _ingest_for_analysis(args)
    vocab = _self_vocab(records)
    path = _out_path(args, "vocab.tsv")
    build_vocab_tsv(vocab, path)
    print(f"wrote {vocab.size} signatures to {path}")
    return 0


def cmd_vocab_coverage(args) -> int:
    manifest, records, _ = _ingest_for_analysis(args)
    vocab = load_vocab_tsv(args.vocab)
    report = run_coverage(vocab, records, dataset_name=manifest.display_name, seed=args.seed)
    path = _out_path(args, "coverage.csv")
    write_report_csv(report, path)
    print(f"wrote {path}")
    return 0


def cmd_mask_sim(args) -> int:
    manifest, records, _ = _ingest_for_analysis(args)
    if not manifest.task_columns:
        raise _UsageError("mask-sim needs --label-col")
    strategies = _split_list(args.strategies, STRATEGIES, "strategy")
    config = _mask_config(args, strategies[0])
    external = None
    if "external" in strategies:
        if not args.scores:
            raise _UsageError("strategy 'external' needs --scores")
        external = load_external_scores(args.scores, [r.graph.n_atoms for r in records])
    report = run_mask_sim(
        records, strategies, config,
        dataset_name=manifest.display_name, repeats=args.repeats,
        seed=args.seed, workers=args.workers, external_scores=external,
    )
    path = _out_path(args, "mask_sim.csv")
    write_report_csv(report, path)
    print(f"wrote {path}")
    return 0


def cmd_mi(args) -> int:
    manifest, records, _ = _ingest_for_analysis(args)
    if not manifest.task_columns:
        raise _UsageError("mi needs --label-col")
    kinds = _split_list(args.targets, TARGET_KINDS, "target kind")
    vocab, embeddings, codebook, logits = _load_target_resources(args, records)
    if "motif" in kinds and vocab is None:
        vocab = _self_vocab(records)
    report = run_mi_analysis(
        records, kinds, dataset_name=manifest.display_name,
        seed=args.seed, workers=args.workers, vocab=vocab,
        embeddings=embeddings, codebook=codebook, logits=logits,
        vq_normalize=args.vq_normalize,
    )
    path = _out_path(args, "mi.csv")
    write_report_csv(report, path)
    print(f"wrote {path}")
    return 0


def cmd_jsd(args) -> int:
    manifest, records, _ = _ingest_for_analysis(args)
    if not manifest.task_columns:
        raise _UsageError("jsd needs --label-col")
    kinds = _split_list(args.targets, TARGET_KINDS, "target kind")
    taus = [float(piece) for piece in args.taus.split(",")] if args.taus else list(DEFAULT_TAUS)
    vocab, embeddings, codebook, logits = _load_target_resources(args, records)
    if "motif" in kinds and vocab is None:
        vocab = _self_vocab(records)
    report = run_jsd_analysis(
        records, kinds, dataset_name=manifest.display_name, taus=taus,
        seed=args.seed, workers=args.workers, vocab=vocab,
        embeddings=embeddings, codebook=codebook, logits=logits,
        vq_normalize=args.vq_normalize,
    )
    path = _out_path(args, "jsd.csv")
    write_report_csv(report, path)
    print(f"wrote {path}")
    return 0


def cmd_shuffle_control(args) -> int:
    manifest, records, _ = _ingest_for_analysis(args)
    if not manifest.task_columns:
        raise _UsageError("shuffle-control needs --label-col")
    kinds = _split_list(args.target, TARGET_KINDS, "target kind")
    if len(kinds) != 1:
        raise _UsageError("shuffle-control takes exactly one target kind")
    vocab, embeddings, codebook, logits = _load_target_resources(args, records)
    if kinds[0] == "motif" and vocab is None:
        vocab = _self_vocab(records)
    report = run_shuffle_control(
        records, kinds[0], dataset_name=manifest.display_name,
        repeats=args.repeats, seed=args.seed, workers=args.workers,
        vocab=vocab, embeddings=embeddings, codebook=codebook, logits=logits,
        vq_normalize=args.vq_normalize,
    )
    path = _out_path(args, "shuffle.csv")
    write_report_csv(report, path)
    print(f"wrote {path}")
    return 0


def cmd_export_views(args) -> int:
    manifest, records, _ = _ingest_for_analysis(args)
    config = _mask_config(args, args.strategy)
    graphs = [rec.graph for rec in records]
    external = None
    if args.strategy == "external":
        if not args.scores:
            raise _UsageError("strategy 'external' needs --scores")
        external = load_external_scores(args.scores, [g.n_atoms for g in graphs])
    plan_fn = build_plan_fn(args.strategy, config, external_scores=external)

    kind = args.target
    if kind not in TARGET_KINDS:
        raise _UsageError(f"unknown target kind {kind!r}")
    vocab, embeddings, codebook, logits = _load_target_resources(args, records)
    if kind == "motif" and vocab is None:
        vocab = _self_vocab(records)
    if kind == "vq_code" and (embeddings is None or codebook is None):
        raise _UsageError("target 'vq_code' needs --embeddings and --codebook")
    if kind == "argmax_token" and logits is None:
        raise _UsageError("target 'argmax_token' needs --logits")

    graph_pos = {id(g): i for i, g in enumerate(graphs)}

    def target_fn(graph, plan):
        pos = graph_pos[id(graph)]
        if kind == "atom_type":
            assignment = atom_type_targets(graph, plan)
        elif kind == "motif":
            assignment = motif_targets(graph, decompose(graph), plan, vocab)
        elif kind == "argmax_token":
            assignment = argmax_targets(graph, plan, logits[pos])
        else:
            assignment = vq_targets(graph, plan, embeddings[pos], codebook)
        return assignment.kind, list(assignment.labels)

    path = _out_path(args, "views.jsonl")
    lines = export_views(
        graphs, plan_fn, target_fn, path,
        draws_per_graph=args.draws_per_graph, seed=args.seed,
    )
    print(f"wrote {lines} views to {path}")
    return 0


def cmd_plot(args) -> int:
    report = read_report_csv(args.report)
    if args.output:
        path = Path(args.output)
    else:
        path = Path(args.report).with_suffix(".svg")
    render_svg(report, path)
    print(f"wrote {path}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="molmask", description=__doc__)
    parser.add_argument("--version", action="version", version=f"molmask {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="base seed for every random draw")
    parser.add_argument("--workers", type=int, default=1, help="process count for corpus stages")
    parser.add_argument("--out-dir", default=".", help="directory for report outputs")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("parse-check", help="validate a corpus and report parse failures")
    _add_dataset_flags(sub)
    sub.set_defaults(func=cmd_parse_check)

    sub = subs.add_parser("decompose", help="print motifs and signatures")
    sub.add_argument("--smiles", action="append", default=[], help="molecule (repeatable)")
    sub.add_argument("--input", default="", help="CSV corpus path")
    sub.add_argument("--smiles-col", default="smiles")
    sub.add_argument("--dataset-name", default="")
    sub.set_defaults(func=cmd_decompose, label_col="")

    vocab_parser = subs.add_parser("vocab", help="build or evaluate motif vocabularies")
    vocab_subs = vocab_parser.add_subparsers(dest="vocab_command", required=True)

    sub = vocab_subs.add_parser("build", help="count motif signatures into a TSV vocabulary")
    _add_dataset_flags(sub, labeled=False)
    sub.add_argument("--output", default="", help="vocabulary TSV path")
    sub.set_defaults(func=cmd_vocab_build, label_col="")

    sub = vocab_subs.add_parser("coverage", help="coverage of a corpus by a vocabulary")
    _add_dataset_flags(sub, labeled=False)
    sub.add_argument("--vocab", required=True, help="pretraining vocabulary TSV")
    sub.add_argument("--output", default="", help="coverage CSV path")
    sub.set_defaults(func=cmd_vocab_coverage, label_col="")

    sub = subs.add_parser("mask-sim", help="sampled MI under masking strategies")
    _add_dataset_flags(sub)
    _add_mask_flags(sub)
    sub.add_argument("--strategies", default="uniform", help="comma-separated strategy list")
    sub.add_argument("--repeats", type=int, default=5)
    sub.add_argument("--output", default="")
    sub.set_defaults(func=cmd_mask_sim)

    sub = subs.add_parser("mi", help="exact MI of target labels vs the task label")
    _add_dataset_flags(sub)
    sub.add_argument("--targets", default="atom_type,motif", help="comma-separated target kinds")
    sub.add_argument("--vocab", default="", help="motif vocabulary TSV (default: build from input)")
    sub.add_argument("--embeddings", default="", help="per-atom embedding CSV")
    sub.add_argument("--codebook", default="", help="codebook CSV")
    sub.add_argument("--logits", default="", help="per-atom logits CSV")
    sub.add_argument("--vq-normalize", action="store_true", help="L2-normalize before quantizing")
    sub.add_argument("--output", default="")
    sub.set_defaults(func=cmd_mi)

    sub = subs.add_parser("jsd", help="low-frequency JSD curves")
    _add_dataset_flags(sub)
    sub.add_argument("--targets", default="atom_type,motif")
    sub.add_argument("--taus", default="", help="comma-separated thresholds (default grid)")
    sub.add_argument("--vocab", default="")
    sub.add_argument("--embeddings", default="")
    sub.add_argument("--codebook", default="")
    sub.add_argument("--logits", default="")
    sub.add_argument("--vq-normalize", action="store_true")
    sub.add_argument("--output", default="")
    sub.set_defaults(func=cmd_jsd)

    sub = subs.add_parser("shuffle-control", help="MI against a label-shuffled control")
    _add_dataset_flags(sub)
    sub.add_argument("--target", default="motif", help="one target kind")
    sub.add_argument("--repeats", type=int, default=5)
    sub.add_argument("--vocab", default="")
    sub.add_argument("--embeddings", default="")
    sub.add_argument("--codebook", default="")
    sub.add_argument("--logits", default="")
    sub.add_argument("--vq-normalize", action="store_true")
    sub.add_argument("--output", default="")
    sub.set_defaults(func=cmd_shuffle_control)

    sub = subs.add_parser("export-views", help="write masked views with targets as JSONL")
    _add_dataset_flags(sub)
    _add_mask_flags(sub)
    sub.add_argument("--target", default="atom_type", help="target kind for the views")
    sub.add_argument("--draws-per-graph", type=int, default=1)
    sub.add_argument("--vocab", default="")
    sub.add_argument("--embeddings", default="")
    sub.add_argument("--codebook", default="")
    sub.add_argument("--logits", default="")
    sub.add_argument("--output", default="")
    sub.set_defaults(func=cmd_export_views)

    sub = subs.add_parser("plot", help="render a report CSV as SVG")
    sub.add_argument("--report", required=True, help="report CSV path")
    sub.add_argument("--output", default="", help="SVG path (default: next to the CSV)")
    sub.set_defaults(func=cmd_plot)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and --version exit through here
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
