"""Dataset ingestion and end-to-end analyses with deterministic reports.

Every run function returns an AnalysisReport whose CSV emission is
byte-for-byte reproducible: floats use one fixed format, provenance
columns carry the toolkit version, base seed, and a hash of the
analysis configuration, and worker fan-out merges by graph index with
commutative count sums, so --workers never changes any output byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from ._version import __version__
from .errors import DataError, MissingColumn, ParseError, ShapeMismatch
from .infotheory import (
    DEFAULT_TAUS,
    JointCounts,
    entropy_y,
    jsd_curve,
    mutual_information,
    relative_gain,
    sample_pairs_for_graph,
    shuffle_control,
)
from .masking import MaskConfig, MaskPlan, perturbed_topk, moama_mask, motifpred_mask, uniform_mask
from .molgraph import LabeledRecord, MolGraph, parse_smiles
from .motif import MotifVocab, coverage, decompose, motif_adjacency, motif_signatures
from .scoring import NodeScores, pagerank
from .targets import argmax_labels, atom_labels, vq_labels

MI_COLUMNS = (
    "dataset", "target_kind", "strategy", "mi_bits", "h_y_bits",
    "relative_gain", "n_pairs", "seed_mean", "seed_std",
    "version", "seed", "config_hash",
)
JSD_COLUMNS = (
    "dataset", "target_kind", "tau", "jsd_bits", "labels_kept", "defined",
    "version", "seed", "config_hash",
)
COVERAGE_COLUMNS = (
    "dataset", "overlap_ratio", "mean_r", "median_r",
    "pct_r_ge_080", "pct_r_le_020",
    "version", "seed", "config_hash",
)


@dataclass(frozen=True)
class DatasetManifest:
    """Where a labeled SMILES corpus lives and how to read it."""

    path: str
    smiles_column: str = "smiles"
    task_columns: tuple[str, ...] = ()
    active_task: int = 0
    name: str = ""

    @property
    def display_name(self) -> str:
        return self.name or Path(self.path).stem


@dataclass
class IngestStats:
    """What happened while reading a corpus."""

    rows_total: int = 0
    parsed: int = 0
    parse_failures: dict[str, int] = field(default_factory=dict)
    invalid_labels: int = 0
    singletons: int = 0


@dataclass
class AnalysisReport:
    """Rows ready for CSV or SVG emission."""

    kind: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)


def config_hash(params: dict[str, Any]) -> str:
    """Short stable hash of the analysis configuration.

    Runtime-only knobs (worker count, output paths) must not be passed
    in: they may vary between byte-identical runs.
    """
    blob = json.dumps(params, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Order-preserving map, optionally fanned out over processes.

    Results come back in input order regardless of worker count; fn and
    its inputs must be picklable when workers > 1.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, math.ceil(len(items) / (workers * 4)))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _parse_worker(smiles: str):
    try:
        return ("ok", parse_smiles(smiles))
    except ParseError as exc:
        return (type(exc).__name__, None)


def _read_label(cell: Optional[str]) -> tuple[Optional[int], bool]:
    """Parse one task cell; (label, was_invalid)."""
    if cell is None:
        return None, False
    text = cell.strip()
    if not text or text.lower() in ("na", "nan", "none"):
        return None, False
    try:
        value = float(text)
    except ValueError:
        return None, True
    if value == 0.0:
        return 0, False
    if value == 1.0:
        return 1, False
    return None, True


def ingest(manifest: DatasetManifest, workers: int = 1) -> tuple[list[LabeledRecord], IngestStats]:
    """Read a CSV corpus into labeled records.

    Rows whose SMILES fail to parse are skipped and tallied by failure
    kind; unparseable or non-binary label cells become missing labels.
    Single-atom molecules are kept but counted, since the analysis
    stages will skip them.
    """
    stats = IngestStats()
    with open(manifest.path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        if manifest.smiles_column not in header:
            raise MissingColumn(
                f"column {manifest.smiles_column!r} not in {manifest.path}"
            )
        for column in manifest.task_columns:
            if column not in header:
                raise MissingColumn(f"column {column!r} not in {manifest.path}")
        raw_rows = list(reader)

    stats.rows_total = len(raw_rows)
    outcomes = parallel_map(
        _parse_worker, [row[manifest.smiles_column].strip() for row in raw_rows], workers
    )

    records: list[LabeledRecord] = []
    for row, (tag, graph) in zip(raw_rows, outcomes):
        if tag != "ok":
            stats.parse_failures[tag] = stats.parse_failures.get(tag, 0) + 1
            continue
        labels = []
        for column in manifest.task_columns:
            label, bad = _read_label(row.get(column))
            stats.invalid_labels += int(bad)
            labels.append(label)
        records.append(
            LabeledRecord(
                graph=graph,
                task_labels=tuple(labels),
                active_task=manifest.active_task if labels else 0,
            )
        )
        stats.parsed += 1
        stats.singletons += int(graph.is_singleton)
    return records, stats


def analysis_records(records: Sequence[LabeledRecord]) -> tuple[list[LabeledRecord], dict[str, int]]:
    """Keep records usable for label analyses; count what was skipped.

    Skips graphs with a missing active-task label and single-atom
    graphs.
    """
    kept = []
    skipped = {"missing_label": 0, "singleton": 0}
    for record in records:
        if record.label is None:
            skipped["missing_label"] += 1
        elif record.graph.is_singleton:
            skipped["singleton"] += 1
        else:
            kept.append(record)
    return kept, skipped


def exact_joint_counts(
    records: Sequence[LabeledRecord],
    kind: str,
    *,
    vocab: Optional[MotifVocab] = None,
    embeddings: Optional[dict[int, np.ndarray]] = None,
    codebook: Optional[np.ndarray] = None,
    logits: Optional[dict[int, np.ndarray]] = None,
    vq_normalize: bool = False,
    workers: int = 1,
) -> tuple[JointCounts, dict[str, int]]:
    """Enumerate every unit of every usable graph into joint counts.

    Units are atoms for atom_type / argmax_token / vq_code and motifs
    for motif.  Motifs outside the vocabulary are excluded from the
    counts and tallied under 'excluded_unk'.  External resources
    (embeddings, logits) are keyed by position in ``records``.
    """
    usable, skipped = analysis_records(records)
    # Positions in the original record list, for resource lookup.
    positions = {id(rec): i for i, rec in enumerate(records)}
    extras = dict(skipped)
    extras["excluded_unk"] = 0

    if kind == "motif":
        if vocab is None:
            raise DataError("motif analysis needs a vocabulary")
        sig_lists = parallel_map(motif_signatures, [rec.graph for rec in usable], workers)
        joint = JointCounts(x_space=f"motif[{vocab.size + 1}]")
        for record, sigs in zip(usable, sig_lists):
            y = record.label
            for sig in sigs:
                label = vocab.lookup(sig)
                if label == vocab.unk_id:
                    extras["excluded_unk"] += 1
                    continue
                joint.add(label, y)
        return joint, extras

    if kind == "atom_type":
        joint = JointCounts(x_space="atom_type[119]")
        for record in usable:
            y = record.label
            for z in atom_labels(record.graph):
                joint.add(z, y)
        return joint, extras

    if kind == "argmax_token":
        if logits is None:
            raise DataError("argmax_token analysis needs per-atom logits")
        space = None
        joint = JointCounts()
        for record in usable:
            pos = positions[id(record)]
            if pos not in logits:
                raise ShapeMismatch(f"no logits for graph at corpus position {pos}")
            rows = logits[pos]
            if rows.shape[0] != record.graph.n_atoms:
                raise ShapeMismatch(
                    f"graph {pos}: {rows.shape[0]} logit rows for {record.graph.n_atoms} atoms"
                )
            space = rows.shape[1] if space is None else space
            for token in argmax_labels(rows):
                joint.add(token, record.label)
        joint.x_space = f"argmax_token[{space or 0}]"
        return joint, extras

    if kind == "vq_code":
        if embeddings is None or codebook is None:
            raise DataError("vq_code analysis needs embeddings and a codebook")
        joint = JointCounts(x_space=f"vq_code[{codebook.shape[0]}]")
        for record in usable:
            pos = positions[id(record)]
            if pos not in embeddings:
                raise ShapeMismatch(f"no embeddings for graph at corpus position {pos}")
            rows = embeddings[pos]
            if rows.shape[0] != record.graph.n_atoms:
                raise ShapeMismatch(
                    f"graph {pos}: {rows.shape[0]} embedding rows for {record.graph.n_atoms} atoms"
                )
            for code in vq_labels(rows, codebook, normalize=vq_normalize):
                joint.add(code, record.label)
        return joint, extras

    raise DataError(f"unknown target kind {kind!r}")


def run_mi_analysis(
    records: Sequence[LabeledRecord],
    kinds: Sequence[str],
    *,
    dataset_name: str,
    seed: int = 0,
    workers: int = 1,
    vocab: Optional[MotifVocab] = None,
    embeddings: Optional[dict[int, np.ndarray]] = None,
    codebook: Optional[np.ndarray] = None,
    logits: Optional[dict[int, np.ndarray]] = None,
    vq_normalize: bool = False,
) -> AnalysisReport:
    """Exact MI of each target kind against the graph label."""
    chash = config_hash(
        {"analysis": "mi", "dataset": dataset_name, "kinds": list(kinds), "seed": seed}
    )
    report = AnalysisReport(kind="mi", columns=MI_COLUMNS)
    for kind in kinds:
        joint, _ = exact_joint_counts(
            records, kind, vocab=vocab, embeddings=embeddings,
            codebook=codebook, logits=logits, vq_normalize=vq_normalize,
            workers=workers,
        )
        mi = mutual_information(joint)
        h_y = entropy_y(joint)
        report.rows.append((
            dataset_name, kind, "exact",
            mi, h_y, relative_gain(mi, h_y), joint.total, "", "",
            __version__, seed, chash,
        ))
    return report


def run_jsd_analysis(
    records: Sequence[LabeledRecord],
    kinds: Sequence[str],
    *,
    dataset_name: str,
    taus: Sequence[float] = DEFAULT_TAUS,
    seed: int = 0,
    workers: int = 1,
    vocab: Optional[MotifVocab] = None,
    embeddings: Optional[dict[int, np.ndarray]] = None,
    codebook: Optional[np.ndarray] = None,
    logits: Optional[dict[int, np.ndarray]] = None,
    vq_normalize: bool = False,
) -> AnalysisReport:
    """Low-frequency JSD curves of each target kind."""
    chash = config_hash(
        {
            "analysis": "jsd", "dataset": dataset_name, "kinds": list(kinds),
            "taus": [float(t) for t in taus], "seed": seed,
        }
    )
    report = AnalysisReport(kind="jsd", columns=JSD_COLUMNS)
    for kind in kinds:
        joint, _ = exact_joint_counts(
            records, kind, vocab=vocab, embeddings=embeddings,
            codebook=codebook, logits=logits, vq_normalize=vq_normalize,
            workers=workers,
        )
        curve = jsd_curve(joint, taus)
        for tau, value, kept, ok in zip(curve.taus, curve.values, curve.labels_kept, curve.defined):
            report.rows.append((
                dataset_name, kind, tau, value, kept, int(ok),
                __version__, seed, chash,
            ))
    return report


def _mask_sim_worker(
    task: tuple,
    strategy: str,
    config: MaskConfig,
    repeats: int,
    seed: int,
    samples_per_graph: Optional[int],
    unique_nodes: bool,
) -> list[list[tuple[int, int]]]:
    """Sample one graph's pairs under one strategy, for every repeat.

    Self-contained per graph so the corpus can be partitioned across
    processes freely; determinism comes from value-keyed substreams
    inside sample_pairs_for_graph.
    """
    graph, graph_index, labels, y, scores_row = task
    if strategy == "uniform":
        def plan_fn(g: MolGraph, gi: int, rng) -> MaskPlan:
            return uniform_mask(g, config, rng)
    elif strategy in ("pagerank", "external"):
        scores = pagerank(graph) if strategy == "pagerank" else scores_row
        def plan_fn(g: MolGraph, gi: int, rng) -> MaskPlan:
            return perturbed_topk(g, scores, config, rng)
    elif strategy == "moama":
        partition = decompose(graph)
        adjacency = motif_adjacency(graph, partition)
        def plan_fn(g: MolGraph, gi: int, rng) -> MaskPlan:
            return moama_mask(g, partition, adjacency, config, rng)
    elif strategy == "motifpred":
        partition = decompose(graph)
        def plan_fn(g: MolGraph, gi: int, rng) -> MaskPlan:
            return motifpred_mask(g, partition, config, rng)
    else:
        raise DataError(f"unknown strategy {strategy!r}")
    return sample_pairs_for_graph(
        graph, graph_index, labels, y, plan_fn,
        repeats, seed, samples_per_graph, unique_nodes,
    )


def run_mask_sim(
    records: Sequence[LabeledRecord],
    strategies: Sequence[str],
    config: MaskConfig,
    *,
    dataset_name: str,
    repeats: int = 5,
    seed: int = 0,
    workers: int = 1,
    external_scores: Optional[Sequence[NodeScores]] = None,
    samples_per_graph: Optional[int] = None,
    unique_nodes: bool = False,
) -> AnalysisReport:
    """Sampled atom-type MI under each masking strategy.

    Per repeat and graph, as many atoms are sampled as the graph has;
    rows report the across-repeat mean and sample standard deviation.
    External scores are keyed by position in ``records``.
    """
    usable, _ = analysis_records(records)
    chash = config_hash(
        {
            "analysis": "mask_sim", "dataset": dataset_name,
            "strategies": list(strategies), "repeats": repeats, "seed": seed,
            "ratio": config.ratio, "beta": config.beta,
            "epoch": config.effective_epoch, "max_epoch": config.max_epoch,
            "intra": config.intra_motif_fraction,
            "samples_per_graph": samples_per_graph, "unique_nodes": unique_nodes,
        }
    )
    positions = {id(rec): i for i, rec in enumerate(records)}
    tasks = []
    for g, record in enumerate(usable):
        scores_row = None
        if external_scores is not None:
            scores_row = external_scores[positions[id(record)]]
        tasks.append((record.graph, g, atom_labels(record.graph), record.label, scores_row))

    report = AnalysisReport(kind="mi", columns=MI_COLUMNS)
    for strategy in strategies:
        if strategy == "external" and external_scores is None:
            raise DataError("external strategy needs a score file")
        worker = partial(
            _mask_sim_worker,
            strategy=strategy, config=config, repeats=repeats, seed=seed,
            samples_per_graph=samples_per_graph, unique_nodes=unique_nodes,
        )
        results = parallel_map(worker, tasks, workers)
        per_repeat = [JointCounts(x_space="atom_type[119]") for _ in range(repeats)]
        for repeat_pairs in results:
            for r, pairs in enumerate(repeat_pairs):
                per_repeat[r].accumulate(pairs)
        estimates = [mutual_information(joint) for joint in per_repeat]
        mean = float(np.mean(estimates))
        std = float(np.std(estimates, ddof=1)) if repeats > 1 else 0.0
        h_y = entropy_y(per_repeat[0])
        report.rows.append((
            dataset_name, "atom_type", strategy,
            mean, h_y, relative_gain(mean, h_y), per_repeat[0].total,
            mean, std, __version__, seed, chash,
        ))
    return report


def run_shuffle_control(
    records: Sequence[LabeledRecord],
    kind: str,
    *,
    dataset_name: str,
    repeats: int = 5,
    seed: int = 0,
    workers: int = 1,
    vocab: Optional[MotifVocab] = None,
    embeddings: Optional[dict[int, np.ndarray]] = None,
    codebook: Optional[np.ndarray] = None,
    logits: Optional[dict[int, np.ndarray]] = None,
    vq_normalize: bool = False,
) -> AnalysisReport:
    """Original MI next to its label-shuffled control."""
    chash = config_hash(
        {
            "analysis": "shuffle", "dataset": dataset_name, "kind": kind,
            "repeats": repeats, "seed": seed,
        }
    )
    joint, _ = exact_joint_counts(
        records, kind, vocab=vocab, embeddings=embeddings, codebook=codebook,
        logits=logits, vq_normalize=vq_normalize, workers=workers,
    )
    pairs = [
        (x, y) for (x, y), n in sorted(joint.counts.items()) for _ in range(n)
    ]
    mi = mutual_information(joint)
    h_y = entropy_y(joint)
    shuffled = shuffle_control(pairs, repeats=repeats, seed=seed, x_space=joint.x_space)
    report = AnalysisReport(kind="mi", columns=MI_COLUMNS)
    report.rows.append((
        dataset_name, kind, "exact",
        mi, h_y, relative_gain(mi, h_y), joint.total, "", "",
        __version__, seed, chash,
    ))
    report.rows.append((
        dataset_name, kind, "shuffled",
        shuffled.mean, h_y, relative_gain(shuffled.mean, h_y), joint.total,
        shuffled.mean, shuffled.std, __version__, seed, chash,
    ))
    return report


def run_coverage(
    vocab: MotifVocab,
    records: Sequence[LabeledRecord],
    *,
    dataset_name: str,
    seed: int = 0,
) -> AnalysisReport:
    """Vocabulary coverage of a downstream corpus."""
    chash = config_hash({"analysis": "coverage", "dataset": dataset_name, "seed": seed})
    stats = coverage(vocab, [rec.graph for rec in records])
    report = AnalysisReport(kind="coverage", columns=COVERAGE_COLUMNS)
    report.rows.append((
        dataset_name, stats.overlap_ratio, stats.mean_r, stats.median_r,
        stats.pct_r_ge_080, stats.pct_r_le_020,
        __version__, seed, chash,
    ))
    return report


def _format_cell(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.10g}"
    return str(value)


def write_report_csv(report: AnalysisReport, path: str | Path) -> None:
    """Emit a report deterministically: fixed column order, fixed float
    format, newline-terminated lines."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_format_cell(cell) for cell in row])


def read_report_csv(path: str | Path) -> AnalysisReport:
    """Load a report CSV back; kind is inferred from its columns."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = list(reader)
    if not rows:
        raise DataError(f"report {path} is empty")
    columns = tuple(rows[0])
    if "tau" in columns:
        kind = "jsd"
    elif "overlap_ratio" in columns:
        kind = "coverage"
    else:
        kind = "mi"
    return AnalysisReport(kind=kind, columns=columns, rows=[tuple(r) for r in rows[1:]])


def build_vocab_tsv(vocab: MotifVocab, path: str | Path) -> None:
    """Write a vocabulary as TSV: signature, id, count."""
    ranked = sorted(vocab.ids.items(), key=lambda kv: kv[1])
    with open(path, "w", newline="") as handle:
        handle.write("signature\tid\tcount\n")
        for sig, idx in ranked:
            handle.write(f"{sig}\t{idx}\t{vocab.counts[sig]}\n")


def load_vocab_tsv(path: str | Path) -> MotifVocab:
    """Read a vocabulary TSV written by build_vocab_tsv."""
    ids: dict[str, int] = {}
    counts: dict[str, int] = {}
    with open(path) as handle:
        header = handle.readline().rstrip("\n")
        if header.split("\t") != ["signature", "id", "count"]:
            raise MissingColumn(f"{path} is not a vocabulary TSV")
        for line_no, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ShapeMismatch(f"{path}:{line_no}: expected 3 tab-separated fields")
            sig, idx, count = parts
            ids[sig] = int(idx)
            counts[sig] = int(count)
    if sorted(ids.values()) != list(range(len(ids))):
        raise ShapeMismatch(f"{path}: ids must be dense 0..{len(ids) - 1}")
    return MotifVocab(ids=ids, counts=counts)
