"""Prediction-target extraction for masked views.

Four target families: raw atom types, motif vocabulary ids, argmax
tokens from externally supplied logits, and nearest-codebook (vector
quantized) codes from externally supplied embeddings.  Whole-graph
label helpers double as the enumeration path for exact analyses.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DimMismatch, ShapeMismatch
from .masking import MaskPlan
from .molgraph import MolGraph
from .motif import MotifPartition, MotifVocab, canonical_signature

# Atom-type labels live in {0..118}: 0 unknown, 1..118 element numbers.
ATOM_TYPE_SPACE = 119

TARGET_KINDS = ("atom_type", "motif", "argmax_token", "vq_code")


@dataclass(frozen=True)
class TargetAssignment:
    """Labels for the masked units of one view.

    unit_ids are atom indices (atom-level kinds) or motif indices
    (motif kind), ascending.  unknown_count says how many motif labels
    fell outside the vocabulary and were mapped to the reserved UNK id.
    """

    kind: str
    unit_ids: tuple[int, ...]
    labels: tuple[int, ...]
    label_space: int
    unknown_count: int = 0

    def __post_init__(self):
        if len(self.unit_ids) != len(self.labels):
            raise ValueError("one label per unit required")
        for label in self.labels:
            if not (0 <= label < self.label_space):
                raise ValueError(f"label {label} outside space {self.label_space}")


def atom_labels(graph: MolGraph) -> list[int]:
    """Atom-type label of every atom."""
    return [atom.atomic_number for atom in graph.atoms]


def motif_labels(
    graph: MolGraph, partition: MotifPartition, vocab: MotifVocab
) -> list[int]:
    """Vocabulary id of every motif; unknown signatures get the UNK id."""
    return [
        vocab.lookup(canonical_signature(graph, motif_atoms))
        for motif_atoms in partition.motifs
    ]


def argmax_labels(logits: np.ndarray) -> list[int]:
    """Argmax token per row; ties resolve to the lower token index."""
    if logits.ndim != 2:
        raise ShapeMismatch("logits must be a 2-d array (units x tokens)")
    return [int(i) for i in np.argmax(logits, axis=1)]


def vq_labels(
    embeddings: np.ndarray, codebook: np.ndarray, normalize: bool = False
) -> list[int]:
    """Nearest codebook row (Euclidean) per embedding row.

    Ties resolve to the lower code index.  Embeddings are used as given;
    normalize=True switches both sides to unit L2 norm first.
    """
    if embeddings.ndim != 2 or codebook.ndim != 2:
        raise ShapeMismatch("embeddings and codebook must be 2-d arrays")
    if embeddings.shape[1] != codebook.shape[1]:
        raise DimMismatch(
            f"embedding dim {embeddings.shape[1]} != codebook dim {codebook.shape[1]}"
        )
    emb = embeddings.astype(float)
    book = codebook.astype(float)
    if normalize:
        emb = emb / np.maximum(np.linalg.norm(emb, axis=1, keepdims=True), 1e-12)
        book = book / np.maximum(np.linalg.norm(book, axis=1, keepdims=True), 1e-12)
    # Squared distances suffice for the argmin and keep ties exact when
    # inputs are exactly symmetric.
    d2 = np.sum(emb * emb, axis=1, keepdims=True) - 2.0 * emb @ book.T + np.sum(book * book, axis=1)
    return [int(i) for i in np.argmin(d2, axis=1)]


def atom_type_targets(graph: MolGraph, plan: MaskPlan) -> TargetAssignment:
    """Atomic-number labels of the masked atoms."""
    labels = atom_labels(graph)
    return TargetAssignment(
        kind="atom_type",
        unit_ids=plan.masked_atoms,
        labels=tuple(labels[a] for a in plan.masked_atoms),
        label_space=ATOM_TYPE_SPACE,
    )


def _plan_motifs(partition: MotifPartition, plan: MaskPlan) -> tuple[int, ...]:
    if plan.masked_motifs:
        return plan.masked_motifs
    return tuple(sorted({partition.motif_of[a] for a in plan.masked_atoms}))


def motif_targets(
    graph: MolGraph,
    partition: MotifPartition,
    plan: MaskPlan,
    vocab: MotifVocab,
) -> TargetAssignment:
    """Vocabulary ids of the masked motifs.

    Motifs the vocabulary has never seen map to the reserved UNK id
    (vocab.size) and are tallied in unknown_count; analyses exclude UNK
    from information measures but report the tally.
    """
    motif_ids = _plan_motifs(partition, plan)
    labels = [
        vocab.lookup(canonical_signature(graph, partition.motifs[m])) for m in motif_ids
    ]
    return TargetAssignment(
        kind="motif",
        unit_ids=motif_ids,
        labels=tuple(labels),
        label_space=vocab.size + 1,
        unknown_count=sum(1 for lab in labels if lab == vocab.unk_id),
    )


def argmax_targets(graph: MolGraph, plan: MaskPlan, logits: np.ndarray) -> TargetAssignment:
    """Argmax-token labels of the masked atoms, from per-atom logits."""
    if logits.ndim != 2 or logits.shape[0] != graph.n_atoms:
        raise ShapeMismatch(
            f"logits must be (n_atoms={graph.n_atoms}, tokens), got {logits.shape}"
        )
    labels = argmax_labels(logits)
    return TargetAssignment(
        kind="argmax_token",
        unit_ids=plan.masked_atoms,
        labels=tuple(labels[a] for a in plan.masked_atoms),
        label_space=logits.shape[1],
    )


def vq_targets(
    graph: MolGraph,
    plan: MaskPlan,
    embeddings: np.ndarray,
    codebook: np.ndarray,
    normalize: bool = False,
) -> TargetAssignment:
    """Vector-quantized code labels of the masked atoms."""
    if embeddings.ndim != 2 or embeddings.shape[0] != graph.n_atoms:
        raise ShapeMismatch(
            f"embeddings must be (n_atoms={graph.n_atoms}, dim), got {embeddings.shape}"
        )
    labels = vq_labels(embeddings, codebook, normalize=normalize)
    return TargetAssignment(
        kind="vq_code",
        unit_ids=plan.masked_atoms,
        labels=tuple(labels[a] for a in plan.masked_atoms),
        label_space=codebook.shape[0],
    )


def load_codebook(path: str | Path) -> np.ndarray:
    """Read a codebook: CSV, one row per code vector, no header."""
    rows: list[list[float]] = []
    with open(path, newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ShapeMismatch(f"codebook line {line_no}: non-numeric cell") from exc
    if not rows:
        raise ShapeMismatch("codebook file is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ShapeMismatch("codebook rows have inconsistent width")
    return np.asarray(rows, dtype=float)


def load_embeddings(path: str | Path) -> dict[int, np.ndarray]:
    """Read per-atom embeddings keyed by graph.

    CSV rows are (graph_index, atom_index, v0, v1, ...); within each
    graph the atom indices must form 0..n-1 exactly once.  Returns
    {graph_index: (n_atoms, dim) array}.
    """
    by_graph: dict[int, list[tuple[int, list[float]]]] = {}
    width: Optional[int] = None
    with open(path, newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 3:
                raise ShapeMismatch(f"embeddings line {line_no}: too few columns")
            try:
                g = int(row[0])
                a = int(row[1])
                vec = [float(cell) for cell in row[2:]]
            except ValueError as exc:
                raise ShapeMismatch(f"embeddings line {line_no}: bad cell") from exc
            if width is None:
                width = len(vec)
            elif len(vec) != width:
                raise ShapeMismatch(f"embeddings line {line_no}: inconsistent width")
            by_graph.setdefault(g, []).append((a, vec))
    out: dict[int, np.ndarray] = {}
    for g, entries in by_graph.items():
        entries.sort(key=lambda pair: pair[0])
        indices = [a for a, _ in entries]
        if indices != list(range(len(entries))):
            raise ShapeMismatch(f"graph {g}: atom indices must cover 0..{len(entries)-1}")
        out[g] = np.asarray([vec for _, vec in entries], dtype=float)
    return out
