"""Motif decomposition, canonical motif signatures, and vocabularies.

Decomposition severs acyclic single bonds at fragment boundaries (rule
in ``decompose``); the resulting connected components are the motifs.
Signatures come from iterative color refinement with a bounded
exhaustive tie-break, so isomorphic motifs map to the same string no
matter which molecule or atom order produced them.
"""

from __future__ import annotations

import itertools
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DisconnectedMotif
from .molgraph import SINGLE, MolGraph

# Exhaustive tie-break budget: orderings beyond this fall back to a
# refinement-class emission that is coarser but still order-invariant.
_TIE_BREAK_LIMIT = 8

_ORDER_CHAR = {"single": "-", "double": "=", "triple": "#", "aromatic": ":"}


@dataclass(frozen=True)
class MotifPartition:
    """A partition of one graph's atoms into motifs.

    motifs[i] is a tuple of atom indices in ascending order; every atom
    belongs to exactly one motif; cut_bonds are the severed bond index
    pairs (u < v).
    """

    motifs: tuple[tuple[int, ...], ...]
    cut_bonds: tuple[tuple[int, int], ...]
    motif_of: tuple[int, ...]

    @property
    def n_motifs(self) -> int:
        return len(self.motifs)


@dataclass(frozen=True)
class MotifVocab:
    """Signature -> dense id mapping, ids 0..size-1 by descending count.

    Ties in count break lexicographically on the signature string, which
    makes the mapping independent of corpus order.
    """

    ids: dict[str, int]
    counts: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.ids)

    @property
    def unk_id(self) -> int:
        """Reserved id for motifs outside the vocabulary."""
        return len(self.ids)

    def lookup(self, signature: str) -> int:
        return self.ids.get(signature, self.unk_id)


@dataclass(frozen=True)
class CoverageStats:
    """How well a pretraining vocabulary covers a downstream corpus."""

    overlap_ratio: float
    per_graph_r: tuple[float, ...]
    mean_r: float
    median_r: float
    pct_r_ge_080: float
    pct_r_le_020: float


def decompose(graph: MolGraph) -> MotifPartition:
    """Split a molecule into motifs.

    Two kinds of acyclic single bonds are severed: bonds with at least
    one endpoint on a ring, and bonds whose two endpoints each have at
    least two further neighbors (junctions between branching atoms).
    Ring systems stay intact because ring bonds are never cut; plain
    chains stay intact because terminal bonds have a degree-1 endpoint
    and interior chain atoms have only one further neighbor each.
    """
    cut: list[tuple[int, int]] = []
    for bond in graph.bonds:
        if bond.in_ring or bond.order != SINGLE:
            continue
        u, v = bond.endpoints
        if graph.atoms[u].in_ring or graph.atoms[v].in_ring:
            cut.append(bond.endpoints)
        elif graph.degree(u) >= 3 and graph.degree(v) >= 3:
            cut.append(bond.endpoints)

    cut_set = set(cut)
    # Connected components of the graph minus the cut bonds.
    motif_of = [-1] * graph.n_atoms
    motifs: list[tuple[int, ...]] = []
    for start in range(graph.n_atoms):
        if motif_of[start] != -1:
            continue
        label = len(motifs)
        component = []
        stack = [start]
        motif_of[start] = label
        while stack:
            node = stack.pop()
            component.append(node)
            for nb in graph.adjacency[node]:
                key = (node, nb) if node < nb else (nb, node)
                if key in cut_set or motif_of[nb] != -1:
                    continue
                motif_of[nb] = label
                stack.append(nb)
        motifs.append(tuple(sorted(component)))
    return MotifPartition(
        motifs=tuple(motifs),
        cut_bonds=tuple(sorted(cut)),
        motif_of=tuple(motif_of),
    )


def motif_adjacency(graph: MolGraph, partition: MotifPartition) -> tuple[tuple[int, ...], ...]:
    """Neighbor motifs of each motif; two motifs are adjacent when a cut
    bond joins them."""
    neighbors: list[set[int]] = [set() for _ in partition.motifs]
    for u, v in partition.cut_bonds:
        mu, mv = partition.motif_of[u], partition.motif_of[v]
        if mu != mv:
            neighbors[mu].add(mv)
            neighbors[mv].add(mu)
    return tuple(tuple(sorted(ns)) for ns in neighbors)


def _refine_colors(
    nodes: Sequence[int],
    attrs: dict[int, tuple],
    edges: dict[int, list[tuple[int, str]]],
) -> dict[int, int]:
    """Iterative color refinement; returns canonical dense colors.

    Colors are assigned each round by sorting signature tuples, so two
    isomorphic inputs end with identical color assignments.
    """
    palette = {node: attrs[node] for node in nodes}
    ranks = {sig: i for i, sig in enumerate(sorted(set(palette.values())))}
    colors = {node: ranks[palette[node]] for node in nodes}
    n_classes = len(ranks)
    while True:
        sigs = {
            node: (colors[node], tuple(sorted((order, colors[nb]) for nb, order in edges[node])))
            for node in nodes
        }
        ranks = {sig: i for i, sig in enumerate(sorted(set(sigs.values())))}
        new_colors = {node: ranks[sigs[node]] for node in nodes}
        if len(ranks) == n_classes:
            return new_colors
        n_classes = len(ranks)
        colors = new_colors


def canonical_signature(graph: MolGraph, atoms: Iterable[int]) -> str:
    """Canonical string for the subgraph induced by ``atoms``.

    Raises DisconnectedMotif when the induced subgraph is not connected.
    Relabeling the molecule's atoms never changes the signature; for
    subgraphs whose symmetry exceeds the tie-break budget the emission
    collapses to refinement classes, which stays order-invariant but may
    merge some rare non-isomorphic pairs.
    """
    node_list = sorted(set(atoms))
    if not node_list:
        raise DisconnectedMotif("empty atom set has no signature")
    node_set = set(node_list)
    for i in node_list:
        if not (0 <= i < graph.n_atoms):
            raise DisconnectedMotif(f"atom index {i} outside graph")

    edges: dict[int, list[tuple[int, str]]] = {i: [] for i in node_list}
    edge_list: list[tuple[int, int, str]] = []
    for bond in graph.bonds:
        if bond.u in node_set and bond.v in node_set:
            edges[bond.u].append((bond.v, bond.order))
            edges[bond.v].append((bond.u, bond.order))
            edge_list.append((bond.u, bond.v, bond.order))

    # Connectivity check over the induced subgraph.
    seen = {node_list[0]}
    stack = [node_list[0]]
    while stack:
        node = stack.pop()
        for nb, _ in edges[node]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if seen != node_set:
        raise DisconnectedMotif("atom set induces a disconnected subgraph")

    attrs = {
        i: (graph.atoms[i].atomic_number, graph.atoms[i].aromatic) for i in node_list
    }
    colors = _refine_colors(node_list, attrs, edges)

    classes: dict[int, list[int]] = {}
    for node in node_list:
        classes.setdefault(colors[node], []).append(node)
    class_order = sorted(classes)

    def class_attr(color: int) -> str:
        z, arom = attrs[classes[color][0]]
        return f"{z}{'a' if arom else ''}"

    n_orderings = 1
    for color in class_order:
        n_orderings *= _factorial_capped(len(classes[color]))
        if n_orderings > _TIE_BREAK_LIMIT:
            break

    if n_orderings <= _TIE_BREAK_LIMIT:
        # Exhaustive tie-break: try every ordering consistent with the
        # refinement classes, keep the lexicographically smallest string.
        best = None
        pools = [classes[color] for color in class_order]
        for perm_combo in itertools.product(*(itertools.permutations(p) for p in pools)):
            position = {}
            flat = [node for pool in perm_combo for node in pool]
            for pos, node in enumerate(flat):
                position[node] = pos
            node_part = ",".join(
                f"{attrs[node][0]}{'a' if attrs[node][1] else ''}" for node in flat
            )
            edge_part = ";".join(
                sorted(
                    "{}-{}{}".format(
                        min(position[u], position[v]),
                        max(position[u], position[v]),
                        _ORDER_CHAR[order],
                    )
                    for u, v, order in edge_list
                )
            )
            candidate = f"{len(node_list)}|{node_part}|{edge_part}"
            if best is None or candidate < best:
                best = candidate
        return best

    # Fallback: emit refinement classes and the edge multiset between
    # them.  Depends only on the refined partition, never on atom order.
    node_part = ",".join(
        f"{len(classes[color])}x{class_attr(color)}" for color in class_order
    )
    edge_counts: dict[tuple[int, int, str], int] = {}
    for u, v, order in edge_list:
        cu, cv = colors[u], colors[v]
        key = (min(cu, cv), max(cu, cv), order)
        edge_counts[key] = edge_counts.get(key, 0) + 1
    edge_part = ";".join(
        f"{cu}~{cv}{_ORDER_CHAR[order]}x{count}"
        for (cu, cv, order), count in sorted(edge_counts.items())
    )
    return f"{len(node_list)}|cls:{node_part}|{edge_part}"


def _factorial_capped(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
        if out > _TIE_BREAK_LIMIT:
            return out
    return out


def motif_signatures(graph: MolGraph, partition: MotifPartition | None = None) -> list[str]:
    """Signatures of every motif of a graph, in motif index order."""
    if partition is None:
        partition = decompose(graph)
    return [canonical_signature(graph, motif) for motif in partition.motifs]


def build_vocab(graphs: Iterable[MolGraph]) -> MotifVocab:
    """Count motif signatures over a corpus and assign dense ids.

    Ids go to frequent signatures first; equal counts order by signature
    string, so any corpus ordering yields the same vocabulary.
    """
    counts: dict[str, int] = {}
    for graph in graphs:
        for sig in motif_signatures(graph):
            counts[sig] = counts.get(sig, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ids = {sig: i for i, (sig, _) in enumerate(ranked)}
    return MotifVocab(ids=ids, counts=dict(counts))


def coverage(vocab: MotifVocab, graphs: Iterable[MolGraph]) -> CoverageStats:
    """Coverage of a downstream corpus by a pretraining vocabulary.

    overlap_ratio is the fraction of the downstream corpus's distinct
    signatures present in the vocabulary; r(G) is the per-graph fraction
    of motif occurrences whose signature the vocabulary knows.
    """
    if vocab.size == 0:
        raise ValueError("coverage needs a non-empty vocabulary")
    downstream_sigs: set[str] = set()
    per_graph_r: list[float] = []
    for graph in graphs:
        sigs = motif_signatures(graph)
        downstream_sigs.update(sigs)
        known = sum(1 for sig in sigs if sig in vocab.ids)
        per_graph_r.append(known / len(sigs))
    if not per_graph_r:
        raise ValueError("coverage needs at least one downstream graph")
    overlap = len(downstream_sigs & set(vocab.ids)) / len(downstream_sigs)
    rs = per_graph_r
    return CoverageStats(
        overlap_ratio=overlap,
        per_graph_r=tuple(rs),
        mean_r=sum(rs) / len(rs),
        median_r=statistics.median(rs),
        pct_r_ge_080=100.0 * sum(1 for r in rs if r >= 0.8) / len(rs),
        pct_r_le_020=100.0 * sum(1 for r in rs if r <= 0.2) / len(rs),
    )
