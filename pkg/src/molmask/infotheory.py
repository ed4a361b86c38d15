"""Plug-in information measures over (unit label, graph label) pairs.

Everything is empirical: probabilities are relative frequencies, with no
bias correction, and every logarithm is base 2, so all quantities come
out in bits.  The 0 * log 0 convention is 0 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptyCounts, EmptySupport
from .masking import PlanFn
from .molgraph import MolGraph

DEFAULT_TAUS = (1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001)


@dataclass
class JointCounts:
    """Contingency counts N(x, y) for an integer label X and binary Y."""

    x_space: str = ""
    counts: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, x: int, y: int, weight: int = 1) -> None:
        if y not in (0, 1):
            raise ValueError(f"graph label must be 0 or 1, got {y!r}")
        self.counts[(x, y)] = self.counts.get((x, y), 0) + weight

    def accumulate(self, pairs: Iterable[tuple[int, int]]) -> "JointCounts":
        for x, y in pairs:
            self.add(x, y)
        return self

    def merge(self, other: "JointCounts") -> "JointCounts":
        """Sum two count tables; commutative, so fan-out order is moot."""
        if self.x_space and other.x_space and self.x_space != other.x_space:
            raise ValueError(
                f"cannot merge label spaces {self.x_space!r} and {other.x_space!r}"
            )
        merged = JointCounts(x_space=self.x_space or other.x_space, counts=dict(self.counts))
        for key, value in other.counts.items():
            merged.counts[key] = merged.counts.get(key, 0) + value
        return merged

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], x_space: str = "") -> "JointCounts":
        return cls(x_space=x_space).accumulate(pairs)

    def table(self) -> tuple[list[int], np.ndarray]:
        """Sorted distinct x labels and the (|X|, 2) count matrix."""
        xs = sorted({x for x, _ in self.counts})
        mat = np.zeros((len(xs), 2), dtype=float)
        index = {x: i for i, x in enumerate(xs)}
        for (x, y), n in self.counts.items():
            mat[index[x], y] = n
        return xs, mat


def mutual_information(counts: JointCounts) -> float:
    """Plug-in mutual information I(X; Y) in bits.

    Sum of p(x,y) * log2(p(x,y) / (p(x) p(y))) over observed cells; zero
    cells contribute nothing.  Raises EmptyCounts on an empty table.
    """
    total = counts.total
    if total == 0:
        raise EmptyCounts("mutual information of zero observations")
    _, mat = counts.table()
    p = mat / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    mi = float(np.sum(p[mask] * np.log2(p[mask] / (px @ py)[mask])))
    # The analytic value is nonnegative; clear rounding dust.
    return max(mi, 0.0)


def entropy_y(counts: JointCounts) -> float:
    """Entropy of the binary graph label, in bits."""
    total = counts.total
    if total == 0:
        raise EmptyCounts("entropy of zero observations")
    _, mat = counts.table()
    py = mat.sum(axis=0) / total
    return float(-sum(q * math.log2(q) for q in py if q > 0))


def relative_gain(mi: float, h_y: float) -> float:
    """MI as a fraction of the label entropy; NaN when H(Y) = 0."""
    if h_y <= 0.0:
        return float("nan")
    return mi / h_y


@dataclass(frozen=True)
class SampledMi:
    """Monte-Carlo MI estimate over several seeded repeats."""

    mean: float
    std: float
    per_repeat: tuple[float, ...]
    n_pairs: int


def sample_pairs_for_graph(
    graph: MolGraph,
    graph_index: int,
    labels: Sequence[int],
    y: int,
    plan_fn: PlanFn,
    repeats: int,
    seed: int,
    samples_per_graph: Optional[int] = None,
    unique_nodes: bool = False,
) -> list[list[tuple[int, int]]]:
    """Draw one graph's (x, y) samples for every repeat.

    The generator for (repeat r, graph g) is derived from the seed by
    value, never by schedule, so any partitioning of the corpus across
    workers reproduces the same samples.  One sample = one fresh mask
    plan from which a single masked atom is picked uniformly, so samples
    follow the strategy's true inclusion marginal.
    """
    budget = graph.n_atoms if samples_per_graph is None else samples_per_graph
    out: list[list[tuple[int, int]]] = []
    for r in range(repeats):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(r, graph_index))
        )
        taken: set[int] = set()
        pairs: list[tuple[int, int]] = []
        for _ in range(budget):
            atom = _draw_atom(graph, graph_index, plan_fn, rng, taken if unique_nodes else None)
            if atom is None:
                break
            if unique_nodes:
                taken.add(atom)
            pairs.append((labels[atom], y))
        out.append(pairs)
    return out


def sampled_mi(
    graphs: Sequence[MolGraph],
    labels_by_graph: Sequence[Sequence[int]],
    y_by_graph: Sequence[int],
    plan_fn: PlanFn,
    repeats: int = 5,
    seed: int = 0,
    samples_per_graph: Optional[int] = None,
    unique_nodes: bool = False,
    x_space: str = "",
) -> SampledMi:
    """Estimate MI by sampling atoms under a masking strategy.

    Each repeat draws, for every graph, ``samples_per_graph`` atoms
    (default: the graph's atom count).  Draws are independent (with
    replacement); unique_nodes=True instead rejects already-sampled
    atoms, falling back to an unsampled atom after 100 tries.  The
    spread over repeats is the sample standard deviation.
    """
    if not (len(graphs) == len(labels_by_graph) == len(y_by_graph)):
        raise ValueError("graphs, labels, and y must align")
    per_repeat_joint = [JointCounts(x_space=x_space) for _ in range(repeats)]
    for g, graph in enumerate(graphs):
        repeat_pairs = sample_pairs_for_graph(
            graph, g, labels_by_graph[g], y_by_graph[g], plan_fn,
            repeats, seed, samples_per_graph, unique_nodes,
        )
        for r, pairs in enumerate(repeat_pairs):
            per_repeat_joint[r].accumulate(pairs)
    estimates = [mutual_information(joint) for joint in per_repeat_joint]
    mean = float(np.mean(estimates))
    std = float(np.std(estimates, ddof=1)) if repeats > 1 else 0.0
    return SampledMi(
        mean=mean,
        std=std,
        per_repeat=tuple(estimates),
        n_pairs=per_repeat_joint[0].total if per_repeat_joint else 0,
    )


def _draw_atom(
    graph: MolGraph,
    graph_index: int,
    plan_fn: PlanFn,
    rng: np.random.Generator,
    exclude: Optional[set[int]],
) -> Optional[int]:
    """One atom from one fresh mask plan; uniform among the plan's atoms."""
    for _ in range(100):
        plan = plan_fn(graph, graph_index, rng)
        atoms = plan.masked_atoms
        pick = atoms[int(rng.integers(len(atoms)))]
        if exclude is None or pick not in exclude:
            return pick
    if exclude is not None:
        remaining = [a for a in range(graph.n_atoms) if a not in exclude]
        if remaining:
            return remaining[int(rng.integers(len(remaining)))]
    return None


def low_freq_conditionals(
    counts: JointCounts, tau: float
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Class conditionals restricted to labels with marginal P(x) < tau.

    Returns (p for y=0, p for y=1, kept labels sorted).  Raises
    EmptySupport when no label qualifies or either class has zero mass
    on the qualifying set.
    """
    total = counts.total
    if total == 0:
        raise EmptyCounts("conditionals of zero observations")
    xs, mat = counts.table()
    marginal = mat.sum(axis=1) / total
    keep = marginal < tau
    if not keep.any():
        raise EmptySupport(f"no label has marginal below {tau}")
    sub = mat[keep]
    mass = sub.sum(axis=0)
    if mass[0] == 0 or mass[1] == 0:
        raise EmptySupport(f"a class has no mass on labels below {tau}")
    kept_labels = [x for x, flag in zip(xs, keep) if flag]
    return sub[:, 0] / mass[0], sub[:, 1] / mass[1], kept_labels


def jsd(p: np.ndarray, q: np.ndarray) -> float:
    """Jensen-Shannon divergence in bits; 0 for identical distributions,
    1 for disjoint supports."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share a support")
    m = 0.5 * (p + q)

    def kl(a: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / m[mask])))

    value = 0.5 * kl(p) + 0.5 * kl(q)
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class JsdCurve:
    """JSD of low-frequency conditionals across a threshold grid.

    Points where the conditionals are undefined (empty qualifying set or
    a massless class) carry NaN and defined=False.
    """

    taus: tuple[float, ...]
    values: tuple[float, ...]
    labels_kept: tuple[int, ...]
    defined: tuple[bool, ...]


def jsd_curve(counts: JointCounts, taus: Sequence[float] = DEFAULT_TAUS) -> JsdCurve:
    """Evaluate the low-frequency JSD at each threshold, largest first."""
    ordered = sorted(taus, reverse=True)
    values: list[float] = []
    kept: list[int] = []
    defined: list[bool] = []
    for tau in ordered:
        try:
            p0, p1, labels = low_freq_conditionals(counts, tau)
        except EmptySupport:
            values.append(float("nan"))
            kept.append(_count_below(counts, tau))
            defined.append(False)
            continue
        values.append(jsd(p0, p1))
        kept.append(len(labels))
        defined.append(True)
    return JsdCurve(
        taus=tuple(ordered),
        values=tuple(values),
        labels_kept=tuple(kept),
        defined=tuple(defined),
    )


def _count_below(counts: JointCounts, tau: float) -> int:
    total = counts.total
    xs, mat = counts.table()
    marginal = mat.sum(axis=1) / total
    return int(np.sum(marginal < tau))


@dataclass(frozen=True)
class ShuffleResult:
    """MI after destroying the X-Y pairing, over several permutations."""

    mean: float
    std: float
    per_repeat: tuple[float, ...]


def shuffle_control(
    pairs: Sequence[tuple[int, int]],
    repeats: int = 5,
    seed: int = 0,
    x_space: str = "",
) -> ShuffleResult:
    """Permute the unit labels across the corpus, keeping Y fixed, and
    recompute MI.  What survives is finite-sample bias, not signal."""
    if not pairs:
        raise EmptyCounts("shuffle control of zero observations")
    xs = [x for x, _ in pairs]
    ys = [y for _, y in pairs]
    estimates = []
    for r in range(repeats):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        perm = rng.permutation(len(xs))
        joint = JointCounts(x_space=x_space)
        for i, y in enumerate(ys):
            joint.add(xs[int(perm[i])], y)
        estimates.append(mutual_information(joint))
    mean = float(np.mean(estimates))
    std = float(np.std(estimates, ddof=1)) if repeats > 1 else 0.0
    return ShuffleResult(mean=mean, std=std, per_repeat=tuple(estimates))
