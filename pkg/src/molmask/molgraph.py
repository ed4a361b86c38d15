"""Molecular graphs parsed from a SMILES subset.

The parser covers the organic subset (B, C, N, O, P, S, F, Cl, Br, I),
bracket atoms with charge and explicit hydrogen counts, bond symbols
``- = # :``, branches, ring closures (single digits and ``%nn``), and
aromatic lowercase atoms.  Stereo markers (``/ \\ @ @@``) and isotope
prefixes are parsed and discarded.  Hydrogens are never materialized as
nodes: every graph is a heavy-atom graph.  No valence model and no
kekulization; aromaticity is purely syntactic.

Graphs are immutable.  Ring membership is decided by bridge detection:
a bond is acyclic if and only if it is a bridge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    MultiFragment,
    UnbalancedParen,
    UnclosedRing,
    UnknownToken,
)

# Atoms the parser may emit.  0 is the unknown-element label; 119 is the
# mask sentinel applied by the masking stage, never produced by parsing.
UNKNOWN_ELEMENT = 0
MASK_SENTINEL = 119

SINGLE = "single"
DOUBLE = "double"
TRIPLE = "triple"
AROMATIC = "aromatic"
BOND_ORDERS = (SINGLE, DOUBLE, TRIPLE, AROMATIC)

_BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}

# Symbol -> atomic number for the full periodic table; bracket atoms with
# symbols not found here parse to atomic number 0 (unknown).
PERIODIC_TABLE = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Sc": 21, "Ti": 22,
    "V": 23, "Cr": 24, "Mn": 25, "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29,
    "Zn": 30, "Ga": 31, "Ge": 32, "As": 33, "Se": 34, "Br": 35, "Kr": 36,
    "Rb": 37, "Sr": 38, "Y": 39, "Zr": 40, "Nb": 41, "Mo": 42, "Tc": 43,
    "Ru": 44, "Rh": 45, "Pd": 46, "Ag": 47, "Cd": 48, "In": 49, "Sn": 50,
    "Sb": 51, "Te": 52, "I": 53, "Xe": 54, "Cs": 55, "Ba": 56, "La": 57,
    "Ce": 58, "Pr": 59, "Nd": 60, "Pm": 61, "Sm": 62, "Eu": 63, "Gd": 64,
    "Tb": 65, "Dy": 66, "Ho": 67, "Er": 68, "Tm": 69, "Yb": 70, "Lu": 71,
    "Hf": 72, "Ta": 73, "W": 74, "Re": 75, "Os": 76, "Ir": 77, "Pt": 78,
    "Au": 79, "Hg": 80, "Tl": 81, "Pb": 82, "Bi": 83, "Po": 84, "At": 85,
    "Rn": 86, "Fr": 87, "Ra": 88, "Ac": 89, "Th": 90, "Pa": 91, "U": 92,
    "Np": 93, "Pu": 94, "Am": 95, "Cm": 96, "Bk": 97, "Cf": 98, "Es": 99,
    "Fm": 100, "Md": 101, "No": 102, "Lr": 103, "Rf": 104, "Db": 105,
    "Sg": 106, "Bh": 107, "Hs": 108, "Mt": 109, "Ds": 110, "Rg": 111,
    "Cn": 112, "Nh": 113, "Fl": 114, "Mc": 115, "Lv": 116, "Ts": 117,
    "Og": 118,
}

SYMBOL_BY_NUMBER = {z: sym for sym, z in PERIODIC_TABLE.items()}

# Bare (unbracketed) atoms allowed by the subset grammar.
_ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
_AROMATIC_ORGANIC = {"b", "c", "n", "o", "p", "s"}


@dataclass(frozen=True)
class Atom:
    """One heavy atom.  atomic_number 0 means unknown element; 119 is the
    mask sentinel and never comes out of the parser."""

    index: int
    atomic_number: int
    aromatic: bool = False
    formal_charge: int = 0
    in_ring: bool = False

    def __post_init__(self):
        if not (0 <= self.atomic_number <= MASK_SENTINEL):
            raise ValueError(f"atomic_number {self.atomic_number} out of range")


@dataclass(frozen=True)
class Bond:
    """Undirected bond between two distinct atoms, stored with u < v."""

    u: int
    v: int
    order: str
    in_ring: bool = False

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError("bond endpoints must be distinct")
        if self.u > self.v:
            raise ValueError("bond endpoints must be stored low index first")
        if self.order not in BOND_ORDERS:
            raise ValueError(f"unknown bond order {self.order!r}")

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)


@dataclass(frozen=True)
class MolGraph:
    """Immutable heavy-atom molecular graph.

    adjacency[i] lists the neighbors of atom i in ascending order; it is
    always consistent with bonds.  Graphs have at least one atom and no
    duplicate bonds.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    adjacency: tuple[tuple[int, ...], ...]
    source_smiles: str = ""

    def __post_init__(self):
        n = len(self.atoms)
        if n == 0:
            raise ValueError("a molecular graph needs at least one atom")
        if len(self.adjacency) != n:
            raise ValueError("adjacency length must equal atom count")
        seen = set()
        for bond in self.bonds:
            if not (0 <= bond.u < n and 0 <= bond.v < n):
                raise ValueError("bond endpoint out of range")
            if bond.endpoints in seen:
                raise ValueError(f"duplicate bond {bond.endpoints}")
            seen.add(bond.endpoints)
        rebuilt = [[] for _ in range(n)]
        for bond in self.bonds:
            rebuilt[bond.u].append(bond.v)
            rebuilt[bond.v].append(bond.u)
        if tuple(tuple(sorted(nb)) for nb in rebuilt) != self.adjacency:
            raise ValueError("adjacency inconsistent with bond list")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    @property
    def is_singleton(self) -> bool:
        """Single-atom molecules parse fine but analysis stages skip them."""
        return len(self.atoms) == 1

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def bond_between(self, u: int, v: int) -> Optional[Bond]:
        key = (u, v) if u < v else (v, u)
        for bond in self.bonds:
            if bond.endpoints == key:
                return bond
        return None


@dataclass(frozen=True)
class LabeledRecord:
    """A graph plus optional binary task labels (None = missing)."""

    graph: MolGraph
    task_labels: tuple[Optional[int], ...] = ()
    active_task: int = 0

    def __post_init__(self):
        for value in self.task_labels:
            if value is not None and value not in (0, 1):
                raise ValueError(f"task label {value!r} is not binary")
        if self.task_labels and not (0 <= self.active_task < len(self.task_labels)):
            raise ValueError("active_task out of range")

    @property
    def label(self) -> Optional[int]:
        if not self.task_labels:
            return None
        return self.task_labels[self.active_task]


def _find_bridges(n_atoms: int, edges: Sequence[tuple[int, int]]) -> list[bool]:
    """Flag each edge as a bridge using an iterative low-link traversal.

    Parallel edges cannot occur here (duplicate bonds are rejected), so
    tracking the parent edge index is enough to avoid revisiting it.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for idx, (u, v) in enumerate(edges):
        adj[u].append((v, idx))
        adj[v].append((u, idx))

    disc = [-1] * n_atoms
    low = [0] * n_atoms
    is_bridge = [False] * len(edges)
    timer = 0

    for root in range(n_atoms):
        if disc[root] != -1:
            continue
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            node, parent_edge, ptr = stack.pop()
            if ptr < len(adj[node]):
                stack.append((node, parent_edge, ptr + 1))
                nxt, edge_idx = adj[node][ptr]
                if edge_idx == parent_edge:
                    continue
                if disc[nxt] == -1:
                    disc[nxt] = low[nxt] = timer
                    timer += 1
                    stack.append((nxt, edge_idx, 0))
                else:
                    low[node] = min(low[node], disc[nxt])
            elif parent_edge != -1:
                u, v = edges[parent_edge]
                parent = u if disc[u] < disc[v] else v
                child = v if parent == u else u
                low[parent] = min(low[parent], low[child])
                if low[child] > disc[parent]:
                    is_bridge[parent_edge] = True
    return is_bridge


def ring_membership(graph: MolGraph) -> tuple[tuple[bool, ...], tuple[bool, ...]]:
    """Per-atom and per-bond ring flags.

    A bond lies on a ring exactly when it is not a bridge; an atom lies on
    a ring exactly when at least one incident bond does.
    """
    edges = [bond.endpoints for bond in graph.bonds]
    bridges = _find_bridges(graph.n_atoms, edges)
    bond_flags = tuple(not b for b in bridges)
    atom_flags = [False] * graph.n_atoms
    for bond, in_ring in zip(graph.bonds, bond_flags):
        if in_ring:
            atom_flags[bond.u] = True
            atom_flags[bond.v] = True
    return tuple(atom_flags), bond_flags


class _RawAtom:
    __slots__ = ("atomic_number", "aromatic", "charge")

    def __init__(self, atomic_number: int, aromatic: bool, charge: int):
        self.atomic_number = atomic_number
        self.aromatic = aromatic
        self.charge = charge


def _parse_bracket(smiles: str, start: int) -> tuple[_RawAtom, int]:
    """Parse a bracket atom starting at ``[``; returns the atom and the
    index just past the closing bracket."""
    end = smiles.find("]", start)
    if end == -1:
        raise UnknownToken("unterminated bracket atom", smiles, start)
    body = smiles[start + 1 : end]
    i = 0
    # Isotope prefix: parsed, then dropped.
    while i < len(body) and body[i].isdigit():
        i += 1
    sym_start = i
    if i < len(body) and body[i].isalpha():
        i += 1
        if i < len(body) and body[i].islower():
            i += 1
    symbol = body[sym_start:i]
    if not symbol:
        raise UnknownToken("bracket atom without element symbol", smiles, start)
    aromatic = symbol[0].islower()
    atomic_number = PERIODIC_TABLE.get(symbol.capitalize(), UNKNOWN_ELEMENT)
    # "H" inside the symbol position is a real (explicit) hydrogen atom;
    # an H *suffix* after another element is a hydrogen count.
    charge = 0
    while i < len(body):
        ch = body[i]
        if ch == "@":
            i += 1  # chirality marker, discarded
        elif ch == "H":
            i += 1
            while i < len(body) and body[i].isdigit():
                i += 1  # explicit hydrogen count, discarded
        elif ch in "+-":
            sign = 1 if ch == "+" else -1
            i += 1
            if i < len(body) and body[i].isdigit():
                num_start = i
                while i < len(body) and body[i].isdigit():
                    i += 1
                charge = sign * int(body[num_start:i])
            else:
                charge = sign
                while i < len(body) and body[i] == ch:
                    charge += sign
                    i += 1
        elif ch == ":":
            i += 1
            num_start = i
            while i < len(body) and body[i].isdigit():
                i += 1
            if i == num_start:
                raise UnknownToken("atom class without digits", smiles, start)
        else:
            raise UnknownToken(f"unexpected {ch!r} in bracket atom", smiles, start)
    return _RawAtom(atomic_number, aromatic, charge), end + 1


def parse_smiles(smiles: str) -> MolGraph:
    """Parse one SMILES string into a MolGraph.

    Raises UnknownToken, UnclosedRing, UnbalancedParen, or MultiFragment
    on malformed input.  Dots are rejected: one connected fragment per
    string.  Unknown element symbols in brackets parse to atomic number 0.
    """
    text = smiles.strip()
    if not text:
        raise UnknownToken("empty SMILES string", smiles, 0)

    raw_atoms: list[_RawAtom] = []
    # (u, v, explicit order or None); default orders resolved after ring
    # perception because aromaticity of a default bond depends on it.
    raw_bonds: list[list] = []
    bond_keys: set[tuple[int, int]] = set()
    prev_atom: Optional[int] = None
    pending_bond: Optional[str] = None
    branch_stack: list[Optional[int]] = []
    ring_map: dict[str, tuple[int, Optional[str], int]] = {}

    def add_bond(u: int, v: int, order: Optional[str], pos: int) -> None:
        if u == v:
            raise UnknownToken("ring closure bonds an atom to itself", text, pos)
        key = (u, v) if u < v else (v, u)
        if key in bond_keys:
            raise UnknownToken("duplicate bond between one atom pair", text, pos)
        bond_keys.add(key)
        raw_bonds.append([key[0], key[1], order])

    def add_atom(atom: _RawAtom, pos: int) -> None:
        nonlocal prev_atom, pending_bond
        raw_atoms.append(atom)
        idx = len(raw_atoms) - 1
        if prev_atom is not None:
            add_bond(prev_atom, idx, pending_bond, pos)
        elif pending_bond is not None:
            raise UnknownToken("bond symbol before any atom", text, pos)
        pending_bond = None
        prev_atom = idx

    def close_or_open_ring(label: str, pos: int) -> None:
        nonlocal pending_bond
        if prev_atom is None:
            raise UnknownToken("ring closure before any atom", text, pos)
        if label in ring_map:
            partner, open_order, _ = ring_map.pop(label)
            order = pending_bond if pending_bond is not None else open_order
            add_bond(partner, prev_atom, order, pos)
        else:
            ring_map[label] = (prev_atom, pending_bond, pos)
        pending_bond = None

    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "[":
            atom, i = _parse_bracket(text, i)
            add_atom(atom, i)
        elif text[i : i + 2] in ("Cl", "Br"):
            add_atom(_RawAtom(PERIODIC_TABLE[text[i : i + 2]], False, 0), i)
            i += 2
        elif ch in _ORGANIC:
            add_atom(_RawAtom(PERIODIC_TABLE[ch], False, 0), i)
            i += 1
        elif ch in _AROMATIC_ORGANIC:
            add_atom(_RawAtom(PERIODIC_TABLE[ch.upper()], True, 0), i)
            i += 1
        elif ch in _BOND_SYMBOLS:
            if pending_bond is not None:
                raise UnknownToken("two bond symbols in a row", text, i)
            pending_bond = _BOND_SYMBOLS[ch]
            i += 1
        elif ch in "/\\":
            i += 1  # cis/trans marker: treated as a default bond
        elif ch.isdigit():
            close_or_open_ring(ch, i)
            i += 1
        elif ch == "%":
            label = text[i + 1 : i + 3]
            if len(label) < 2 or not label.isdigit():
                raise UnknownToken("%% ring label needs two digits", text, i)
            close_or_open_ring(label, i)
            i += 3
        elif ch == "(":
            if prev_atom is None or pending_bond is not None:
                raise UnbalancedParen("branch opened in an illegal position", text, i)
            branch_stack.append(prev_atom)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise UnbalancedParen("branch closed without matching open", text, i)
            if pending_bond is not None:
                raise UnknownToken("dangling bond symbol before ')'", text, i)
            prev_atom = branch_stack.pop()
            i += 1
        elif ch == ".":
            raise MultiFragment("multi-fragment SMILES are not supported", text, i)
        else:
            raise UnknownToken(f"unrecognized character {ch!r}", text, i)

    if not raw_atoms:
        raise UnknownToken("SMILES contains no atoms", text, 0)
    if pending_bond is not None:
        raise UnknownToken("trailing bond symbol", text, len(text) - 1)
    if branch_stack:
        raise UnbalancedParen("unclosed branch parenthesis", text, len(text) - 1)
    if ring_map:
        label, (_, _, pos) = next(iter(ring_map.items()))
        raise UnclosedRing(f"ring label {label} never closed", text, pos)

    n = len(raw_atoms)
    edges = [(b[0], b[1]) for b in raw_bonds]
    bridges = _find_bridges(n, edges)

    bonds = []
    atom_in_ring = [False] * n
    for (u, v, order), bridge in zip(raw_bonds, bridges):
        if order is None:
            # Default order: aromatic only for ring bonds between two
            # aromatic atoms, single everywhere else.
            both_aromatic = raw_atoms[u].aromatic and raw_atoms[v].aromatic
            order = AROMATIC if (both_aromatic and not bridge) else SINGLE
        bonds.append(Bond(u, v, order, in_ring=not bridge))
        if not bridge:
            atom_in_ring[u] = True
            atom_in_ring[v] = True

    atoms = tuple(
        Atom(
            index=i,
            atomic_number=raw.atomic_number,
            aromatic=raw.aromatic,
            formal_charge=raw.charge,
            in_ring=atom_in_ring[i],
        )
        for i, raw in enumerate(raw_atoms)
    )
    adjacency = [[] for _ in range(n)]
    for bond in bonds:
        adjacency[bond.u].append(bond.v)
        adjacency[bond.v].append(bond.u)
    return MolGraph(
        atoms=atoms,
        bonds=tuple(bonds),
        adjacency=tuple(tuple(sorted(nb)) for nb in adjacency),
        source_smiles=smiles,
    )


def _atom_token(atom: Atom) -> str:
    z = atom.atomic_number
    symbol = SYMBOL_BY_NUMBER.get(z)
    if symbol is None:
        return "[Xx]"  # unknown element or mask sentinel
    if atom.formal_charge == 0:
        if atom.aromatic and symbol.lower() in _AROMATIC_ORGANIC:
            return symbol.lower()
        if not atom.aromatic and symbol in _ORGANIC:
            return symbol
    body = symbol.lower() if atom.aromatic else symbol
    charge = atom.formal_charge
    if charge == 0:
        suffix = ""
    elif charge == 1:
        suffix = "+"
    elif charge == -1:
        suffix = "-"
    else:
        suffix = f"{'+' if charge > 0 else '-'}{abs(charge)}"
    return f"[{body}{suffix}]"


def _bond_token(bond: Bond, atoms: tuple[Atom, ...]) -> str:
    both_aromatic = atoms[bond.u].aromatic and atoms[bond.v].aromatic
    if bond.order == SINGLE:
        # Explicit when a default would re-resolve to aromatic.
        return "-" if both_aromatic else ""
    if bond.order == DOUBLE:
        return "="
    if bond.order == TRIPLE:
        return "#"
    # Aromatic: implicit only where the default rule reproduces it.
    if both_aromatic and bond.in_ring:
        return ""
    return ":"


def write_smiles(graph: MolGraph) -> str:
    """Emit a SMILES string that re-parses to an isomorphic graph.

    Output is one deterministic spanning-tree emission, not a canonical
    form.  Atoms with no element symbol (unknown 0, mask sentinel 119)
    come out as the unknown placeholder [Xx].
    """
    n = graph.n_atoms
    visited = [False] * n
    ring_tokens: dict[int, list[str]] = {i: [] for i in range(n)}
    tree_children: dict[int, list[tuple[int, Bond]]] = {i: [] for i in range(n)}

    bond_map: dict[tuple[int, int], Bond] = {b.endpoints: b for b in graph.bonds}

    def bond_for(u: int, v: int) -> Bond:
        return bond_map[(u, v) if u < v else (v, u)]

    # Spanning-tree walk; back edges become ring closures.  Labels stay
    # unique per molecule; %nn covers anything past 9.
    next_label = 1

    order: list[int] = []
    stack = [0]
    visited[0] = True
    parent: dict[int, Optional[int]] = {0: None}
    while stack:
        node = stack.pop()
        order.append(node)
        for nb in reversed(graph.adjacency[node]):
            if not visited[nb]:
                visited[nb] = True
                parent[nb] = node
                tree_children[node].append((nb, bond_for(node, nb)))
                stack.append(nb)

    seen_in_order = {node: i for i, node in enumerate(order)}
    for bond in graph.bonds:
        u, v = bond.endpoints
        if parent.get(v) == u or parent.get(u) == v:
            continue
        first, second = (u, v) if seen_in_order[u] < seen_in_order[v] else (v, u)
        label = next_label
        next_label += 1
        digit = str(label) if label < 10 else f"%{label:02d}"
        sym = _bond_token(bond, graph.atoms)
        ring_tokens[first].append(sym + digit)
        ring_tokens[second].append(digit)

    out: list[str] = []

    def emit(node: int, incoming: Optional[Bond]) -> None:
        if incoming is not None:
            out.append(_bond_token(incoming, graph.atoms))
        out.append(_atom_token(graph.atoms[node]))
        out.extend(ring_tokens[node])
        children = tree_children[node]
        for child, bond in children[:-1]:
            out.append("(")
            emit(child, bond)
            out.append(")")
        if children:
            child, bond = children[-1]
            emit(child, bond)

    emit(0, None)
    return "".join(out)
