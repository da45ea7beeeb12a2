"""Canonical atom ranking and canonical SMILES emission.

Ranking uses iterative neighbourhood refinement seeded with local atom
invariants (element, aromaticity, charge, hydrogens, degree, ring
membership). Remaining ties are resolved by individualising each tied atom
of the first ambiguous class in turn and keeping the lexicographically
smallest emitted string, so the output is invariant under any permutation
of the input atom order.
"""

from __future__ import annotations

from .model import (
    AROMATIC,
    DOUBLE,
    ORGANIC_SUBSET,
    SINGLE,
    TRIPLE,
    MolecularGraph,
    _bare_hydrogens,
)

_BOND_RANK = {SINGLE: 0, AROMATIC: 1, DOUBLE: 2, TRIPLE: 3}
_BOND_TOKEN = {SINGLE: "", AROMATIC: "", DOUBLE: "=", TRIPLE: "#"}


def canonical_smiles(graph: MolecularGraph) -> str:
    """Deterministic SMILES, invariant under atom-order permutation."""
    best: str | None = None
    for ranks in _discrete_rankings(graph):
        candidate = _emit(graph, ranks)
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best


def initial_invariants(graph: MolecularGraph) -> list[tuple]:
    inv = []
    for idx, atom in enumerate(graph.atoms):
        inv.append(
            (
                atom.element,
                atom.aromatic,
                atom.formal_charge,
                atom.hydrogens,
                len(graph.adjacency[idx]),
                graph.rings.ring_membership[idx],
            )
        )
    return inv


def _dense_ranks(keys: list) -> list[int]:
    order = sorted(set(keys))
    mapping = {k: r for r, k in enumerate(order)}
    return [mapping[k] for k in keys]


def _refine(graph: MolecularGraph, ranks: list[int]) -> list[int]:
    while True:
        keys = []
        for idx in range(len(graph.atoms)):
            nbr_sig = sorted(
                (_BOND_RANK[bond.order], ranks[j])
                for j, bond in graph.adjacency[idx]
            )
            keys.append((ranks[idx], tuple(nbr_sig)))
        new_ranks = _dense_ranks(keys)
        if new_ranks == ranks:
            return ranks
        ranks = new_ranks


def _discrete_rankings(graph: MolecularGraph):
    """Yield every fully discrete ranking reachable by tie individualisation."""
    n = len(graph.atoms)

    def rec(ranks: list[int]):
        ranks = _refine(graph, ranks)
        cells: dict[int, list[int]] = {}
        for idx, r in enumerate(ranks):
            cells.setdefault(r, []).append(idx)
        tied = [r for r, members in cells.items() if len(members) > 1]
        if not tied:
            yield ranks
            return
        target = min(tied)
        for chosen in cells[target]:
            keys = [(ranks[i], 0 if i == chosen else 1) for i in range(n)]
            yield from rec(_dense_ranks(keys))

    yield from rec(_dense_ranks(initial_invariants(graph)))


def _emit(graph: MolecularGraph, ranks: list[int]) -> str:
    comps = graph.components()
    pieces = [_emit_component(graph, ranks, comp) for comp in comps]
    pieces.sort()
    return ".".join(pieces)


def _emit_component(graph: MolecularGraph, ranks: list[int], comp: list[int]) -> str:
    root = min(comp, key=lambda i: ranks[i])

    # First pass: classify edges into spanning-tree and ring-closure edges
    # with a depth-first walk in canonical-rank order, mirroring emission.
    visited = {root}
    tree_children: dict[int, list[int]] = {i: [] for i in comp}
    closures: dict[int, list[int]] = {i: [] for i in comp}  # atom -> partners
    closure_edges: set[frozenset[int]] = set()

    def explore(u: int, parent: int) -> None:
        for v, _bond in sorted(graph.adjacency[u], key=lambda t: ranks[t[0]]):
            if v not in visited:
                visited.add(v)
                tree_children[u].append(v)
                explore(v, u)
            elif v != parent and frozenset((u, v)) not in closure_edges:
                closure_edges.add(frozenset((u, v)))
                closures[u].append(v)
                closures[v].append(u)

    explore(root, -1)
    for u in comp:
        closures[u].sort(key=lambda v: ranks[v])

    digit_of: dict[frozenset[int], int] = {}
    next_digit = [1]
    out: list[str] = []

    def ring_tokens(u: int) -> str:
        toks = []
        for v in closures[u]:
            edge = frozenset((u, v))
            bond = _bond_between(graph, u, v)
            if edge not in digit_of:
                digit_of[edge] = next_digit[0]
                next_digit[0] += 1
                toks.append(_bond_token_between(graph, bond) + _digit(digit_of[edge]))
            else:
                toks.append(_digit(digit_of[edge]))
        return "".join(toks)

    def walk(u: int) -> None:
        out.append(_atom_token(graph, u))
        out.append(ring_tokens(u))
        children = tree_children[u]
        for child in children[:-1]:
            out.append("(")
            out.append(_bond_token_between(graph, _bond_between(graph, u, child)))
            walk(child)
            out.append(")")
        if children:
            child = children[-1]
            out.append(_bond_token_between(graph, _bond_between(graph, u, child)))
            walk(child)

    walk(root)
    return "".join(out)


def _digit(number: int) -> str:
    return str(number) if number <= 9 else f"%{number:02d}"


def _bond_between(graph: MolecularGraph, u: int, v: int):
    for w, bond in graph.adjacency[u]:
        if w == v:
            return bond
    raise KeyError((u, v))


def _bond_token_between(graph: MolecularGraph, bond) -> str:
    if bond.order == SINGLE:
        both_aromatic = (
            graph.atoms[bond.a].aromatic and graph.atoms[bond.b].aromatic
        )
        return "-" if both_aromatic else ""
    return _BOND_TOKEN[bond.order]


def _atom_token(graph: MolecularGraph, idx: int) -> str:
    atom = graph.atoms[idx]
    symbol = atom.element.lower() if atom.aromatic else atom.element

    if atom.formal_charge == 0 and atom.element in ORGANIC_SUBSET:
        order_sum = 0
        for _, bond in graph.adjacency[idx]:
            order_sum += {SINGLE: 1, AROMATIC: 1, DOUBLE: 2, TRIPLE: 3}[bond.order]
        try:
            default_h = _bare_hydrogens(atom.element, atom.aromatic, order_sum, -1)
        except ValueError:
            default_h = -1
        if atom.hydrogens == default_h:
            return symbol

    parts = ["[", symbol]
    if atom.hydrogens == 1:
        parts.append("H")
    elif atom.hydrogens > 1:
        parts.append(f"H{atom.hydrogens}")
    charge = atom.formal_charge
    if charge == 1:
        parts.append("+")
    elif charge == -1:
        parts.append("-")
    elif charge > 1:
        parts.append(f"+{charge}")
    elif charge < -1:
        parts.append(f"-{-charge}")
    parts.append("]")
    return "".join(parts)
