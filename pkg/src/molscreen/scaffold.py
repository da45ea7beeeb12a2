"""Molecular scaffolds and the known/novel scaffold gate.

A scaffold is the ring systems of a molecule plus the linker atoms joining
them, with atoms double- or triple-bonded directly to that framework
retained. Acyclic molecules have the empty scaffold. The registry maps
canonical scaffold strings to numbered groups and backs the first screening
stage: molecules whose scaffold is not registered are flagged as novel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .molgraph import (
    DOUBLE,
    TRIPLE,
    AtomSpec,
    MolGraphError,
    MolecularGraph,
    canonical_smiles,
    parse_smiles,
)


class ScaffoldError(ValueError):
    pass


class DuplicateScaffold(ScaffoldError):
    pass


class NonFixedPointScaffold(ScaffoldError):
    pass


class UnparseableScaffold(ScaffoldError):
    pass


class NovelScaffoldInDataset(ScaffoldError):
    def __init__(self, index: int, smiles: str):
        self.index = index
        super().__init__(f"molecule {index} ({smiles}) has a novel scaffold")


@dataclass(frozen=True)
class Scaffold:
    """Canonical SMILES of the scaffold; empty string when acyclic."""

    canonical: str


@dataclass(frozen=True)
class GateResult:
    known: bool
    group_id: int | None
    scaffold: Scaffold


@dataclass(frozen=True)
class ScaffoldRegistry:
    entries: dict[str, int]  # canonical scaffold -> group id
    group_names: dict[int, str]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def group_count(self) -> int:
        return len(self.group_names)


def extract_scaffold(graph: MolecularGraph) -> Scaffold:
    """Prune side chains down to the ring-and-linker framework.

    Terminal atoms are removed iteratively unless they sit in a ring or on a
    path between rings; atoms double/triple-bonded directly to a retained
    atom are kept (exocyclic carbonyls and the like).
    """
    membership = graph.rings.ring_membership
    if not any(membership):
        return Scaffold("")

    kept = set(range(len(graph.atoms)))
    degree = {i: len(graph.adjacency[i]) for i in kept}
    changed = True
    while changed:
        changed = False
        for idx in sorted(kept):
            if membership[idx] or degree[idx] > 1:
                continue
            kept.discard(idx)
            changed = True
            for j, _ in graph.adjacency[idx]:
                if j in kept:
                    degree[j] -= 1

    # Re-attach atoms multiply bonded straight onto the framework.
    for bond in graph.bonds:
        if bond.order not in (DOUBLE, TRIPLE):
            continue
        a_in, b_in = bond.a in kept, bond.b in kept
        if a_in != b_in:
            kept.add(bond.a if b_in else bond.b)

    order = sorted(kept)
    remap = {old: new for new, old in enumerate(order)}
    specs = [
        AtomSpec(
            element=graph.atoms[i].element,
            aromatic=graph.atoms[i].aromatic,
            formal_charge=graph.atoms[i].formal_charge,
            explicit_h=graph.atoms[i].explicit_h,
        )
        for i in order
    ]
    bonds = [
        (remap[b.a], remap[b.b], b.order)
        for b in graph.bonds
        if b.a in kept and b.b in kept
    ]
    sub = MolecularGraph.from_spec(specs, bonds)
    return Scaffold(canonical_smiles(sub))


def classify(graph: MolecularGraph, registry: ScaffoldRegistry) -> GateResult:
    scaffold = extract_scaffold(graph)
    group = registry.entries.get(scaffold.canonical)
    if group is None:
        return GateResult(known=False, group_id=None, scaffold=scaffold)
    return GateResult(known=True, group_id=group, scaffold=scaffold)


def group_dataset(
    molecules: list[MolecularGraph], registry: ScaffoldRegistry
) -> dict[int, list[int]]:
    """Partition molecule indices by scaffold group.

    Raises :class:`NovelScaffoldInDataset` naming the first offending index;
    the caller must extend the registry or drop the molecule.
    """
    groups: dict[int, list[int]] = {}
    for idx, graph in enumerate(molecules):
        result = classify(graph, registry)
        if not result.known:
            raise NovelScaffoldInDataset(idx, graph.source or result.scaffold.canonical)
        groups.setdefault(result.group_id, []).append(idx)
    return {gid: groups[gid] for gid in sorted(groups)}


def load_registry(path: str | Path) -> ScaffoldRegistry:
    """Load a scaffold registry from CSV (``scaffold_smiles,group_id,group_name``).

    Entries are canonicalized on load and must be Murcko fixed points; the
    empty string is a legal scaffold (the acyclic group). Group ids must be
    contiguous from 1.
    """
    path = Path(path)
    entries: dict[str, int] = {}
    group_names: dict[int, str] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        required = {"scaffold_smiles", "group_id", "group_name"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ScaffoldError(
                f"registry {path} must have columns scaffold_smiles,group_id,group_name"
            )
        for row_no, row in enumerate(reader, start=2):
            raw = (row["scaffold_smiles"] or "").strip()
            try:
                group_id = int(row["group_id"])
            except (TypeError, ValueError):
                raise ScaffoldError(f"row {row_no}: bad group_id {row['group_id']!r}")
            name = (row["group_name"] or "").strip()

            if raw == "":
                canon = ""
            else:
                try:
                    graph = parse_smiles(raw)
                    canon = canonical_smiles(graph)
                except MolGraphError as exc:
                    raise UnparseableScaffold(f"row {row_no}: {raw!r}: {exc}") from exc
                fixed = extract_scaffold(graph).canonical
                if fixed != canon:
                    raise NonFixedPointScaffold(
                        f"row {row_no}: {raw!r} is not its own scaffold "
                        f"(reduces to {fixed!r})"
                    )
            if canon in entries:
                raise DuplicateScaffold(f"row {row_no}: duplicate scaffold {raw!r}")
            entries[canon] = group_id
            if group_id in group_names and group_names[group_id] != name:
                raise ScaffoldError(
                    f"row {row_no}: group {group_id} renamed to {name!r}"
                )
            group_names.setdefault(group_id, name)

    if not entries:
        raise ScaffoldError(f"registry {path} is empty")
    ids = sorted(group_names)
    if ids != list(range(1, len(ids) + 1)):
        raise ScaffoldError(f"group ids must be contiguous from 1, got {ids}")
    return ScaffoldRegistry(entries=entries, group_names=group_names)
