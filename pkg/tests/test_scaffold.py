import random

import pytest

from molscreen.molgraph import AtomSpec, MolecularGraph, canonical_smiles, parse_smiles
from molscreen.scaffold import (
    DuplicateScaffold,
    NonFixedPointScaffold,
    NovelScaffoldInDataset,
    ScaffoldError,
    UnparseableScaffold,
    classify,
    extract_scaffold,
    group_dataset,
    load_registry,
)

from conftest import random_molecule


def canon(smiles: str) -> str:
    return canonical_smiles(parse_smiles(smiles))


class TestExtract:
    def test_acyclic_is_empty(self):
        assert extract_scaffold(parse_smiles("CCCCCl")).canonical == ""

    def test_aminopyridine_reduces_to_pyridine(self):
        got = extract_scaffold(parse_smiles("Nc1ccncc1"))
        assert got.canonical == canon("c1ccncc1")

    def test_thiazole_acid_reduces_to_thiazole(self):
        got = extract_scaffold(parse_smiles("OC(=O)c1csc(Cl)n1"))
        assert got.canonical == canon("c1cscn1")

    def test_biphenyl_is_its_own_scaffold(self):
        smiles = "c1ccc(-c2ccccc2)cc1"
        assert extract_scaffold(parse_smiles(smiles)).canonical == canon(smiles)

    def test_linker_atoms_retained(self):
        got = extract_scaffold(parse_smiles("c1ccccc1CCc1ccncc1"))
        assert got.canonical == canon("c1ccccc1CCc1ccncc1")

    def test_exocyclic_double_bond_retained(self):
        got = extract_scaffold(parse_smiles("CCC1CCC(=O)CC1"))
        assert got.canonical == canon("O=C1CCCCC1")

    def test_chain_carbonyl_not_retained(self):
        # the C=O sits in the side chain, not on the framework
        got = extract_scaffold(parse_smiles("O=CCc1ccccc1"))
        assert got.canonical == canon("c1ccccc1")


class TestScaffoldProperties:
    def test_fixed_point(self):
        rng = random.Random(99)
        checked = 0
        while checked < 250:
            graph = random_molecule(rng, max_atoms=12)
            first = extract_scaffold(graph)
            if first.canonical == "":
                second = ""
            else:
                second = extract_scaffold(parse_smiles(first.canonical)).canonical
            assert second == first.canonical
            checked += 1

    def test_side_chain_invariance(self, registry9):
        rng = random.Random(4242)
        scaffolds = [s for s in registry9.entries if s]
        checked = 0
        while checked < 250:
            base = parse_smiles(scaffolds[checked % len(scaffolds)])
            grafted = _graft_chain(base, rng)
            if grafted is None:
                checked += 1
                continue
            assert extract_scaffold(grafted).canonical == canonical_smiles(base)
            checked += 1

    def test_classify_invariant_under_respelling(self, dataset24, registry9):
        for record in dataset24.records:
            direct = classify(record.graph, registry9)
            respelled = classify(parse_smiles(record.canonical), registry9)
            assert direct.known == respelled.known
            assert direct.group_id == respelled.group_id


def _graft_chain(graph, rng):
    """Append a random acyclic singly-bonded substituent to a scaffold atom."""
    anchors = [i for i, a in enumerate(graph.atoms) if a.hydrogens >= 1]
    if not anchors:
        return None
    anchor = rng.choice(anchors)
    specs = [
        AtomSpec(a.element, a.aromatic, a.formal_charge, a.explicit_h)
        for a in graph.atoms
    ]
    bonds = [(b.a, b.b, b.order) for b in graph.bonds]
    length = rng.randint(1, 4)
    previous = anchor
    for step in range(length):
        terminal = step == length - 1
        element = rng.choice(["C", "O", "N"] + (["Cl", "F"] if terminal else []))
        specs.append(AtomSpec(element))
        bonds.append((previous, len(specs) - 1, "single"))
        previous = len(specs) - 1
    return MolecularGraph.from_spec(specs, bonds)


class TestRegistry:
    def test_bundled_registry(self, registry9):
        assert registry9.group_count == 9
        assert sorted(registry9.group_names) == list(range(1, 10))
        assert "" in registry9.entries  # the acyclic group is explicit

    def test_small_registry(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text(
            "scaffold_smiles,group_id,group_name\n"
            "c1ccccc1,1,arenes\n"
            "c1ccncc1,1,arenes\n"
            "C1CCNCC1,2,amines\n"
        )
        registry = load_registry(path)
        assert len(registry) == 3
        assert registry.group_count == 2

    def test_duplicate_scaffold_rejected(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text(
            "scaffold_smiles,group_id,group_name\n"
            "c1ccccc1,1,a\n"
            "C1=CC=CC=C1,1,a\n"  # same ring written differently is fine
        )
        # kekulized benzene is a distinct graph in this pipeline, so the
        # duplicate must be literal
        load_registry(path)
        path.write_text(
            "scaffold_smiles,group_id,group_name\n"
            "c1ccccc1,1,a\n"
            "c1ccccc1,2,b\n"
        )
        with pytest.raises(DuplicateScaffold):
            load_registry(path)

    def test_non_fixed_point_rejected(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text(
            "scaffold_smiles,group_id,group_name\nCc1ccccc1,1,a\n"
        )
        with pytest.raises(NonFixedPointScaffold):
            load_registry(path)

    def test_unparseable_rejected(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text("scaffold_smiles,group_id,group_name\nC1CC,1,a\n")
        with pytest.raises(UnparseableScaffold):
            load_registry(path)

    def test_gapped_group_ids_rejected(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text(
            "scaffold_smiles,group_id,group_name\nc1ccccc1,1,a\nC1CC1,3,c\n"
        )
        with pytest.raises(ScaffoldError):
            load_registry(path)


class TestClassify:
    def test_toluene_is_known_via_benzene(self, registry9):
        result = classify(parse_smiles("Cc1ccccc1"), registry9)
        assert result.known
        assert registry9.entries[canon("c1ccccc1")] == result.group_id

    def test_acyclic_without_empty_scaffold_is_novel(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text("scaffold_smiles,group_id,group_name\nc1ccccc1,1,a\n")
        registry = load_registry(path)
        assert not classify(parse_smiles("CCCCCl"), registry).known

    def test_every_bundled_molecule_is_known(self, dataset24, registry9):
        for record in dataset24.records:
            assert classify(record.graph, registry9).known, record.smiles


class TestGroupDataset:
    def test_partition(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text(
            "scaffold_smiles,group_id,group_name\nc1ccccc1,1,a\nc1ccncc1,2,b\n"
        )
        registry = load_registry(path)
        molecules = [
            parse_smiles(s)
            for s in ("Cc1ccccc1", "CCc1ccccc1", "Oc1ccccc1", "Nc1ccncc1", "Cc1ccncc1")
        ]
        groups = group_dataset(molecules, registry)
        assert groups == {1: [0, 1, 2], 2: [3, 4]}

    def test_empty_dataset(self, registry9):
        assert group_dataset([], registry9) == {}

    def test_novel_molecule_names_index(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text("scaffold_smiles,group_id,group_name\nc1ccccc1,1,a\n")
        registry = load_registry(path)
        molecules = [parse_smiles("Cc1ccccc1"), parse_smiles("CCCC")]
        with pytest.raises(NovelScaffoldInDataset) as err:
            group_dataset(molecules, registry)
        assert err.value.index == 1

    def test_bundled_grouping(self, dataset24, registry9):
        groups = group_dataset(dataset24.graphs(), registry9)
        sizes = {gid: len(v) for gid, v in groups.items()}
        assert sum(sizes.values()) == 24
        all_indices = sorted(i for v in groups.values() for i in v)
        assert all_indices == list(range(24))
