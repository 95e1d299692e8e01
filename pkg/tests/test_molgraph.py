from __future__ import annotations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocsrkit.errors import MoleculeError, SizeLimitError, ValenceError
from ocsrkit.molgraph import (
    Atom,
    Bond,
    BondOrder,
    BondStereo,
    ChiralTag,
    Molecule,
    allowed_valences,
    isomorphic,
    normalize,
    permutation_parity,
    strip_stereo,
)
from ocsrkit.smiles import parse

from strategies import molecule_pairs, permutation_seeds, pool_smiles, small_molecules


def ring(n: int, orders) -> Molecule:
    atoms = [Atom("C") for _ in range(n)]
    bonds = [Bond(i, (i + 1) % n, orders[i % len(orders)]) for i in range(n)]
    return Molecule.build(atoms, bonds)


def nx_graph(m: Molecule) -> nx.Graph:
    g = nx.Graph()
    for i, a in enumerate(m.atoms):
        g.add_node(i, label=(a.element, a.charge, a.isotope, a.h, a.aromatic))
    for b in m.bonds:
        g.add_edge(b.begin, b.end, order=int(b.order))
    return g


def nx_isomorphic(a: Molecule, b: Molecule) -> bool:
    """Independent stereo-blind oracle built on networkx's VF2 matcher."""
    return nx.is_isomorphic(
        nx_graph(a),
        nx_graph(b),
        node_match=lambda x, y: x["label"] == y["label"],
        edge_match=lambda x, y: x["order"] == y["order"],
    )


def random_permutation(m: Molecule, seed: int) -> Molecule:
    order = np.random.default_rng(seed).permutation(len(m.atoms))
    return m.permuted([int(i) for i in order])


# --- data model -------------------------------------------------------------


def test_atom_rejects_unknown_element():
    with pytest.raises(MoleculeError):
        Atom("Xx")


def test_atom_rejects_aromatic_halogen():
    with pytest.raises(MoleculeError):
        Atom("Cl", aromatic=True)


def test_atom_rejects_negative_hydrogens():
    with pytest.raises(MoleculeError):
        Atom("C", implicit_h=-1)


def test_bond_endpoints_must_be_distinct_and_valid():
    with pytest.raises(MoleculeError):
        Molecule.build([Atom("C")], [Bond(0, 0)])
    with pytest.raises(MoleculeError):
        Molecule.build([Atom("C")], [Bond(0, 1)])


def test_duplicate_bond_rejected():
    with pytest.raises(MoleculeError):
        Molecule.build([Atom("C"), Atom("C")], [Bond(0, 1), Bond(1, 0)])


def test_disconnected_graph_must_be_flagged():
    atoms = [Atom("C"), Atom("C")]
    assert Molecule.build(atoms, []).multi_fragment
    with pytest.raises(MoleculeError):
        Molecule.build(atoms, [], multi_fragment=False)


def test_valence_table():
    assert allowed_valences("C") == (4,)
    assert allowed_valences("N") == (3,)
    assert allowed_valences("O") == (2,)
    assert allowed_valences("P") == (3, 5)
    assert allowed_valences("S") == (2, 4, 6)
    assert allowed_valences("Cl") == (1,)
    assert allowed_valences("N", 1) == (4,)
    assert allowed_valences("O", -1) == (1,)


# --- normalize ---------------------------------------------------------------


def test_kekule_benzene_becomes_aromatic():
    m = normalize(ring(6, [BondOrder.SINGLE, BondOrder.DOUBLE]))
    assert all(a.aromatic for a in m.atoms)
    assert all(b.order is BondOrder.AROMATIC for b in m.bonds)
    assert all(a.h == 1 for a in m.atoms)


def test_methane_gets_four_hydrogens():
    m = normalize(Molecule.build([Atom("C")], []))
    assert m.atoms[0].h == 4 and not m.bonds


def test_cyclohexane_stays_aliphatic():
    m = normalize(ring(6, [BondOrder.SINGLE]))
    assert not any(a.aromatic for a in m.atoms)
    assert all(b.order is BondOrder.SINGLE for b in m.bonds)
    assert all(a.h == 2 for a in m.atoms)


def test_cyclooctatetraene_is_not_aromatic():
    # 8 pi electrons fail the 4n+2 count
    m = normalize(ring(8, [BondOrder.SINGLE, BondOrder.DOUBLE]))
    assert not any(a.aromatic for a in m.atoms)


def test_valence_error_on_pentavalent_carbon():
    atoms = [Atom("C")] + [Atom("F") for _ in range(5)]
    with pytest.raises(ValenceError):
        normalize(Molecule.build(atoms, [Bond(0, i) for i in range(1, 6)]))


@given(pool_smiles)
def test_normalize_idempotent_on_pool(s):
    m = parse(s)
    assert normalize(m) == m


@given(small_molecules())
def test_normalize_idempotent_on_random_graphs(m):
    assert normalize(m) == m


# --- strip_stereo --------------------------------------------------------------


def test_strip_tetrahedral():
    assert isomorphic(strip_stereo(parse("C[C@H](N)O")), parse("CC(N)O"))


def test_strip_double_bond_geometry():
    assert isomorphic(strip_stereo(parse("F/C=C/F")), parse("FC=CF"))


def test_strip_is_identity_without_stereo():
    m = parse("CC(=O)Oc1ccccc1C(=O)O")
    assert strip_stereo(m) is m


@given(pool_smiles)
def test_strip_is_a_fixed_point(s):
    once = strip_stereo(parse(s))
    assert strip_stereo(once) == once
    assert not once.has_stereo()


def test_strip_only_touches_stereo_fields():
    m = parse("N[C@@H](C)C(=O)O")
    s = strip_stereo(m)
    for a, b in zip(m.atoms, s.atoms):
        assert (a.element, a.charge, a.isotope, a.implicit_h, a.aromatic) == (
            b.element, b.charge, b.isotope, b.implicit_h, b.aromatic)
    assert all(b.chiral_tag is ChiralTag.NONE for b in s.atoms)
    assert all(b.stereo is BondStereo.NONE for b in s.bonds)


# --- isomorphism oracle ---------------------------------------------------------


def test_rotated_benzene_is_isomorphic():
    m = parse("c1ccccc1")
    assert isomorphic(m, m.permuted([3, 4, 5, 0, 1, 2]))


def test_different_elements_not_isomorphic():
    assert not isomorphic(parse("CCO"), parse("CCN"))


def test_enantiomers_not_isomorphic():
    assert not isomorphic(parse("C[C@@H](N)O"), parse("C[C@H](N)O"))


def test_same_enantiomer_written_differently():
    # L-alanine written from three different start atoms
    forms = ["N[C@@H](C)C(=O)O", "C[C@H](N)C(=O)O", "OC(=O)[C@@H](N)C"]
    ms = [parse(s) for s in forms]
    assert all(isomorphic(ms[0], m) for m in ms[1:])


def test_cis_trans_distinguished():
    assert not isomorphic(parse("F/C=C/F"), parse("F/C=C\\F"))
    assert isomorphic(parse("F/C=C/F"), parse("F\\C=C\\F"))


def test_size_limit():
    m = parse("C" * 70)
    with pytest.raises(SizeLimitError):
        isomorphic(m, m)
    assert isomorphic(m, m, max_atoms=80)


@given(pool_smiles, permutation_seeds)
def test_isomorphic_invariant_under_permutation(s, seed):
    m = parse(s)
    p = random_permutation(m, seed)
    assert isomorphic(m, p) and isomorphic(p, m)


@given(molecule_pairs())
def test_isomorphic_agrees_with_networkx_oracle(pair):
    a, b = pair
    assert isomorphic(a, b) == nx_isomorphic(a, b)
    assert isomorphic(a, b) == isomorphic(b, a)


@given(small_molecules(), permutation_seeds)
def test_permuted_random_graph_matches(a, seed):
    assert isomorphic(a, random_permutation(a, seed))


def test_permutation_parity():
    assert permutation_parity([0, 1, 2], [0, 1, 2]) == 0
    assert permutation_parity([1, 0, 2], [0, 1, 2]) == 1
    assert permutation_parity([1, 2, 0], [0, 1, 2]) == 0
