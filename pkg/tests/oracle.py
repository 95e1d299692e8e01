"""Brute-force stereo-aware isomorphism oracle, independent of the toolkit's matcher.

networkx's VF2 matcher enumerates every label-preserving graph isomorphism
(element, charge, isotope, hydrogen count, aromatic flag and bond order).
A mapping is accepted when it also carries every tetrahedral tag and every
double-bond configuration across, checked here from first principles:

* a tetrahedral tag is read against the atom's neighbour list with an
  implicit hydrogen first, so the mapped neighbour sequence must be an even
  permutation of the target's list when the tags agree and an odd one when
  they are opposite;
* a double-bond configuration is read against one reference neighbour per
  end, and flips once for every end whose mapped reference is not the
  target's reference.
"""

from __future__ import annotations

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from ocsrkit.molgraph import BondStereo, ChiralTag, Molecule

_H = -1  # placeholder for an implicit hydrogen in a neighbour list


def to_nx(m: Molecule) -> nx.Graph:
    g = nx.Graph()
    for i, a in enumerate(m.atoms):
        g.add_node(i, label=(a.element, a.charge, a.isotope, a.h, a.aromatic))
    for b in m.bonds:
        g.add_edge(b.begin, b.end, order=int(b.order))
    return g


def wl_hash(m: Molecule) -> str:
    """Weisfeiler-Lehman hash; unequal hashes prove two molecules non-isomorphic."""
    g = to_nx(m)
    for v, data in g.nodes(data=True):
        data["s"] = repr(data["label"])
    for _, _, data in g.edges(data=True):
        data["s"] = str(data["order"])
    return nx.weisfeiler_lehman_graph_hash(g, node_attr="s", edge_attr="s", iterations=3)


def _parity(seq: list[int], ref: list[int]) -> int:
    pos = {v: k for k, v in enumerate(ref)}
    perm = [pos[v] for v in seq]
    seen = [False] * len(perm)
    swaps = 0
    for k in range(len(perm)):
        length = 0
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        swaps += max(length - 1, 0)
    return swaps % 2


def _nbr_list(m: Molecule, i: int) -> list[int]:
    return ([_H] if m.atoms[i].h else []) + list(m.neighbors[i])


def _tetra_ok(a: Molecule, b: Molecule, f: dict[int, int]) -> bool:
    for i, atom in enumerate(a.atoms):
        tag = atom.chiral_tag
        other = b.atoms[f[i]].chiral_tag
        if (tag is ChiralTag.NONE) != (other is ChiralTag.NONE):
            return False
        if tag is ChiralTag.NONE:
            continue
        mapped = [f[v] if v != _H else _H for v in _nbr_list(a, i)]
        ref = _nbr_list(b, f[i])
        if sorted(mapped) != sorted(ref):
            return False
        flips = _parity(mapped, ref)
        if (tag == other) != (flips == 0):
            return False
    return True


def _double_ok(a: Molecule, b: Molecule, f: dict[int, int]) -> bool:
    b_bonds = {frozenset((bd.begin, bd.end)): bd for bd in b.bonds}
    for bd in a.bonds:
        tb = b_bonds[frozenset((f[bd.begin], f[bd.end]))]
        if (bd.stereo is BondStereo.NONE) != (tb.stereo is BondStereo.NONE):
            return False
        if bd.stereo is BondStereo.NONE:
            continue
        ref_of = {tb.begin: tb.stereo_atoms[0], tb.end: tb.stereo_atoms[1]}
        flips = 0
        for end, ref in zip((bd.begin, bd.end), bd.stereo_atoms):
            if ref_of[f[end]] != f[ref]:
                flips += 1
        same = bd.stereo == tb.stereo
        if same != (flips % 2 == 0):
            return False
    return True


def oracle_isomorphic(a: Molecule, b: Molecule) -> bool:
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    gm = GraphMatcher(
        to_nx(a),
        to_nx(b),
        node_match=lambda x, y: x["label"] == y["label"],
        edge_match=lambda x, y: x["order"] == y["order"],
    )
    for f in gm.isomorphisms_iter():
        if _tetra_ok(a, b, f) and _double_ok(a, b, f):
            return True
    return False
