"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

from hypothesis import strategies as st

from ocsrkit.corpus import load_sample_pool
from ocsrkit.errors import OcsrError
from ocsrkit.molgraph import Atom, Bond, BondOrder, Molecule, normalize

_POOL = load_sample_pool()

pool_smiles = st.sampled_from(_POOL)
permutation_seeds = st.integers(min_value=0, max_value=2**32 - 1)


_VALENCE = {"C": 4, "N": 3, "O": 2, "S": 2}


@st.composite
def small_molecules(draw, max_atoms: int = 12):
    """Random connected C/N/O/S graphs with single, double and triple bonds.

    Edges and bond orders are only drawn where both atoms still have spare
    valence, so every draw is a valid neutral molecule.
    """
    n = draw(st.integers(min_value=1, max_value=max_atoms))
    elements = draw(st.lists(st.sampled_from("CCCCNOS"), min_size=n, max_size=n))
    spare = [_VALENCE[e] for e in elements]
    edges: dict[tuple[int, int], int] = {}

    def add(a: int, b: int, order: int) -> None:
        edges[(min(a, b), max(a, b))] = order
        spare[a] -= order
        spare[b] -= order

    for v in range(1, n):
        options = [u for u in range(v) if spare[u] > 0]
        if not options:
            # every earlier atom is saturated; restart the chain on a carbon
            elements[v] = "C"
            spare[v] = _VALENCE["C"]
            options = [u for u in range(v) if spare[u] > 0] or [None]
        u = draw(st.sampled_from(options))
        if u is None:
            break
        add(u, v, 1)
    n = 1 + max((max(e) for e in edges), default=0)
    elements = elements[:n]
    spare = spare[:n]
    for _ in range(draw(st.integers(0, 3))):
        a, b = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        key = (min(a, b), max(a, b))
        if a != b and key not in edges and spare[a] > 0 and spare[b] > 0:
            add(a, b, 1)
    for key in sorted(edges):
        a, b = key
        room = min(spare[a], spare[b], 2)
        extra = draw(st.integers(0, room)) if room and draw(st.integers(0, 3)) == 0 else 0
        if extra:
            edges[key] += extra
            spare[a] -= extra
            spare[b] -= extra
    bonds = [Bond(a, b, BondOrder(o)) for (a, b), o in sorted(edges.items())]
    return normalize(Molecule.build([Atom(e) for e in elements], bonds))


@st.composite
def molecule_pairs(draw):
    """A molecule and either a relabelled copy or a one-element mutant of it."""
    import numpy as np

    a = draw(small_molecules())
    order = [int(i) for i in np.random.default_rng(draw(permutation_seeds)).permutation(len(a.atoms))]
    b = a.permuted(order)
    if draw(st.booleans()) and not any(x.aromatic for x in b.atoms):
        k = draw(st.integers(0, len(b.atoms) - 1))
        atoms = [Atom(x.element) for x in b.atoms]
        atoms[k] = Atom(draw(st.sampled_from("CNOS")))
        try:
            b = normalize(Molecule.build(atoms, [Bond(x.begin, x.end, x.order) for x in b.bonds]))
        except OcsrError:
            pass  # mutant breaks valence: keep the relabelled copy
    return a, b
