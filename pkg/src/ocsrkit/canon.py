"""Canonical atom ranking.

Ranks start from atom invariants (element, degree, charge, hydrogens,
aromaticity, isotope) and are refined by sorted neighbour-rank multisets
until stable. Remaining ties are broken by individualizing one tied atom
and refining again. Every tied atom is tried, and the labelling whose
certificate (atoms, bonds and stereo parities listed in rank order) sorts
lowest wins, so the result does not depend on input atom order. Branches
are pruned with automorphisms discovered along the way.
"""

from __future__ import annotations

from .molgraph import ATOMIC_NUMBER, Molecule, permutation_parity, stereo_relative


def _refine(labels: list[int], adj: list[list[tuple[int, int]]]) -> list[int]:
    """Iterate neighbourhood refinement until the number of classes stops growing.

    Labels are "number of atoms with a strictly smaller key", so a cell of
    size k with label L occupies positions L..L+k-1.
    """
    n = len(labels)
    ncls = len(set(labels))
    while ncls < n:
        keys = [
            (labels[i], tuple(sorted([(labels[j], o) for j, o in adj[i]])))
            for i in range(n)
        ]
        order = sorted(range(n), key=keys.__getitem__)
        new = [0] * n
        prev = None
        start = 0
        count = 0
        for pos, i in enumerate(order):
            k = keys[i]
            if k != prev:
                start = pos
                prev = k
                count += 1
            new[i] = start
        labels = new
        if count == ncls:
            break
        ncls = count
    return labels


def _initial_labels(invariants: list[tuple]) -> list[int]:
    n = len(invariants)
    order = sorted(range(n), key=invariants.__getitem__)
    labels = [0] * n
    prev = None
    start = 0
    for pos, i in enumerate(order):
        if invariants[i] != prev:
            start = pos
            prev = invariants[i]
        labels[i] = start
    return labels


def atom_invariants(mol: Molecule) -> list[tuple]:
    out = []
    for i, a in enumerate(mol.atoms):
        out.append(
            (
                ATOMIC_NUMBER[a.element],
                mol.degree(i),
                a.charge,
                a.h,
                int(a.aromatic),
                a.isotope or 0,
                int(bool(a.chiral_tag)),
            )
        )
    return out


class _Search:
    def __init__(self, mol: Molecule):
        self.mol = mol
        n = len(mol.atoms)
        self.n = n
        self.inv = atom_invariants(mol)
        self.adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for b in mol.bonds:
            code = int(b.order) * 2 + (1 if b.stereo else 0)
            self.adj[b.begin].append((b.end, code))
            self.adj[b.end].append((b.begin, code))
        self.chiral = [i for i, a in enumerate(mol.atoms) if a.chiral_tag]
        self.stereo_bonds = [b for b in mol.bonds if b.stereo]
        self.best_cert: tuple | None = None
        self.best_labels: list[int] | None = None
        self.best_at_rank: list[int] | None = None
        self.automorphisms: list[list[int]] = []

    def certificate(self, labels: list[int]) -> tuple:
        mol = self.mol
        at_rank = [0] * self.n
        for i, r in enumerate(labels):
            at_rank[r] = i
        atom_part = []
        for r in range(self.n):
            i = at_rank[r]
            tag = 0
            a = mol.atoms[i]
            if a.chiral_tag:
                ranked = sorted(mol.neighbors[i], key=labels.__getitem__)
                parity = permutation_parity(mol.neighbors[i], ranked)
                tag = int(a.chiral_tag if parity == 0 else a.chiral_tag.flipped())
            atom_part.append(self.inv[i] + (tag,))
        bond_part = []
        for b in mol.bonds:
            lo, hi = (b.begin, b.end) if labels[b.begin] < labels[b.end] else (b.end, b.begin)
            st = 0
            if b.stereo:
                ref_lo = min((x for x in mol.neighbors[lo] if x != hi), key=labels.__getitem__)
                ref_hi = min((x for x in mol.neighbors[hi] if x != lo), key=labels.__getitem__)
                if b.begin == lo:
                    st = int(stereo_relative(b, ref_lo, ref_hi))
                else:
                    st = int(stereo_relative(b, ref_hi, ref_lo))
            bond_part.append((labels[lo], labels[hi], int(b.order), st))
        bond_part.sort()
        return (tuple(atom_part), tuple(bond_part))

    def leaf(self, labels: list[int]) -> None:
        cert = self.certificate(labels)
        if self.best_cert is None or cert < self.best_cert:
            self.best_cert = cert
            self.best_labels = labels
            at_rank = [0] * self.n
            for i, r in enumerate(labels):
                at_rank[r] = i
            self.best_at_rank = at_rank
        elif cert == self.best_cert:
            gamma = [self.best_at_rank[labels[i]] for i in range(self.n)]
            if any(g != i for i, g in enumerate(gamma)):
                self.automorphisms.append(gamma)

    def same_orbit(self, v: int, explored: list[int], prefix: list[int]) -> bool:
        gens = [g for g in self.automorphisms if all(g[p] == p for p in prefix)]
        if not gens:
            return False
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in gens:
            for i, j in enumerate(g):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
        rv = find(v)
        return any(find(w) == rv for w in explored)

    def run(self, labels: list[int], prefix: list[int]) -> None:
        labels = _refine(labels, self.adj)
        counts: dict[int, int] = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        target = min((lab for lab, c in counts.items() if c > 1), default=None)
        if target is None:
            self.leaf(labels)
            return
        cell = [i for i in range(self.n) if labels[i] == target]
        explored: list[int] = []
        for v in cell:
            if explored and self.same_orbit(v, explored, prefix):
                continue
            new = [lab + 1 if (lab == target and i != v) else lab for i, lab in enumerate(labels)]
            self.run(new, prefix + [v])
            explored.append(v)


def canonical_ranks(mol: Molecule) -> list[int]:
    """Return ``ranks[i]`` in ``0..n-1``: the canonical position of atom ``i``."""
    if len(mol.atoms) <= 1:
        return list(range(len(mol.atoms)))
    search = _Search(mol)
    search.run(_initial_labels(search.inv), [])
    return search.best_labels


__all__ = ["canonical_ranks", "atom_invariants"]
