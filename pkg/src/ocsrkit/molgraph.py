"""Molecular graph model, normalization and a brute-force isomorphism oracle.

Conventions used throughout the package:

* ``Molecule.neighbors[i]`` is an *ordered* tuple. Tetrahedral tags are
  stored relative to that order, with any implicit hydrogen (or lone pair)
  considered to come first.
* ``ChiralTag.CCW`` is SMILES ``@``, ``ChiralTag.CW`` is ``@@``.
* Double-bond geometry lives on the double bond itself as ``CIS``/``TRANS``
  relative to one reference neighbour per endpoint (``stereo_atoms``).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

from .errors import AromaticityError, MoleculeError, SizeLimitError, ValenceError

# fmt: off
ELEMENTS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn "
    "Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce "
    "Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn "
    "Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl "
    "Mc Lv Ts Og"
).split()
# fmt: on
ATOMIC_NUMBER = {sym: z for z, sym in enumerate(ELEMENTS, start=1)}

ORGANIC_SUBSET = frozenset("B C N O P S F Cl Br I".split())
AROMATIC_ELEMENTS = frozenset("B C N O P S Se As".split())

# (period, group) for elements that have a default valence.
_MAIN_GROUP = {
    "B": (2, 13), "C": (2, 14), "N": (2, 15), "O": (2, 16), "F": (2, 17),
    "Al": (3, 13), "Si": (3, 14), "P": (3, 15), "S": (3, 16), "Cl": (3, 17),
    "Ga": (4, 13), "Ge": (4, 14), "As": (4, 15), "Se": (4, 16), "Br": (4, 17),
    "In": (5, 13), "Sn": (5, 14), "Sb": (5, 15), "Te": (5, 16), "I": (5, 17),
}
_GROUP_VALENCES = {13: (3,), 14: (4,), 15: (3, 5), 16: (2, 4, 6), 17: (1,)}
_PERIOD2_VALENCES = {13: (3,), 14: (4,), 15: (3,), 16: (2,), 17: (1,)}


def allowed_valences(element: str, charge: int = 0) -> tuple[int, ...] | None:
    """Return the allowed total valences, or ``None`` if the element is unconstrained.

    Charged atoms take the valences of their isoelectronic neighbour in the
    period: N+ behaves like C, O- like F, C- like N, C+ like B, B- like C.
    Halogens are only expanded when neutral.
    """
    if element == "H":
        return (1,) if charge == 0 else (0,)
    pos = _MAIN_GROUP.get(element)
    if pos is None:
        return None
    period, group = pos
    table = _PERIOD2_VALENCES if period == 2 else _GROUP_VALENCES
    if not charge:
        return table[group]
    if group == 14:
        # carbocations and carbanions are both trivalent
        return (max(0, 4 - abs(charge)),)
    eff = group - charge if (group >= 15 or charge < 0) else group
    if group == 13 and charge > 0:
        return (max(0, 3 - charge),)
    if eff > 17:
        return (0,)
    if eff < 13:
        return (max(0, eff - 10),)
    return table[eff]


class ChiralTag(enum.IntEnum):
    NONE = 0
    CCW = 1  # '@'
    CW = 2  # '@@'

    def flipped(self) -> "ChiralTag":
        if self is ChiralTag.NONE:
            return self
        return ChiralTag.CW if self is ChiralTag.CCW else ChiralTag.CCW


class BondOrder(enum.IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> int:
        return 1 if self is BondOrder.AROMATIC else int(self)


class BondStereo(enum.IntEnum):
    NONE = 0
    CIS = 1
    TRANS = 2

    def flipped(self) -> "BondStereo":
        if self is BondStereo.NONE:
            return self
        return BondStereo.TRANS if self is BondStereo.CIS else BondStereo.CIS


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    isotope: int | None = None
    # None means "derive from the valence table during normalization".
    implicit_h: int | None = None
    aromatic: bool = False
    chiral_tag: ChiralTag = ChiralTag.NONE

    def __post_init__(self):
        if self.element not in ATOMIC_NUMBER:
            raise MoleculeError(f"unknown element {self.element!r}")
        if self.aromatic and self.element not in AROMATIC_ELEMENTS:
            raise MoleculeError(f"element {self.element} cannot be aromatic")
        if self.implicit_h is not None and self.implicit_h < 0:
            raise MoleculeError("implicit_h must be non-negative")
        if self.isotope is not None and self.isotope <= 0:
            raise MoleculeError("isotope must be a positive mass number")

    @property
    def h(self) -> int:
        return self.implicit_h or 0


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE
    stereo: BondStereo = BondStereo.NONE
    # (reference neighbour of begin, reference neighbour of end)
    stereo_atoms: tuple[int, int] | None = None

    def other(self, i: int) -> int:
        return self.end if i == self.begin else self.begin

    @property
    def key(self) -> tuple[int, int]:
        return (self.begin, self.end) if self.begin < self.end else (self.end, self.begin)


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    neighbors: tuple[tuple[int, ...], ...] = field(default=())
    multi_fragment: bool = False

    @classmethod
    def build(
        cls,
        atoms: Iterable[Atom],
        bonds: Iterable[Bond],
        neighbors: Sequence[Sequence[int]] | None = None,
        multi_fragment: bool | None = None,
    ) -> "Molecule":
        """Construct and validate a molecule.

        Neighbour order defaults to bond-list order. ``multi_fragment`` defaults
        to whether the graph is disconnected; passing ``False`` for a
        disconnected graph raises.
        """
        atoms = tuple(atoms)
        bonds = tuple(bonds)
        n = len(atoms)
        seen = set()
        for b in bonds:
            if not (0 <= b.begin < n and 0 <= b.end < n) or b.begin == b.end:
                raise MoleculeError(f"bond {b.begin}-{b.end} has invalid endpoints")
            if b.key in seen:
                raise MoleculeError(f"duplicate bond between atoms {b.begin} and {b.end}")
            seen.add(b.key)
        nb: list[list[int]] = [[] for _ in range(n)]
        for b in bonds:
            nb[b.begin].append(b.end)
            nb[b.end].append(b.begin)
        if neighbors is None:
            neighbors = nb
        neighbors = tuple(tuple(x) for x in neighbors)
        if len(neighbors) != n:
            raise MoleculeError("neighbor table length does not match atom count")
        for i, row in enumerate(neighbors):
            if sorted(row) != sorted(nb[i]):
                raise MoleculeError(f"neighbor list of atom {i} is inconsistent with bonds")
        mol = cls(atoms, bonds, neighbors, False)
        connected = len(mol.fragments()) <= 1
        if multi_fragment is None:
            multi_fragment = not connected
        elif not multi_fragment and not connected:
            raise MoleculeError("disconnected graph must be flagged multi-fragment")
        return cls(atoms, bonds, neighbors, bool(multi_fragment))

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def _bond_map(self) -> dict[tuple[int, int], int]:
        return {b.key: k for k, b in enumerate(self.bonds)}

    @cached_property
    def incident_index(self) -> tuple[tuple[int, ...], ...]:
        """Bond indices per atom, aligned with ``neighbors``."""
        bm = self._bond_map
        return tuple(
            tuple(bm[(i, j) if i < j else (j, i)] for j in row) for i, row in enumerate(self.neighbors)
        )

    @cached_property
    def ring_mask(self) -> tuple[bool, ...]:
        return tuple(ring_bond_mask(self))

    def _same_graph(self, atoms: Sequence[Atom], bonds: Sequence[Bond]) -> "Molecule":
        """New molecule with changed labels but identical bond endpoints.

        Topology caches are carried over, since they only depend on endpoints.
        """
        out = Molecule(tuple(atoms), tuple(bonds), self.neighbors, self.multi_fragment)
        for name in ("_bond_map", "incident_index", "ring_mask"):
            if name in self.__dict__:
                out.__dict__[name] = self.__dict__[name]
        return out

    def bond_index(self, i: int, j: int) -> int | None:
        return self._bond_map.get((i, j) if i < j else (j, i))

    def bond_between(self, i: int, j: int) -> Bond | None:
        k = self.bond_index(i, j)
        return None if k is None else self.bonds[k]

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def incident(self, i: int) -> list[Bond]:
        bonds = self.bonds
        return [bonds[k] for k in self.incident_index[i]]

    def bond_valence(self, i: int) -> int:
        bonds = self.bonds
        total = 0
        for k in self.incident_index[i]:
            order = bonds[k].order
            total += 1 if order is BondOrder.AROMATIC else int(order)
        return total

    def fragments(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        out = []
        for s in range(len(self.atoms)):
            if seen[s]:
                continue
            comp = []
            seen[s] = True
            stack = [s]
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.neighbors[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out

    def has_stereo(self) -> bool:
        return any(a.chiral_tag for a in self.atoms) or any(b.stereo for b in self.bonds)

    def with_atoms(self, atoms: Sequence[Atom]) -> "Molecule":
        return self._same_graph(atoms, self.bonds)

    def with_bonds(self, bonds: Sequence[Bond]) -> "Molecule":
        """Replace bond labels; endpoints must match the current bonds one for one."""
        return self._same_graph(self.atoms, bonds)

    def permuted(self, order: Sequence[int]) -> "Molecule":
        """Renumber atoms so that new atom ``k`` is old atom ``order[k]``."""
        if sorted(order) != list(range(len(self.atoms))):
            raise ValueError("order must be a permutation of atom indices")
        new_of = {old: new for new, old in enumerate(order)}
        atoms = [self.atoms[old] for old in order]
        bonds = []
        for b in self.bonds:
            refs = None
            if b.stereo_atoms is not None:
                refs = (new_of[b.stereo_atoms[0]], new_of[b.stereo_atoms[1]])
            bonds.append(replace(b, begin=new_of[b.begin], end=new_of[b.end], stereo_atoms=refs))
        neighbors = [tuple(new_of[j] for j in self.neighbors[old]) for old in order]
        return Molecule(tuple(atoms), tuple(bonds), tuple(neighbors), self.multi_fragment)

    def subgraph(self, keep: Sequence[int]) -> "Molecule":
        """Induced sub-molecule on ``keep`` (used for connected fragments)."""
        keep = list(keep)
        new_of = {old: new for new, old in enumerate(keep)}
        bonds = []
        for b in self.bonds:
            if b.begin in new_of and b.end in new_of:
                refs = None
                if b.stereo_atoms is not None and all(r in new_of for r in b.stereo_atoms):
                    refs = (new_of[b.stereo_atoms[0]], new_of[b.stereo_atoms[1]])
                bonds.append(
                    replace(
                        b,
                        begin=new_of[b.begin],
                        end=new_of[b.end],
                        stereo=b.stereo if refs else BondStereo.NONE,
                        stereo_atoms=refs,
                    )
                )
        neighbors = [tuple(new_of[j] for j in self.neighbors[old] if j in new_of) for old in keep]
        atoms = [self.atoms[old] for old in keep]
        mol = Molecule(tuple(atoms), tuple(bonds), tuple(neighbors), False)
        return replace(mol, multi_fragment=len(mol.fragments()) > 1)


def permutation_parity(seq: Sequence[int], target: Sequence[int]) -> int:
    """Parity (0 even, 1 odd) of the permutation turning ``seq`` into ``target``."""
    pos = {v: k for k, v in enumerate(target)}
    perm = [pos[v] for v in seq]
    parity = 0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def stereo_relative(bond: Bond, ref_begin: int, ref_end: int) -> BondStereo:
    """Geometry of ``bond`` expressed against a different pair of reference atoms.

    Each endpoint of an sp2 centre has at most two substituents besides the
    double-bond partner, so swapping to the other substituent flips cis/trans.
    """
    if not bond.stereo or bond.stereo_atoms is None:
        return BondStereo.NONE
    flips = (ref_begin != bond.stereo_atoms[0]) + (ref_end != bond.stereo_atoms[1])
    return bond.stereo if flips % 2 == 0 else bond.stereo.flipped()


def _evolve(obj, **changes):
    """Fast ``dataclasses.replace`` for internal label changes that keep an object valid."""
    new = object.__new__(type(obj))
    new.__dict__.update(obj.__dict__)
    new.__dict__.update(changes)
    return new


# --------------------------------------------------------------------------
# rings


def ring_bond_mask(mol: Molecule) -> list[bool]:
    """``mask[k]`` is True when bond ``k`` lies on a cycle (is not a bridge)."""
    n = len(mol.atoms)
    disc = [-1] * n
    low = [0] * n
    is_bridge = [False] * len(mol.bonds)
    t = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = t
        t += 1
        # iterative DFS: (vertex, parent bond index, neighbor iterator)
        inc = mol.incident_index
        stack = [(root, -1, iter(zip(mol.neighbors[root], inc[root])))]
        while stack:
            v, pb, it = stack[-1]
            advanced = False
            for w, k in it:
                if k == pb:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = t
                    t += 1
                    stack.append((w, k, iter(zip(mol.neighbors[w], inc[w]))))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    low[u] = min(low[u], low[v])
                    if low[v] > disc[u]:
                        is_bridge[pb] = True
    return [not x for x in is_bridge]


def chordless_cycles(adj: dict[int, set[int]], max_len: int) -> list[tuple[int, ...]]:
    """All chordless cycles of length 3..max_len in an undirected graph.

    Each cycle is reported once, rotated to start at its smallest vertex and
    oriented so that its second vertex is smaller than its last.
    """
    cycles = []
    for s in sorted(adj):
        # paths start at s and only use vertices > s
        stack = [(s, w) for w in sorted(adj[s]) if w > s]
        stack = [list(p) for p in stack]
        while stack:
            path = stack.pop()
            last = path[-1]
            for w in sorted(adj[last]):
                if w <= s or w in path:
                    continue
                # w must not touch interior path vertices (that would be a chord)
                if any(w in adj[p] for p in path[1:-1]):
                    continue
                closes = s in adj[w]
                if closes:
                    if len(path) >= 2 and path[1] < w:
                        cycles.append(tuple(path) + (w,))
                    continue
                if len(path) + 1 < max_len:
                    stack.append(path + [w])
    return cycles


# --------------------------------------------------------------------------
# kekulization / hydrogens / aromaticity


def _needs_pi_bond(mol: Molecule, i: int) -> bool:
    """Whether aromatic atom ``i`` must receive a double bond on kekulization."""
    atom = mol.atoms[i]
    total = 0
    for b in mol.incident(i):
        if b.order in (BondOrder.DOUBLE, BondOrder.TRIPLE):
            return False
        total += b.order.valence
    total += atom.h
    vals = allowed_valences(atom.element, atom.charge)
    if vals is None:
        return False
    for v in vals:
        if v >= total:
            return v - total >= 1
    raise ValenceError(f"atom {i} ({atom.element}) exceeds its valence")


def _perfect_matching(nodes: list[int], adj: dict[int, list[int]]) -> dict[int, int] | None:
    mate: dict[int, int] = {}
    budget = [200_000]

    def solve() -> bool:
        free = [v for v in nodes if v not in mate]
        if not free:
            return True
        budget[0] -= 1
        if budget[0] < 0:
            raise _BudgetExceeded
        v = min(free, key=lambda u: (sum(1 for w in adj[u] if w not in mate), u))
        for w in adj[v]:
            if w in mate:
                continue
            mate[v] = w
            mate[w] = v
            if solve():
                return True
            del mate[v]
            del mate[w]
        return False

    try:
        return dict(mate) if solve() else None
    except _BudgetExceeded:
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(nodes)
        g.add_edges_from((u, w) for u in nodes for w in adj[u] if u < w)
        m = nx.max_weight_matching(g, maxcardinality=True)
        if 2 * len(m) != len(nodes):
            return None
        out = {}
        for u, w in m:
            out[u] = w
            out[w] = u
        return out
    except RecursionError:
        return None


class _BudgetExceeded(Exception):
    pass


def kekulize(mol: Molecule) -> Molecule:
    """Replace aromatic bonds by an explicit single/double assignment.

    Aromatic flags are cleared. Raises :class:`AromaticityError` when the
    aromatic atoms needing a pi bond admit no perfect matching, or when an
    aromatic atom is not on a ring.
    """
    arom_atoms = [i for i, a in enumerate(mol.atoms) if a.aromatic]
    arom_bonds = [k for k, b in enumerate(mol.bonds) if b.order is BondOrder.AROMATIC]
    if not arom_atoms and not arom_bonds:
        return mol
    for k in arom_bonds:
        b = mol.bonds[k]
        if not (mol.atoms[b.begin].aromatic and mol.atoms[b.end].aromatic):
            raise AromaticityError(f"aromatic bond {b.begin}-{b.end} joins a non-aromatic atom")
    mask = mol.ring_mask
    for i in arom_atoms:
        if not any(mask[k] for k in mol.incident_index[i]):
            raise AromaticityError(f"aromatic atom {i} is not in a ring")
    need = {i for i in arom_atoms if _needs_pi_bond(mol, i)}
    adj: dict[int, list[int]] = {i: [] for i in need}
    for k in arom_bonds:
        b = mol.bonds[k]
        if b.begin in need and b.end in need:
            adj[b.begin].append(b.end)
            adj[b.end].append(b.begin)
    for v in adj:
        adj[v].sort()
    mate = _perfect_matching(sorted(need), adj)
    if mate is None:
        raise AromaticityError("cannot kekulize aromatic system")
    bonds = list(mol.bonds)
    for k in arom_bonds:
        b = bonds[k]
        order = BondOrder.DOUBLE if mate.get(b.begin) == b.end else BondOrder.SINGLE
        bonds[k] = _evolve(b, order=order, stereo=BondStereo.NONE, stereo_atoms=None)
    atoms = [_evolve(a, aromatic=False) if a.aromatic else a for a in mol.atoms]
    return mol._same_graph(atoms, bonds)


def assign_hydrogens(mol: Molecule) -> Molecule:
    """Fill unset hydrogen counts from the valence table and validate all atoms.

    Expects a Kekule (non-aromatic) molecule.
    """
    atoms = list(mol.atoms)
    for i, atom in enumerate(atoms):
        total = mol.bond_valence(i)
        vals = allowed_valences(atom.element, atom.charge)
        if atom.implicit_h is None:
            h = 0
            if vals is not None:
                for v in vals:
                    if v >= total:
                        h = v - total
                        break
                else:
                    raise ValenceError(
                        f"atom {i} ({atom.element}) has bond valence {total} > {max(vals)}"
                    )
            atoms[i] = _evolve(atom, implicit_h=h)
        elif vals is not None and total + atom.implicit_h > max(vals):
            raise ValenceError(
                f"atom {i} ({atom.element}) has valence {total + atom.implicit_h} > {max(vals)}"
            )
    return mol.with_atoms(atoms)


MAX_AROMATIC_RING = 8
_EXOCYCLIC_ACCEPTORS = frozenset("O S Se N".split())


def _pi_electrons(mol: Molecule, i: int, ring_mask: list[bool]) -> int | None:
    atom = mol.atoms[i]
    if atom.element not in AROMATIC_ELEMENTS:
        return None
    doubles = []
    for j, k in zip(mol.neighbors[i], mol.incident_index[i]):
        order = mol.bonds[k].order
        if order is BondOrder.TRIPLE:
            return None
        if order is BondOrder.DOUBLE:
            doubles.append((j, k))
    if len(doubles) > 1:
        return None
    if doubles:
        j, k = doubles[0]
        if ring_mask[k]:
            return 1
        if atom.element == "C" and mol.atoms[j].element in _EXOCYCLIC_ACCEPTORS:
            return 0
        return None
    conn = mol.degree(i) + atom.h
    el, q = atom.element, atom.charge
    if el in ("N", "P", "As") and q == 0 and conn == 3:
        return 2
    if el in ("N", "P", "As") and q == -1 and conn == 2:
        return 2
    if el in ("O", "S", "Se") and q == 0 and conn == 2:
        return 2
    if el == "C" and q == -1 and conn == 3:
        return 2
    if el == "C" and q == 1 and conn == 3:
        return 0
    if el == "B" and q == 0 and conn == 3:
        return 0
    return None


def perceive_aromaticity(mol: Molecule) -> Molecule:
    """Flag every chordless ring (up to 8 atoms) satisfying the 4n+2 rule as aromatic.

    Pi-electron counts only depend on whether an atom's double bond lies on
    some ring, so the result does not depend on which Kekule structure the
    input happened to use.
    """
    if not mol.bonds:
        return mol
    mask = mol.ring_mask
    if not any(mask):
        return mol
    electrons: dict[int, int] = {}
    inc = mol.incident_index
    for i in range(len(mol.atoms)):
        if any(mask[k] for k in inc[i]):
            e = _pi_electrons(mol, i, mask)
            if e is not None:
                electrons[i] = e
    if len(electrons) < 3:
        return mol
    adj: dict[int, set[int]] = {i: set() for i in electrons}
    for k, b in enumerate(mol.bonds):
        if mask[k] and b.begin in electrons and b.end in electrons:
            adj[b.begin].add(b.end)
            adj[b.end].add(b.begin)
    arom_atoms: set[int] = set()
    arom_bonds: set[int] = set()
    for cyc in chordless_cycles(adj, MAX_AROMATIC_RING):
        total = sum(electrons[i] for i in cyc)
        if total >= 2 and (total - 2) % 4 == 0:
            arom_atoms.update(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                arom_bonds.add(mol.bond_index(a, b))
    if not arom_atoms:
        return mol
    atoms = [_evolve(a, aromatic=True) if i in arom_atoms else a for i, a in enumerate(mol.atoms)]
    bonds = [
        _evolve(b, order=BondOrder.AROMATIC, stereo=BondStereo.NONE, stereo_atoms=None)
        if k in arom_bonds
        else b
        for k, b in enumerate(mol.bonds)
    ]
    return mol._same_graph(atoms, bonds)


def _clean_bond_stereo(mol: Molecule) -> Molecule:
    """Drop double-bond geometry that no longer refers to a valid configuration."""
    changed = False
    bonds = list(mol.bonds)
    for k, b in enumerate(bonds):
        if not b.stereo:
            continue
        ok = (
            b.order is BondOrder.DOUBLE
            and b.stereo_atoms is not None
            and b.stereo_atoms[0] in mol.neighbors[b.begin]
            and b.stereo_atoms[1] in mol.neighbors[b.end]
            and b.stereo_atoms[0] != b.end
            and b.stereo_atoms[1] != b.begin
        )
        if not ok:
            bonds[k] = _evolve(b, stereo=BondStereo.NONE, stereo_atoms=None)
            changed = True
    return mol.with_bonds(bonds) if changed else mol


def normalize(mol: Molecule) -> Molecule:
    """Kekulize, assign hydrogens, validate valences and re-perceive aromaticity.

    Idempotent: the aromatic atom set depends only on the graph, not on the
    Kekule form, so normalizing twice yields the same molecule.
    """
    m = kekulize(mol)
    m = assign_hydrogens(m)
    m = perceive_aromaticity(m)
    return _clean_bond_stereo(m)


def strip_stereo(mol: Molecule) -> Molecule:
    """Remove all tetrahedral tags and double-bond geometry."""
    if not mol.has_stereo():
        return mol
    atoms = [_evolve(a, chiral_tag=ChiralTag.NONE) if a.chiral_tag else a for a in mol.atoms]
    bonds = [
        _evolve(b, stereo=BondStereo.NONE, stereo_atoms=None) if b.stereo else b for b in mol.bonds
    ]
    return mol._same_graph(atoms, bonds)


# --------------------------------------------------------------------------
# isomorphism oracle


def _atom_label(mol: Molecule, i: int) -> tuple:
    a = mol.atoms[i]
    return (a.element, a.charge, a.isotope or 0, a.h, a.aromatic, bool(a.chiral_tag), mol.degree(i))


def _stereo_consistent(a: Molecule, b: Molecule, f: list[int]) -> bool:
    for i, atom in enumerate(a.atoms):
        if atom.chiral_tag:
            mapped = [f[j] for j in a.neighbors[i]]
            parity = permutation_parity(mapped, b.neighbors[f[i]])
            tag = atom.chiral_tag if parity == 0 else atom.chiral_tag.flipped()
            if tag != b.atoms[f[i]].chiral_tag:
                return False
    for bond in a.bonds:
        if not bond.stereo:
            continue
        other = b.bond_between(f[bond.begin], f[bond.end])
        x, y = bond.stereo_atoms
        if other.begin == f[bond.begin]:
            rel = stereo_relative(other, f[x], f[y])
        else:
            rel = stereo_relative(other, f[y], f[x])
        if rel != bond.stereo:
            return False
    return True


def isomorphic(a: Molecule, b: Molecule, max_atoms: int = 64) -> bool:
    """Exhaustive backtracking isomorphism test including stereo parities.

    Both molecules should already be normalized. Intended as a reference
    oracle for small molecules.
    """
    for m in (a, b):
        if len(m.atoms) > max_atoms:
            raise SizeLimitError(f"molecule has {len(m.atoms)} atoms (cap {max_atoms})")
    n = len(a.atoms)
    if n != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    la = [_atom_label(a, i) for i in range(n)]
    lb = [_atom_label(b, i) for i in range(n)]
    if sorted(la) != sorted(lb):
        return False

    def bond_label(bond: Bond) -> tuple:
        return (bond.order, bool(bond.stereo))

    if sorted(bond_label(x) for x in a.bonds) != sorted(bond_label(x) for x in b.bonds):
        return False
    if n == 0:
        return True

    # matching order: BFS per component, rarest label first
    freq: dict[tuple, int] = {}
    for lab in la:
        freq[lab] = freq.get(lab, 0) + 1
    order: list[int] = []
    parent: dict[int, int | None] = {}
    placed = [False] * n
    for root in sorted(range(n), key=lambda i: (freq[la[i]], i)):
        if placed[root]:
            continue
        placed[root] = True
        parent[root] = None
        q = deque([root])
        while q:
            v = q.popleft()
            order.append(v)
            for w in a.neighbors[v]:
                if not placed[w]:
                    placed[w] = True
                    parent[w] = v
                    q.append(w)

    by_label: dict[tuple, list[int]] = {}
    for j in range(n):
        by_label.setdefault(lb[j], []).append(j)
    f = [-1] * n
    used = [False] * n

    def feasible(i: int, j: int) -> bool:
        count = 0
        for u in a.neighbors[i]:
            if f[u] < 0:
                continue
            count += 1
            bb = b.bond_between(j, f[u])
            if bb is None or bond_label(bb) != bond_label(a.bond_between(i, u)):
                return False
        mapped_b = sum(1 for w in b.neighbors[j] if used[w])
        return mapped_b == count

    def extend(depth: int) -> bool:
        if depth == n:
            return _stereo_consistent(a, b, f)
        i = order[depth]
        p = parent[i]
        cands = b.neighbors[f[p]] if p is not None else by_label[la[i]]
        for j in cands:
            if used[j] or lb[j] != la[i] or not feasible(i, j):
                continue
            f[i] = j
            used[j] = True
            if extend(depth + 1):
                return True
            f[i] = -1
            used[j] = False
        return False

    return extend(0)
