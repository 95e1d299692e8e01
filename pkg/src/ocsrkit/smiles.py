"""SMILES reading, writing and canonicalization.

Supported grammar: organic-subset atoms, bracket atoms
``[isotope symbol chirality Hcount charge :class]``, bonds ``- = # : / \\``,
branches, ring closures (digits and ``%nn``) and dot-separated fragments.
Wildcards, ``$`` bonds and non-tetrahedral chirality classes are rejected.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

import numpy as np

from . import canon
from .errors import (
    AromaticityError,
    MoleculeError,
    SmilesAromaticityError,
    SmilesSyntaxError,
    SmilesValenceError,
    UnclosedBranchError,
    UnclosedRingError,
    UnsupportedFeatureError,
    ValenceError,
)
from .molgraph import (
    AROMATIC_ELEMENTS,
    ELEMENTS,
    ORGANIC_SUBSET,
    Atom,
    Bond,
    BondOrder,
    BondStereo,
    ChiralTag,
    Molecule,
    allowed_valences,
    normalize,
    permutation_parity,
    strip_stereo,
)

_ELEMENT_SET = frozenset(ELEMENTS)
_AROMATIC_ORGANIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_AROMATIC_BRACKET = {"se": "Se", "as": "As", **_AROMATIC_ORGANIC}
_BOND_CHARS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE,
               ":": BondOrder.AROMATIC, "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE}

_UP, _DOWN = 1, -1


# --------------------------------------------------------------------------
# parsing


def _parse_bracket(s: str, i: int) -> tuple[Atom, int, int]:
    """Parse a bracket atom starting at ``s[i] == '['``.

    Returns the atom, its explicit hydrogen count and the index after ``]``.
    """
    start = i
    i += 1
    n = len(s)
    j = i
    while j < n and s[j].isdigit():
        j += 1
    isotope = int(s[i:j]) if j > i else None
    if isotope == 0:
        isotope = None
    i = j
    if i >= n:
        raise SmilesSyntaxError("unterminated bracket atom", start)
    aromatic = False
    if s[i].isupper():
        if i + 1 < n and s[i + 1].islower() and s[i : i + 2] in _ELEMENT_SET:
            symbol = s[i : i + 2]
            i += 2
        elif s[i] in _ELEMENT_SET:
            symbol = s[i]
            i += 1
        else:
            raise SmilesSyntaxError(f"unknown element in bracket atom", i)
    elif s[i : i + 2] in _AROMATIC_BRACKET:
        symbol = _AROMATIC_BRACKET[s[i : i + 2]]
        aromatic = True
        i += 2
    elif s[i] in _AROMATIC_BRACKET:
        symbol = _AROMATIC_BRACKET[s[i]]
        aromatic = True
        i += 1
    elif s[i] == "*":
        raise SmilesSyntaxError("wildcard atoms are not supported", i)
    else:
        raise SmilesSyntaxError("bad bracket atom symbol", i)
    chiral = ChiralTag.NONE
    if s.startswith("@@", i):
        chiral = ChiralTag.CW
        i += 2
    elif s.startswith("@", i):
        chiral = ChiralTag.CCW
        i += 1
    if chiral and i < n and s[i] in "TASO":
        raise SmilesSyntaxError("only tetrahedral @/@@ chirality is supported", i)
    hcount = 0
    if i < n and s[i] == "H":
        i += 1
        j = i
        while j < n and s[j].isdigit():
            j += 1
        hcount = int(s[i:j]) if j > i else 1
        i = j
    charge = 0
    if i < n and s[i] in "+-":
        sign = 1 if s[i] == "+" else -1
        j = i + 1
        if j < n and s[j].isdigit():
            k = j
            while k < n and s[k].isdigit():
                k += 1
            charge = sign * int(s[j:k])
            i = k
        else:
            count = 1
            while j < n and s[j] == s[i]:
                count += 1
                j += 1
            charge = sign * count
            i = j
    if i < n and s[i] == ":":
        j = i + 1
        while j < n and s[j].isdigit():
            j += 1
        if j == i + 1:
            raise SmilesSyntaxError("atom class needs digits", i)
        i = j
    if i >= n or s[i] != "]":
        raise SmilesSyntaxError("malformed bracket atom", start)
    try:
        atom = Atom(symbol, charge, isotope, hcount, aromatic, chiral)
    except MoleculeError as exc:
        raise SmilesSyntaxError(str(exc), start) from None
    return atom, hcount, i + 1


def parse(text: str) -> Molecule:
    """Parse SMILES text into a normalized :class:`Molecule`.

    Raises a subclass of :class:`~ocsrkit.errors.SmilesError` on any failure,
    so callers can treat "parse succeeds" as chemical validity.
    """
    if not isinstance(text, str):
        raise SmilesSyntaxError("SMILES must be a string")
    s = text.strip()
    if not s:
        raise SmilesSyntaxError("empty SMILES")
    n = len(s)
    atoms: list[Atom] = []
    nbrs: list[list[int | None]] = []
    bond_list: list[list] = []  # [begin, end, order]
    bond_keys: dict[tuple[int, int], int] = {}
    directional: list[tuple[int, int, str]] = []
    rings: dict[int, tuple[int, str | None, int, int]] = {}
    branch_stack: list[tuple[int, int]] = []
    bracket_h_after_prev: list[bool] = []
    prev: int | None = None
    pending: tuple[str, int] | None = None
    multi = False

    def add_bond(a: int, b: int, sym: str | None, pos: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key in bond_keys:
            raise SmilesSyntaxError("duplicate bond between the same atoms", pos)
        if sym is None:
            order = BondOrder.AROMATIC if atoms[a].aromatic and atoms[b].aromatic else BondOrder.SINGLE
        else:
            order = _BOND_CHARS[sym]
        bond_keys[key] = len(bond_list)
        bond_list.append([a, b, order])
        return bond_keys[key]

    i = 0
    while i < n:
        c = s[i]
        if c == "[" or c in "BCNOPSFI" or c in _AROMATIC_ORGANIC:
            pos = i
            hflag = False
            if c == "[":
                atom, hcount, i = _parse_bracket(s, i)
                hflag = hcount > 0
            else:
                if c == "C" and i + 1 < n and s[i + 1] == "l":
                    sym, i = "Cl", i + 2
                elif c == "B" and i + 1 < n and s[i + 1] == "r":
                    sym, i = "Br", i + 2
                else:
                    sym, i = c, i + 1
                if sym in _AROMATIC_ORGANIC:
                    atom = Atom(_AROMATIC_ORGANIC[sym], aromatic=True)
                else:
                    atom = Atom(sym)
            idx = len(atoms)
            atoms.append(atom)
            nbrs.append([])
            bracket_h_after_prev.append(hflag and prev is not None)
            if prev is not None:
                sym = pending[0] if pending else None
                add_bond(prev, idx, sym, pos)
                if sym in ("/", "\\"):
                    directional.append((prev, idx, sym))
                nbrs[prev].append(idx)
                nbrs[idx].append(prev)
            elif pending is not None:
                raise SmilesSyntaxError("bond symbol without a preceding atom", pending[1])
            pending = None
            prev = idx
        elif c.isdigit() or c == "%":
            pos = i
            if c == "%":
                if i + 2 < n and s[i + 1].isdigit() and s[i + 2].isdigit():
                    label = int(s[i + 1 : i + 3])
                    i += 3
                else:
                    raise SmilesSyntaxError("'%' must be followed by two digits", i)
            else:
                label = int(c)
                i += 1
            if prev is None:
                raise SmilesSyntaxError("ring closure without an atom", pos)
            sym = pending[0] if pending else None
            pending = None
            if label in rings:
                other, osym, slot, _ = rings.pop(label)
                if other == prev:
                    raise SmilesSyntaxError("ring closure to the same atom", pos)
                if osym and sym and _BOND_CHARS[osym] != _BOND_CHARS[sym]:
                    raise SmilesSyntaxError("conflicting ring-closure bond symbols", pos)
                add_bond(other, prev, osym or sym, pos)
                if osym in ("/", "\\"):
                    directional.append((other, prev, osym))
                elif sym in ("/", "\\"):
                    directional.append((prev, other, sym))
                nbrs[other][slot] = prev
                nbrs[prev].append(other)
            else:
                rings[label] = (prev, sym, len(nbrs[prev]), pos)
                nbrs[prev].append(None)
        elif c in _BOND_CHARS:
            if pending is not None:
                raise SmilesSyntaxError("two consecutive bond symbols", i)
            if prev is None:
                raise SmilesSyntaxError("bond symbol without a preceding atom", i)
            pending = (c, i)
            i += 1
        elif c == "(":
            if prev is None or pending is not None:
                raise SmilesSyntaxError("branch must follow an atom", i)
            branch_stack.append((prev, i))
            i += 1
        elif c == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unmatched ')'", i)
            if pending is not None:
                raise SmilesSyntaxError("branch ends with a bond symbol", i)
            if s[i - 1] == "(":
                raise SmilesSyntaxError("empty branch", i)
            prev = branch_stack.pop()[0]
            i += 1
        elif c == ".":
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before '.'", i)
            if prev is None:
                raise SmilesSyntaxError("'.' without a preceding atom", i)
            prev = None
            multi = True
            i += 1
        elif c == "$":
            raise SmilesSyntaxError("quadruple bonds are not supported", i)
        elif c == "*":
            raise SmilesSyntaxError("wildcard atoms are not supported", i)
        else:
            raise SmilesSyntaxError(f"unexpected character {c!r}", i)

    if pending is not None:
        raise SmilesSyntaxError("SMILES ends with a bond symbol", pending[1])
    if rings:
        label, (_, _, _, pos) = min(rings.items(), key=lambda kv: kv[1][3])
        raise UnclosedRingError(f"ring closure {label} never closed", pos)
    if branch_stack:
        raise UnclosedBranchError("unclosed branch", branch_stack[-1][1])
    if not atoms:
        raise SmilesSyntaxError("no atoms")

    for i, atom in enumerate(atoms):
        if atom.chiral_tag and bracket_h_after_prev[i]:
            # stored convention puts the hydrogen first; SMILES puts it after the
            # preceding atom
            atoms[i] = replace(atom, chiral_tag=atom.chiral_tag.flipped())

    bonds = [Bond(a, b, order) for a, b, order in bond_list]
    bonds = _apply_directional(atoms, bonds, nbrs, directional)
    try:
        mol = Molecule.build(atoms, bonds, nbrs, multi_fragment=True if multi else None)
        return normalize(mol)
    except ValenceError as exc:
        raise SmilesValenceError(str(exc)) from None
    except AromaticityError as exc:
        raise SmilesAromaticityError(str(exc)) from None
    except MoleculeError as exc:
        raise SmilesSyntaxError(str(exc)) from None


def _apply_directional(atoms, bonds, nbrs, directional) -> list[Bond]:
    """Turn '/' and '\\' marks into cis/trans geometry on double bonds."""
    if not directional:
        return bonds
    side: dict[tuple[int, int], int] = {}
    for u, v, ch in directional:
        up = _UP if ch == "/" else _DOWN
        side[(u, v)] = up  # v relative to u
        side[(v, u)] = -up
    out = list(bonds)
    for k, b in enumerate(bonds):
        if b.order is not BondOrder.DOUBLE:
            continue
        refs = []
        for p, q in ((b.begin, b.end), (b.end, b.begin)):
            marks = [(x, side[(p, x)]) for x in nbrs[p] if x != q and (p, x) in side]
            if len(marks) == 2 and marks[0][1] == marks[1][1]:
                raise SmilesSyntaxError("conflicting bond directions around a double bond")
            refs.append(marks[0] if marks else None)
        if refs[0] is None or refs[1] is None:
            continue
        (x, sx), (y, sy) = refs
        stereo = BondStereo.CIS if sx == sy else BondStereo.TRANS
        out[k] = replace(b, stereo=stereo, stereo_atoms=(x, y))
    return out


# --------------------------------------------------------------------------
# writing


def _inferred_organic_h(mol: Molecule, i: int) -> int | None:
    """Hydrogen count the parser would assign to atom ``i`` written without brackets."""
    atom = mol.atoms[i]
    vals = allowed_valences(atom.element, 0)
    total = 0
    explicit_pi = False
    bonds = mol.bonds
    for k in mol.incident_index[i]:
        order = bonds[k].order
        total += order.valence
        if order in (BondOrder.DOUBLE, BondOrder.TRIPLE):
            explicit_pi = True
    if atom.aromatic and not explicit_pi:
        v = next((v for v in vals if v >= total), None)
        if v is None:
            return None
        if v - total >= 1:
            total += 1
    v = next((v for v in vals if v >= total), None)
    return None if v is None else v - total


def _has_pi_in_kekule(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    total = atom.h
    bonds = mol.bonds
    for k in mol.incident_index[i]:
        order = bonds[k].order
        if order in (BondOrder.DOUBLE, BondOrder.TRIPLE):
            return False
        total += order.valence
    vals = allowed_valences(atom.element, atom.charge) or ()
    v = next((v for v in vals if v >= total), None)
    return v is not None and v - total >= 1


def _atom_token(mol: Molecule, i: int, chiral: ChiralTag) -> str:
    atom = mol.atoms[i]
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if (
        atom.element in ORGANIC_SUBSET
        and atom.charge == 0
        and atom.isotope is None
        and not chiral
        and _inferred_organic_h(mol, i) == atom.h
    ):
        if not atom.aromatic or _has_pi_in_kekule(mol, i) == _organic_needs_pi(mol, i):
            return symbol
    parts = ["["]
    if atom.isotope:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    if chiral:
        parts.append("@" if chiral is ChiralTag.CCW else "@@")
    if atom.h:
        parts.append("H" if atom.h == 1 else f"H{atom.h}")
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        parts.append(sign if abs(atom.charge) == 1 else f"{sign}{abs(atom.charge)}")
    parts.append("]")
    return "".join(parts)


def _organic_needs_pi(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    vals = allowed_valences(atom.element, 0)
    total = 0
    bonds = mol.bonds
    for k in mol.incident_index[i]:
        order = bonds[k].order
        if order in (BondOrder.DOUBLE, BondOrder.TRIPLE):
            return False
        total += order.valence
    v = next((v for v in vals if v >= total), None)
    return v is not None and v - total >= 1


class _Writer:
    def __init__(self, mol: Molecule, ranks: Sequence[int]):
        self.mol = mol
        self.rank = list(ranks)
        n = len(mol.atoms)
        self.sorted_nbrs = [sorted(mol.neighbors[i], key=self.rank.__getitem__) for i in range(n)]
        self.visited = [False] * n
        self.children: list[list[int]] = [[] for _ in range(n)]
        self.parent: list[int | None] = [None] * n
        self.ring_open: list[list[int]] = [[] for _ in range(n)]
        self.ring_close: list[list[int]] = [[] for _ in range(n)]
        self.closure_keys: set[tuple[int, int]] = set()
        self.preorder: list[int] = []
        self.pos = [0] * n

    def plan(self, root: int) -> None:
        # iterative DFS reproducing recursive visiting order
        self.visited[root] = True
        self.preorder.append(root)
        stack = [(root, iter(self.sorted_nbrs[root]))]
        while stack:
            u, it = stack[-1]
            for v in it:
                if v == self.parent[u]:
                    continue
                if self.visited[v]:
                    key = (u, v) if u < v else (v, u)
                    if key not in self.closure_keys:
                        self.closure_keys.add(key)
                        self.ring_open[v].append(u)
                        self.ring_close[u].append(v)
                    continue
                self.visited[v] = True
                self.parent[v] = u
                self.children[u].append(v)
                self.preorder.append(v)
                stack.append((v, iter(self.sorted_nbrs[v])))
                break
            else:
                stack.pop()

    def assign_directions(self) -> dict[tuple[int, int], str]:
        """Choose '/' or '\\' characters encoding every double-bond geometry."""
        mol = self.mol
        pos = self.pos
        stereo_bonds = [b for b in mol.bonds if b.stereo]
        if not stereo_bonds:
            return {}
        endpoint_partner: dict[int, int] = {}
        plain_double_ends: set[int] = set()
        for b in mol.bonds:
            if b.stereo:
                endpoint_partner[b.begin] = b.end
                endpoint_partner[b.end] = b.begin
            elif b.order is BondOrder.DOUBLE:
                plain_double_ends.update((b.begin, b.end))
        rel: dict[tuple[int, int], int] = {}

        def consistent(trial: dict[tuple[int, int], int]) -> bool:
            touched = {p for p, _ in trial}
            for t in touched:
                if t in endpoint_partner:
                    partner = endpoint_partner[t]
                    sides = [trial[(t, s)] for s in mol.neighbors[t] if s != partner and (t, s) in trial]
                    if len(sides) == 2 and sides[0] == sides[1]:
                        return False
                elif t in plain_double_ends:
                    # marks on both ends of a plain double bond would invent geometry
                    for b in mol.bonds:
                        if b.order is BondOrder.DOUBLE and not b.stereo and t in (b.begin, b.end):
                            o = b.other(t)
                            if any((o, s) in trial for s in mol.neighbors[o] if s != t) and any(
                                (t, s) in trial for s in mol.neighbors[t] if s != o
                            ):
                                return False
            return True

        for b in sorted(stereo_bonds, key=lambda b: min(pos[b.begin], pos[b.end])):
            # orient by written position so the choice depends only on ranks
            if pos[b.begin] <= pos[b.end]:
                a, c = b.begin, b.end
                x, y = b.stereo_atoms
            else:
                a, c = b.end, b.begin
                y, x = b.stereo_atoms
            opts_a = [s for s in self.sorted_nbrs[a] if s != c]
            opts_c = [s for s in self.sorted_nbrs[c] if s != a]
            marked_a = [s for s in opts_a if (a, s) in rel]
            marked_c = [s for s in opts_c if (c, s) in rel]
            cand_a = marked_a[:1] + [s for s in opts_a if s not in marked_a[:1]]
            cand_c = marked_c[:1] + [s for s in opts_c if s not in marked_c[:1]]
            done = False
            for na in cand_a:
                for nc in cand_c:
                    flips = (na != x) + (nc != y)
                    want = b.stereo if flips % 2 == 0 else b.stereo.flipped()
                    same = want is BondStereo.CIS
                    trial = dict(rel)
                    sa = trial.get((a, na))
                    sc = trial.get((c, nc))
                    if sa is None and sc is None:
                        # first mark on this bond is written as '/'
                        sa = _UP if pos[a] < pos[na] else -_UP
                    if sa is None:
                        sa = sc if same else -sc
                    if sc is None:
                        sc = sa if same else -sa
                    if (sa == sc) != same:
                        continue
                    for p, q, sd in ((a, na, sa), (c, nc, sc)):
                        trial[(p, q)] = sd
                        trial[(q, p)] = -sd
                    if consistent(trial):
                        rel = trial
                        done = True
                        break
                if done:
                    break
            if not done:
                raise UnsupportedFeatureError("cannot encode double-bond geometry with '/' and '\\'")
        chars = {}
        for (p, q), sd in rel.items():
            if pos[p] < pos[q]:
                chars[(p, q)] = "/" if sd == _UP else "\\"
        return chars

    def bond_symbol(self, u: int, v: int, chars: dict) -> str:
        b = self.mol.bond_between(u, v)
        if b.order is BondOrder.DOUBLE:
            return "="
        if b.order is BondOrder.TRIPLE:
            return "#"
        if b.order is BondOrder.AROMATIC:
            aromatic = self.mol.atoms[u].aromatic and self.mol.atoms[v].aromatic
            return "" if aromatic else ":"
        ch = chars.get((u, v))
        if ch:
            return ch
        if self.mol.atoms[u].aromatic and self.mol.atoms[v].aromatic:
            return "-"
        return ""

    def emit(self, roots: list[int]) -> str:
        for r in roots:
            self.plan(r)
        for k, u in enumerate(self.preorder):
            self.pos[u] = k
        chars = self.assign_directions()
        out: list[str] = []
        free_digits: list[int] = []
        next_digit = [1]
        digit_of: dict[tuple[int, int], int] = {}

        def take_digit() -> int:
            if free_digits:
                free_digits.sort()
                return free_digits.pop(0)
            d = next_digit[0]
            next_digit[0] += 1
            return d

        def fmt(d: int) -> str:
            return str(d) if d < 10 else f"%{d}"

        mol = self.mol
        for r_idx, root in enumerate(roots):
            if r_idx:
                out.append(".")
            # explicit stack of actions to avoid recursion
            stack: list = [("atom", root)]
            while stack:
                kind, u = stack.pop()
                if kind == "text":
                    out.append(u)
                    continue
                p = self.parent[u]
                if p is not None:
                    out.append(self.bond_symbol(p, u, chars))
                closes = sorted(self.ring_close[u], key=self.rank.__getitem__)
                opens = sorted(self.ring_open[u], key=self.rank.__getitem__)
                written = ([p] if p is not None else []) + closes + opens + self.children[u]
                tag = mol.atoms[u].chiral_tag
                if tag:
                    parity = permutation_parity(written, mol.neighbors[u])
                    if mol.atoms[u].h and p is not None:
                        parity ^= 1
                    tag = tag if parity == 0 else tag.flipped()
                out.append(_atom_token(mol, u, tag))
                released = []
                for v in closes:
                    key = (u, v) if u < v else (v, u)
                    d = digit_of.pop(key)
                    out.append(fmt(d))
                    released.append(d)
                for v in opens:
                    key = (u, v) if u < v else (v, u)
                    d = take_digit()
                    digit_of[key] = d
                    out.append(self.bond_symbol(u, v, chars) + fmt(d))
                free_digits.extend(released)
                kids = self.children[u]
                # push in reverse so the first child is emitted first
                for j in range(len(kids) - 1, -1, -1):
                    v = kids[j]
                    if j < len(kids) - 1:
                        stack.append(("text", ")"))
                        stack.append(("atom", v))
                        stack.append(("text", "("))
                    else:
                        stack.append(("atom", v))
        return "".join(out)


def write(mol: Molecule, ranks: Sequence[int] | None = None) -> str:
    """Serialize ``mol`` as SMILES.

    Traversal starts in each fragment at the lowest-ranked atom and visits
    neighbours lowest rank first. ``ranks`` defaults to atom indices.
    """
    n = len(mol.atoms)
    if n == 0:
        raise UnsupportedFeatureError("cannot write an empty molecule")
    for i, atom in enumerate(mol.atoms):
        if atom.aromatic and atom.element not in AROMATIC_ELEMENTS:
            raise UnsupportedFeatureError(f"aromatic {atom.element} is not writable")
        if atom.chiral_tag and mol.degree(i) + atom.h not in (3, 4):
            raise UnsupportedFeatureError("tetrahedral tag on an atom without 3 or 4 neighbours")
    if ranks is None:
        ranks = list(range(n))
    if sorted(ranks) != list(range(n)):
        raise ValueError("ranks must be a permutation of 0..n-1")
    frags = mol.fragments()
    roots = sorted((min(f, key=ranks.__getitem__) for f in frags), key=ranks.__getitem__)
    return _Writer(mol, ranks).emit(roots)


def random_smiles(mol: Molecule, rng: np.random.Generator) -> str:
    """Write ``mol`` from a random start atom with shuffled neighbour order."""
    return write(mol, ranks=[int(r) for r in rng.permutation(len(mol.atoms))])


# --------------------------------------------------------------------------
# canonical forms


def canonical_smiles(mol: Molecule) -> str:
    """Canonical SMILES of an already-normalized molecule."""
    frags = mol.fragments()
    if len(frags) == 1:
        return write(mol, ranks=canon.canonical_ranks(mol))
    parts = []
    for f in frags:
        sub = mol.subgraph(f)
        parts.append(write(sub, ranks=canon.canonical_ranks(sub)))
    return ".".join(sorted(parts))


def canonicalize(s: str) -> str:
    """Canonical SMILES of ``s``; equal outputs iff the parsed graphs are isomorphic."""
    return canonical_smiles(parse(s))


def canonicalize_achiral(s: str) -> str:
    """Canonical SMILES after discarding tetrahedral and cis/trans information."""
    return canonical_smiles(strip_stereo(parse(s)))


def canonical_forms(s: str) -> tuple[str, str]:
    """``(canonicalize(s), canonicalize_achiral(s))`` from a single parse."""
    m = parse(s)
    full = canonical_smiles(m)
    return full, (canonical_smiles(strip_stereo(m)) if m.has_stereo() else full)


def has_stereo_markers(s: str) -> bool:
    """Whether the parsed molecule carries any tetrahedral or cis/trans stereo."""
    return parse(s).has_stereo()

