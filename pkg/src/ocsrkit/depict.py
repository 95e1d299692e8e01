"""2D layout and rasterization of molecules in two synthetic drawing styles.

Layout works in units of one standard bond length. Ring systems are built
from regular polygons (fused rings share an edge, bridged rings are closed
with circular arcs of unit chords) and then treated as rigid bodies.
Acyclic parts grow outward from a root at 120 degree angles, preferring
zig-zag continuations. Every placement step offers a short list of
candidate geometries; a step whose candidates all collide with
already-placed atoms triggers backtracking, bounded by an evaluation budget
after which the least-bad candidate is taken.

Double-bond geometry is honoured by the layout, and each tetrahedral centre
gets one wedge or hash bond chosen so that the drawing encodes the stored
parity.

Rasterization draws anti-aliased strokes from analytic distance fields and
labels heteroatoms with the embedded bitmap font, so output depends only on
(molecule, style, seed).
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import networkx as nx
import numpy as np
from PIL import Image
from scipy.optimize import brentq

from .errors import LayoutOverflowError, SizeLimitError
from .font import scaled_glyph
from .molgraph import (
    BondOrder,
    BondStereo,
    ChiralTag,
    Molecule,
    kekulize,
    ring_bond_mask,
    stereo_relative,
)

STYLE_VERSION = "style-v1"
DEFAULT_MAX_ATOMS = 100
MIN_CANVAS = 256
MAX_CANVAS = 1024

_CLASH = 0.6
_STEREO_VIOLATION = 1000.0
_BUDGET = 4000


class BondKind(enum.Enum):
    PLAIN = "plain"
    DOUBLE = "double"
    TRIPLE = "triple"
    WEDGE = "wedge"
    HASH = "hash"


@dataclass(frozen=True, eq=False)
class Layout:
    """Atom coordinates (bond-length units) plus how each bond is drawn.

    ``wedge_base[k]`` is the narrow-end atom of bond ``k`` when it is drawn
    as a wedge or hash, else ``None``.
    """

    coords: np.ndarray
    kinds: tuple[BondKind, ...]
    wedge_base: tuple[int | None, ...]
    rings: tuple[tuple[int, ...], ...]
    aromatic_rings: tuple[tuple[int, ...], ...]

    def bond_lengths(self, mol: Molecule) -> np.ndarray:
        if not mol.bonds:
            return np.zeros(0)
        idx = np.array([(b.begin, b.end) for b in mol.bonds])
        return np.linalg.norm(self.coords[idx[:, 0]] - self.coords[idx[:, 1]], axis=1)


# --------------------------------------------------------------------------
# geometry helpers


def _unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def _angle(v: np.ndarray) -> float:
    return math.atan2(v[1], v[0])


def _cross(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _arc_points(p: np.ndarray, q: np.ndarray, k: int, away: np.ndarray) -> list[np.ndarray]:
    """Positions of ``k`` atoms joining ``p`` to ``q`` with ``k + 1`` unit chords.

    The atoms lie on a circular arc bulging towards ``away``. For ``k = n - 2``
    and ``|pq| = 1`` this is exactly a regular n-gon on the edge ``pq``.
    """
    m = k + 1
    delta = q - p
    d = float(np.linalg.norm(delta))
    chord = delta / d if d > 1e-12 else np.array([1.0, 0.0])
    nrm = np.array([-chord[1], chord[0]])
    if float(np.dot(nrm, away)) < 0:
        nrm = -nrm
    if d >= m - 1e-9:
        return [p + delta * (i + 1) / m for i in range(k)]
    phi = brentq(lambda f: math.sin(f) / math.sin(f / m) - d, 1e-9, math.pi - 1e-12, xtol=1e-15)
    theta = 2 * phi / m
    radius = 0.5 / math.sin(theta / 2)
    center = (p + q) / 2 - nrm * radius * math.cos(phi)
    out = []
    for i in range(k):
        a = math.pi / 2 + phi - (i + 1) * theta
        out.append(center + radius * (math.cos(a) * chord + math.sin(a) * nrm))
    return out


def _order_cycle(nodes: list[int], adj: dict[int, set[int]]) -> tuple[int, ...]:
    members = set(nodes)
    start = min(members)
    cyc = [start]
    prev = None
    cur = start
    while True:
        nxt = sorted(w for w in adj[cur] if w in members and w != prev and w not in cyc[1:])
        if not nxt or (len(cyc) == len(members)):
            break
        if nxt[0] == start and len(cyc) < len(members):
            nxt = nxt[1:] or nxt
        if nxt[0] == start:
            break
        prev, cur = cur, nxt[0]
        cyc.append(cur)
    return tuple(cyc)


# --------------------------------------------------------------------------
# ring systems


def _ring_systems(mol: Molecule, atoms: list[int]) -> tuple[list[list[int]], list[list[tuple[int, ...]]]]:
    mask = ring_bond_mask(mol)
    g = nx.Graph()
    for k, b in enumerate(mol.bonds):
        if mask[k] and b.begin in atoms:
            g.add_edge(b.begin, b.end)
    systems: list[list[int]] = []
    rings: list[list[tuple[int, ...]]] = []
    for comp in sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0]):
        sub = g.subgraph(comp)
        adj = {v: set(sub[v]) for v in sub}
        basis = [_order_cycle(sorted(c), adj) for c in nx.minimum_cycle_basis(sub)]
        basis.sort(key=lambda c: (len(c), sorted(c)))
        systems.append(comp)
        rings.append(basis)
    return systems, rings


def _system_coords(rings: list[tuple[int, ...]]) -> dict[int, np.ndarray]:
    """Local coordinates for one ring system, centred on its centroid."""
    share = [sum(1 for o in rings if o is not r and set(o) & set(r)) for r in rings]
    first = min(
        range(len(rings)),
        key=lambda i: (-share[i], abs(len(rings[i]) - 6), len(rings[i]), sorted(rings[i])),
    )
    pos: dict[int, np.ndarray] = {}
    cyc = rings[first]
    n = len(cyc)
    radius = 0.5 / math.sin(math.pi / n)
    a0 = -math.pi / 2 - math.pi / n
    for t, v in enumerate(cyc):
        pos[v] = radius * _unit(a0 + 2 * math.pi * t / n)
    done = {first}
    while len(done) < len(rings):
        best = None
        for i, r in enumerate(rings):
            if i in done:
                continue
            placed = sum(1 for v in r if v in pos)
            if placed == 0:
                continue
            key = (-placed, len(r), i)
            if best is None or key < best[0]:
                best = (key, i)
        if best is None:
            # disconnected basis should not happen within one system
            i = next(i for i in range(len(rings)) if i not in done)
            shift = max(p[0] for p in pos.values()) + 2.0
            r = rings[i]
            rr = 0.5 / math.sin(math.pi / len(r))
            for t, v in enumerate(r):
                pos[v] = np.array([shift, 0.0]) + rr * _unit(2 * math.pi * t / len(r))
            done.add(i)
            continue
        i = best[1]
        done.add(i)
        cyc = rings[i]
        n = len(cyc)
        flags = [v in pos for v in cyc]
        if all(flags):
            continue
        placed_centroid = np.mean(list(pos.values()), axis=0)
        if sum(flags) == 1:
            t0 = flags.index(True)
            p = cyc[t0]
            nb = [pos[w] for r in rings for w in _ring_neighbours(r, p) if w in pos]
            ref = np.mean(nb, axis=0) if nb else placed_centroid
            direction = pos[p] - ref
            if np.linalg.norm(direction) < 1e-9:
                direction = np.array([1.0, 0.0])
            direction /= np.linalg.norm(direction)
            rr = 0.5 / math.sin(math.pi / n)
            center = pos[p] + direction * rr
            ang = _angle(pos[p] - center)
            for t in range(1, n):
                pos[cyc[(t0 + t) % n]] = center + rr * _unit(ang + 2 * math.pi * t / n)
            continue
        # runs of unplaced atoms bounded by placed ones
        t = 0
        while not flags[t]:
            t += 1
        start = t
        run: list[int] = []
        for step in range(1, n + 1):
            idx = (start + step) % n
            if flags[idx]:
                if run:
                    pa = cyc[(idx - len(run) - 1) % n]
                    pb = cyc[idx]
                    mid = (pos[pa] + pos[pb]) / 2
                    edge_rings = [r for r in rings if pa in r and pb in r and all(v in pos for v in r)]
                    if edge_rings:
                        away = mid - np.mean([pos[v] for v in edge_rings[0]], axis=0)
                    else:
                        away = mid - placed_centroid
                    if np.linalg.norm(away) < 1e-9:
                        d = pos[pb] - pos[pa]
                        away = np.array([-d[1], d[0]])
                    for v, pt in zip(run, _arc_points(pos[pa], pos[pb], len(run), away)):
                        pos[v] = pt
                    run = []
            else:
                run.append(cyc[idx])
    centroid = np.mean(list(pos.values()), axis=0)
    return {v: p - centroid for v, p in pos.items()}


def _ring_neighbours(ring: tuple[int, ...], v: int) -> list[int]:
    if v not in ring:
        return []
    i = ring.index(v)
    return [ring[i - 1], ring[(i + 1) % len(ring)]]


# --------------------------------------------------------------------------
# placement search


class _Placer:
    def __init__(self, mol: Molecule, atoms: list[int], rng: np.random.Generator):
        self.mol = mol
        self.atoms = atoms
        self.rng = rng
        self.pos: dict[int, np.ndarray] = {}
        self.order: list[int] = []
        self.parent: dict[int, int | None] = {}
        self.evals = 0
        self.greedy = False
        systems, rings = _ring_systems(mol, atoms)
        self.systems = systems
        self.rings = [r for rs in rings for r in rs]
        self.system_of: dict[int, int] = {}
        self.local: list[dict[int, np.ndarray]] = []
        self.local_exo: list[dict[int, np.ndarray]] = []
        for sid, (comp, rs) in enumerate(zip(systems, rings)):
            loc = _system_coords(rs)
            self.local.append(loc)
            inner = set(comp)
            exo = {}
            for v in comp:
                nb = [loc[w] for w in mol.neighbors[v] if w in inner and _in_same_ring(rs, v, w)]
                vec = loc[v] - (np.mean(nb, axis=0) if nb else np.zeros(2))
                if np.linalg.norm(vec) < 1e-6:
                    vec = loc[v].copy()
                if np.linalg.norm(vec) < 1e-9:
                    vec = np.array([1.0, 0.0])
                exo[v] = vec / np.linalg.norm(vec)
            self.local_exo.append(exo)
            for v in comp:
                self.system_of[v] = sid
        mask = ring_bond_mask(mol)
        members = set(atoms)
        self.stereo_bonds = [
            b for k, b in enumerate(mol.bonds) if b.stereo and not mask[k] and b.begin in members
        ]

    # -- bookkeeping

    def apply(self, newpos: dict[int, np.ndarray], parent: dict[int, int | None]) -> None:
        for v, p in newpos.items():
            self.pos[v] = p
            self.order.append(v)
        self.parent.update(parent)

    def undo(self, newpos: dict[int, np.ndarray]) -> None:
        for v in newpos:
            del self.pos[v]
            self.parent.pop(v, None)
        del self.order[len(self.order) - len(newpos):]

    # -- scoring

    def penalty(self, newpos: dict[int, np.ndarray], unit: dict[int, int]) -> float:
        ids = list(newpos)
        pts = np.array([newpos[i] for i in ids])
        pen = 0.0
        if self.pos:
            old = np.array([self.pos[i] for i in self.order])
            d = np.linalg.norm(pts[:, None, :] - old[None, :, :], axis=2)
            pen += _clash_cost(d)
        if len(ids) > 1:
            d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
            u = np.array([unit[i] for i in ids])
            d = np.where(u[:, None] != u[None, :], d, np.inf)
            pen += _clash_cost(d) / 2
        if not self.stereo_ok(newpos):
            pen += _STEREO_VIOLATION
        return pen

    def stereo_ok(self, newpos: dict[int, np.ndarray]) -> bool:
        mol = self.mol

        def at(i: int):
            p = newpos.get(i)
            return self.pos.get(i) if p is None else p

        for b in self.stereo_bonds:
            pb, pe = at(b.begin), at(b.end)
            if pb is None or pe is None:
                continue
            axis = pe - pb
            rb = [x for x in mol.neighbors[b.begin] if x != b.end and at(x) is not None]
            re = [y for y in mol.neighbors[b.end] if y != b.begin and at(y) is not None]
            for x in rb:
                for y in re:
                    if not any(i in newpos for i in (b.begin, b.end, x, y)):
                        continue
                    sx = _cross(axis, at(x) - pb)
                    sy = _cross(axis, at(y) - pb)
                    if abs(sx) < 1e-6 or abs(sy) < 1e-6:
                        return False
                    same = (sx > 0) == (sy > 0)
                    if same != (stereo_relative(b, x, y) is BondStereo.CIS):
                        return False
        return True

    # -- candidate generation

    def subtree_size(self, a: int, j: int) -> int:
        seen = {a, j}
        stack = [j]
        while stack:
            v = stack.pop()
            for w in self.mol.neighbors[v]:
                if w not in seen and w not in self.pos:
                    seen.add(w)
                    stack.append(w)
        return len(seen) - 1

    def is_linear(self, a: int) -> bool:
        orders = [b.order for b in self.mol.incident(a)]
        return BondOrder.TRIPLE in orders or orders.count(BondOrder.DOUBLE) >= 2

    def direction_sets(self, a: int, todo: list[int]) -> list[list[float]]:
        mol = self.mol
        k = len(todo)
        placed = [j for j in mol.neighbors[a] if j in self.pos]
        here = self.pos[a]
        if not placed:
            if k == 1:
                base = [math.pi / 6]
            elif k == 2:
                base = [math.pi / 6, math.pi / 6 + 2 * math.pi / 3]
                if self.is_linear(a):
                    base = [0.0, math.pi]
            else:
                base = [math.pi / 2 + 2 * math.pi * i / k for i in range(k)]
            sets = [base, [-t for t in base]]
            if self.rng.random() < 0.5:
                sets.reverse()
            return sets
        if len(placed) == 1:
            tp = _angle(self.pos[placed[0]] - here)
            if k == 1 and self.is_linear(a):
                return [[tp + math.pi]]
            if k == 1:
                opts = [tp + 2 * math.pi / 3, tp - 2 * math.pi / 3]
                p = placed[0]
                gp = self.parent.get(p)
                if gp is None or gp not in self.pos:
                    others = [w for w in mol.neighbors[p] if w != a and w in self.pos]
                    gp = others[0] if others else None
                if gp is not None:
                    axis = here - self.pos[p]
                    sg = _cross(axis, self.pos[gp] - self.pos[p])
                    opts.sort(key=lambda t: 0 if _cross(axis, _unit(t)) * sg < 0 else 1)
                elif self.rng.random() < 0.5:
                    opts.reverse()
                return [[opts[0]], [opts[1]]]
            if k == 2:
                first = [tp + 2 * math.pi / 3, tp - 2 * math.pi / 3]
                return [first, first[::-1]]
            if k == 3:
                base = [tp + math.pi, tp + math.pi / 2, tp - math.pi / 2]
                return [base, [base[0], base[2], base[1]]]
            base = [tp + 2 * math.pi * (i + 1) / (k + 1) for i in range(k)]
            return [base, base[::-1]]
        angles = sorted(_angle(self.pos[j] - here) % (2 * math.pi) for j in placed)
        gaps = []
        for i, t in enumerate(angles):
            nxt = angles[(i + 1) % len(angles)] + (2 * math.pi if i == len(angles) - 1 else 0)
            gaps.append((nxt - t, t))
        size, start = max(gaps, key=lambda g: (round(g[0], 9), -g[1]))
        base = [start + size * (i + 1) / (k + 1) for i in range(k)]
        return [base, base[::-1]] if k > 1 else [base]

    def candidates(self, a: int, todo: list[int]):
        todo = sorted(todo, key=lambda j: (-self.subtree_size(a, j), j))
        sets = self.direction_sets(a, todo)
        shifts = [0.0, math.pi / 6, -math.pi / 6, math.pi / 3, -math.pi / 3, math.pi / 2, -math.pi / 2]
        ring_children = [j for j in todo if j in self.system_of]
        mirrors = [False, True] if ring_children else [False]
        out = []
        for shift in shifts:
            for dirs in sets:
                for mirror in mirrors:
                    out.append(self.build(a, todo, [d + shift for d in dirs], mirror))
        return out

    def build(self, a: int, todo: list[int], dirs: list[float], mirror: bool):
        here = self.pos[a]
        newpos: dict[int, np.ndarray] = {}
        parent: dict[int, int | None] = {}
        unit: dict[int, int] = {}
        for u, (j, t) in enumerate(zip(todo, dirs)):
            direction = _unit(t)
            anchor = here + direction
            sid = self.system_of.get(j)
            if sid is None:
                newpos[j] = anchor
                parent[j] = a
                unit[j] = u
                continue
            loc = self.local[sid]
            flip = np.diag([1.0, -1.0]) if mirror else np.eye(2)
            exo = flip @ self.local_exo[sid][j]
            rot = _rot(_angle(-direction) - _angle(exo))
            xf = rot @ flip
            for v, p in loc.items():
                if v in self.pos:
                    continue
                newpos[v] = anchor + xf @ (p - loc[j])
                parent[v] = None
                unit[v] = u
            parent[j] = a
        return newpos, parent, unit

    # -- search

    def extend(self, stack: tuple[int, ...]) -> bool:
        while stack:
            a = stack[-1]
            stack = stack[:-1]
            todo = [j for j in self.mol.neighbors[a] if j not in self.pos]
            if todo:
                break
        else:
            return True
        cands = self.candidates(a, todo)
        scored = []
        for newpos, parent, unit in cands:
            self.evals += 1
            scored.append((self.penalty(newpos, unit), newpos, parent))
        if self.evals > _BUDGET:
            self.greedy = True
        if not self.greedy:
            for pen, newpos, parent in scored:
                if pen > 0:
                    continue
                self.apply(newpos, parent)
                if self.extend(stack + self.push_order(newpos)):
                    return True
                self.undo(newpos)
                if self.greedy:
                    break
            if not self.greedy:
                return False
        best = min(range(len(scored)), key=lambda i: scored[i][0])
        _, newpos, parent = scored[best]
        self.apply(newpos, parent)
        return self.extend(stack + self.push_order(newpos))

    def push_order(self, newpos: dict[int, np.ndarray]) -> tuple[int, ...]:
        return tuple(reversed(list(newpos)))

    def run(self) -> dict[int, np.ndarray]:
        mol = self.mol
        if len(self.atoms) == 1:
            return {self.atoms[0]: np.zeros(2)}
        if self.systems:
            sid = max(range(len(self.systems)), key=lambda s: (len(self.systems[s]), -self.systems[s][0]))
            loc = self.local[sid]
            flip = np.diag([1.0, -1.0]) if self.rng.random() < 0.5 else np.eye(2)
            newpos = {v: flip @ p for v, p in loc.items()}
            root_stack = tuple(reversed(sorted(loc)))
            self.apply(newpos, {v: None for v in newpos})
        else:
            # start from a peripheral atom so chains draw as one zig-zag
            dist = {self.atoms[0]: 0}
            queue = [self.atoms[0]]
            for v in queue:
                for w in mol.neighbors[v]:
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        queue.append(w)
            far = max(dist.values())
            root = min(v for v, d in dist.items() if d == far)
            self.apply({root: np.zeros(2)}, {root: None})
            root_stack = (root,)
        snapshot = dict(self.pos)
        if not self.extend(root_stack):
            # exhausted without a clean layout: restart in least-bad mode
            self.pos = snapshot
            self.order = list(snapshot)
            self.greedy = True
            self.extend(root_stack)
        return self.pos


def _clash_cost(d: np.ndarray) -> float:
    """Zero when every distance is at least the clash radius; grows sharply as atoms coincide."""
    close = d[d < _CLASH]
    if close.size == 0:
        return 0.0
    return float(np.sum(1.0 + 10.0 * (_CLASH - close) / _CLASH))


def _in_same_ring(rings: list[tuple[int, ...]], v: int, w: int) -> bool:
    return any(v in r and w in r and w in _ring_neighbours(r, v) for r in rings)


# --------------------------------------------------------------------------
# stereo depiction


def chiral_volume(points: list[np.ndarray]) -> float:
    """Signed volume of four 3D points in neighbour order.

    Negative means the last three appear counter-clockwise when viewed from
    the first towards the centre, which is SMILES ``@``.
    """
    a, b, c, d = (np.asarray(p, dtype=float) for p in points)
    return float(np.linalg.det(np.array([b - a, c - a, d - a])))


def depicted_points(mol: Molecule, coords: np.ndarray, centre: int, z: dict[int, float]) -> list[np.ndarray] | None:
    """3D neighbour points of ``centre`` implied by a drawing, in stored order.

    ``z`` gives the out-of-plane offset of wedged (+) or hashed (-) neighbours.
    A missing fourth neighbour (implicit H or lone pair) is put opposite the
    other three and listed first.
    """
    nbrs = mol.neighbors[centre]
    if len(nbrs) not in (3, 4):
        return None
    c = coords[centre]
    pts = []
    for j in nbrs:
        v = coords[j] - c
        n = np.linalg.norm(v)
        v = v / n if n > 1e-12 else v
        pts.append(np.array([v[0], v[1], z.get(j, 0.0)]))
    if len(nbrs) == 3:
        pts.insert(0, -(pts[0] + pts[1] + pts[2]))
    return pts


def _assign_wedges(mol: Molecule, coords: np.ndarray, kinds: list[BondKind], base: list[int | None]) -> None:
    mask = ring_bond_mask(mol)
    for a, atom in enumerate(mol.atoms):
        if not atom.chiral_tag or len(mol.neighbors[a]) not in (3, 4):
            continue
        want_negative = atom.chiral_tag is ChiralTag.CCW

        def pref(j: int):
            k = mol.bond_index(a, j)
            return (mask[k], bool(mol.atoms[j].chiral_tag), mol.degree(j), j)

        best = None
        for j in sorted(mol.neighbors[a], key=pref):
            k = mol.bond_index(a, j)
            if kinds[k] is not BondKind.PLAIN or mol.bonds[k].order is not BondOrder.SINGLE:
                continue
            for zsign in (1.0, -1.0):
                pts = depicted_points(mol, coords, a, {j: 0.8 * zsign})
                vol = chiral_volume(pts)
                if (vol < 0) == want_negative and abs(vol) > 1e-6:
                    score = (abs(vol) > 0.05, abs(vol))
                    if best is None or score > best[0]:
                        best = (score, k, zsign)
            if best is not None and best[0][0]:
                break
        if best is not None:
            _, k, zsign = best
            kinds[k] = BondKind.WEDGE if zsign > 0 else BondKind.HASH
            base[k] = a


# --------------------------------------------------------------------------
# public layout entry point


def layout(m: Molecule, seed: int = 0, max_atoms: int = DEFAULT_MAX_ATOMS) -> Layout:
    """Compute 2D coordinates and bond drawing kinds for ``m``.

    Deterministic in ``(m, seed)``; the seed only breaks ties between
    equally good placements (which side a chain starts on, root mirroring).
    """
    n = len(m.atoms)
    if n > max_atoms:
        raise SizeLimitError(f"{n} atoms exceeds the layout cap of {max_atoms}")
    rng = np.random.default_rng(seed)
    coords = np.zeros((n, 2))
    all_rings: list[tuple[int, ...]] = []
    x_cursor = None
    for frag in m.fragments():
        frag = sorted(frag)
        placer = _Placer(m, frag, rng)
        pos = placer.run()
        if len(pos) != len(frag):
            raise LayoutOverflowError("layout left atoms unplaced")
        pts = np.array([pos[v] for v in frag])
        if x_cursor is not None:
            pts = pts + np.array([x_cursor + 1.5 - pts[:, 0].min(), -pts[:, 1].mean()])
        for v, p in zip(frag, pts):
            coords[v] = p
        x_cursor = float(pts[:, 0].max())
        all_rings.extend(placer.rings)
    if n > 1:
        diff = coords[:, None, :] - coords[None, :, :]
        d = np.linalg.norm(diff, axis=2)
        d[np.diag_indices(n)] = np.inf
        if float(d.min()) < 0.25:
            raise LayoutOverflowError("could not resolve overlapping atoms")
    kek = kekulize(m) if any(a.aromatic for a in m.atoms) else m
    kinds = []
    for b in kek.bonds:
        if b.order is BondOrder.DOUBLE:
            kinds.append(BondKind.DOUBLE)
        elif b.order is BondOrder.TRIPLE:
            kinds.append(BondKind.TRIPLE)
        else:
            kinds.append(BondKind.PLAIN)
    base: list[int | None] = [None] * len(m.bonds)
    _assign_wedges(m, coords, kinds, base)
    aromatic = tuple(
        r
        for r in all_rings
        if all(m.bond_between(r[i], r[(i + 1) % len(r)]).order is BondOrder.AROMATIC for i in range(len(r)))
    )
    return Layout(coords, tuple(kinds), tuple(base), tuple(all_rings), aromatic)


# --------------------------------------------------------------------------
# styles


@dataclass(frozen=True)
class RenderParams:
    """One concrete draw of a style's randomized parameters."""

    rotation: float
    line_width: float
    bond_length: float
    font_size: int
    jitter: float
    aromatic_circles: bool
    label_variant: bool


@dataclass(frozen=True)
class StyleProfile:
    """Ranges for every randomized appearance parameter of a drawing style.

    ``jitter`` is a per-atom coordinate displacement in pixels. The two
    probabilities control how often a render uses the alternative label
    layout (explicit methyl labels, hydrogens on the opposite side) and
    aromatic circles instead of alternating double bonds.
    """

    name: str
    line_width: tuple[float, float]
    font_size: tuple[int, int]
    bond_length: tuple[float, float]
    rotation: tuple[float, float]
    jitter: tuple[float, float]
    label_variant_prob: float
    aromatic_circle_prob: float
    canvas: int = 512
    version: str = STYLE_VERSION

    def __post_init__(self):
        if not MIN_CANVAS <= self.canvas <= MAX_CANVAS:
            raise ValueError(f"canvas must be within {MIN_CANVAS}..{MAX_CANVAS} px")
        for field_name in ("line_width", "font_size", "bond_length", "rotation", "jitter"):
            lo, hi = getattr(self, field_name)
            if lo > hi:
                raise ValueError(f"{field_name} range is inverted")
        for p in (self.label_variant_prob, self.aromatic_circle_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")

    @classmethod
    def molscribe_like(cls, canvas: int = 512) -> "StyleProfile":
        return cls(
            name="MolScribeLike",
            line_width=(1.0, 4.0),
            font_size=(10, 24),
            bond_length=(30.0, 80.0),
            rotation=(-180.0, 180.0),
            jitter=(0.0, 2.0),
            label_variant_prob=0.5,
            aromatic_circle_prob=0.5,
            canvas=canvas,
        )

    @classmethod
    def chemdraw_like(cls, canvas: int = 512) -> "StyleProfile":
        return cls(
            name="ChemDrawLike",
            line_width=(2.0, 2.0),
            font_size=(14, 14),
            bond_length=(50.0, 50.0),
            rotation=(-15.0, 15.0),
            jitter=(0.0, 0.0),
            label_variant_prob=0.0,
            aromatic_circle_prob=0.0,
            canvas=canvas,
        )

    @classmethod
    def by_key(cls, key: str, canvas: int = 512) -> "StyleProfile":
        table = {"molscribe": cls.molscribe_like, "chemdraw": cls.chemdraw_like}
        if key not in table:
            raise ValueError(f"unknown style {key!r}; expected one of {sorted(table)}")
        return table[key](canvas)

    def sample(self, rng: np.random.Generator) -> RenderParams:
        # always consume the same number of draws so parameters are aligned across styles
        u = rng.random(7)

        def span(r, x):
            return r[0] + (r[1] - r[0]) * x

        font_lo, font_hi = self.font_size
        return RenderParams(
            rotation=span(self.rotation, u[0]),
            line_width=span(self.line_width, u[1]),
            bond_length=span(self.bond_length, u[2]),
            font_size=min(font_hi, font_lo + int(u[3] * (font_hi - font_lo + 1))),
            jitter=span(self.jitter, u[4]),
            aromatic_circles=bool(u[5] < self.aromatic_circle_prob),
            label_variant=bool(u[6] < self.label_variant_prob),
        )

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# raster image


@dataclass(frozen=True, eq=False)
class RasterImage:
    """An 8-bit image (grayscale ``(H, W)`` or RGB ``(H, W, 3)``) with provenance."""

    pixels: np.ndarray
    provenance: tuple[str, str, int] | None = None

    def __post_init__(self):
        if self.pixels.dtype != np.uint8 or self.pixels.ndim not in (2, 3):
            raise ValueError("pixels must be a uint8 array of shape (H, W) or (H, W, 3)")
        if self.pixels.ndim == 3 and self.pixels.shape[2] != 3:
            raise ValueError("RGB images need exactly 3 channels")

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def is_rgb(self) -> bool:
        return self.pixels.ndim == 3

    def same_pixels(self, other: "RasterImage") -> bool:
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGB" if self.is_rgb else "L").save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_png())

    @classmethod
    def load(cls, path: str | Path) -> "RasterImage":
        with Image.open(path) as im:
            if im.mode not in ("L", "RGB"):
                im = im.convert("RGB" if "A" in im.mode or im.mode in ("P", "CMYK") else "L")
            return cls(np.array(im, dtype=np.uint8))


# --------------------------------------------------------------------------
# rasterization primitives (ink is coverage in [0, 1])


def _window(ink: np.ndarray, xs, ys, pad: float):
    h, w = ink.shape
    x0 = max(int(math.floor(min(xs) - pad)), 0)
    x1 = min(int(math.ceil(max(xs) + pad)) + 1, w)
    y0 = max(int(math.floor(min(ys) - pad)), 0)
    y1 = min(int(math.ceil(max(ys) + pad)) + 1, h)
    if x0 >= x1 or y0 >= y1:
        return None
    gy, gx = np.mgrid[y0:y1, x0:x1].astype(np.float64)
    return (slice(y0, y1), slice(x0, x1)), gx + 0.5, gy + 0.5


def _stroke(ink: np.ndarray, p: np.ndarray, q: np.ndarray, width: float) -> None:
    hw = width / 2
    win = _window(ink, (p[0], q[0]), (p[1], q[1]), hw + 2)
    if win is None:
        return
    sl, gx, gy = win
    d = q - p
    ll = float(d @ d)
    if ll < 1e-12:
        dist = np.hypot(gx - p[0], gy - p[1])
    else:
        t = np.clip(((gx - p[0]) * d[0] + (gy - p[1]) * d[1]) / ll, 0.0, 1.0)
        dist = np.hypot(gx - (p[0] + t * d[0]), gy - (p[1] + t * d[1]))
    cov = np.clip(hw + 0.5 - dist, 0.0, 1.0)
    np.maximum(ink[sl], cov, out=ink[sl])


def _polygon(ink: np.ndarray, verts: list[np.ndarray]) -> None:
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    win = _window(ink, xs, ys, 2)
    if win is None:
        return
    sl, gx, gy = win
    area = sum(_cross(verts[i], verts[(i + 1) % len(verts)]) for i in range(len(verts)))
    orient = 1.0 if area > 0 else -1.0
    inside = np.full(gx.shape, np.inf)
    for i in range(len(verts)):
        a, b = verts[i], verts[(i + 1) % len(verts)]
        e = b - a
        n = np.hypot(e[0], e[1])
        if n < 1e-12:
            continue
        sd = orient * (e[0] * (gy - a[1]) - e[1] * (gx - a[0])) / n
        inside = np.minimum(inside, sd)
    cov = np.clip(inside + 0.5, 0.0, 1.0)
    np.maximum(ink[sl], cov, out=ink[sl])


def _circle(ink: np.ndarray, c: np.ndarray, r: float, width: float) -> None:
    hw = width / 2
    win = _window(ink, (c[0] - r, c[0] + r), (c[1] - r, c[1] + r), hw + 2)
    if win is None:
        return
    sl, gx, gy = win
    dist = np.abs(np.hypot(gx - c[0], gy - c[1]) - r)
    cov = np.clip(hw + 0.5 - dist, 0.0, 1.0)
    np.maximum(ink[sl], cov, out=ink[sl])


def _paste(ink: np.ndarray, mask: np.ndarray, x: int, y: int) -> None:
    h, w = ink.shape
    mh, mw = mask.shape
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + mw, w), min(y + mh, h)
    if x0 >= x1 or y0 >= y1:
        return
    sub = mask[y0 - y : y1 - y, x0 - x : x1 - x]
    np.maximum(ink[y0:y1, x0:x1], sub, out=ink[y0:y1, x0:x1])


# --------------------------------------------------------------------------
# labels

_CPK = {"N": (48, 80, 248), "O": (255, 13, 13), "S": (200, 160, 0), "F": (0, 160, 0), "Cl": (0, 160, 0),
        "Br": (166, 41, 41), "I": (148, 0, 148), "P": (255, 128, 0)}


def _label_parts(mol: Molecule, i: int, h_left: bool, explicit_methyl: bool):
    """Return label pieces [(text, kind)] or None when the atom is drawn bare."""
    a = mol.atoms[i]
    deg = mol.degree(i)
    bare_carbon = a.element == "C" and a.charge == 0 and a.isotope is None and deg > 0
    if bare_carbon and not (explicit_methyl and deg == 1 and a.h == 3):
        return None
    parts = []
    if a.isotope is not None:
        parts.append((str(a.isotope), "sup"))
    parts.append((a.element, "main"))
    h_parts = []
    if a.h:
        h_parts.append(("H", "main"))
        if a.h > 1:
            h_parts.append((str(a.h), "sub"))
    charge = []
    if a.charge:
        mag = abs(a.charge)
        charge.append(((str(mag) if mag > 1 else "") + ("+" if a.charge > 0 else "-"), "sup"))
    if h_left and h_parts:
        return h_parts + parts + charge
    return parts + h_parts + charge


def _text_mask(parts, font_px: int) -> tuple[np.ndarray, float]:
    """Compose label pieces; returns (mask, x centre of the element symbol)."""
    main_h = max(font_px, 6)
    small_h = max(int(round(main_h * 0.7)), 5)
    gap = max(1, main_h // 8)
    pieces = []
    for text, kind in parts:
        hgt = main_h if kind == "main" else small_h
        for ch in text:
            g = scaled_glyph(ch, hgt)
            dy = {"main": 0, "sub": main_h - small_h + main_h // 5, "sup": -main_h // 4}[kind]
            pieces.append((g, dy, kind, text))
    top = min(dy for _, dy, _, _ in pieces)
    bottom = max(dy + g.shape[0] for g, dy, _, _ in pieces)
    width = sum(g.shape[1] for g, *_ in pieces) + gap * (len(pieces) - 1)
    mask = np.zeros((bottom - top, width), dtype=np.float32)
    x = 0
    centre = None
    main_symbol = next(t for t, k in parts if k == "main" and t != "H") if any(
        k == "main" and t != "H" for t, k in parts
    ) else parts[0][0]
    seen_symbol = False
    for g, dy, kind, text in pieces:
        y = dy - top
        sub = mask[y : y + g.shape[0], x : x + g.shape[1]]
        np.maximum(sub, g, out=sub)
        if kind == "main" and text == main_symbol and not seen_symbol:
            sym_w = sum(scaled_glyph(c, main_h).shape[1] for c in text) + gap * (len(text) - 1)
            centre = x + sym_w / 2
            seen_symbol = True
        x += g.shape[1] + gap
    if centre is None:
        centre = width / 2
    return mask, centre, -top


# --------------------------------------------------------------------------
# render


INK_FLOOR = 0.005


def _ink_fraction(ink: np.ndarray) -> float:
    """Fraction of pixels whose final gray value is below 128."""
    return float(np.count_nonzero(_to_gray(ink) < 128)) / ink.size


def _to_gray(ink: np.ndarray) -> np.ndarray:
    return np.round(255.0 * (1.0 - np.clip(ink, 0.0, 1.0))).astype(np.uint8)


def render(m: Molecule, style: StyleProfile, seed: int, rgb: bool = False, smiles: str | None = None) -> RasterImage:
    """Rasterize ``m`` in ``style``; identical arguments give identical pixels.

    Drawings of two or more atoms that would cover less than ``INK_FLOOR``
    of the canvas are magnified (bond length, line width and font together)
    until they reach it, so tiny molecules never come out nearly blank.
    """
    rng = np.random.default_rng([seed, _style_key(style.name)])
    params = style.sample(rng)
    lay = layout(m, seed)
    n = len(m.atoms)
    unit_jitter = rng.uniform(-1.0, 1.0, size=(n, 2))
    ink, label_masks = _draw(m, lay, params, style.canvas, unit_jitter)
    if n >= 2:
        for _ in range(8):
            frac = _ink_fraction(ink)
            if frac >= INK_FLOOR:
                break
            k = math.sqrt(1.2 * INK_FLOOR / max(frac, 1e-6))
            params = replace(
                params,
                line_width=params.line_width * k,
                bond_length=params.bond_length * k,
                font_size=int(math.ceil(params.font_size * k)),
            )
            ink, label_masks = _draw(m, lay, params, style.canvas, unit_jitter)
    return _finish(m, style, seed, ink, label_masks, rgb, smiles)


def _draw(m: Molecule, lay: Layout, params: RenderParams, size: int, unit_jitter: np.ndarray):
    n = len(m.atoms)
    theta = math.radians(params.rotation)
    pts = lay.coords @ _rot(theta).T * params.bond_length
    pts[:, 1] = -pts[:, 1]  # image rows grow downwards
    margin = params.font_size + 2 * params.line_width + 4
    if n:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        extent = float(max(hi - lo)) if n > 1 else 0.0
        avail = size - 2 * margin
        scale = min(1.0, avail / extent) if extent > 0 else 1.0
        pts = (pts - (lo + hi) / 2) * scale + size / 2
        bond_px = params.bond_length * scale
    else:
        bond_px = params.bond_length
    if params.jitter > 0 and n:
        pts = pts + params.jitter * unit_jitter
    ink = np.zeros((size, size), dtype=np.float64)
    lw = params.line_width

    labels = {}
    for i in range(n):
        nb = m.neighbors[i]
        mean_dx = float(np.mean([pts[j][0] - pts[i][0] for j in nb])) if nb else 0.0
        h_left = mean_dx > 0.1 * bond_px
        if params.label_variant:
            h_left = not h_left if nb else h_left
        parts = _label_parts(m, i, h_left, params.label_variant)
        if parts is not None:
            labels[i] = parts
    clear = 0.55 * params.font_size + lw

    def trimmed(i: int, j: int):
        p, q = pts[i].copy(), pts[j].copy()
        d = q - p
        ln = float(np.hypot(*d))
        if ln < 1e-9:
            return p, q
        u = d / ln
        if i in labels:
            p = p + u * min(clear, 0.45 * ln)
        if j in labels:
            q = q - u * min(clear, 0.45 * ln)
        return p, q

    ring_of_bond: dict[int, tuple[int, ...]] = {}
    for r in sorted(lay.rings, key=len):
        for t in range(len(r)):
            k = m.bond_index(r[t], r[(t + 1) % len(r)])
            ring_of_bond.setdefault(k, r)
    circle_rings = set(lay.aromatic_rings) if params.aromatic_circles else set()
    circle_bonds = {k for k, r in ring_of_bond.items() if r in circle_rings}
    for r in circle_rings:
        for t in range(len(r)):
            circle_bonds.add(m.bond_index(r[t], r[(t + 1) % len(r)]))
    gap = max(0.18 * bond_px, 1.5 * lw + 2)

    for k, b in enumerate(m.bonds):
        kind = lay.kinds[k]
        i, j = b.begin, b.end
        if kind in (BondKind.WEDGE, BondKind.HASH):
            if lay.wedge_base[k] == j:
                i, j = j, i
            p, q = trimmed(i, j)
            d = q - p
            ln = float(np.hypot(*d)) or 1.0
            perp = np.array([-d[1], d[0]]) / ln
            wide = max(0.22 * bond_px, 2.5 * lw)
            if kind is BondKind.WEDGE:
                _polygon(ink, [p + perp * lw * 0.3, q + perp * wide / 2, q - perp * wide / 2, p - perp * lw * 0.3])
            else:
                count = max(4, int(ln / (1.6 * lw + 3)))
                for s in range(count + 1):
                    t = s / count
                    c = p + d * t
                    half = (lw * 0.4 + (wide / 2 - lw * 0.4) * t)
                    _stroke(ink, c - perp * half, c + perp * half, max(lw * 0.75, 1.0))
            continue
        p, q = trimmed(i, j)
        d = q - p
        ln = float(np.hypot(*d)) or 1.0
        perp = np.array([-d[1], d[0]]) / ln
        ring = ring_of_bond.get(k)
        if kind is BondKind.DOUBLE and k not in circle_bonds and ring is None and (
            m.degree(i) == 1 or m.degree(j) == 1
        ):
            # terminal double bonds are drawn as a centred pair
            _stroke(ink, p + perp * gap / 2, q + perp * gap / 2, lw)
            _stroke(ink, p - perp * gap / 2, q - perp * gap / 2, lw)
            continue
        _stroke(ink, p, q, lw)
        if kind is BondKind.PLAIN or k in circle_bonds:
            continue
        if kind is BondKind.TRIPLE:
            off = gap * 0.8
            _stroke(ink, p + perp * off, q + perp * off, lw)
            _stroke(ink, p - perp * off, q - perp * off, lw)
            continue
        if ring is not None:
            centre = pts[list(ring)].mean(axis=0)
            side = 1.0 if float(np.dot(centre - (p + q) / 2, perp)) > 0 else -1.0
            trim = 0.15 * ln
            u = d / ln
            _stroke(ink, p + u * trim + side * perp * gap, q - u * trim + side * perp * gap, lw)
            continue
        votes = 0.0
        for a_ in (i, j):
            for w in m.neighbors[a_]:
                if w in (i, j):
                    continue
                votes += float(np.dot(pts[w] - (p + q) / 2, perp))
        side = 1.0 if votes >= 0 else -1.0
        u = d / ln
        trim = 0.1 * ln
        _stroke(ink, p + u * trim + side * perp * gap, q - u * trim + side * perp * gap, lw)

    for r in circle_rings:
        ring_pts = pts[list(r)]
        centre = ring_pts.mean(axis=0)
        inradius = float(np.mean([np.hypot(*((ring_pts[t] + ring_pts[(t + 1) % len(r)]) / 2 - centre)) for t in range(len(r))]))
        _circle(ink, centre, 0.62 * inradius, lw)

    label_masks = []
    for i, parts in labels.items():
        mask, cx, top_off = _text_mask(parts, params.font_size)
        x = int(round(pts[i][0] - cx))
        y = int(round(pts[i][1] - params.font_size / 2 - top_off))
        _paste(ink, mask, x, y)
        label_masks.append((m.atoms[i].element, mask, x, y))
    return ink, label_masks


def _finish(m: Molecule, style: StyleProfile, seed: int, ink: np.ndarray, label_masks, rgb: bool,
            smiles: str | None) -> RasterImage:
    gray = _to_gray(ink)
    if rgb:
        out = np.repeat(gray[:, :, None], 3, axis=2).astype(np.float64)
        for element, mask, x, y in label_masks:
            color = _CPK.get(element)
            if color is None:
                continue
            h, w = gray.shape
            x0, y0 = max(x, 0), max(y, 0)
            x1, y1 = min(x + mask.shape[1], w), min(y + mask.shape[0], h)
            if x0 >= x1 or y0 >= y1:
                continue
            sub = mask[y0 - y : y1 - y, x0 - x : x1 - x][:, :, None]
            region = out[y0:y1, x0:x1]
            out[y0:y1, x0:x1] = region * (1 - sub) + np.array(color, dtype=np.float64) * sub
        pixels = np.round(out).astype(np.uint8)
    else:
        pixels = gray
    prov = (smiles if smiles is not None else _provenance_smiles(m), style.name, int(seed))
    return RasterImage(pixels, prov)


def _style_key(name: str) -> int:
    return sum((i + 1) * ord(c) for i, c in enumerate(name))


def _provenance_smiles(m: Molecule) -> str:
    from .smiles import canonical_smiles

    return canonical_smiles(m)


__all__ = [
    "BondKind",
    "INK_FLOOR",
    "Layout",
    "RasterImage",
    "RenderParams",
    "StyleProfile",
    "chiral_volume",
    "depicted_points",
    "layout",
    "render",
]
