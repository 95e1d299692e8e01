"""Regenerate the bundled sample SMILES pool.

The pool stands in for PubChem in tests and demos. Molecules are assembled
from hand-written fragment templates (aromatic and aliphatic rings, fused
heterocycles, linkers, stereo centres, E/Z double bonds, charged groups)
with randomized ring labels so that the SMILES text exercises the whole
supported grammar, not only the writer's own dialect.

    python scripts/make_sample_pool.py [--n 10000] [--seed 0] [--out PATH]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from ocsrkit.errors import SmilesError
from ocsrkit.smiles import parse

KNOWN = [
    "CC(=O)Oc1ccccc1C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "CC(=O)Nc1ccc(O)cc1",
    "CN1CCC[C@H]1c1cccnc1",
    "C[C@@H](C(=O)O)N",
    "OC[C@H]1OC(O)[C@H](O)[C@@H](O)[C@@H]1O",
    "O=[N+]([O-])c1ccccc1",
    "c1ccc2ccccc2c1",
    "c1ccc2[nH]ccc2c1",
    "c1ccncc1",
    "Oc1ccccc1",
    "Nc1ccccc1",
    "Cc1ccccc1",
    "CCO",
    "CC(=O)O",
    "C/C=C/C(=O)O",
    "C/C=C\\C(=O)O",
    "F/C=C/F",
    "N[C@@H](Cc1ccccc1)C(=O)O",
    "N[C@@H](CO)C(=O)O",
    "OC(=O)c1cccnc1",
    "c1ccc(cc1)-c1ccccc1",
    "O=C1NC(=O)c2ccccc12",
    "C1CCC2CCCCC2C1",
    "C1=CC=CC=C1",
    "c1cc[o+]cc1",
    "C[n+]1ccccc1",
    "[O-]c1ccccc1",
    "c1cc[cH-]c1",
    "S=C(N)N",
    "CS(C)=O",
    "CS(=O)(=O)N",
    "OP(O)(O)=O",
    "C#Cc1ccccc1",
    "[2H]C([2H])([2H])O",
    "[13CH4]",
    "[Na+].[Cl-]",
    "CC(=O)[O-].[Na+]",
    "B(O)(O)c1ccccc1",
    "c1ccc2c(c1)oc1ccccc12",
    "c1ccc2c(c1)sc1ccccc12",
    "c1cnc2ncccc2c1",
    "O=c1cccc[nH]1",
    "c1cn[nH]c1",
    "c1ncc[nH]1",
    "Cc1noc(C)c1",
    "c1cscn1",
    "C1CC1",
    "C1CCOC1",
    "C1COCCN1",
    "[Se]1C=CC=C1",
]

TERMINALS = [
    "F", "Cl", "Br", "I", "O", "N", "C", "CC", "C#N", "C(F)(F)F", "[N+](=O)[O-]",
    "C(=O)O", "C(N)=O", "OC", "N(C)C", "S(C)(=O)=O", "C=O", "C(C)C", "C(C)(C)C",
    "OC(F)(F)F", "SC", "C(=O)OC", "NC(=O)C", "S(N)(=O)=O", "[O-]", "C(=O)[O-]",
]
LINKERS = [
    "C", "CC", "CCC", "O", "N", "N(C)", "S", "C(=O)", "C(=O)N", "NC(=O)", "C(=O)O", "OC(=O)",
    "S(=O)(=O)", "S(=O)(=O)N", "NS(=O)(=O)", "C#C", "C=C", "CO", "OC", "NC", "CN", "C(C)",
    "C(=O)NC", "OCC", "N=N", "C(=N)",
]
STEREO_LINKERS = [
    "[C@H](C)", "[C@@H](C)", "[C@H](O)", "[C@@H](O)", "[C@H](N)", "[C@@H](F)",
    "[C@](C)(O)", "[C@@](C)(F)", "[C@H](C(=O)O)", "[C@@H](CC)",
    "/C=C/", "/C=C\\", "\\C=C/", "/C(C)=C/", "/C=N/", "/C=C/C=C/",
]
# {r}/{q}: ring labels; {s}: substituent slot (empty or a branch)
RINGS = [
    "c{r}ccc{s}cc{r}", "c{r}cccc{s}c{r}", "c{r}ccccc{r}", "c{r}ccncc{r}", "c{r}ccc{s}nc{r}",
    "c{r}cnc{s}nc{r}", "c{r}ncccn{r}", "c{r}ccsc{r}", "c{r}ccoc{r}", "c{r}cc[nH]c{r}",
    "c{r}ccn(C)c{r}", "c{r}cnc[nH]{r}", "c{r}cn[nH]c{r}", "c{r}nc(C)on{r}", "c{r}ncsc{r}",
    "c{r}ccc{q}ccccc{q}c{r}", "c{r}ccc{q}[nH]ccc{q}c{r}", "c{r}ccc{q}ncccc{q}c{r}",
    "c{r}ccc{q}[nH]cnc{q}c{r}", "c{r}ccc{q}occc{q}c{r}", "c{r}ccc{q}sccc{q}c{r}",
    "c{r}ccc{q}c(c{r})OCO{q}", "c{r}cc(=O)[nH]cc{r}",
    "C{r}CCC{s}CC{r}", "C{r}CCCC{r}", "C{r}CC{r}", "C{r}CCN{s}CC{r}", "C{r}CCOC{r}",
    "C{r}CC(=O)N{s}C{r}", "C{r}CC=CCC{r}", "[C@@H]{r}CCCN{r}", "[C@H]{r}CCOC{r}",
    "C{r}CN(C)CCN{r}", "C{r}CCC{q}CCCCC{q}C{r}", "C{r}CC{q}(CC{r})CCC{q}",
]
ENTRY_RINGS = ["N{r}CCOCC{r}", "N{r}CCN{s}CC{r}", "N{r}CCCC{r}", "N{r}CCCCC{r}", "n{r}ccnc{r}"]


class _Builder:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.next_label = 1
        self.open: set[int] = set()
        self.closed: list[int] = []

    def label(self) -> int:
        # sometimes reuse a label that has already been closed, as real SMILES do
        free = [lab for lab in self.closed if lab not in self.open]
        if free and self.rng.random() < 0.5:
            lab = self.pick(free)
        else:
            lab = self.next_label
            self.next_label += 1
        self.open.add(lab)
        return lab

    def release(self, *labels: int) -> None:
        for lab in labels:
            self.open.discard(lab)
            if lab not in self.closed:
                self.closed.append(lab)

    @staticmethod
    def text(lab: int) -> str:
        return str(lab) if lab < 10 else f"%{lab:02d}"

    def pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def substituent(self, depth: int) -> str:
        if depth > 1 or self.rng.random() < 0.5:
            return self.pick(TERMINALS)
        return self.pick(LINKERS) + self.ring(depth + 1)

    def ring(self, depth: int, entry: bool = False) -> str:
        tpl = self.pick(ENTRY_RINGS if entry else RINGS)
        r = self.label()
        q = self.label() if "{q}" in tpl else None
        s = ""
        if "{s}" in tpl and self.rng.random() < 0.6:
            s = "(" + self.substituent(depth) + ")"
        out = tpl.format(r=self.text(r), q="" if q is None else self.text(q), s=s)
        self.release(r, *([] if q is None else [q]))
        return out

    def molecule(self) -> str:
        parts = []
        if self.rng.random() < 0.15:
            parts.append(self.ring(0, entry=True))
        else:
            parts.append(self.pick(TERMINALS) if self.rng.random() < 0.5 else self.ring(0))
        units = int(self.rng.integers(1, 5))
        for _ in range(units):
            roll = self.rng.random()
            if roll < 0.25:
                parts.append(self.pick(STEREO_LINKERS))
            elif roll < 0.6:
                parts.append(self.pick(LINKERS))
            parts.append(self.ring(0) if self.rng.random() < 0.6 else self.pick(TERMINALS))
        return "".join(parts)


def generate(n: int, seed: int = 0) -> list[str]:
    rng = np.random.default_rng(seed)
    out: list[str] = []
    seen: set[str] = set()
    for s in KNOWN:
        parse(s)
        out.append(s)
        seen.add(s)
    while len(out) < n:
        s = _Builder(rng).molecule()
        if s in seen:
            continue
        try:
            m = parse(s)
        except SmilesError:
            continue
        if len(m.atoms) > 60:
            continue
        seen.add(s)
        out.append(s)
    return out[:n]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parents[1] / "src" / "ocsrkit" / "data" / "sample_pool.smi",
    )
    args = ap.parse_args()
    pool = generate(args.n, args.seed)
    args.out.write_text("\n".join(pool) + "\n")
    print(f"wrote {len(pool)} SMILES to {args.out}")


if __name__ == "__main__":
    main()
