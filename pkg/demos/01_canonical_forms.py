"""
Canonical SMILES and the two match levels
=========================================

Exact-match scoring hinges on one question: do two SMILES strings describe
the same molecule? This walk-through shows how the toolkit answers it and
why stereo-blind ("achiral") matching is reported alongside.

    python demos/01_canonical_forms.py
"""

from __future__ import annotations

import numpy as np

from ocsrkit.molgraph import isomorphic, strip_stereo
from ocsrkit.smiles import canonical_forms, canonicalize, parse, random_smiles

# Ethanol can be written many ways; all of them canonicalize to one string.
for s in ["CCO", "OCC", "C(O)C", "[CH3][CH2][OH]"]:
    print(f"{s:>16}  ->  {canonicalize(s)}")

# Aromatic and Kekule spellings of benzene are the same molecule.
print(canonicalize("c1ccccc1") == canonicalize("C1=CC=CC=C1"))

# Any atom ordering gives the same canonical string. random_smiles renumbers
# the atoms and picks random branch orders and ring-closure labels.
ibuprofen = parse("CC(C)Cc1ccc(cc1)C(C)C(=O)O")
rng = np.random.default_rng(0)
variants = [random_smiles(ibuprofen, rng) for _ in range(5)]
for v in variants:
    print(f"{v:>34}  ->  {canonicalize(v)}")

# Stereo is part of the identity. L- and D-alanine differ only in the
# tetrahedral tag, so the full canonical forms differ while the achiral
# forms agree.
l_ala, d_ala = "C[C@@H](C(=O)O)N", "C[C@H](C(=O)O)N"
full_l, achiral_l = canonical_forms(l_ala)
full_d, achiral_d = canonical_forms(d_ala)
print("exact match:  ", full_l == full_d)
print("achiral match:", achiral_l == achiral_d)

# The graph-level answer agrees with the string-level one.
print(isomorphic(parse(l_ala), parse(d_ala)))
print(isomorphic(strip_stereo(parse(l_ala)), strip_stereo(parse(d_ala))))

# E/Z isomers behave the same way.
print(canonical_forms("F/C=C/F"), canonical_forms("F/C=C\\F"))
