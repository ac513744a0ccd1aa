#!/usr/bin/env python3
"""Regenerate the shipped functional-group token table (180 entries).

Entries mix conventional SMILES spellings of common groups with the
canonical-writer spellings of the same motifs, so group tokens fire both
on raw corpus text and on this package's own canonical output. Run from
the repository root:

    python scripts/make_group_file.py
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fragsmith.molgraph import canonical_smiles, parse_smiles
from fragsmith.tokenizer import _default_base_tokens

TARGET = 180

AROMATIC_RINGS = [
    "c1ccccc1", "c1ccncc1", "c1cccnc1", "c1cncnc1", "c1cnccn1", "c1ccnnc1",
    "c1ccoc1", "c1ccsc1", "c1cc[nH]c1", "c1c[nH]cn1", "c1cc[nH]n1",
    "c1cscn1", "c1ocnc1",
    "c1ccc2ccccc2c1", "c1ccc2ncccc2c1", "c1ccc2[nH]ccc2c1",
    "c1ccc2occc2c1", "c1ccc2sccc2c1", "c1ccc2nc[nH]c2c1",
]

SATURATED_RINGS = [
    "C1CC1", "C1CCC1", "C1CCCC1", "C1CCCCC1", "C1CCCCCC1",
    "C1CCNC1", "C1CCNCC1", "C1CCOC1", "C1CCOCC1", "C1CCSCC1",
    "N1CCCC1", "N1CCCCC1", "N1CCOCC1", "N1CCNCC1", "O1CCOCC1",
    "C1CNCCN1", "C1COCCN1",
]

CARBONYL = [
    "C=O", "C(=O)", "C(=O)O", "C(=O)N", "C(=O)C", "C(C)=O", "C(N)=O",
    "C(O)=O", "OC(=O)", "NC(=O)", "C(=O)OC", "C(=O)NC", "C(=O)Cl",
    "C(=O)OCC", "C(=O)NCC", "CC(=O)O", "CC(=O)N", "C(=O)OC(C)(C)C",
    "C(=O)c1ccccc1", "NC(=O)C", "OC(=O)C", "C(=O)CC",
]

NITROGEN = [
    "C#N", "N#C", "N=N", "N=O", "N=C", "C=N", "[N+](=O)[O-]",
    "[O-][N+]=O", "C(=N)N", "NC(=N)N", "N=C=O", "N=C=S",
    "CCN", "NCC", "CNC", "N(C)C", "NCCN", "N(C)(C)C",
    "NC(C)C", "CN(C)C", "NC(=O)N", "OC(=O)N", "NC(=S)N",
]

OXYGEN = [
    "OCC", "COC", "OCO", "OCCO", "OCCN", "OCCC",
    "COCC", "OC(C)C", "OC(C)(C)C", "OCc1ccccc1", "Oc1ccccc1",
]

SULFUR = [
    "S(=O)(=O)", "S(=O)(=O)N", "S(=O)(=O)O", "NS(=O)(=O)", "S(C)(=O)=O",
    "S(N)(=O)=O", "S=O", "CSC", "S(=O)(=O)C", "S(=O)(=O)F",
    "Sc1ccccc1", "S(=O)C", "CC(=O)C",
]

HALOGENATED = [
    "C(F)(F)F", "FC(F)F", "C(F)F", "FC(F)(F)", "C(Cl)(Cl)Cl",
    "C(F)(F)C", "OC(F)(F)F",
    "Fc1ccccc1", "Clc1ccccc1", "Brc1ccccc1",
    "c1ccc(F)cc1", "c1ccc(Cl)cc1", "c1ccc(Br)cc1",
]

ALKYL = [
    "C(C)C", "C(C)(C)C", "CC(C)C", "CC(C)(C)C",
    "C=C", "C=CC", "CC=C", "C#C", "C=C(C)C",
]

PHOSPHORUS_MISC = [
    "OP(=O)(O)O", "P(=O)(O)O", "OB(O)O", "B(O)O",
    "OCC(=O)", "NCC(=O)", "C(Cl)Cl", "OCCOC",
    "c1ccc(C)cc1", "c1ccc(O)cc1", "c1ccc(N)cc1", "c1ccc(OC)cc1",
    "n1ccccc1", "o1cccc1", "s1cccc1",
]

# Substituent spellings with the leading branch parenthesis, matching how
# branches appear mid-string in serialized molecules.
BRANCH_FORMS = [
    "(C)", "(O)", "(N)", "(F)", "(Cl)", "(Br)", "(=O)", "(C(F)(F)F)",
    "(OC)", "(CC)", "([N+](=O)[O-])", "(C#N)", "(C(C)C)", "(C(=O)O)",
    "(C(=O)N)", "(CO)", "(CN)", "(=O)(=O)",
]

# Canonical-writer spellings of frequent ring motifs.
WRITER_FORMS_SOURCE = [
    "c1ccccc1", "c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "c1ccsc1",
    "c1ccc2ccccc2c1", "C1CCCCC1", "C1CCNCC1", "C1CCOCC1", "N1CCOCC1",
    "N1CCNCC1", "C1CCCC1", "c1cncnc1",
]
WRITER_INTERIORS = [
    "(cccc1)", "(ccc1)", "(cc1)", "(CCCCC1)", "(CCCC1)", "(CCOC1)",
    "(CCNC1)", "(COC1)", "(CNC1)",
]


def main() -> None:
    entries: list[str] = []
    seen: set[str] = set(_default_base_tokens())
    seen.update(f"[{i}*]" for i in range(1, 17))

    def add(entry: str) -> None:
        entry = entry.strip()
        if not entry or entry in seen or "?" in entry:
            return
        seen.add(entry)
        entries.append(entry)

    for block in (
        AROMATIC_RINGS, SATURATED_RINGS, CARBONYL, NITROGEN, OXYGEN,
        SULFUR, HALOGENATED, ALKYL, PHOSPHORUS_MISC, BRANCH_FORMS,
    ):
        for entry in block:
            add(entry)
    for smi in WRITER_FORMS_SOURCE:
        add(canonical_smiles(parse_smiles(smi)))
    for entry in WRITER_INTERIORS:
        add(entry)

    if len(entries) > TARGET:
        entries = entries[:TARGET]
    elif len(entries) < TARGET:
        raise SystemExit(f"only {len(entries)} entries, need {TARGET}")

    out = Path(__file__).resolve().parents[1] / "src/fragsmith/data/functional_groups.txt"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# Functional-group tokens: one SMILES substring per line.\n")
        fh.write("# Exactly 180 entries; comments and blank lines are ignored.\n")
        for entry in entries:
            fh.write(entry + "\n")
    print(f"wrote {len(entries)} entries to {out}")


if __name__ == "__main__":
    main()
