#!/usr/bin/env python3
"""Regenerate the bundled drug-like fixture corpus (data/fixture_corpus.smi).

Molecules are assembled deterministically from ring cores, linkers and
substituents, then validated, weight-bounded and deduplicated with this
package's own parser. Run from the repository root:

    python scripts/make_fixture_corpus.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fragsmith.molgraph import canonical_smiles, molecular_weight, parse_smiles, validate

TARGET = 1200

CORES = [
    "c1ccc({0})cc1",
    "c1ccc({0})c({1})c1",
    "c1cc({0})cc({1})c1",
    "c1ccnc({0})c1",
    "c1ccc({0})nc1",
    "c1cnc({0})nc1",
    "c1csc({0})c1",
    "c1coc({0})c1",
    "c1ccc2cc({0})ccc2c1",
    "c1cc2ccccc2n1{0}",
    "C1CCN({0})CC1",
    "C1CN({0})CCN1{1}",
    "C1CCC({0})CC1",
    "O1CCN({0})CC1",
    "c1nc({0})c2ccccc2n1{1}",
]

LINKERS = [
    "C(=O)N{T}",
    "NC(=O){T}",
    "C(=O)O{T}",
    "OC(=O){T}",
    "O{T}",
    "OC{T}",
    "CO{T}",
    "N{T}",
    "NC{T}",
    "CN{T}",
    "C{T}",
    "CC{T}",
    "S(=O)(=O)N{T}",
    "NS(=O)(=O){T}",
    "C(=O){T}",
    "S{T}",
    "C=C{T}",
    "OCC{T}",
]

TAILS = [
    "c1ccccc1",
    "c1ccncc1",
    "c1cccnc1",
    "c1ccc(F)cc1",
    "c1ccc(Cl)cc1",
    "c1ccc(OC)cc1",
    "c1ccc(C)cc1",
    "c1ccsc1",
    "c1ccoc1",
    "C1CCCCC1",
    "C1CCOCC1",
    "C1CCNC1",
    "N1CCOCC1",
    "N1CCCC1",
    "N1CCCCC1",
    "C1CC1",
]

SIMPLE_SUBS = [
    "F", "Cl", "Br", "I", "C", "CC", "C(C)C", "C(C)(C)C", "OC", "O", "N",
    "C#N", "C(F)(F)F", "OC(F)(F)F", "[N+](=O)[O-]", "S(C)(=O)=O",
    "NC(C)=O", "C(=O)OC", "C(=O)N", "OCC", "N(C)C", "CNC", "C(=O)O",
]


def _shift_digits(s: str, offset: int) -> str:
    return "".join(str(int(ch) + offset) if ch.isdigit() else ch for ch in s)


def _substituent(rng: random.Random) -> str:
    if rng.random() < 0.5:
        return rng.choice(SIMPLE_SUBS)
    linker = rng.choice(LINKERS)
    tail = _shift_digits(rng.choice(TAILS), 2)
    return linker.replace("{T}", tail)


def main() -> None:
    out_path = Path(__file__).resolve().parents[1] / "data/fixture_corpus.smi"
    seen: set[str] = set()
    lines: list[str] = []
    attempt = 0
    while len(lines) < TARGET and attempt < TARGET * 30:
        rng = random.Random(f"fixture:{attempt}")
        attempt += 1
        core = rng.choice(CORES)
        n_slots = core.count("{")
        subs = [_substituent(rng) for _ in range(n_slots)]
        smiles = core.format(*subs)
        try:
            mol = parse_smiles(smiles)
        except ValueError:
            continue
        if not validate(mol).valid:
            continue
        weight = molecular_weight(mol)
        if not 150.0 <= weight <= 650.0:
            continue
        canon = canonical_smiles(mol)
        if canon in seen:
            continue
        seen.add(canon)
        lines.append(smiles)
    if len(lines) < TARGET:
        raise SystemExit(f"only generated {len(lines)} molecules")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("# Drug-like fixture corpus, deterministically generated.\n")
        for line in lines:
            fh.write(line + "\n")
    print(f"wrote {len(lines)} molecules to {out_path}")


if __name__ == "__main__":
    main()
