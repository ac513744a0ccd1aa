#!/usr/bin/env python3
"""Regenerate the bundled reaction sample (data/reactions_sample.tsv).

Each reaction is derived from a fixture molecule: one seeded cleavable
bond is cut, both pieces are carbon-capped to stand in as reactants, and
the intact molecule is the product. The reaction type is named after the
cut's link-label pair. Run from the repository root:

    python scripts/make_reaction_sample.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fragsmith.brics import cut_bonds, find_brics_bonds
from fragsmith.molgraph import canonical_smiles, parse_smiles
from fragsmith.recombine import carbon_cap

TARGET = 100

REACTION_TYPES = {
    frozenset({1, 2}): "amide coupling",
    frozenset({1, 5}): "amide coupling",
    frozenset({1, 10}): "acylation",
    frozenset({1, 3}): "esterification",
    frozenset({3, 4}): "ether formation",
    frozenset({3, 13}): "ether formation",
    frozenset({3, 14}): "aryl ether formation",
    frozenset({3, 16}): "aryl ether formation",
    frozenset({4, 5}): "amination",
    frozenset({5, 12}): "sulfonamidation",
    frozenset({2, 12}): "sulfonamidation",
    frozenset({5, 14}): "aryl amination",
    frozenset({5, 16}): "aryl amination",
    frozenset({8, 16}): "alkylation",
    frozenset({8, 15}): "alkylation",
    frozenset({16, 16}): "aryl coupling",
    frozenset({14, 16}): "aryl coupling",
}


def main() -> None:
    root = Path(__file__).resolve().parents[1]
    corpus = (root / "data/fixture_corpus.smi").read_text().splitlines()
    out_path = root / "data/reactions_sample.tsv"

    rows: list[str] = []
    for line in corpus:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if len(rows) >= TARGET:
            break
        mol = parse_smiles(line)
        bonds = find_brics_bonds(mol)
        if not bonds:
            continue
        rng = random.Random(f"reaction:{line}")
        pick = rng.choice(bonds)
        single = cut_bonds(mol, [pick])
        reactants = [carbon_cap(f).source_text for f in single.fragments]
        product = canonical_smiles(mol)
        rtype = REACTION_TYPES.get(frozenset(pick.labels), "fragment coupling")
        rows.append(f"{'.'.join(sorted(reactants))}\t{product}\t{rtype}")

    if len(rows) < TARGET:
        raise SystemExit(f"only generated {len(rows)} reactions")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("# reactants_dot_joined\tproduct\treaction_type\n")
        for row in rows:
            fh.write(row + "\n")
    print(f"wrote {len(rows)} reactions to {out_path}")


if __name__ == "__main__":
    main()
