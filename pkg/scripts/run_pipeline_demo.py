#!/usr/bin/env python3
"""End-to-end pipeline demo on the bundled fixtures.

Preprocesses the fixture corpus, builds paired instruction records
(pre-training pairs from fragmentation plus fine-tuning pairs from the
bundled reactions), emits JSONL shards, and prints the dataset's
fragment-count and weight histograms.

    python scripts/run_pipeline_demo.py [OUT_DIR]
"""

from __future__ import annotations

import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fragsmith.dataset import (
    PairCounters,
    emit_jsonl,
    make_finetune_pairs,
    make_pretrain_pairs,
    preprocess,
    read_reactions,
)
from fragsmith.molgraph import molecular_weight, parse_smiles
from fragsmith.tokenizer import build_vocab


def main() -> None:
    root = Path(__file__).resolve().parents[1]
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else root / "out" / "demo"

    vocab = build_vocab()
    corpus = (root / "data/fixture_corpus.smi").read_text().splitlines()
    lib = preprocess(corpus, vocab)
    print(f"library: {lib.stats.kept} molecules, k={lib.k:.2f}")

    params = lib.fragment_params(seed=0)
    counters = PairCounters()
    records = list(make_pretrain_pairs(lib, params, counters=counters))
    records += list(
        make_finetune_pairs(
            read_reactions(root / "data/reactions_sample.tsv"), vocab,
            counters=counters,
        )
    )
    manifest = emit_jsonl(
        records, 2000, out_dir,
        config_echo={"seed": params.seed, "k": params.k, "alpha": params.alpha},
    )
    print(f"emitted {manifest.total_records} records in {len(manifest.shards)} shards -> {out_dir}")
    print(f"pairs: {counters.emitted_pairs}, no-cut skips: {counters.skipped_no_cut}")

    frag_hist = Counter()
    weight_hist = Counter()
    for rec in records:
        if rec.task != "fragmentation":
            continue
        n = rec.output.count(".") + 1
        frag_hist[n if n <= 10 else ">10"] += 1
        w = molecular_weight(parse_smiles(rec.input))
        band = "<250" if w < 250 else "250-500" if w < 500 else "500-750" if w < 750 else "750-1000"
        weight_hist[band] += 1

    total = sum(frag_hist.values())
    print("\nfragment count distribution")
    for key in sorted(frag_hist, key=lambda x: (isinstance(x, str), x)):
        n = frag_hist[key]
        print(f"  {key!s:>4}: {n:5d} ({100 * n / total:5.1f}%)")
    print("\nmolecular weight bands (g/mol)")
    for key in ("<250", "250-500", "500-750", "750-1000"):
        n = weight_hist.get(key, 0)
        print(f"  {key:>8}: {n:5d} ({100 * n / total:5.1f}%)")


if __name__ == "__main__":
    main()
