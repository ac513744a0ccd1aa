"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict
lines; the whole suite takes a couple of minutes on a laptop-class CPU.
"""

import random
import time
from collections import Counter

import pytest

from fragsmith.brics import FragmentParams, fragment, max_fragments
from fragsmith.dataset import (
    PairCounters,
    emit_jsonl,
    make_finetune_pairs,
    make_pretrain_pairs,
    read_reactions,
)
from fragsmith.metrics import (
    MORGAN,
    FingerprintBitset,
    KEYS,
    PATH,
    bleu,
    evaluate,
    fingerprint,
    levenshtein,
    tanimoto,
)
from fragsmith.molgraph import (
    canonical_smiles,
    molecular_weight,
    parse_smiles,
    randomized_smiles,
)
from fragsmith.recombine import carbon_cap, rejoin
from fragsmith.tokenizer import (
    FRAGMENT_SET,
    MOLECULE,
    Vocab,
    detokenize,
    payload_length,
    tokenize,
)

from conftest import REACTIONS_PATH
from oracles import bleu_reference, fragment_cap_reference, levenshtein_matrix


def _verdict(n: int, detail: str) -> None:
    print(f"\n[criterion {n}] PASS: {detail}")


@pytest.fixture(scope="module")
def parsed_corpus(corpus_lines):
    return [parse_smiles(s) for s in corpus_lines]


def test_criterion_1_round_trip_fragmentation(library, default_params):
    """rejoin(fragment(m)) == m for 100% of cut molecules, under 60 s."""
    assert len(library.records) >= 1000
    start = time.perf_counter()
    attempted = 0
    failures = []
    for rec in library.records:
        mol = parse_smiles(rec.canonical)
        fs = fragment(mol, default_params)
        if not fs.cleaved:
            continue
        attempted += 1
        if canonical_smiles(rejoin(fs)) != fs.parent_canonical:
            failures.append(rec.canonical)
    elapsed = time.perf_counter() - start
    assert attempted >= 1
    assert not failures, failures[:5]
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    _verdict(1, f"{attempted} molecules round-tripped in {elapsed:.1f}s")


def test_criterion_2_cap_formula_compliance(parsed_corpus):
    """10,000 (L,k,alpha) triples: exact oracle match and count <= cap."""
    rng = random.Random(20240)
    checked = 0
    for i in range(10_000):
        mol = parsed_corpus[i % len(parsed_corpus)]
        length = len(mol.source_text)
        k = rng.randint(1, 200)
        alpha = rng.uniform(0.1, 4.0)
        expected = fragment_cap_reference(length, k, alpha)
        got = max_fragments(length, k, alpha)
        assert got == expected, (length, k, alpha)
        # spot-check the fragment count against the cap on a rotating subset
        if i % 10 == 0:
            params = FragmentParams(k=k, alpha=alpha, seed=i)
            fs = fragment(mol, params)
            assert len(fs.fragments) <= got, (mol.source_text, k, alpha)
            checked += 1
    _verdict(2, f"10000 triples matched the reference; {checked} fragmentations capped")


def test_criterion_3_distribution_echo(library, default_params):
    """<=2% of molecules over 10 fragments; mode within 1..10."""
    hist = Counter()
    for rec in library.records:
        fs = fragment(parse_smiles(rec.canonical), default_params)
        hist[len(fs.fragments)] += 1
    total = sum(hist.values())
    over10 = sum(c for n, c in hist.items() if n > 10)
    share = over10 / total
    mode = hist.most_common(1)[0][0]
    assert share <= 0.02, f"{share:.2%} exceed 10 fragments"
    assert 1 <= mode <= 10
    _verdict(3, f"{share:.2%} over 10 fragments, mode {mode}")


def test_criterion_4_tokenizer_round_trip(parsed_corpus, vocab, default_params):
    """detokenize(tokenize(s)) == s for 10,000 randomized serializations,
    with group tokens never hurting the token count."""
    base_tokens, base_classes = [], []
    for tok, cls in zip(vocab.tokens, vocab.classes):
        if cls != "group":
            base_tokens.append(tok)
            base_classes.append(cls)
    base_vocab = Vocab(tokens=tuple(base_tokens), classes=tuple(base_classes))

    def check(text: str, kind: str) -> None:
        ts = tokenize(text, vocab, kind)
        assert detokenize(ts, vocab) == text
        base_ts = tokenize(text, base_vocab, kind)
        assert len(ts.tokens) <= len(base_ts.tokens)

    n_checked = 0
    for i, mol in enumerate(parsed_corpus):
        for seed in range(8):
            check(randomized_smiles(mol, seed), MOLECULE)
            n_checked += 1
    # dummy-atom fragment payloads
    for mol in parsed_corpus[:400]:
        fs = fragment(mol, default_params)
        payload = ".".join(f.source_text for f in fs.fragments)
        check(payload, FRAGMENT_SET)
        n_checked += 1
    assert n_checked >= 10_000
    _verdict(4, f"{n_checked} serializations round-tripped with compression")


def test_criterion_5_metric_oracles():
    """levenshtein == DP oracle (10,000 pairs); bleu within 1e-9 of the
    reference (100 pairs); tanimoto bounds on 10,000 random bitsets."""
    rng = random.Random(555)
    alphabet = "CNOPSFIclnos()[]=#12345+-@/\\."

    def rand_string(max_len: int) -> str:
        return "".join(
            rng.choice(alphabet) for _ in range(rng.randint(0, max_len))
        )

    for _ in range(10_000):
        a, b = rand_string(24), rand_string(24)
        assert levenshtein(a, b) == levenshtein_matrix(a, b), (a, b)

    for _ in range(100):
        a, b = rand_string(30), rand_string(30)
        assert bleu(a, b) == pytest.approx(bleu_reference(a, b), abs=1e-9), (a, b)

    for _ in range(10_000):
        x = rng.getrandbits(256)
        y = rng.getrandbits(256)
        fa = FingerprintBitset(bits=x, width=256, scheme=MORGAN)
        fb = FingerprintBitset(bits=y, width=256, scheme=MORGAN)
        s = tanimoto(fa, fb)
        assert 0.0 <= s <= 1.0
        assert s == tanimoto(fb, fa)
        assert tanimoto(fa, fa) == 1.0
    _verdict(5, "levenshtein 10000/10000 exact, bleu 100/100 within 1e-9, "
                "tanimoto bounds on 10000 pairs")


def test_criterion_6_fingerprint_graph_invariance(parsed_corpus):
    """1000 molecules x 10 serializations: identical bitsets, all schemes."""
    mols = parsed_corpus[:1000]
    assert len(mols) == 1000
    mismatches = 0
    for mol in mols:
        reference = {s: fingerprint(mol, s) for s in (MORGAN, PATH, KEYS)}
        for seed in range(10):
            alt = parse_smiles(randomized_smiles(mol, seed))
            for scheme in (MORGAN, PATH, KEYS):
                if fingerprint(alt, scheme) != reference[scheme]:
                    mismatches += 1
    assert mismatches == 0
    _verdict(6, "30000 fingerprints identical across 10 serializations each")


def test_criterion_7_fragment_reactant_affinity(default_params):
    """Fragments of the product resemble the true reactants by a Morgan
    Tanimoto margin of at least 0.15 over shuffled reactants."""
    rows = list(read_reactions(REACTIONS_PATH))
    assert len(rows) == 100

    def capped_fragments_fp(product: str):
        fs = fragment(parse_smiles(product), default_params)
        joined = ".".join(carbon_cap(f).source_text for f in fs.fragments)
        return fingerprint(parse_smiles(joined), MORGAN)

    def reactants_fp(reactants: list[str]):
        return fingerprint(parse_smiles(".".join(reactants)), MORGAN)

    rng = random.Random(42)
    shuffled = [r for r, _, _ in rows]
    rng.shuffle(shuffled)
    true_mean = 0.0
    shuffled_mean = 0.0
    for (reactants, product, _), wrong in zip(rows, shuffled):
        fp = capped_fragments_fp(product)
        true_mean += tanimoto(fp, reactants_fp(reactants))
        shuffled_mean += tanimoto(fp, reactants_fp(wrong))
    true_mean /= len(rows)
    shuffled_mean /= len(rows)
    margin = true_mean - shuffled_mean
    assert margin >= 0.15, f"margin {margin:.3f}"
    _verdict(7, f"true {true_mean:.3f} vs shuffled {shuffled_mean:.3f} "
                f"(margin {margin:.3f})")


def test_criterion_8_determinism_and_duality(library, vocab, default_params, tmp_path):
    """Byte-identical rebuilds; every forward record has exactly one
    swapped backward counterpart; filters hold on every payload."""
    import dataclasses

    small = dataclasses.replace(library, records=library.records[:150])

    def build(out_dir):
        counters = PairCounters()
        records = list(make_pretrain_pairs(small, default_params, counters=counters))
        records += list(
            make_finetune_pairs(
                read_reactions(REACTIONS_PATH), vocab, counters=counters
            )
        )
        manifest = emit_jsonl(records, 500, out_dir, config_echo={"seed": 0})
        return records, manifest, counters

    records1, manifest1, counters = build(tmp_path / "a")
    records2, manifest2, _ = build(tmp_path / "b")
    d1 = [s["sha256"] for s in manifest1.shards]
    d2 = [s["sha256"] for s in manifest2.shards]
    assert d1 == d2 and d1, "rebuild changed shard bytes"

    by_prefix = {}
    for rec in records1:
        prefix, _, suffix = rec.id.rpartition("-")
        by_prefix.setdefault(prefix, {})[suffix] = rec
    assert len(records1) == 2 * counters.emitted_pairs
    for prefix, pair in by_prefix.items():
        assert set(pair) == {"fwd", "bwd"}, prefix
        fwd, bwd = pair["fwd"], pair["bwd"]
        assert fwd.direction == "forward" and bwd.direction == "backward"
        assert fwd.input == bwd.output and fwd.output == bwd.input

    for rec in records1:
        for payload in (rec.input, rec.output):
            ts = tokenize(payload, vocab, MOLECULE)
            assert payload_length(ts, vocab) <= 512
            assert all(
                molecular_weight(parse_smiles(part)) <= 1000.0
                for part in payload.split(".")
            )
    _verdict(8, f"{len(records1)} records rebuilt byte-identically; "
                f"{counters.emitted_pairs} dual pairs closed; filters hold")


def test_criterion_9_identity_evaluation(library):
    """evaluate(preds=refs) reports a perfect row."""
    refs = [rec.canonical for rec in library.records[:50]]
    report = evaluate(refs, refs)
    assert report.exact == 1.0
    assert report.bleu == 1.0
    assert report.levenshtein == 0.0
    assert report.fts_path == 1.0
    assert report.fts_keys == 1.0
    assert report.fts_morgan == 1.0
    assert report.validity == 1.0
    _verdict(9, f"identity suite perfect on {report.n} pairs")
