import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile("fragsmith", deadline=None, max_examples=60)
settings.load_profile("fragsmith")

ROOT = Path(__file__).resolve().parents[1]
CORPUS_PATH = ROOT / "data" / "fixture_corpus.smi"
REACTIONS_PATH = ROOT / "data" / "reactions_sample.tsv"


@pytest.fixture(scope="session")
def corpus_lines() -> list[str]:
    lines = CORPUS_PATH.read_text().splitlines()
    return [l.strip() for l in lines if l.strip() and not l.startswith("#")]


@pytest.fixture(scope="session")
def vocab():
    from fragsmith.tokenizer import build_vocab

    return build_vocab()


@pytest.fixture(scope="session")
def library(corpus_lines, vocab):
    from fragsmith.dataset import preprocess

    return preprocess(corpus_lines, vocab)


@pytest.fixture(scope="session")
def default_params(library):
    return library.fragment_params(seed=0)
