import pathlib

import numpy as np
import pytest

from claimcheck.corpus import Corpus, Document, ingest_dump
from claimcheck.nli_data import load_claims

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

WORDS = [
    "harbor", "light", "island", "strait", "ferry", "north", "south", "stone",
    "mill", "abbey", "tern", "reef", "chart", "captain", "storm", "winter",
    "lantern", "herring", "granite", "marsh", "jetty", "buoy", "bell", "coast",
    "keeper", "survey", "causeway", "shoal", "skerry", "regatta", "poem",
    "opera", "band", "album", "song", "museum", "painting", "novel", "film",
    "river", "town", "shore", "field", "club", "rock", "point", "deep",
    "count", "vane", "quay", "pilot", "night", "grey", "blue", "low", "iron",
]


def make_random_corpus(rng: np.random.Generator, max_docs: int = 100,
                       max_sents: int = 40, min_docs: int = 2) -> Corpus:
    """Small synthetic corpus with distinct page ids and random sentences."""
    corpus = Corpus()
    n_docs = int(rng.integers(min_docs, max_docs + 1))
    for i in range(n_docs):
        n_sents = int(rng.integers(1, max_sents + 1))
        sents = []
        for j in range(n_sents):
            n_words = int(rng.integers(3, 12))
            idx = rng.integers(0, len(WORDS), size=n_words)
            sents.append(" ".join(WORDS[w] for w in idx) + ".")
        corpus.add_document(Document(
            page_id=f"Page_{i:03d}",
            text=" ".join(sents),
            lines=list(enumerate(sents)),
        ))
    return corpus


@pytest.fixture(scope="session")
def mini_corpus():
    corpus, _ = ingest_dump(DATA / "mini_wiki.jsonl")
    return corpus


@pytest.fixture(scope="session")
def mini_instances():
    return load_claims(DATA / "mini_claims.jsonl")
