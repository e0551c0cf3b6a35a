"""Text normalization, tokenization, and stable n-gram hashing.

One tokenizer serves both retrieval and the lexical entailment baseline so
their vocabularies agree.  Hashing is FNV-1a over UTF-8 bytes of the
tab-joined n-gram: a fixed algorithm, stable across runs and platforms,
recorded in index headers as HASH_NAME.
"""

import re
import unicodedata

HASH_NAME = "fnv1a64"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Word characters minus underscore: wiki page ids use underscores as spaces.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased NFKC tokens, split on any non-alphanumeric character."""
    return _TOKEN_RE.findall(unicodedata.normalize("NFKC", text).lower())


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def hash_ngram(tokens: list[str], bin_count: int) -> int:
    """Deterministic bin in [0, bin_count) for a unigram or bigram."""
    return fnv1a64("\t".join(tokens).encode("utf-8")) % bin_count


def hashed_counts(tokens: list[str], orders, bin_count: int) -> dict[int, int]:
    """Raw occurrence counts per hash bin over the requested n-gram orders."""
    counts: dict[int, int] = {}
    for order in orders:
        for i in range(len(tokens) - order + 1):
            b = hash_ngram(tokens[i : i + order], bin_count)
            counts[b] = counts.get(b, 0) + 1
    return counts
