"""Entity-driven document retrieval.

A lightweight capitalization heuristic stands in for a trained tagger:
maximal runs of capitalized tokens become mentions, except a lone
sentence-initial token (capitalized only because it opens the sentence).
Real tagger output can be injected from a JSON-lines side file instead.
Each mention is matched to the page whose normalized title is nearest by
Levenshtein distance; every sentence of the matched pages becomes a
candidate.
"""

import json
import re
from dataclasses import dataclass

import numpy as np

from . import kernels
from .corpus import Corpus, SentenceRef

DEFAULT_LEADING_STOPWORDS = frozenset({"the", "a", "an"})

_EDGE_TRIM_RE = re.compile(r"^[\W_]+|[\W_]+$", re.UNICODE)


@dataclass(frozen=True)
class EntityMention:
    surface: str
    source: str  # "heuristic" or "external"

    def __post_init__(self):
        if not self.surface.strip():
            raise ValueError("entity surface must be non-empty")


@dataclass(frozen=True)
class TitleMatch:
    entity: EntityMention
    page_id: str
    distance: int


def _core(token: str) -> str:
    return _EDGE_TRIM_RE.sub("", token)


def extract_entities(claim: str,
                     leading_stopwords=DEFAULT_LEADING_STOPWORDS) -> list[EntityMention]:
    """Capitalized-run heuristic; deduplicated, in order of first appearance."""
    tokens = claim.split()
    cores = [_core(t) for t in tokens]
    capitalized = [bool(c) and c[0].isupper() for c in cores]

    runs = []  # (start_index, [core, ...])
    i = 0
    while i < len(tokens):
        if capitalized[i]:
            j = i
            while j < len(tokens) and capitalized[j]:
                j += 1
            runs.append((i, cores[i:j]))
            i = j
        else:
            i += 1

    seen = set()
    mentions = []
    for start, words in runs:
        if start == 0 and len(words) == 1:
            continue  # sentence-initial capitalization carries no signal
        while words and words[0].casefold() in leading_stopwords:
            words = words[1:]
        if not words:
            continue
        surface = " ".join(words)
        if surface not in seen:
            seen.add(surface)
            mentions.append(EntityMention(surface, "heuristic"))
    return mentions


def load_entity_annotations(path) -> dict:
    """JSON-lines {id, entities: [...]} -> mapping of claim id to surfaces."""
    table: dict = {}
    with open(path, encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                claim_id = row["id"] if "id" in row else row["claim_id"]
                entities = row["entities"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"bad entity annotation on line {lineno}: {exc}") from exc
            table[claim_id] = [str(e) for e in entities]
    return table


class FileEntityExtractor:
    """Verbatim passthrough of externally produced mentions, keyed by claim id."""

    def __init__(self, table: dict):
        self.table = table

    @classmethod
    def load(cls, path) -> "FileEntityExtractor":
        return cls(load_entity_annotations(path))

    def __call__(self, claim_id) -> list[EntityMention]:
        return [EntityMention(s, "external") for s in self.table.get(claim_id, []) if s.strip()]


def normalize_title(title: str) -> str:
    """Page ids use underscores for spaces; claims do not.  Case is ignored."""
    return title.replace("_", " ").casefold()


def levenshtein(a: str, b: str) -> int:
    return int(kernels.levenshtein(kernels.codes(a), kernels.codes(b)))


class TitleMatcher:
    """Nearest-title lookup over a fixed corpus.

    The reference behavior is a full scan of every title; the banded variant
    skips titles whose length difference already exceeds the best distance
    found so far and must return identical results.
    """

    def __init__(self, corpus: Corpus):
        if len(corpus) == 0:
            raise ValueError("cannot match titles against an empty corpus")
        self.page_ids = corpus.page_ids()
        self.norm_titles = [normalize_title(p) for p in self.page_ids]
        self._flat, self._offsets = kernels.pack_strings(self.norm_titles)

    def match(self, entity: EntityMention, band: bool = False) -> TitleMatch:
        query = kernels.codes(normalize_title(entity.surface))
        if band:
            dists = kernels.batch_levenshtein_banded(self._flat, self._offsets, query)
        else:
            dists = kernels.batch_levenshtein(self._flat, self._offsets, query)
        best = int(dists.min())
        tied = np.flatnonzero(dists == best)
        # shorter normalized title first, then lexicographic, then page id
        pick = min(tied.tolist(),
                   key=lambda i: (len(self.norm_titles[i]), self.norm_titles[i],
                                  self.page_ids[i]))
        return TitleMatch(entity, self.page_ids[pick], best)


def match_entity_to_title(corpus: Corpus, entity: EntityMention) -> TitleMatch:
    return TitleMatcher(corpus).match(entity)


def candidate_sentences_for_claim(corpus: Corpus, claim: str, *,
                                  extractor=None, claim_id=None,
                                  matcher: TitleMatcher | None = None,
                                  max_distance: int | None = None) -> list[SentenceRef]:
    """All non-empty sentences of the pages matched by the claim's entities."""
    if extractor is None:
        mentions = extract_entities(claim)
    else:
        mentions = extractor(claim_id)
    if not mentions:
        return []
    if matcher is None:
        matcher = TitleMatcher(corpus)
    pages = set()
    for mention in mentions:
        hit = matcher.match(mention)
        if max_distance is not None and hit.distance > max_distance:
            continue
        pages.add(hit.page_id)
    refs: set[SentenceRef] = set()
    for page_id in pages:
        refs.update(corpus.get(page_id).non_empty_refs())
    return sorted(refs)
