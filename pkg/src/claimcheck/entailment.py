"""Per-sentence entailment probability triples (support, refute, uninformative).

The scorer is pluggable.  The built-in baseline is a token-overlap heuristic
whose only job is to make every label reachable in tests and smoke runs; real
model output is injected from a JSON-lines probability file instead of being
computed in-process.
"""

import json
import math
from dataclasses import dataclass

from .corpus import SentenceRef
from .tokenizer import tokenize

SUM_TOLERANCE = 1e-6
LOAD_SUM_TOLERANCE = 1e-3
NEGATION_CUES = frozenset({"not", "no", "never", "n't", "neither", "nor"})


class ProbabilityError(ValueError):
    pass


class MissingProbabilityError(ProbabilityError):
    def __init__(self, claim_id, ref: SentenceRef):
        super().__init__(
            f"no probability entry for claim {claim_id!r}, "
            f"sentence ({ref.page_id!r}, {ref.line_number})"
        )
        self.claim_id = claim_id
        self.ref = ref


@dataclass(frozen=True)
class EntailmentTriple:
    support: float
    refute: float
    uninformative: float

    def __post_init__(self):
        for value in (self.support, self.refute, self.uninformative):
            if not (0.0 <= value <= 1.0):
                raise ProbabilityError(f"component out of [0, 1]: {self!r}")
        total = self.support + self.refute + self.uninformative
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=SUM_TOLERANCE):
            raise ProbabilityError(f"components sum to {total!r}, not 1: {self!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.support, self.refute, self.uninformative)


@dataclass(frozen=True)
class ScoredCandidate:
    ref: SentenceRef
    sentence: str
    triple: EntailmentTriple


def baseline_score(claim_tokens, sentence_tokens) -> EntailmentTriple:
    """Overlap o relative to the claim; negation mismatch flips support to refute."""
    claim_set, sentence_set = set(claim_tokens), set(sentence_tokens)
    o = len(claim_set & sentence_set) / len(claim_set) if claim_set else 0.0
    g = 1 if (bool(claim_set & NEGATION_CUES) != bool(sentence_set & NEGATION_CUES)) else 0
    raw = (o * (1 - g), o * g, 1.0 - o)
    total = sum(raw)  # guards rounding; mathematically already 1
    return EntailmentTriple(raw[0] / total, raw[1] / total, raw[2] / total)


class BaselineScorer:
    name = "baseline"

    def score(self, claim_id, claim: str, ref, sentence: str) -> EntailmentTriple:
        return baseline_score(tokenize(claim), tokenize(sentence))


class FileScorer:
    """Exact lookup of externally computed triples keyed by (claim, page, line)."""

    name = "file"

    def __init__(self, table: dict):
        self.table = table

    @classmethod
    def load(cls, path) -> "FileScorer":
        table: dict = {}
        with open(path, encoding="utf-8") as fp:
            for lineno, line in enumerate(fp, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                    key = (row["claim_id"], str(row["page_id"]), int(row["line_number"]))
                    values = (float(row["support"]), float(row["refute"]),
                              float(row["uninformative"]))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ProbabilityError(f"bad probability row on line {lineno}: {exc}") from exc
                for v in values:
                    if not (0.0 <= v <= 1.0):
                        raise ProbabilityError(
                            f"line {lineno}: component out of [0, 1] in {values}"
                        )
                total = sum(values)
                if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=LOAD_SUM_TOLERANCE):
                    raise ProbabilityError(
                        f"line {lineno}: triple {values} sums to {total}, not 1"
                    )
                if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=SUM_TOLERANCE):
                    values = tuple(v / total for v in values)
                table[key] = EntailmentTriple(*values)
        return cls(table)

    def score(self, claim_id, claim: str, ref: SentenceRef, sentence: str) -> EntailmentTriple:
        key = (claim_id, ref.page_id, ref.line_number)
        if key not in self.table:
            raise MissingProbabilityError(claim_id, ref)
        return self.table[key]


def score_pair(scorer, claim: str, sentence: str, *, claim_id=None,
               ref: SentenceRef | None = None) -> EntailmentTriple:
    return scorer.score(claim_id, claim, ref, sentence)


def score_candidates(scorer, claim_id, claim: str, refs, corpus) -> list[ScoredCandidate]:
    """Score every ref that resolves to a sentence, in the given order."""
    out = []
    for ref in refs:
        sentence = corpus.get_sentence(ref)
        if sentence is None:
            continue
        out.append(ScoredCandidate(ref, sentence, scorer.score(claim_id, claim, ref, sentence)))
    return out
