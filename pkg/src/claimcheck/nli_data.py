"""SNLI-style example generation from labeled claims.

SUPPORTS and REFUTES claims yield Entailment and Contradiction pairs with
the evidence sentence as premise and the claim as hypothesis; only the
first sentence of a multi-sentence evidence set is used.  Each such pair
gets one sibling Neutral pair whose premise is drawn uniformly from the
same document, excluding every sentence referenced by any of the claim's
evidence sets; when no such sentence exists the Neutral pair is skipped
and counted.  Identical (premise, hypothesis, label) triples are collapsed.
All randomness is derived from (seed, claim id), so regeneration with the
same seed is byte-identical and instance order does not matter.
"""

import json
import random
from dataclasses import dataclass

from .corpus import Corpus, SentenceRef

NLI_LABELS = ("Entailment", "Contradiction", "Neutral")
_CLAIM_LABEL_TO_NLI = {"SUPPORTS": "Entailment", "REFUTES": "Contradiction"}


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class FeverInstance:
    claim_id: int
    claim: str
    label: str
    evidence_sets: tuple  # of tuple[SentenceRef, ...]

    def all_refs(self) -> set:
        return {ref for group in self.evidence_sets for ref in group}


@dataclass(frozen=True)
class NliExample:
    premise: str
    hypothesis: str
    label: str
    origin: tuple  # (claim_id, page_id, line_number)

    def to_row(self) -> dict:
        return {
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "label": self.label,
            "origin": list(self.origin),
        }


def _parse_evidence(raw, claim_id) -> tuple:
    """FEVER evidence arrays: groups of [ann_id, ev_id, page, line] or [page, line]."""
    groups = []
    for group in raw or []:
        refs = []
        for item in group:
            if len(item) == 4:
                page, line = item[2], item[3]
            elif len(item) == 2:
                page, line = item
            else:
                raise GenerationError(
                    f"claim {claim_id}: malformed evidence item {item!r}"
                )
            if page is None:
                continue  # annotation without a grounded sentence
            refs.append(SentenceRef(str(page), int(line)))
        if refs:
            groups.append(tuple(refs))
    return tuple(groups)


def parse_claim_row(row: dict) -> FeverInstance:
    claim_id = row["id"]
    instance = FeverInstance(
        claim_id=claim_id,
        claim=str(row["claim"]),
        label=str(row["label"]),
        evidence_sets=_parse_evidence(row.get("evidence"), claim_id),
    )
    if instance.label in _CLAIM_LABEL_TO_NLI and not instance.evidence_sets:
        raise GenerationError(
            f"claim {claim_id}: label {instance.label} but no grounded evidence"
        )
    return instance


def load_claims(path) -> list[FeverInstance]:
    instances = []
    with open(path, encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GenerationError(f"bad claim row on line {lineno}: {exc}") from exc
            instances.append(parse_claim_row(row))
    return instances


def _resolve(corpus: Corpus, ref: SentenceRef, claim_id) -> str:
    text = corpus.get_sentence(ref)
    if not text:
        raise GenerationError(
            f"claim {claim_id}: evidence ({ref.page_id!r}, {ref.line_number}) "
            "does not resolve to a non-empty corpus sentence"
        )
    return text


def build_nli_dataset(instances, corpus: Corpus, seed: int):
    """(examples, manifest) with per-class counts, skips, and duplicates."""
    examples = []
    seen = set()
    counts = {label: 0 for label in NLI_LABELS}
    neutral_skipped = 0
    duplicates = 0

    for inst in instances:
        nli_label = _CLAIM_LABEL_TO_NLI.get(inst.label)
        if nli_label is None:
            continue
        rng = random.Random(f"{seed}:{inst.claim_id}")
        excluded = inst.all_refs()

        first_refs = []
        for group in inst.evidence_sets:
            ref = group[0]
            if ref not in first_refs:
                first_refs.append(ref)

        for ref in first_refs:
            premise = _resolve(corpus, ref, inst.claim_id)
            key = (premise, inst.claim, nli_label)
            if key in seen:
                duplicates += 1
            else:
                seen.add(key)
                counts[nli_label] += 1
                examples.append(NliExample(premise, inst.claim, nli_label,
                                           (inst.claim_id, ref.page_id, ref.line_number)))

            doc = corpus.get(ref.page_id)
            pool = [r for r in doc.non_empty_refs() if r not in excluded]
            if not pool:
                neutral_skipped += 1
                continue
            pick = pool[rng.randrange(len(pool))]
            n_premise = doc.sentence(pick.line_number)
            n_key = (n_premise, inst.claim, "Neutral")
            if n_key in seen:
                duplicates += 1
                continue
            seen.add(n_key)
            counts["Neutral"] += 1
            examples.append(NliExample(n_premise, inst.claim, "Neutral",
                                       (inst.claim_id, pick.page_id, pick.line_number)))

    manifest = {
        "entailment": counts["Entailment"],
        "contradiction": counts["Contradiction"],
        "neutral": counts["Neutral"],
        "neutral_skipped": neutral_skipped,
        "duplicates_removed": duplicates,
    }
    return examples, manifest


def undersample(examples, seed: int) -> list:
    """Cut every class to the smallest class count, preserving order."""
    per_label = {label: [] for label in NLI_LABELS}
    for i, ex in enumerate(examples):
        per_label[ex.label].append(i)
    m = min(len(v) for v in per_label.values())
    rng = random.Random(seed)
    keep = set()
    for label in NLI_LABELS:
        idx = per_label[label]
        keep.update(idx[j] for j in sorted(rng.sample(range(len(idx)), m)))
    return [ex for i, ex in enumerate(examples) if i in keep]


def write_examples(path, examples) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for ex in examples:
            fp.write(json.dumps(ex.to_row(), sort_keys=True, ensure_ascii=False))
            fp.write("\n")


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(manifest, fp, sort_keys=True, indent=2)
        fp.write("\n")
