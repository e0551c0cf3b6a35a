"""Command-line pipeline: ingest, index, retrieve, gen-nli, features, train,
predict, score, and an e2e subcommand that chains the stages in memory.

All randomness flows from explicit --seed flags; reruns with identical
inputs and seeds produce byte-identical output files.
"""

import argparse
import json
import logging
import sys

from . import features as features_mod
from . import forest, metrics, ner, nli_data, tfidf
from .corpus import Corpus, ingest_dump
from .entailment import BaselineScorer, FileScorer, score_candidates
from .forest import LABELS, ForestConfig, TrainingSample
from .metrics import GoldInstance
from .nli_data import load_claims
from .verdict import Verdict, assemble, parse_prediction_row

log = logging.getLogger("claimcheck")


def load_corpus_any(path) -> Corpus:
    """Accept either a saved corpus file or a raw JSON-lines dump."""
    try:
        return Corpus.load(path)
    except Exception:
        corpus, stats = ingest_dump(path)
        log.info("ingested %d documents (%d lines skipped, %d records skipped)",
                 stats.documents, stats.lines_skipped, stats.records_skipped)
        return corpus


def _write_rows(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for row in rows:
            fp.write(json.dumps(row, ensure_ascii=False))
            fp.write("\n")


def _read_rows(path):
    with open(path, encoding="utf-8") as fp:
        for line in fp:
            line = line.strip()
            if line:
                yield json.loads(line)


def _make_extractor(args):
    if args.ner == "file":
        if not args.ner_file:
            raise ValueError("--ner file requires --ner-file")
        return ner.FileEntityExtractor.load(args.ner_file)
    return None


def _make_scorer(args):
    if args.scorer == "file":
        if not args.prob_file:
            raise ValueError("--scorer file requires --prob-file")
        return FileScorer.load(args.prob_file)
    return BaselineScorer()


def retrieve_candidates(corpus, index, instances, *, k_docs=5, k_sents=5,
                        extractor=None, max_distance=None):
    """Union of the entity route and the TF-IDF route, per claim."""
    matcher = ner.TitleMatcher(corpus)
    out = {}
    for inst in instances:
        refs = set(ner.candidate_sentences_for_claim(
            corpus, inst.claim, extractor=extractor, claim_id=inst.claim_id,
            matcher=matcher, max_distance=max_distance))
        docs = [corpus.get(hit.item)
                for hit in tfidf.top_k_documents(index, inst.claim, k=k_docs)]
        for hit in tfidf.top_k_sentences(docs, inst.claim, k=k_sents,
                                         bin_count=index.bin_count):
            refs.add(hit.item)
        out[inst.claim_id] = sorted(refs)
    log.info("retrieved candidates for %d claims (%.1f sentences/claim)",
             len(out), sum(map(len, out.values())) / len(out) if out else 0.0)
    return out


def _feature_row(claim_id, fv) -> dict:
    row = {"claim_id": claim_id, "n": fv.n}
    row.update({name: getattr(fv, name) for name in features_mod.FEATURE_NAMES})
    return row


def _scored_rows(claim_id, candidates):
    for cand in candidates:
        yield {
            "claim_id": claim_id,
            "page_id": cand.ref.page_id,
            "line_number": cand.ref.line_number,
            "support": cand.triple.support,
            "refute": cand.triple.refute,
            "uninformative": cand.triple.uninformative,
        }


def _gold_from_instances(instances) -> list:
    return [GoldInstance(i.claim_id, i.label,
                         tuple(frozenset(g) for g in i.evidence_sets))
            for i in instances]


def _validate_prediction_row(row, lineno) -> Verdict:
    try:
        if row["predicted_label"] not in LABELS:
            raise ValueError(f"unknown label {row['predicted_label']!r}")
        for pair in row["predicted_evidence"]:
            page, line = pair
            if not isinstance(page, str) or not isinstance(line, int):
                raise ValueError(f"evidence pair {pair!r} is not [page_id, line]")
        return parse_prediction_row(row)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad prediction row on line {lineno}: {exc}") from exc


# -- subcommands -------------------------------------------------------------


def cmd_ingest(args) -> int:
    corpus, stats = ingest_dump(args.dump)
    corpus.save(args.out)
    print(f"ingested {stats.documents} documents "
          f"({stats.lines_skipped} lines skipped, "
          f"{stats.records_skipped} records skipped) -> {args.out}")
    return 0


def cmd_index(args) -> int:
    corpus = load_corpus_any(args.corpus)
    index = tfidf.build_document_index(corpus, bin_count=args.bins)
    index.save(args.out)
    print(f"indexed {index.item_count} documents into {args.bins} bins -> {args.out}")
    return 0


def _load_index(args, corpus):
    if args.index:
        return tfidf.TfidfIndex.load(args.index)
    return tfidf.build_document_index(corpus, bin_count=args.bins)


def cmd_retrieve(args) -> int:
    corpus = load_corpus_any(args.corpus)
    instances = load_claims(args.claims)
    index = _load_index(args, corpus)
    cands = retrieve_candidates(corpus, index, instances,
                                k_docs=args.k_docs, k_sents=args.k_sents,
                                extractor=_make_extractor(args),
                                max_distance=args.max_ner_distance)
    _write_rows(args.out, ({"id": inst.claim_id,
                            "candidates": [r.as_pair() for r in cands[inst.claim_id]]}
                           for inst in instances))
    print(f"wrote candidates for {len(instances)} claims -> {args.out}")
    return 0


def cmd_gen_nli(args) -> int:
    corpus = load_corpus_any(args.corpus)
    instances = load_claims(args.claims)
    examples, generated = nli_data.build_nli_dataset(instances, corpus, seed=args.seed)
    balanced = nli_data.undersample(examples, seed=args.seed)
    counts = {label: 0 for label in nli_data.NLI_LABELS}
    for ex in balanced:
        counts[ex.label] += 1
    manifest = {
        "seed": args.seed,
        "generated": generated,
        "balanced": {k.lower(): v for k, v in counts.items()},
    }
    nli_data.write_examples(args.out, balanced)
    nli_data.write_manifest(args.manifest, manifest)
    log.info("generated %d examples, kept %d after balancing",
             len(examples), len(balanced))
    print(f"wrote {len(balanced)} balanced examples -> {args.out} "
          f"(manifest -> {args.manifest})")
    return 0


def cmd_features(args) -> int:
    corpus = load_corpus_any(args.corpus)
    instances = load_claims(args.claims)
    by_id = {inst.claim_id: inst for inst in instances}
    scorer = _make_scorer(args)

    from .corpus import SentenceRef
    feature_rows, scored_rows = [], []
    overrides = 0
    for row in _read_rows(args.candidates):
        inst = by_id.get(row["id"])
        if inst is None:
            raise ValueError(f"candidates reference unknown claim id {row['id']!r}")
        refs = [SentenceRef(str(p), int(l)) for p, l in row["candidates"]]
        cands = score_candidates(scorer, inst.claim_id, inst.claim, refs, corpus)
        fv = features_mod.features(cands)
        feature_rows.append(_feature_row(inst.claim_id, fv))
        scored_rows.extend(_scored_rows(inst.claim_id, cands))
        overrides += fv.f1 == 0 and fv.f2 == 0
    _write_rows(args.out, feature_rows)
    if args.scored_out:
        _write_rows(args.scored_out, scored_rows)
    log.info("scored %d candidate pairs over %d claims (%d all-uninformative)",
             len(scored_rows), len(feature_rows), overrides)
    print(f"wrote {len(feature_rows)} feature rows -> {args.out}")
    return 0


def _features_from_row(row) -> features_mod.FeatureVector:
    values = [float(row[name]) for name in features_mod.FEATURE_NAMES]
    return features_mod.FeatureVector(*values, n=int(row["n"]))


def _parse_counts(text) -> tuple:
    parts = tuple(int(p) for p in text.split(","))
    if len(parts) != 3 or any(c < 0 for c in parts):
        raise ValueError(f"--sample-counts needs three non-negative integers, got {text!r}")
    return parts


def cmd_train(args) -> int:
    instances = load_claims(args.claims)
    fvs = {row["claim_id"]: _features_from_row(row) for row in _read_rows(args.features)}
    missing = [i.claim_id for i in instances if i.claim_id not in fvs]
    if missing:
        raise ValueError(f"no feature rows for claim ids {missing[:5]}...")
    sampled = forest.sample_training_claims(instances, seed=args.seed,
                                            counts=_parse_counts(args.sample_counts))
    samples = [TrainingSample(fvs[i.claim_id], i.label) for i in sampled]
    config = ForestConfig(trees=args.trees, max_depth=args.max_depth,
                          features_per_split=args.features_per_split, seed=args.seed)
    model = forest.train(samples, config)
    forest.save(model, args.out)
    print(f"trained {config.trees} trees on {len(samples)} claims -> {args.out}")
    return 0


def _assemble_all(instances, fvs, scored_by_id, model):
    verdicts = []
    overrides = 0
    for inst in instances:
        label, _ = model.predict(fvs[inst.claim_id])
        v = assemble(inst.claim_id, label, scored_by_id.get(inst.claim_id, []))
        overrides += v.override_applied
        verdicts.append(v)
    log.info("assembled %d verdicts (%d overrides to NOT ENOUGH INFO)",
             len(verdicts), overrides)
    return verdicts


def cmd_predict(args) -> int:
    from .corpus import SentenceRef
    from .entailment import EntailmentTriple, ScoredCandidate

    instances = load_claims(args.claims)
    fvs = {row["claim_id"]: _features_from_row(row) for row in _read_rows(args.features)}
    scored_by_id: dict = {}
    for row in _read_rows(args.scored):
        ref = SentenceRef(str(row["page_id"]), int(row["line_number"]))
        triple = EntailmentTriple(row["support"], row["refute"], row["uninformative"])
        scored_by_id.setdefault(row["claim_id"], []).append(
            ScoredCandidate(ref, "", triple))
    model = forest.load(args.model)
    verdicts = _assemble_all(instances, fvs, scored_by_id, model)
    _write_rows(args.out, (v.to_row() for v in verdicts))
    print(f"wrote {len(verdicts)} predictions -> {args.out}")
    return 0


def cmd_score(args) -> int:
    gold = _gold_from_instances(load_claims(args.gold))
    predictions = [_validate_prediction_row(row, lineno)
                   for lineno, row in enumerate(_read_rows(args.pred), start=1)]
    report = metrics.score(gold, predictions)
    print(report.format_table())
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fp:
            json.dump(report.to_dict(), fp, sort_keys=True, indent=2)
            fp.write("\n")
    return 0


def cmd_e2e(args) -> int:
    corpus = load_corpus_any(args.corpus)
    instances = load_claims(args.claims)
    index = _load_index(args, corpus)
    cands = retrieve_candidates(corpus, index, instances,
                                k_docs=args.k_docs, k_sents=args.k_sents,
                                extractor=_make_extractor(args),
                                max_distance=args.max_ner_distance)
    scorer = _make_scorer(args)
    scored_by_id = {inst.claim_id: score_candidates(scorer, inst.claim_id, inst.claim,
                                                    cands[inst.claim_id], corpus)
                    for inst in instances}
    fvs = {cid: features_mod.features(sc) for cid, sc in scored_by_id.items()}

    if args.model:
        model = forest.load(args.model)
    else:
        sampled = forest.sample_training_claims(instances, seed=args.seed,
                                                counts=_parse_counts(args.sample_counts))
        samples = [TrainingSample(fvs[i.claim_id], i.label) for i in sampled]
        model = forest.train(samples, ForestConfig(trees=args.trees,
                                                   max_depth=args.max_depth,
                                                   seed=args.seed))
        log.info("trained in-memory forest on %d claims", len(samples))

    verdicts = _assemble_all(instances, fvs, scored_by_id, model)
    _write_rows(args.out, (v.to_row() for v in verdicts))
    print(f"wrote {len(verdicts)} predictions -> {args.out}")

    report = metrics.score(_gold_from_instances(instances), verdicts)
    print(report.format_table())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fp:
            json.dump(report.to_dict(), fp, sort_keys=True, indent=2)
            fp.write("\n")
    return 0


# -- argument parsing --------------------------------------------------------


def _add_retrieval_flags(p):
    p.add_argument("--index", help="saved index file (otherwise built in memory)")
    p.add_argument("--bins", type=int, default=tfidf.DEFAULT_BIN_COUNT,
                   help="hash bins when building in memory (default 2^24)")
    p.add_argument("--k-docs", type=int, default=5)
    p.add_argument("--k-sents", type=int, default=5)
    p.add_argument("--ner", choices=["heuristic", "file"], default="heuristic")
    p.add_argument("--ner-file", help="JSON-lines {id, entities} annotations")
    p.add_argument("--max-ner-distance", type=int, default=None,
                   help="drop title matches beyond this distance (default: keep all)")


def _add_scorer_flags(p):
    p.add_argument("--scorer", choices=["baseline", "file"], default="baseline")
    p.add_argument("--prob-file", help="JSON-lines entailment probabilities")


def _add_train_flags(p):
    p.add_argument("--trees", type=int, default=50)
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--sample-counts", default="3000,3000,4000",
                   help="per-class claim sample sizes (SUPPORTS,REFUTES,NEI)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimcheck",
        description="Claim verification pipeline over a sentence-segmented corpus.")
    parser.add_argument("-q", "--quiet", action="store_true",
                        help="suppress progress logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a JSON-lines dump into a corpus file")
    p.add_argument("--dump", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build and save the document TF-IDF index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--bins", type=int, default=tfidf.DEFAULT_BIN_COUNT)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="collect candidate sentences per claim")
    p.add_argument("--corpus", required=True)
    p.add_argument("--claims", required=True)
    p.add_argument("--out", required=True)
    _add_retrieval_flags(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("gen-nli", help="build the balanced NLI example file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--claims", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_nli)

    p = sub.add_parser("features", help="score candidates and compute feature vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--claims", required=True)
    p.add_argument("--candidates", required=True, help="retrieve output")
    p.add_argument("--out", required=True)
    p.add_argument("--scored-out", help="also dump per-candidate probability rows")
    _add_scorer_flags(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the forest on feature rows")
    p.add_argument("--claims", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--features-per-split", type=int, default=None)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label claims and assemble evidence")
    p.add_argument("--claims", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--scored", required=True, help="per-candidate probability rows")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="score a prediction file against gold claims")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("e2e", help="run the whole pipeline on a claims file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--claims", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", help="saved model (otherwise trained in memory)")
    p.add_argument("--report", help="write the score report as JSON")
    p.add_argument("--seed", type=int, default=0)
    _add_retrieval_flags(p)
    _add_scorer_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_e2e)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
