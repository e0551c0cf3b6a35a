"""Index behavior against a brute-force dense reference implementation."""

import math

import numpy as np
import pytest

from claimcheck import tfidf
from claimcheck.corpus import Corpus, Document, SentenceRef
from claimcheck.tokenizer import hash_ngram, hashed_counts, tokenize

from conftest import WORDS, make_random_corpus

BINS = 4096  # small enough to force hash collisions


def dense_scores(items, query, bin_count, orders):
    """Straight-line tf-idf cosine over explicit dense vectors."""
    n = len(items)
    df = np.zeros(bin_count)
    counts_per_item = []
    for _, text in items:
        counts = hashed_counts(tokenize(text), orders, bin_count)
        counts_per_item.append(counts)
        for b in counts:
            df[b] += 1
    idf = np.maximum(0.0, np.log((n - df + 0.5) / (df + 0.5)))

    vecs = np.zeros((n, bin_count))
    for i, counts in enumerate(counts_per_item):
        for b in sorted(counts):
            vecs[i, b] = math.log1p(counts[b]) * idf[b]

    q = np.zeros(bin_count)
    q_counts = hashed_counts(tokenize(query), orders, bin_count)
    for b in sorted(q_counts):
        q[b] = math.log1p(q_counts[b]) * idf[b]

    qn = np.linalg.norm(q)
    if qn == 0:
        return []
    norms = np.linalg.norm(vecs, axis=1)
    out = []
    for i in range(n):
        if norms[i] > 0:
            score = float(vecs[i] @ q / (norms[i] * qn))
            if score > 0:
                out.append((items[i][0], score))
    return out


def dense_top_k(items, query, bin_count, orders, k):
    scored = dense_scores(items, query, bin_count, orders)
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


def doc_items(corpus):
    return [(d.page_id, d.text) for d in corpus.documents()]


class TestOracleEquivalence:
    def test_documents_match_dense(self):
        rng = np.random.default_rng(20)
        for trial in range(5):
            corpus = make_random_corpus(rng, max_docs=40, max_sents=10)
            index = tfidf.build_document_index(corpus, bin_count=BINS)
            items = doc_items(corpus)
            for _ in range(4):
                query = " ".join(
                    WORDS[w] for w in rng.integers(0, len(WORDS), size=6))
                for k in (1, 5, len(items)):
                    got = tfidf.top_k_documents(index, query, k=k)
                    want = dense_top_k(items, query, BINS, (1, 2), k)
                    assert [g.item for g in got] == [w[0] for w in want]
                    np.testing.assert_allclose([g.score for g in got],
                                               [w[1] for w in want], atol=1e-9)

    def test_sentences_match_dense(self):
        rng = np.random.default_rng(21)
        corpus = make_random_corpus(rng, max_docs=12, max_sents=8)
        docs = list(corpus.documents())
        items = [(SentenceRef(d.page_id, n), d.sentence(n))
                 for d in sorted(docs, key=lambda d: d.page_id)
                 for n, _ in d.lines]
        query = " ".join(WORDS[w] for w in rng.integers(0, len(WORDS), size=8))
        got = tfidf.top_k_sentences(docs, query, k=5, bin_count=BINS)
        want = dense_top_k(items, query, BINS, (2,), 5)
        assert [g.item for g in got] == [w[0] for w in want]
        np.testing.assert_allclose([g.score for g in got],
                                   [w[1] for w in want], atol=1e-9)


class TestWeighting:
    def test_idf_formula_values(self):
        # 10 docs: term in 1 doc -> log(9.5/1.5); term in all -> clamped to 0
        corpus = Corpus()
        for i in range(10):
            text = "shared everywhere" + (" rare" if i == 0 else "")
            corpus.add_document(Document(f"D{i}", text, [(0, text)]))
        index = tfidf.build_document_index(corpus, bin_count=BINS)
        rare_bin = hash_ngram(["rare"], BINS)
        shared_bin = hash_ngram(["shared"], BINS)
        i_rare = int(np.searchsorted(index.uniq_bins, rare_bin))
        assert index.df[i_rare] == 1
        w = index.post_weights[index.uniq_offsets[i_rare]:index.uniq_offsets[i_rare + 1]]
        np.testing.assert_allclose(w[0], math.log1p(1) * math.log(9.5 / 1.5))
        i_shared = int(np.searchsorted(index.uniq_bins, shared_bin))
        w = index.post_weights[index.uniq_offsets[i_shared]:index.uniq_offsets[i_shared + 1]]
        assert np.all(w == 0.0)

    def test_single_document_corpus_scores_zero(self):
        corpus = Corpus()
        corpus.add_document(Document("Solo", "one lonely page", [(0, "one lonely page")]))
        index = tfidf.build_document_index(corpus, bin_count=BINS)
        assert tfidf.top_k_documents(index, "one lonely page", k=5) == []


class TestRanking:
    def test_identical_text_scores_one(self):
        rng = np.random.default_rng(22)
        corpus = make_random_corpus(rng, max_docs=10, max_sents=5)
        index = tfidf.build_document_index(corpus, bin_count=BINS)
        target = corpus.get(corpus.page_ids()[3])
        got = tfidf.top_k_documents(index, target.text, k=1)
        if got:  # a doc whose every term is corpus-wide has a zero vector
            assert got[0].item == target.page_id
            assert got[0].score <= 1 + 1e-9

    def test_no_shared_tokens_gives_empty(self, mini_corpus):
        index = tfidf.build_document_index(mini_corpus, bin_count=BINS)
        assert tfidf.top_k_documents(index, "zzz qqq xxx", k=5) == []

    def test_k_larger_than_corpus(self):
        corpus = Corpus()
        for i, w in enumerate(["alpha beta", "alpha gamma", "delta beta"]):
            corpus.add_document(Document(f"P{i}", w, [(0, w)]))
        index = tfidf.build_document_index(corpus, bin_count=BINS)
        assert len(tfidf.top_k_documents(index, "alpha beta delta", k=5)) <= 3

    def test_duplicate_doc_takes_top_two(self):
        rng = np.random.default_rng(23)
        corpus = make_random_corpus(rng, max_docs=20, max_sents=6, min_docs=10)
        index = tfidf.build_document_index(corpus, bin_count=BINS)
        query = corpus.get(corpus.page_ids()[0]).text.split(".")[0]
        top = tfidf.top_k_documents(index, query, k=1)
        assert top, "query drawn from a document should match something"
        best = corpus.get(top[0].item)
        dup = Corpus()
        for d in corpus.documents():
            dup.add_document(d)
        dup.add_document(Document("ZZ_copy", best.text, list(best.lines)))
        index2 = tfidf.build_document_index(dup, bin_count=BINS)
        top2 = tfidf.top_k_documents(index2, query, k=2)
        assert {t.item for t in top2} == {best.page_id, "ZZ_copy"}

    def test_claim_without_bigrams_finds_no_sentences(self, mini_corpus):
        docs = [mini_corpus.get(p) for p in mini_corpus.page_ids()[:5]]
        assert tfidf.top_k_sentences(docs, "archipelago", k=5, bin_count=BINS) == []

    def test_sentence_ties_break_by_ref(self):
        # two identical sentences on different pages score identically;
        # filler sentences keep their bigrams' idf above zero
        corpus = Corpus()
        filler = ["storm chart keeper", "granite reef lantern", "marsh survey stone",
                  "regatta jetty buoy"]
        for pid in ("B_page", "A_page"):
            lines = [(0, "the iron bell rings")] + list(enumerate(filler, start=1))
            corpus.add_document(Document(pid, " ".join(s for _, s in lines), lines))
        docs = [corpus.get("B_page"), corpus.get("A_page")]
        got = tfidf.top_k_sentences(docs, "the iron bell rings", k=2, bin_count=BINS)
        assert [g.item for g in got] == [SentenceRef("A_page", 0), SentenceRef("B_page", 0)]
        assert got[0].score == got[1].score


class TestHashDistribution:
    def test_no_heavy_bins(self):
        rng = np.random.default_rng(24)
        seen = set()
        while len(seen) < 10_000:
            a, b = rng.integers(0, len(WORDS), size=2)
            seen.add((f"{WORDS[a]}{rng.integers(0, 10_000)}", WORDS[b]))
        counts = np.zeros(2**20, dtype=np.int64)
        for pair in seen:
            counts[hash_ngram(list(pair), 2**20)] += 1
        assert counts.max() <= 10


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path, mini_corpus):
        index = tfidf.build_document_index(mini_corpus, bin_count=BINS)
        path = tmp_path / "index.npz"
        index.save(path)
        loaded = tfidf.TfidfIndex.load(path)
        assert np.array_equal(index.uniq_bins, loaded.uniq_bins)
        assert np.array_equal(index.post_items, loaded.post_items)
        assert np.array_equal(index.post_weights, loaded.post_weights)
        assert np.array_equal(index.item_norms, loaded.item_norms)
        assert index.item_ids == loaded.item_ids
        q = "The Korvand Archipelago is a chain of nine islands."
        assert tfidf.top_k_documents(index, q, 5) == tfidf.top_k_documents(loaded, q, 5)

    def test_version_check(self, tmp_path, mini_corpus):
        index = tfidf.build_document_index(mini_corpus, bin_count=BINS)
        path = tmp_path / "index.npz"
        index.save(path)
        import json
        import zipfile
        with np.load(path) as data:
            header = json.loads(str(data["header"]))
        header["format_version"] = 99
        arrays = {k: v for k, v in np.load(path).items() if k != "header"}
        np.savez(path, header=np.array(json.dumps(header)), **arrays)
        with pytest.raises(tfidf.IndexFormatError):
            tfidf.TfidfIndex.load(path)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            tfidf.build_document_index(Corpus(), bin_count=BINS)
