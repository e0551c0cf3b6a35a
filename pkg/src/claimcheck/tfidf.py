"""Hashed TF-IDF indexing and cosine top-k retrieval.

Document retrieval uses unigram+bigram vectors over page text; sentence
retrieval builds a transient bigram-only index over the sentences of the
candidate documents.  Weighting is tf = log(1 + count) with the Okapi-style
idf = max(0, log((N - df + 0.5) / (df + 0.5))); vectors are L2-normalized
at query time.  Results below or at score zero are dropped, ties break on
ascending item id so ranked output is reproducible.
"""

import io
import json
import zipfile
from dataclasses import dataclass

import numpy as np

from . import kernels
from .corpus import Corpus, Document, SentenceRef
from .tokenizer import HASH_NAME, hashed_counts, tokenize

FORMAT_VERSION = 1
DEFAULT_BIN_COUNT = 2**24
WEIGHTING = "log1p-tf.okapi-idf"


class IndexFormatError(ValueError):
    pass


def _write_npz(path, arrays: dict) -> None:
    """npz with pinned zip timestamps so equal indexes give equal bytes."""
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        for name, arr in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.asanyarray(arr))
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, buf.getvalue())


@dataclass(frozen=True)
class ScoredItem:
    item: object  # page_id str or SentenceRef
    score: float


def _idf(df: np.ndarray, n_items: int) -> np.ndarray:
    return np.maximum(0.0, np.log((n_items - df + 0.5) / (df + 0.5)))


class TfidfIndex:
    """Postings-style sparse index over hashed n-gram vectors."""

    def __init__(self, bin_count, ngram_orders, item_ids, uniq_bins, uniq_offsets,
                 post_items, post_weights, df, item_norms, source_checksum=""):
        self.bin_count = int(bin_count)
        self.ngram_orders = tuple(int(o) for o in ngram_orders)
        self.item_ids = item_ids
        self.uniq_bins = uniq_bins
        self.uniq_offsets = uniq_offsets
        self.post_items = post_items
        self.post_weights = post_weights
        self.df = df
        self.item_norms = item_norms
        self.source_checksum = source_checksum
        self._sort_keys = _sort_keys_for(item_ids)

    @property
    def item_count(self) -> int:
        return len(self.item_ids)

    @classmethod
    def build(cls, items, bin_count, ngram_orders, source_checksum="") -> "TfidfIndex":
        """Index (id, text) pairs; caller supplies them in a deterministic order."""
        if not items:
            raise ValueError("cannot build an index over zero items")
        n = len(items)
        per_item = [hashed_counts(tokenize(text), ngram_orders, bin_count) for _, text in items]

        df_map: dict[int, int] = {}
        for counts in per_item:
            for b in counts:
                df_map[b] = df_map.get(b, 0) + 1
        uniq_bins = np.array(sorted(df_map), dtype=np.int64)
        df = np.array([df_map[b] for b in uniq_bins], dtype=np.int64)
        idf_by_bin = dict(zip(uniq_bins.tolist(), _idf(df, n).tolist()))

        bins_l, items_l, weights_l = [], [], []
        item_norms = np.zeros(n, dtype=np.float64)
        for i, counts in enumerate(per_item):
            item_bins = sorted(counts)
            w = np.array(
                [np.log1p(counts[b]) * idf_by_bin[b] for b in item_bins], dtype=np.float64
            )
            item_norms[i] = np.sqrt(np.sum(w * w))
            bins_l.extend(item_bins)
            items_l.extend([i] * len(item_bins))
            weights_l.append(w)

        bins_a = np.array(bins_l, dtype=np.int64)
        items_a = np.array(items_l, dtype=np.int32)
        weights_a = np.concatenate(weights_l) if weights_l else np.zeros(0)
        order = np.lexsort((items_a, bins_a))
        bins_a, items_a, weights_a = bins_a[order], items_a[order], weights_a[order]
        uniq_offsets = np.concatenate(
            (np.searchsorted(bins_a, uniq_bins), [bins_a.size])
        ).astype(np.int64)

        return cls(bin_count, ngram_orders, [item_id for item_id, _ in items],
                   uniq_bins, uniq_offsets, items_a, weights_a, df, item_norms,
                   source_checksum)

    def query_vector(self, text: str):
        """Sorted (bins, weights, norm) for a query; zero-weight bins dropped."""
        counts = hashed_counts(tokenize(text), self.ngram_orders, self.bin_count)
        if not counts:
            return np.zeros(0, dtype=np.int64), np.zeros(0), 0.0
        q_bins = np.array(sorted(counts), dtype=np.int64)
        if self.uniq_bins.size > 0:
            pos = np.minimum(np.searchsorted(self.uniq_bins, q_bins), self.uniq_bins.size - 1)
            q_df = np.where(self.uniq_bins[pos] == q_bins, self.df[pos], 0)
        else:
            q_df = np.zeros(q_bins.size, dtype=np.int64)
        tf = np.log1p(np.array([counts[b] for b in q_bins.tolist()], dtype=np.float64))
        weights = tf * _idf(q_df, self.item_count)
        nz = weights > 0
        q_bins, weights = q_bins[nz], weights[nz]
        norm = float(np.sqrt(np.sum(weights * weights)))
        return q_bins, weights, norm

    def top_k(self, text: str, k: int) -> list[ScoredItem]:
        """k best items by cosine, positive scores only, ids break ties."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q_bins, q_weights, q_norm = self.query_vector(text)
        if q_norm == 0.0:
            return []
        raw = kernels.cosine_accumulate(
            q_bins, q_weights, self.uniq_bins, self.uniq_offsets,
            self.post_items, self.post_weights, self.item_count,
        )
        denom = self.item_norms * q_norm
        scores = np.divide(raw, denom, out=np.zeros_like(raw), where=denom > 0)
        keep = np.flatnonzero(scores > 0)
        if keep.size == 0:
            return []
        order = np.lexsort(tuple(key[keep] for key in self._sort_keys) + (-scores[keep],))
        top = keep[order[:k]]
        return [ScoredItem(self.item_ids[i], float(scores[i])) for i in top]

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        """Single-file npz with a self-describing header (string ids only)."""
        if self.item_ids and not isinstance(self.item_ids[0], str):
            raise ValueError("only string-id indexes can be persisted")
        header = {
            "format_version": FORMAT_VERSION,
            "bin_count": self.bin_count,
            "ngram_orders": list(self.ngram_orders),
            "hash": HASH_NAME,
            "weighting": WEIGHTING,
            "item_count": self.item_count,
            "source_checksum": self.source_checksum,
        }
        _write_npz(path, {
            "header": np.array(json.dumps(header, sort_keys=True)),
            "item_ids": np.array(self.item_ids),
            "uniq_bins": self.uniq_bins,
            "uniq_offsets": self.uniq_offsets,
            "post_items": self.post_items,
            "post_weights": self.post_weights,
            "df": self.df,
            "item_norms": self.item_norms,
        })

    @classmethod
    def load(cls, path) -> "TfidfIndex":
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("format_version") != FORMAT_VERSION:
                raise IndexFormatError(
                    f"unsupported index format version: {header.get('format_version')}"
                )
            if header.get("hash") != HASH_NAME:
                raise IndexFormatError(f"unknown hash algorithm: {header.get('hash')}")
            return cls(
                header["bin_count"],
                header["ngram_orders"],
                [str(s) for s in data["item_ids"]],
                data["uniq_bins"],
                data["uniq_offsets"],
                data["post_items"],
                data["post_weights"],
                data["df"],
                data["item_norms"],
                header.get("source_checksum", ""),
            )


def _sort_keys_for(item_ids) -> tuple:
    """Lexsort tie-break keys, minor first (lexsort's primary key goes last)."""
    if item_ids and isinstance(item_ids[0], SentenceRef):
        pages = np.array([r.page_id for r in item_ids])
        lines = np.array([r.line_number for r in item_ids], dtype=np.int64)
        return (lines, pages)
    return (np.array([str(i) for i in item_ids]),)


def build_document_index(corpus: Corpus, bin_count: int = DEFAULT_BIN_COUNT,
                         ngram_orders=(1, 2)) -> TfidfIndex:
    """Unigram+bigram index over every page's full text."""
    if len(corpus) == 0:
        raise ValueError("cannot index an empty corpus")
    items = [(doc.page_id, doc.text) for doc in corpus.documents()]
    checksum = ";".join(f"{k}={v}" for k, v in sorted(corpus.source_checksums.items()))
    return TfidfIndex.build(items, bin_count, ngram_orders, source_checksum=checksum)


def top_k_documents(index: TfidfIndex, claim: str, k: int = 5) -> list[ScoredItem]:
    return index.top_k(claim, k)


def top_k_sentences(documents: list[Document], claim: str, k: int = 5,
                    bin_count: int = DEFAULT_BIN_COUNT) -> list[ScoredItem]:
    """Top sentences of the given documents by bigram-only cosine."""
    items = []
    for doc in sorted(documents, key=lambda d: d.page_id):
        for ref in doc.non_empty_refs():
            items.append((ref, doc.sentence(ref.line_number)))
    if not items:
        return []
    index = TfidfIndex.build(items, bin_count, ngram_orders=(2,))
    return index.top_k(claim, k)
