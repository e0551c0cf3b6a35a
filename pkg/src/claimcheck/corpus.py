"""Wiki dump ingestion and sentence-level addressing.

The dump format is JSON-lines, one page per line: ``id`` (page name,
underscores for spaces), ``text`` (introductory text), ``lines`` (rows of
``N\\tsentence[\\tmeta...]`` joined by newlines).  Everything after the
second tab is link metadata and is discarded; empty sentences keep their
line number so evidence references stay valid, but are flagged so retrieval
can skip them.
"""

import gzip
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class IngestError(ValueError):
    pass


class DuplicatePageError(IngestError):
    def __init__(self, page_id: str):
        super().__init__(f"duplicate page id: {page_id!r}")
        self.page_id = page_id


@dataclass(frozen=True, order=True)
class SentenceRef:
    """Pointer to one numbered sentence of one page."""

    page_id: str
    line_number: int

    def as_pair(self) -> list:
        return [self.page_id, self.line_number]


@dataclass
class Document:
    page_id: str
    text: str
    lines: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        self._by_number = {n: s for n, s in self.lines}

    def sentence(self, line_number: int) -> str | None:
        return self._by_number.get(line_number)

    def non_empty_refs(self) -> list[SentenceRef]:
        """Refs to every sentence with actual text, in line order."""
        return [SentenceRef(self.page_id, n) for n, s in self.lines if s]


@dataclass
class IngestStats:
    documents: int = 0
    lines_skipped: int = 0
    records_skipped: int = 0


class Corpus:
    """Immutable-after-ingest store of documents keyed by page id."""

    def __init__(self):
        self._docs: dict[str, Document] = {}
        self.source_checksums: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, page_id: str) -> bool:
        return page_id in self._docs

    def add_document(self, doc: Document) -> None:
        if doc.page_id in self._docs:
            raise DuplicatePageError(doc.page_id)
        self._docs[doc.page_id] = doc

    def get(self, page_id: str) -> Document | None:
        return self._docs.get(page_id)

    def page_ids(self) -> list[str]:
        return sorted(self._docs)

    def documents(self):
        for page_id in self.page_ids():
            yield self._docs[page_id]

    def get_sentence(self, ref: SentenceRef) -> str | None:
        """Sentence text for a ref, or None when page or line is unknown."""
        doc = self._docs.get(ref.page_id)
        if doc is None:
            return None
        return doc.sentence(ref.line_number)

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        payload = {
            "format_version": FORMAT_VERSION,
            "checksums": self.source_checksums,
            "documents": [
                {"id": d.page_id, "text": d.text, "lines": [[n, s] for n, s in d.lines]}
                for d in self.documents()
            ],
        }
        # mtime pinned so identical corpora serialize to identical bytes
        data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(gzip.compress(data, mtime=0))

    @classmethod
    def load(cls, path) -> "Corpus":
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format_version") != FORMAT_VERSION:
            raise IngestError(f"unsupported corpus format version: {payload.get('format_version')}")
        corpus = cls()
        corpus.source_checksums = dict(payload["checksums"])
        for rec in payload["documents"]:
            corpus.add_document(
                Document(rec["id"], rec["text"], [(int(n), s) for n, s in rec["lines"]])
            )
        return corpus


def parse_lines_field(raw: str) -> tuple[list[tuple[int, str]], int]:
    """Split a dump ``lines`` field into (line_number, sentence) pairs.

    Returns the parsed pairs plus the count of skipped entries: rows without
    a tab, with a non-integer index, or repeating an already-seen index.
    """
    lines: list[tuple[int, str]] = []
    seen: set[int] = set()
    skipped = 0
    if not raw:
        return lines, skipped
    for entry in raw.split("\n"):
        parts = entry.split("\t")
        if len(parts) < 2:
            skipped += 1
            continue
        try:
            number = int(parts[0])
        except ValueError:
            skipped += 1
            continue
        if number < 0 or number in seen:
            skipped += 1
            continue
        seen.add(number)
        lines.append((number, parts[1]))
    return lines, skipped


def _dump_files(path) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.jsonl"))
        if not files:
            raise FileNotFoundError(f"no .jsonl files under {p}")
        return files
    if not p.exists():
        raise FileNotFoundError(str(p))
    return [p]


def ingest_dump(path) -> tuple[Corpus, IngestStats]:
    """Read a dump file or directory of ``*.jsonl`` files into a Corpus.

    Records with an empty id are skipped and counted (FEVER dumps carry an
    empty leading record per file); a repeated non-empty id raises.
    """
    corpus = Corpus()
    stats = IngestStats()
    for fp in _dump_files(path):
        raw = fp.read_bytes()
        corpus.source_checksums[fp.name] = hashlib.sha256(raw).hexdigest()
        for line in raw.decode("utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            page_id = rec.get("id", "")
            if not page_id:
                stats.records_skipped += 1
                continue
            lines, skipped = parse_lines_field(rec.get("lines", ""))
            stats.lines_skipped += skipped
            corpus.add_document(Document(page_id, rec.get("text", ""), lines))
            stats.documents += 1
    logger.info(
        "ingested %d documents (%d lines skipped, %d records skipped)",
        stats.documents,
        stats.lines_skipped,
        stats.records_skipped,
    )
    return corpus, stats
