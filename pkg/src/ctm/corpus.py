"""Bag-of-words corpus ingestion, pruning, and on-disk persistence.

On-disk layout is a directory with three UTF-8 text files:

  vocabulary.txt   one term per line, line number = term id
  documents.dat    one document per line: ``M k1:c1 k2:c2 ...`` where M is
                   the number of unique terms in the document (the common
                   sparse topic-model exchange format)
  metadata.tsv     doc_id, title, year (tab-separated), line-aligned with
                   documents.dat
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z]+")

SCHEMA_VERSION = 1


class EmptyCorpusError(ValueError):
    """All documents became empty after pruning, or the corpus has no documents."""


class CorpusFormatError(ValueError):
    """Malformed corpus file; message names the offending line."""


def tokenize(raw_text: str) -> list[str]:
    """Lowercased alphabetic tokens; punctuation and digits are separators."""
    return _TOKEN_RE.findall(raw_text.lower())


def default_stop_words() -> set[str]:
    """The stop-word list shipped with the package (~300 common English words)."""
    text = resources.files("ctm").joinpath("data/stopwords.txt").read_text("utf-8")
    return {line.strip() for line in text.splitlines() if line.strip()}


@dataclass
class Vocabulary:
    terms: list[str]

    def __post_init__(self):
        if len(self.terms) < 1:
            raise ValueError("vocabulary must contain at least one term")
        self.index = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise ValueError("vocabulary contains duplicate terms")

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.terms == other.terms


@dataclass
class BowDocument:
    doc_id: str
    entries: list[tuple[int, int]]
    title: str = ""
    year: str = ""
    N: int = field(init=False)

    def __post_init__(self):
        prev = -1
        for term_id, count in self.entries:
            if term_id <= prev:
                raise ValueError(f"{self.doc_id}: term ids must be strictly increasing")
            if count < 1:
                raise ValueError(f"{self.doc_id}: counts must be positive")
            prev = term_id
        self.N = sum(c for _, c in self.entries)
        if self.N < 1:
            raise ValueError(f"{self.doc_id}: document has no words")

    @property
    def term_ids(self) -> list[int]:
        return [t for t, _ in self.entries]

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.entries]


@dataclass
class Corpus:
    vocabulary: Vocabulary
    documents: list[BowDocument]

    def __post_init__(self):
        v = len(self.vocabulary)
        for doc in self.documents:
            if doc.entries and doc.entries[-1][0] >= v:
                raise ValueError(f"{doc.doc_id}: term id out of vocabulary range")

    @property
    def D(self) -> int:
        return len(self.documents)

    @property
    def V(self) -> int:
        return len(self.vocabulary)


def build_corpus(
    docs: list[tuple[str, str]],
    stop_words: set[str] | None = None,
    min_term_count: int = 1,
    metadata: dict[str, tuple[str, str]] | None = None,
) -> Corpus:
    """Tokenize raw documents and build a pruned bag-of-words corpus.

    Terms with corpus frequency below ``min_term_count`` and stop words are
    removed; documents emptied by pruning are dropped with a warning.
    """
    if min_term_count < 1:
        raise ValueError("min_term_count must be >= 1")
    stop_words = stop_words or set()
    metadata = metadata or {}

    tokenized = [(doc_id, tokenize(text)) for doc_id, text in docs]
    freq = Counter()
    for _, toks in tokenized:
        freq.update(toks)

    kept = sorted(t for t, c in freq.items() if c >= min_term_count and t not in stop_words)
    if not kept:
        raise EmptyCorpusError("no terms survive pruning")
    vocab = Vocabulary(kept)

    documents = []
    dropped = []
    for doc_id, toks in tokenized:
        counts = Counter(vocab.index[t] for t in toks if t in vocab.index)
        if not counts:
            dropped.append(doc_id)
            continue
        title, year = metadata.get(doc_id, ("", ""))
        documents.append(
            BowDocument(doc_id, sorted(counts.items()), title=title, year=year)
        )
    if dropped:
        log.warning("dropped %d document(s) emptied by pruning: %s",
                    len(dropped), ", ".join(dropped[:10]))
    if not documents:
        raise EmptyCorpusError("every document became empty after pruning")
    return Corpus(vocab, documents)


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus directory (vocabulary.txt, documents.dat, metadata.tsv)."""
    if corpus.D < 1:
        raise EmptyCorpusError("refusing to save an empty corpus")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / "vocabulary.txt").write_text(
        "\n".join(corpus.vocabulary.terms) + "\n", "utf-8"
    )
    with open(path / "documents.dat", "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            pairs = " ".join(f"{t}:{c}" for t, c in doc.entries)
            fh.write(f"{len(doc.entries)} {pairs}\n")
    with open(path / "metadata.tsv", "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(f"{doc.doc_id}\t{doc.title}\t{doc.year}\n")


def parse_bow_line(line: str, lineno: int, doc_id: str) -> BowDocument:
    """Parse one ``M k1:c1 ...`` line into a document."""
    parts = line.split()
    if not parts:
        raise CorpusFormatError(f"line {lineno}: empty document line")
    try:
        m = int(parts[0])
        entries = []
        for token in parts[1:]:
            k, c = token.split(":")
            entries.append((int(k), int(c)))
    except ValueError as exc:
        raise CorpusFormatError(f"line {lineno}: malformed entry ({exc})") from exc
    if m != len(entries):
        raise CorpusFormatError(
            f"line {lineno}: declared {m} entries but found {len(entries)}"
        )
    try:
        return BowDocument(doc_id, entries)
    except ValueError as exc:
        raise CorpusFormatError(f"line {lineno}: {exc}") from exc


def load_corpus(path) -> Corpus:
    """Load a corpus directory written by :func:`save_corpus`."""
    path = Path(path)
    vocab_lines = (path / "vocabulary.txt").read_text("utf-8").splitlines()
    vocab = Vocabulary([t for t in vocab_lines if t])

    meta_path = path / "metadata.tsv"
    meta_rows = []
    if meta_path.exists():
        for row in meta_path.read_text("utf-8").splitlines():
            cols = row.split("\t")
            meta_rows.append((cols[0], cols[1] if len(cols) > 1 else "",
                              cols[2] if len(cols) > 2 else ""))

    documents = []
    with open(path / "documents.dat", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            i = len(documents)
            doc_id, title, year = (
                meta_rows[i] if i < len(meta_rows) else (f"doc{i:05d}", "", "")
            )
            doc = parse_bow_line(line, lineno, doc_id)
            doc.title, doc.year = title, year
            documents.append(doc)
    if not documents:
        raise EmptyCorpusError("corpus file contains no documents")
    return Corpus(vocab, documents)
