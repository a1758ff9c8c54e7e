"""Corpus parsing, keyword matching, and citation-network construction.

File formats (documented field-by-field in ``docs/formats.md``):

* corpus: line-delimited JSON, one document per line, fields ``id``,
  ``title``, ``abstract``, ``references``;
* keywords: plain text, one phrase per line, ``#`` starts a comment line.

A document matches a keyword when the case-folded phrase occurs as a
contiguous substring of the case-folded ``title + " " + abstract``. A
network built for a removed-keyword set retains exactly the documents whose
matched set minus the removed set is nonempty, keeps citations between
retained documents, and is restricted to the largest weakly connected
component.
"""

from __future__ import annotations

import json
from array import array
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyNetwork, SchemaError
from .graph import CitationGraph, _component_labels, _pick_component


@dataclass(slots=True)
class Document:
    """One bibliographic record; ``references`` are outgoing citation ids."""

    id: str
    title: str
    abstract: str = ""
    references: tuple[str, ...] = ()


class KeywordSet:
    """Ordered list of distinct, nonempty query phrases.

    Matching is case-insensitive; phrases that collide after case folding
    are rejected. Order is preserved for reporting and tie-breaking.
    """

    def __init__(self, phrases: Iterable[str]):
        cleaned = [p.strip() for p in phrases]
        if not cleaned:
            raise ValueError("keyword set is empty")
        folded = []
        seen = set()
        for p in cleaned:
            if not p:
                raise ValueError("empty keyword phrase")
            f = p.casefold()
            if f in seen:
                raise ValueError(f"duplicate keyword after case folding: {p!r}")
            seen.add(f)
            folded.append(f)
        self.phrases: tuple[str, ...] = tuple(cleaned)
        self.folded: tuple[str, ...] = tuple(folded)

    def __len__(self) -> int:
        return len(self.phrases)

    def __getitem__(self, i: int) -> str:
        return self.phrases[i]

    def __iter__(self):
        return iter(self.phrases)

    @classmethod
    def from_file(cls, path) -> "KeywordSet":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        phrases = [ln.strip() for ln in lines
                   if ln.strip() and not ln.lstrip().startswith("#")]
        if not phrases:
            raise SchemaError(f"keyword file {path} contains no phrases")
        return cls(phrases)


@dataclass
class MatchedCorpus:
    """Documents with at least one matched keyword, plus their incidence."""

    documents: list[Document]
    incidence: list[frozenset[int]]


def match_keywords(doc: Document, ks: KeywordSet) -> frozenset[int]:
    """Indices of the keywords occurring in the document's title+abstract."""
    text = (doc.title + " " + doc.abstract).casefold()
    return frozenset(i for i, p in enumerate(ks.folded) if p in text)


def match_corpus(corpus: Iterable[Document], ks: KeywordSet) -> MatchedCorpus:
    docs, inc = [], []
    for doc in corpus:
        m = match_keywords(doc, ks)
        if m:
            docs.append(doc)
            inc.append(m)
    return MatchedCorpus(docs, inc)


def retained_documents(corpus: Iterable[Document], ks: KeywordSet,
                       removed: frozenset[int] = frozenset()) -> list[Document]:
    """Documents that survive the query with ``removed`` keywords deleted."""
    _check_removed(ks, removed)
    return [doc for doc in corpus if match_keywords(doc, ks) - removed]


def _check_removed(ks: KeywordSet, removed) -> frozenset[int]:
    removed = frozenset(removed)
    if any(i < 0 or i >= len(ks) for i in removed):
        raise ValueError("removed contains an invalid keyword index")
    return removed


def build_network(corpus: Iterable[Document], ks: KeywordSet,
                  removed: frozenset[int] = frozenset()) -> CitationGraph:
    """Build the citation graph for the query with ``removed`` keywords gone.

    Single streaming pass: documents are retained when their matched
    keyword set minus ``removed`` is nonempty; citations whose source or
    target is not retained are dropped, as are self-citations and parallel
    edges. The result is the largest weakly connected component (ties
    broken by smallest node id).

    Raises ``EmptyNetwork`` if nothing is retained or every retained
    document is isolated.
    """
    removed = _check_removed(ks, removed)
    index: dict[str, int] = {}
    ids: list[str] = []
    incidence: list[frozenset[int]] = []
    pending: dict[str, list[int]] = {}
    src = array("q")
    dst = array("q")

    for doc in corpus:
        matched = match_keywords(doc, ks)
        if not (matched - removed):
            continue
        if doc.id in index:
            raise SchemaError(f"duplicate document id: {doc.id!r}")
        u = len(ids)
        index[doc.id] = u
        ids.append(doc.id)
        incidence.append(matched)
        waiting = pending.pop(doc.id, None)
        if waiting:
            for s in waiting:
                src.append(s)
                dst.append(u)
        for ref in doc.references:
            v = index.get(ref)
            if v is None:
                if ref != doc.id:
                    pending.setdefault(ref, []).append(u)
            elif v != u:
                src.append(u)
                dst.append(v)
    pending.clear()

    n = len(ids)
    if n == 0:
        raise EmptyNetwork("no document retained by the query")
    src_a = np.frombuffer(src, dtype=np.int64) if len(src) else np.empty(0, np.int64)
    dst_a = np.frombuffer(dst, dtype=np.int64) if len(dst) else np.empty(0, np.int64)
    keys = np.unique(src_a * n + dst_a)
    src_a, dst_a = keys // n, keys % n
    if len(src_a) == 0:
        raise EmptyNetwork("all retained documents are isolated")

    labels = _component_labels(n, src_a, dst_a)
    winner = _pick_component(labels, ids)
    keep = labels == winner
    new_index = np.cumsum(keep) - 1
    emask = keep[src_a]  # an edge's endpoints share a weak component
    src_a = new_index[src_a[emask]]
    dst_a = new_index[dst_a[emask]]
    kept_ids = [i for i, k in zip(ids, keep.tolist()) if k]
    kept_inc = [m for m, k in zip(incidence, keep.tolist()) if k]
    return CitationGraph(kept_ids, src_a, dst_a, incidence=kept_inc)


# --- corpus file I/O ---------------------------------------------------

_FIELDS = ("id", "title", "abstract", "references")


def load_corpus(path) -> Iterator[Document]:
    """Stream documents from a line-delimited JSON corpus file."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(rec, dict) or "id" not in rec:
                raise SchemaError(f"{path}:{lineno}: record must be an object with an 'id'")
            refs = rec.get("references", [])
            if not isinstance(refs, list):
                raise SchemaError(f"{path}:{lineno}: 'references' must be a list")
            yield Document(
                id=str(rec["id"]),
                title=str(rec.get("title", "")),
                abstract=str(rec.get("abstract", "")),
                references=tuple(str(r) for r in refs),
            )


def write_corpus(docs: Iterable[Document], path) -> int:
    """Write documents to a line-delimited JSON corpus file; returns count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            rec = {"id": doc.id, "title": doc.title, "abstract": doc.abstract,
                   "references": list(doc.references)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            count += 1
    return count


# --- synthetic corpus ---------------------------------------------------

def synthetic_corpus(n_docs: int, ks: KeywordSet, seed: int = 0,
                     mean_refs: float = 6.0, intra_topic: float = 0.8,
                     second_keyword_rate: float = 0.1,
                     topic_exponent: float = 1.0) -> Iterator[Document]:
    """Generate a seeded synthetic corpus with topical citation structure.

    Each document gets one main topic (a keyword embedded in its title).
    Topic popularity follows ranks^(-topic_exponent). Citations point to
    earlier documents, a fraction ``intra_topic`` of them within the same
    topic, which gives the resulting network a community structure. Some
    abstracts mention a second keyword.

    The real bibliographic corpus this toolkit targets is not
    redistributable, so experiments and scale tests run on this generator.
    """
    if n_docs < 1:
        raise ValueError("n_docs must be positive")
    rng = np.random.default_rng(seed)
    k = len(ks)
    weights = np.arange(1, k + 1, dtype=np.float64) ** (-topic_exponent)
    weights /= weights.sum()
    topics = rng.choice(k, size=n_docs, p=weights)
    n_refs = rng.poisson(mean_refs, size=n_docs)
    n_refs[0] = 0

    # Per-topic position of each document, so "cite an earlier same-topic
    # document" can be sampled in one vectorized pass.
    topic_pos = np.zeros(n_docs, dtype=np.int64)
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n_docs):
        t = topics[i]
        topic_pos[i] = counts[t]
        counts[t] += 1
    members_by_topic = np.argsort(topics, kind="stable")
    offsets = np.zeros(k, dtype=np.int64)
    np.cumsum(counts[:-1], out=offsets[1:])

    total = int(n_refs.sum())
    doc_of_ref = np.repeat(np.arange(n_docs), n_refs)
    intra = rng.random(total) < intra_topic
    u = rng.random(total)
    targets = np.empty(total, dtype=np.int64)

    # same-topic refs: uniform over earlier documents of the same topic
    pos = topic_pos[doc_of_ref]
    has_intra = intra & (pos > 0)
    drawn = (u[has_intra] * pos[has_intra]).astype(np.int64)
    tgt_topic = topics[doc_of_ref[has_intra]]
    targets[has_intra] = members_by_topic[offsets[tgt_topic] + drawn]

    # cross-topic (or no earlier same-topic doc): uniform over earlier docs
    cross = ~has_intra
    targets[cross] = (u[cross] * doc_of_ref[cross]).astype(np.int64)

    ref_splits = np.cumsum(n_refs)[:-1]
    per_doc_targets = np.split(targets, ref_splits)
    second = rng.random(n_docs) < second_keyword_rate
    second_topic = rng.integers(0, k, size=n_docs)

    for i in range(n_docs):
        t = int(topics[i])
        title = f"A study of {ks[t]} methods ({i})"
        if second[i] and int(second_topic[i]) != t:
            abstract = (f"We analyse {ks[t]} and compare against "
                        f"{ks[int(second_topic[i])]} baselines.")
        else:
            abstract = f"Applications of {ks[t]} are discussed."
        refs = tuple(f"D{j}" for j in np.unique(per_doc_targets[i]).tolist())
        yield Document(id=f"D{i}", title=title, abstract=abstract, references=refs)
