"""Per-field inverted indexes with BM25 ranking over OR queries.

Four fields are indexed for every document: title, referred_by,
interwikies, and all_text. Ranking uses BM25 with k1=1.2, b=0.75 and the
floored idf ln(1 + (N - df + 0.5) / (df + 0.5)), which keeps every term's
contribution positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import IndexedDocument
from .errors import DataFormatError
from .storage import MAGIC_CORPUS, MAGIC_INDEX, dump_json, load_json, read_container, write_container
from .tokenizer import tokenize

K1 = 1.2
B = 0.75

FIELD_NAMES = ("title", "referred_by", "interwikies", "all_text")


@dataclass
class FieldIndex:
    """Inverted index over one field of the corpus.

    postings maps term -> [(doc_id, term_frequency)] sorted by doc_id;
    doc_lengths has one entry per document (0 for an empty field).
    """

    field_name: str
    postings: dict[str, list[tuple[int, int]]]
    doc_lengths: list[int]
    avg_doc_length: float
    doc_count: int

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def build_field_index(field_name: str, token_docs: Sequence[Sequence[str]]) -> FieldIndex:
    """Index pre-tokenized documents; doc_ids are the sequence positions."""
    if not token_docs:
        raise ValueError("cannot build an index over zero documents")
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    for doc_id, tokens in enumerate(token_docs):
        doc_lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((doc_id, tf))
    # Appending in doc_id order already yields sorted postings lists.
    return FieldIndex(
        field_name=field_name,
        postings=postings,
        doc_lengths=doc_lengths,
        avg_doc_length=sum(doc_lengths) / len(doc_lengths),
        doc_count=len(doc_lengths),
    )


def field_tokens(doc: IndexedDocument, field_name: str, *, turkish: bool = False) -> list[str]:
    """Token stream a document contributes to one field's index."""
    if field_name == "title":
        return tokenize(doc.title, turkish=turkish)
    if field_name == "referred_by":
        tokens: list[str] = []
        for phrase in doc.referred_by:
            tokens.extend(phrase.split(" "))
        return tokens
    if field_name == "interwikies":
        tokens = []
        for target in doc.interwikies:
            tokens.extend(tokenize(target, turkish=turkish))
        return tokens
    if field_name == "all_text":
        return tokenize(doc.all_text, turkish=turkish)
    raise ValueError(f"unknown field {field_name!r}")


def build_index(
    docs: Sequence[IndexedDocument], *, turkish: bool = False
) -> dict[str, FieldIndex]:
    """Build all four field indexes for a corpus."""
    if not docs:
        raise ValueError("cannot build an index over zero documents")
    return {
        name: build_field_index(name, [field_tokens(d, name, turkish=turkish) for d in docs])
        for name in FIELD_NAMES
    }


def bm25_score(query_terms: Sequence[str], doc_id: int, field_index: FieldIndex) -> float:
    """BM25 score of one document for an OR query.

    Each distinct query term contributes idf * tf*(k1+1) / (tf + k1*norm);
    terms absent from the document contribute nothing.
    """
    if not 0 <= doc_id < field_index.doc_count:
        raise ValueError(f"unknown doc_id {doc_id}")
    score = 0.0
    for term in _distinct(query_terms):
        tf = _term_frequency(field_index, term, doc_id)
        if tf == 0:
            continue
        score += field_index.idf(term) * _tf_part(tf, field_index, doc_id)
    return score


def search(
    field_index: FieldIndex, query: str, k: int, *, turkish: bool = False
) -> list[tuple[int, float]]:
    """Top-k documents matching at least one query term.

    Results are sorted by score descending, doc_id ascending on ties.
    An empty query (after tokenization) returns no results.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return search_tokens(field_index, tokenize(query, turkish=turkish), k)


def search_tokens(
    field_index: FieldIndex, query_terms: Sequence[str], k: int
) -> list[tuple[int, float]]:
    scores: dict[int, float] = {}
    for term in _distinct(query_terms):
        postings = field_index.postings.get(term)
        if not postings:
            continue
        idf = field_index.idf(term)
        for doc_id, tf in postings:
            contribution = idf * _tf_part(tf, field_index, doc_id)
            scores[doc_id] = scores.get(doc_id, 0.0) + contribution
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def _distinct(terms: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for term in terms:
        if term not in seen:
            seen.add(term)
            out.append(term)
    return out


def _term_frequency(field_index: FieldIndex, term: str, doc_id: int) -> int:
    for posted_id, tf in field_index.postings.get(term, ()):
        if posted_id == doc_id:
            return tf
        if posted_id > doc_id:
            break
    return 0


def _tf_part(tf: int, field_index: FieldIndex, doc_id: int) -> float:
    norm = 1.0 - B + B * field_index.doc_lengths[doc_id] / field_index.avg_doc_length
    return tf * (K1 + 1.0) / (tf + K1 * norm)


@dataclass
class CorpusIndex:
    """Self-contained search bundle: documents plus their four field indexes."""

    documents: list[IndexedDocument]
    fields: dict[str, FieldIndex]
    turkish: bool = False

    @classmethod
    def build(cls, documents: Sequence[IndexedDocument], *, turkish: bool = False) -> "CorpusIndex":
        return cls(
            documents=list(documents),
            fields=build_index(documents, turkish=turkish),
            turkish=turkish,
        )

    def search_field(self, field_name: str, query_terms: Sequence[str], k: int) -> list[tuple[int, float]]:
        return search_tokens(self.fields[field_name], query_terms, k)

    def save(self, path: str | Path) -> None:
        payload = {
            "turkish": self.turkish,
            "documents": [_doc_to_json(d) for d in self.documents],
            "fields": {
                name: {
                    "postings": {
                        term: [[d, tf] for d, tf in plist]
                        for term, plist in fi.postings.items()
                    },
                    "doc_lengths": fi.doc_lengths,
                    "avg_doc_length": fi.avg_doc_length,
                    "doc_count": fi.doc_count,
                }
                for name, fi in self.fields.items()
            },
        }
        write_container(path, MAGIC_INDEX, dump_json(payload))

    @classmethod
    def load(cls, path: str | Path) -> "CorpusIndex":
        payload = load_json(read_container(path, MAGIC_INDEX), path)
        if not isinstance(payload, dict) or "fields" not in payload:
            raise DataFormatError(f"{path}: index payload missing fields section")
        fields = {}
        for name, raw in payload["fields"].items():
            fields[name] = FieldIndex(
                field_name=name,
                postings={
                    term: [(int(d), int(tf)) for d, tf in plist]
                    for term, plist in raw["postings"].items()
                },
                doc_lengths=[int(n) for n in raw["doc_lengths"]],
                avg_doc_length=float(raw["avg_doc_length"]),
                doc_count=int(raw["doc_count"]),
            )
        return cls(
            documents=[_doc_from_json(d) for d in payload["documents"]],
            fields=fields,
            turkish=bool(payload.get("turkish", False)),
        )


def save_corpus(documents: Sequence[IndexedDocument], path: str | Path, *, turkish: bool = False) -> None:
    payload = {"turkish": turkish, "documents": [_doc_to_json(d) for d in documents]}
    write_container(path, MAGIC_CORPUS, dump_json(payload))


def load_corpus(path: str | Path) -> tuple[list[IndexedDocument], bool]:
    payload = load_json(read_container(path, MAGIC_CORPUS), path)
    if not isinstance(payload, dict) or "documents" not in payload:
        raise DataFormatError(f"{path}: corpus payload missing documents section")
    docs = [_doc_from_json(d) for d in payload["documents"]]
    return docs, bool(payload.get("turkish", False))


def _doc_to_json(doc: IndexedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "referred_by": list(doc.referred_by),
        "interwikies": list(doc.interwikies),
        "all_text": doc.all_text,
        "lead": doc.lead,
    }


def _doc_from_json(raw: dict) -> IndexedDocument:
    return IndexedDocument(
        doc_id=int(raw["doc_id"]),
        title=raw["title"],
        referred_by=tuple(raw["referred_by"]),
        interwikies=tuple(raw["interwikies"]),
        all_text=raw["all_text"],
        lead=raw["lead"],
    )
