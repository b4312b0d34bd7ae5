"""Mention detection: exact anchor matching over pooled candidate documents.

A candidate document's anchor phrases are matched against the sentence at
token boundaries; overlapping matches are resolved greedily, longest span
first, with the pooled relevance score breaking length ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import IndexedDocument
from .index import CorpusIndex
from .retrieval import DEFAULT_K, CandidatePool, retrieve_pooled


@dataclass(frozen=True)
class Mention:
    """A sentence token span [start, end) linked to one document."""

    start: int
    end: int
    surface: tuple[str, ...]
    doc_id: int
    pooled_score: float

    def overlaps(self, other: "Mention") -> bool:
        return self.start < other.end and other.start < self.end

    @property
    def length(self) -> int:
        return self.end - self.start


def find_matches(
    sentence_tokens: Sequence[str],
    pool: CandidatePool,
    documents: Sequence[IndexedDocument],
) -> list[Mention]:
    """Every (span, document) pair where an anchor phrase of a pooled
    document equals a contiguous token subsequence of the sentence.

    All occurrences are reported, overlaps included; resolution happens in
    resolve_overlaps.
    """
    # Anchor token sequence -> doc_ids that list it, restricted to the pool.
    phrase_docs: dict[tuple[str, ...], list[int]] = {}
    scores: dict[int, float] = {}
    for candidate in pool.candidates:
        scores[candidate.doc_id] = candidate.pooled_score
        for phrase in documents[candidate.doc_id].referred_by:
            key = tuple(phrase.split(" "))
            phrase_docs.setdefault(key, []).append(candidate.doc_id)

    lengths = sorted({len(key) for key in phrase_docs})
    n = len(sentence_tokens)
    matches: list[Mention] = []
    for start in range(n):
        for length in lengths:
            end = start + length
            if end > n:
                break
            key = tuple(sentence_tokens[start:end])
            for doc_id in phrase_docs.get(key, ()):
                matches.append(
                    Mention(
                        start=start,
                        end=end,
                        surface=key,
                        doc_id=doc_id,
                        pooled_score=scores[doc_id],
                    )
                )
    return matches


def resolve_overlaps(matches: list[Mention]) -> list[Mention]:
    """Greedy selection: longest span first, then pooled score, then
    start position and doc_id for determinism. A match is kept iff it
    overlaps no previously kept match. Output is sorted by start.
    """
    ordered = sorted(
        matches, key=lambda m: (-m.length, -m.pooled_score, m.start, m.doc_id)
    )
    kept: list[Mention] = []
    for match in ordered:
        if not any(match.overlaps(k) for k in kept):
            kept.append(match)
    kept.sort(key=lambda m: m.start)
    return kept


def link_sentence(
    sentence_tokens: Sequence[str],
    index: CorpusIndex,
    k: int = DEFAULT_K,
    *,
    fields: tuple[str, ...] | None = None,
    sentence_id: str = "",
) -> list[Mention]:
    """Retrieve, match, and resolve: the full per-sentence linking pass."""
    kwargs = {"sentence_id": sentence_id}
    if fields is not None:
        kwargs["fields"] = fields
    pool = retrieve_pooled(list(sentence_tokens), index, k, **kwargs)
    return resolve_overlaps(find_matches(sentence_tokens, pool, index.documents))


def mention_recall(
    gold_spans: Sequence[tuple[int, int]], detected: Sequence[Mention]
) -> float:
    """Fraction of gold spans exactly covered by a detected mention span.

    Type-agnostic; an empty gold set counts as fully recalled.
    """
    if not gold_spans:
        return 1.0
    detected_spans = {(m.start, m.end) for m in detected}
    hit = sum(1 for span in gold_spans if tuple(span) in detected_spans)
    return hit / len(gold_spans)
