"""Pooled candidate retrieval: one OR query per sentence against all four fields.

A document retrieved by several fields keeps each field score once; its
pooled score is the plain sum of those scores. Pool membership is exactly
the union of the per-field top-k result sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .index import FIELD_NAMES, CorpusIndex

DEFAULT_K = 200


@dataclass(frozen=True)
class PooledCandidate:
    doc_id: int
    per_field_scores: dict[str, float]
    pooled_score: float


@dataclass
class CandidatePool:
    sentence_id: str
    candidates: list[PooledCandidate]
    per_field_counts: dict[str, int]

    def score_of(self, doc_id: int) -> float:
        for candidate in self.candidates:
            if candidate.doc_id == doc_id:
                return candidate.pooled_score
        raise KeyError(doc_id)


def retrieve_pooled(
    sentence_tokens: list[str],
    index: CorpusIndex,
    k: int = DEFAULT_K,
    *,
    fields: tuple[str, ...] = FIELD_NAMES,
    sentence_id: str = "",
) -> CandidatePool:
    """Run the sentence as an OR query per field and union the results.

    The pool may be empty when no document shares a token with the
    sentence. Fields are merged in a fixed order so the result is
    deterministic.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    per_field_scores: dict[int, dict[str, float]] = {}
    per_field_counts: dict[str, int] = {}
    for name in fields:
        results = index.search_field(name, sentence_tokens, k)
        per_field_counts[name] = len(results)
        for doc_id, score in results:
            per_field_scores.setdefault(doc_id, {})[name] = score

    candidates = [
        PooledCandidate(
            doc_id=doc_id,
            per_field_scores=scores,
            pooled_score=sum(scores.values()),
        )
        for doc_id, scores in per_field_scores.items()
    ]
    candidates.sort(key=lambda c: (-c.pooled_score, c.doc_id))
    return CandidatePool(
        sentence_id=sentence_id,
        candidates=candidates,
        per_field_counts=per_field_counts,
    )


@dataclass
class PoolStats:
    """Aggregate retrieval diagnostics over a batch of sentences."""

    sentence_count: int = 0
    avg_pool_size: float = 0.0
    empty_pool_count: int = 0
    avg_per_field: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "sentence_count": self.sentence_count,
            "avg_pool_size": self.avg_pool_size,
            "empty_pool_count": self.empty_pool_count,
            "avg_per_field": dict(sorted(self.avg_per_field.items())),
        }


def pool_stats(pools: list[CandidatePool]) -> PoolStats:
    """Mean pool size, mean per-field result count, and empty-pool count."""
    if not pools:
        return PoolStats()
    field_totals: dict[str, int] = {}
    for pool in pools:
        for name, count in pool.per_field_counts.items():
            field_totals[name] = field_totals.get(name, 0) + count
    return PoolStats(
        sentence_count=len(pools),
        avg_pool_size=sum(len(p.candidates) for p in pools) / len(pools),
        empty_pool_count=sum(1 for p in pools if not p.candidates),
        avg_per_field={name: total / len(pools) for name, total in field_totals.items()},
    )
