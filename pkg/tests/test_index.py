"""BM25 scoring against analytic values and an exhaustive oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest

from linkrush.corpus import IndexedDocument
from linkrush.errors import DataFormatError
from linkrush.index import (
    B,
    FIELD_NAMES,
    K1,
    CorpusIndex,
    bm25_score,
    build_field_index,
    build_index,
    field_tokens,
    load_corpus,
    save_corpus,
    search,
    search_tokens,
)


def oracle_scores(token_docs, query_terms):
    """Independent exhaustive BM25: recomputed from raw token lists."""
    n = len(token_docs)
    lengths = [len(d) for d in token_docs]
    avg = sum(lengths) / n
    seen = []
    for term in query_terms:
        if term not in seen:
            seen.append(term)
    scores = {}
    for doc_id, doc in enumerate(token_docs):
        total = 0.0
        for term in seen:
            tf = doc.count(term)
            if tf == 0:
                continue
            df = sum(1 for d in token_docs if term in d)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            norm = 1.0 - B + B * lengths[doc_id] / avg
            total += idf * tf * (K1 + 1.0) / (tf + K1 * norm)
        if total > 0.0:
            scores[doc_id] = total
    return scores


class TestAnalyticValues:
    def test_single_doc_single_term(self):
        # One document, one matching term: idf = ln(1 + 0.5/1.5) = ln(4/3)
        # and the tf part is exactly 1, so the score is ln(4/3).
        index = build_field_index("text", [["hello", "world"]])
        score = bm25_score(["hello"], 0, index)
        assert score == pytest.approx(math.log(4.0 / 3.0), abs=1e-15)
        assert score == pytest.approx(0.2876820724517809, abs=1e-15)

    def test_idf_positive_even_when_term_everywhere(self):
        index = build_field_index("text", [["a"], ["a"], ["a"]])
        assert index.idf("a") == pytest.approx(math.log(1.0 + 0.5 / 3.5), abs=1e-15)
        assert index.idf("a") > 0.0

    def test_absent_terms_contribute_nothing(self):
        index = build_field_index("text", [["a", "b"]])
        assert bm25_score(["zzz"], 0, index) == 0.0
        assert bm25_score(["a", "zzz"], 0, index) == bm25_score(["a"], 0, index)

    def test_repeated_query_terms_count_once(self):
        index = build_field_index("text", [["a", "b"], ["b"]])
        assert bm25_score(["a", "a", "a"], 0, index) == bm25_score(["a"], 0, index)


class TestSearch:
    def test_matches_random_oracle(self):
        rng = np.random.default_rng(11)
        vocab = [f"w{i}" for i in range(25)]
        for _ in range(30):
            n_docs = int(rng.integers(2, 20))
            docs = [
                [vocab[int(i)] for i in rng.integers(0, len(vocab), size=int(rng.integers(1, 15)))]
                for _ in range(n_docs)
            ]
            index = build_field_index("text", docs)
            terms = [vocab[int(i)] for i in rng.integers(0, len(vocab), size=int(rng.integers(1, 5)))]
            expected = oracle_scores(docs, terms)
            got = dict(search_tokens(index, terms, n_docs))
            assert set(got) == set(expected)
            for doc_id, score in got.items():
                assert score == pytest.approx(expected[doc_id], abs=1e-9)

    def test_search_scores_equal_bm25_score_bitwise(self):
        # Both paths accumulate per-term contributions in query order, so
        # the floats must agree exactly, not just approximately.
        rng = np.random.default_rng(3)
        docs = [["a", "b", "c", "a"], ["b", "c"], ["c", "c", "d"], ["e"]]
        index = build_field_index("text", docs)
        for _ in range(50):
            terms = [str(t) for t in rng.choice(["a", "b", "c", "d", "e"], size=3)]
            for doc_id, score in search_tokens(index, terms, 10):
                assert score == bm25_score(terms, doc_id, index)

    def test_ranking_and_ties(self):
        # identical docs tie on score and fall back to doc_id order
        index = build_field_index("text", [["a"], ["a"], ["b"]])
        results = search_tokens(index, ["a"], 10)
        assert [doc_id for doc_id, _ in results] == [0, 1]
        assert results[0][1] == results[1][1]

    def test_k_truncates(self):
        index = build_field_index("text", [["a"], ["a"], ["a"]])
        assert len(search_tokens(index, ["a"], 2)) == 2

    def test_k_must_be_positive(self):
        index = build_field_index("text", [["a"]])
        with pytest.raises(ValueError):
            search(index, "a", 0)

    def test_unknown_doc_id_rejected(self):
        index = build_field_index("text", [["a"]])
        with pytest.raises(ValueError):
            bm25_score(["a"], 5, index)

    def test_empty_query_returns_nothing(self):
        index = build_field_index("text", [["a"]])
        assert search(index, "", 5) == []

    def test_query_permutation_changes_scores_negligibly(self):
        index = build_field_index("text", [["a", "b", "c"], ["b", "c", "c"]])
        forward = dict(search_tokens(index, ["a", "b", "c"], 5))
        backward = dict(search_tokens(index, ["c", "b", "a"], 5))
        assert set(forward) == set(backward)
        for doc_id in forward:
            assert forward[doc_id] == pytest.approx(backward[doc_id], rel=1e-12)


class TestFieldTokens:
    def _doc(self):
        return IndexedDocument(
            doc_id=0,
            title="alpha station",
            referred_by=("the old station", "alpha station"),
            interwikies=("beta yard",),
            all_text="alpha station\nbody text",
            lead="body text",
        )

    def test_title_tokenized(self):
        assert field_tokens(self._doc(), "title") == ["alpha", "station"]

    def test_referred_by_splits_phrases(self):
        assert field_tokens(self._doc(), "referred_by") == [
            "the", "old", "station", "alpha", "station",
        ]

    def test_interwikies_tokenized(self):
        assert field_tokens(self._doc(), "interwikies") == ["beta", "yard"]

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError):
            field_tokens(self._doc(), "nope")


class TestCorpusIndexBundle:
    def test_builds_all_four_fields(self, fixture_documents):
        fields = build_index(fixture_documents)
        assert tuple(fields) == FIELD_NAMES
        for index in fields.values():
            assert index.doc_count == len(fixture_documents)

    def test_zero_documents_rejected(self):
        with pytest.raises(ValueError):
            build_index([])

    def test_all_empty_field_searchable(self):
        # documents with no links leave the interwikies field empty
        docs = [
            IndexedDocument(0, "a", ("a",), (), "a", ""),
            IndexedDocument(1, "b", ("b",), (), "b", ""),
        ]
        bundle = CorpusIndex.build(docs)
        assert bundle.search_field("interwikies", ["a"], 5) == []

    def test_save_load_identical_results(self, fixture_index, tmp_path):
        path = tmp_path / "idx.bin"
        fixture_index.save(path)
        loaded = CorpusIndex.load(path)
        queries = [["nokia", "2010"], ["the", "boss"], ["granite"], ["houston"]]
        for terms in queries:
            for name in FIELD_NAMES:
                assert loaded.search_field(name, terms, 50) == fixture_index.search_field(
                    name, terms, 50
                )
        assert [d.title for d in loaded.documents] == [
            d.title for d in fixture_index.documents
        ]

    def test_save_is_deterministic(self, fixture_index, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        fixture_index.save(a)
        fixture_index.save(b)
        assert a.read_bytes() == b.read_bytes()

    def test_wrong_magic_rejected(self, fixture_documents, tmp_path):
        path = tmp_path / "c.bin"
        save_corpus(fixture_documents, path)
        with pytest.raises(DataFormatError, match="magic"):
            CorpusIndex.load(path)

    def test_corpus_round_trip(self, fixture_documents, tmp_path):
        path = tmp_path / "c.bin"
        save_corpus(fixture_documents, path, turkish=False)
        docs, turkish = load_corpus(path)
        assert docs == fixture_documents
        assert turkish is False
