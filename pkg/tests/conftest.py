"""Shared fixtures: the bundled mini-corpus, its index, and trained models."""

from __future__ import annotations

from pathlib import Path

import pytest

from linkrush.classifier import TrainingConfig, train
from linkrush.corpus import ingest
from linkrush.ensemble import build_training_examples
from linkrush.evaluation import read_conll
from linkrush.index import CorpusIndex

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fixture_documents():
    with open(FIXTURES / "articles.jsonl", encoding="utf-8") as handle:
        return ingest(handle)


@pytest.fixture(scope="session")
def fixture_index(fixture_documents):
    return CorpusIndex.build(fixture_documents)


@pytest.fixture(scope="session")
def gold_sentences():
    return read_conll(FIXTURES / "gold.conll")


@pytest.fixture(scope="session")
def training_examples(gold_sentences, fixture_index):
    return build_training_examples(gold_sentences, fixture_index)


@pytest.fixture(scope="session")
def trained_model(training_examples):
    return train(training_examples, TrainingConfig())


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
