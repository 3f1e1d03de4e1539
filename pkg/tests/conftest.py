import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from hetqa.cli import bundled
from hetqa.kb import ingest
from hetqa.llm import ScriptedProvider
from hetqa.providers import HashEmbedder, LexicalScorer
from hetqa.textindex import load_passages

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def store():
    return ingest(
        bundled("fixture_entities.jsonl"),
        bundled("fixture_relations.jsonl"),
        bundled("fixture_triples.jsonl"),
    )


@pytest.fixture(scope="session")
def wiki_passages():
    return load_passages(bundled("fixture_passages.jsonl"))


@pytest.fixture()
def scripted_llm():
    return ScriptedProvider.load(bundled("llm_script.jsonl"))


@pytest.fixture(scope="session")
def embedder():
    return HashEmbedder()


@pytest.fixture(scope="session")
def lexical_scorer():
    return LexicalScorer()


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN_DIR
