import os
import pathlib

import pytest

ROOT = pathlib.Path(os.environ.get("RALLYVIZ_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


@pytest.fixture
def root():
    return ROOT


@pytest.fixture
def tracking():
    return ROOT / "data" / "fixtures" / "rally_300.json"


@pytest.fixture
def tactics():
    return ROOT / "data" / "fixtures" / "tactics_import.json"


@pytest.fixture
def corpus():
    return ROOT / "data" / "corpus" / "sample_corpus.json"
