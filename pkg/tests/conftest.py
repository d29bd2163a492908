import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

CORPUS = ROOT / "corpus"

CORPUS_FILES = sorted(p.name for p in CORPUS.glob("*.mj"))
# every corpus program except the deliberate diverger
TERMINATING = [n for n in CORPUS_FILES if n != "infinite.mj"]


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus_dir() -> pathlib.Path:
    return CORPUS
