from __future__ import annotations

from pathlib import Path

import pytest

from lfforge.grammar import parse_grammar
from lfforge.toolgen import generate_all
from lfforge.tools import build_registry

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
GRAMMAR_PATH = REPO_ROOT / "src" / "lfforge" / "fixtures" / "linguafranca-subset.fg"


@pytest.fixture(scope="session")
def grammar_text() -> str:
    return GRAMMAR_PATH.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fixture_grammar(grammar_text):
    result = parse_grammar(grammar_text)
    assert result.ok, result.diagnostics
    return result.grammar


@pytest.fixture(scope="session")
def tool_pairs(fixture_grammar):
    return generate_all(fixture_grammar).pairs


@pytest.fixture()
def registry(tool_pairs):
    return build_registry(tool_pairs)


@pytest.fixture(scope="session")
def corpus_paths() -> list[Path]:
    paths = sorted((FIXTURES / "models").glob("*.lf"))
    assert len(paths) == 10
    return paths


@pytest.fixture(scope="session")
def demo_script_path() -> Path:
    return FIXTURES / "scripts" / "demo5.json"


@pytest.fixture(scope="session")
def target_fix_script_path() -> Path:
    return FIXTURES / "scripts" / "target-fix.json"


@pytest.fixture(scope="session")
def demo_prompts() -> list[str]:
    lines = (FIXTURES / "prompts" / "demo5.txt").read_text(encoding="utf-8").splitlines()
    return [line.strip() for line in lines if line.strip()]
