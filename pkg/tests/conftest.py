from __future__ import annotations

from pathlib import Path

import pytest

from ucdf.flowc.parser import parse_source
from ucdf.flowc.symbols import resolve_symbols

FIXTURES = Path(__file__).parent / "fixtures"
PROGRAMS = sorted((FIXTURES / "programs").glob("*.fc"))
NOTATION = sorted((FIXTURES / "notation").glob("*.ucdf"))
RULES = FIXTURES / "rules"
GOLDEN = FIXTURES / "golden"


def load_program(name_or_path):
    path = Path(name_or_path)
    if not path.suffix:
        path = FIXTURES / "programs" / f"{name_or_path}.fc"
    program = parse_source(path.read_text(encoding="utf-8"))
    return program, resolve_symbols(program)


def compile_source(source: str):
    program = parse_source(source)
    return program, resolve_symbols(program)


@pytest.fixture
def program_of():
    return load_program
