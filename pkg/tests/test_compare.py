from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PROGRAMS, compile_source, load_program
from ucdf.compare import check_call_styles, check_coarsening, keyed_view, strip_copies, unalias
from ucdf.core import EdgeKind, validate
from ucdf.extract import ExtractOptions, extract
from ucdf.generate import random_program
from ucdf.text import serialize


def view(path, **kw):
    p, t = load_program(path)
    return extract(p, t, ExtractOptions(**kw)).diagram


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_block_level_is_contraction_of_operator_level(path):
    assert check_coarsening(view(path), view(path, granularity="block")) == []


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_granularity_levels_are_nested(path):
    def keys(d):
        return {n.attrs.get("key", n.ident) for n in d.nodes.values()}

    op = keys(view(path))
    block = keys(view(path, granularity="block"))
    func = keys(view(path, granularity="function"))
    assert func <= block <= op


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_full_style_minus_copies_is_simplified(path):
    assert check_call_styles(view(path), view(path, call_style="full")) == []


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_unalias_restores_plain_extraction(path):
    plain = view(path)
    aliased = view(path, alias_threshold=2)
    assert keyed_view(unalias(aliased)) == keyed_view(plain)


def test_strip_copies_removes_copy_steps():
    full = view("function_call", call_style="full")
    stripped = strip_copies(full)
    assert not any(n.attrs.get("key", "").startswith("copy:") for n in stripped.nodes.values())
    assert validate(stripped) == []


def test_coarsening_detects_a_dropped_call():
    fine = view("nested_calls")
    coarse = view("nested_calls", granularity="block")
    for t in coarse.timelines.values():
        if t.dispatches:
            t.dispatches.pop()
            break
    assert check_coarsening(fine, coarse)


def test_call_style_check_detects_a_missing_edge():
    simplified = view("function_call")
    full = view("function_call", call_style="full")
    eid = next(e.id for e in simplified.edges.values() if e.kind is EdgeKind.DATA_UPDATE)
    del simplified.edges[eid]
    assert check_call_styles(simplified, full)


def test_unalias_removes_alias_edges():
    d = unalias(view("alias_sites", alias_threshold=2))
    assert not any(e.kind is EdgeKind.ALIAS for e in d.edges.values())
    assert not any("alias_of" in n.attrs for n in d.nodes.values())
    assert validate(d) == []


def test_comparison_is_insensitive_to_serialization():
    d = view("goto")
    assert keyed_view(d) == keyed_view(d.copy())
    assert serialize(d) == serialize(d.copy())


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.booleans())
def test_random_programs_coarsen_coherently(seed, branchy):
    p, t = compile_source(random_program(random.Random(seed), branchy))
    fine = extract(p, t).diagram
    coarse = extract(p, t, ExtractOptions(granularity="block")).diagram
    assert check_coarsening(fine, coarse) == []
    full = extract(p, t, ExtractOptions(call_style="full")).diagram
    assert check_call_styles(fine, full) == []
