import itertools
import warnings

import pytest

from helpers import ALPHA, uniform_pvalue
from lambdagen.errors import OpenTermRejected
from lambdagen.recursive import enumerate_terms
from lambdagen.rng import Rng
from lambdagen.simple_types import (
    NOT_TYPEABLE, Arrow, NotTypeable, TypeVar, check, infer, is_instance, parse_type, render_type,
    sample_typed, typeable_fraction,
)
from lambdagen.terms import Abs, Index, is_closed, parse, render, size


@pytest.mark.parametrize("text,expected", [
    ("\\ 0", "a -> a"),
    ("\\ \\ 1", "a -> b -> a"),
    ("\\ \\ 0", "a -> b -> b"),
    ("\\ \\ (0 1)", "a -> (a -> b) -> b"),
    ("\\ \\ \\ ((2 0) (1 0))", "(a -> b -> c) -> (a -> b) -> a -> c"),
    ("\\ \\ (1 (1 0))", "(a -> a) -> a -> a"),
])
def test_principal_types(text, expected):
    assert render_type(infer(parse(text))) == expected


@pytest.mark.parametrize("text", ["\\ (0 0)", "\\ \\ (0 (1 1))", "(\\ (0 0) \\ (0 0))"])
def test_untypeable(text):
    assert infer(parse(text)) is NOT_TYPEABLE
    assert render_type(NOT_TYPEABLE) == "untypeable"


def test_cycle_hidden_in_discarded_argument():
    # the self-application never reaches the result type, yet it fails
    t = parse("\\ (\\ 1 \\ (0 0))")
    assert infer(t) is NOT_TYPEABLE


def test_open_term_rejected():
    with pytest.raises(OpenTermRejected):
        infer(Index(0))
    with pytest.raises(OpenTermRejected):
        check(Abs(Index(1)), parse_type("a -> a"))


def test_type_syntax_roundtrip():
    for text in ["a", "a -> b -> a", "(a -> b) -> a", "((a -> b) -> c) -> (a -> b) -> c"]:
        assert render_type(parse_type(text)) == text
    assert parse_type("a -> b -> c") == Arrow(TypeVar(0), Arrow(TypeVar(1), TypeVar(2)))


def test_deep_term_inference():
    t = parse("\\ " * 50_000 + "0")
    ty = infer(t)
    assert isinstance(ty, Arrow)


def small_types(depth):
    """All types over variables a, b up to the given arrow depth."""
    level = [TypeVar(0), TypeVar(1)]
    seen = list(level)
    for _ in range(depth):
        level = [Arrow(s, d) for s in seen for d in seen]
        seen = list(dict.fromkeys(seen + level))
    return seen


def test_soundness_and_principality():
    candidates = small_types(2)
    for n in range(2, 9):
        for t in enumerate_terms(0, n):
            ty = infer(t)
            if isinstance(ty, NotTypeable):
                assert not any(check(t, c) for c in candidates)
                continue
            assert check(t, ty)
            for c in candidates:
                if check(t, c):
                    assert is_instance(c, ty)


def test_checker_rejects_wrong_types():
    assert not check(parse("\\ 0"), parse_type("a -> b"))
    assert check(parse("\\ 0"), parse_type("(a -> b) -> a -> b"))
    assert not check(parse("\\ \\ 1"), parse_type("a -> b -> b"))


def test_typeable_counts():
    # independently brute-forced counts of typeable closed terms
    expected = [(1, 1), (1, 1), (2, 3), (5, 6), (13, 17), (27, 41), (74, 116), (198, 313)]
    assert [typeable_fraction(n) for n in range(2, 10)] == expected


def test_sample_typed_uniform_at_six():
    support = [render(t) for t in enumerate_terms(0, 6) if infer(t)]
    rng = Rng(6)
    draws = []
    for _ in range(100 * len(support)):
        t, ty = sample_typed(6, rng=rng)
        assert check(t, ty)
        draws.append(render(t))
    assert uniform_pvalue(draws, support) > ALPHA


def test_sample_typed_boltzmann():
    rng = Rng(2)
    t, ty = sample_typed(30, method="boltzmann", rng=rng, eps=0.2)
    assert is_closed(t) and 24 <= size(t) <= 36 and check(t, ty)


def test_sample_typed_warns_on_large_sizes():
    with pytest.warns(RuntimeWarning):
        sample_typed(61, rng=Rng(1), max_attempts=100_000)


def test_unknown_method():
    with pytest.raises(ValueError):
        sample_typed(5, method="magic")
