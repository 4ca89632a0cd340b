import numpy as np
import pytest

from helpers import ALPHA, uniform_pvalue
from lambdagen.counting import catalan
from lambdagen.remy import remy_shape, remy_tree, render_sk, sk_arrays, sk_combinator
from lambdagen.rng import Rng
from lambdagen.terms import (LEAF, combinator_size, internal_nodes, leaves, parse_combinator,
                             render_combinator, tree_preorder)


def all_shapes(n):
    if n == 0:
        return ["0"]
    return ["1" + l + r for k in range(n) for l in all_shapes(k) for r in all_shapes(n - 1 - k)]


def test_empty_tree():
    assert remy_tree(0, Rng(1)) == LEAF


@pytest.mark.parametrize("n", [2, 4])
def test_remy_uniform(n):
    support = all_shapes(n)
    assert len(support) == catalan(n)
    rng = Rng(77)
    draws = [tree_preorder(remy_tree(n, rng)) for _ in range(10_000 * len(support))]
    assert uniform_pvalue(draws, support) > ALPHA


@pytest.mark.parametrize("n", [1, 10, 1000])
def test_remy_counts(n):
    bits = remy_shape(n, Rng(n))
    assert bits.sum() == n and len(bits) == 2 * n + 1
    tree = remy_tree(n, Rng(n))
    assert internal_nodes(tree) == n and leaves(tree) == n + 1


def test_remy_linear_work():
    ratios = []
    for n in (10 ** 3, 10 ** 4, 10 ** 5):
        ops = np.zeros(1, dtype=np.int64)
        remy_shape(n, Rng(1), ops)
        ratios.append(ops[0] / n)
    assert max(ratios) <= 6


def test_sk_small_cases():
    rng = Rng(4)
    assert {render_combinator(sk_combinator(0, rng)) for _ in range(100)} == {"S", "K"}
    support = ["(S S)", "(S K)", "(K S)", "(K K)"]
    draws = [render_combinator(sk_combinator(1, rng)) for _ in range(4000)]
    assert uniform_pvalue(draws, support) > ALPHA


def test_sk_uniform_size_two():
    support = [f"({a} ({b} {c}))" for a in "SK" for b in "SK" for c in "SK"] + \
              [f"(({a} {b}) {c})" for a in "SK" for b in "SK" for c in "SK"]
    rng = Rng(8)
    draws = [render_combinator(sk_combinator(2, rng)) for _ in range(16_000)]
    assert uniform_pvalue(draws, support) > ALPHA


def test_sk_array_rendering_matches_objects():
    for n in (0, 1, 5, 40):
        bits, prims = sk_arrays(n, Rng(n))
        text = render_sk(bits, prims)
        assert text == render_combinator(sk_combinator(n, Rng(n)))
        assert combinator_size(parse_combinator(text)) == n


def test_sk_leaf_flags_fair():
    _, prims = sk_arrays(200_000, Rng(12))
    assert abs(prims.mean() - 0.5) < 4 * 0.5 / np.sqrt(len(prims))
