"""Rémy's grafting algorithm for uniform plane binary trees, and uniform
SK-combinators built on top of it.

Trees are grown in a flat link array (Knuth's formulation), so picking a
uniform node and grafting are both O(1).  Large results are best kept in
array form: :func:`remy_shape` returns preorder bits and
:func:`render_sk` turns a scaffold plus leaf flags into text without
building node objects.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .rng import Rng, as_rng
from .terms import BinaryTree, Combinator, combinator_from_scaffold, tree_from_preorder


def remy_shape(n: int, rng: Rng | int | None = None, ops: np.ndarray | None = None) -> np.ndarray:
    """Preorder bits (1 internal, 0 leaf) of a uniform tree with ``n``
    internal nodes.  ``ops``, if given, accumulates elementary steps."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = as_rng(rng)
    if ops is None:
        ops = np.zeros(1, dtype=np.int64)
    with np.errstate(over="ignore"):
        links = kernels.remy_links(n, rng.state, ops)
        return kernels.links_to_preorder(links, ops)


def remy_tree(n: int, rng: Rng | int | None = None) -> BinaryTree:
    return tree_from_preorder(remy_shape(n, rng))


def sk_arrays(n: int, rng: Rng | int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Scaffold bits and ``n + 1`` fair leaf flags (0 for S, 1 for K)."""
    rng = as_rng(rng)
    bits = remy_shape(n, rng)
    prims = np.empty(n + 1, dtype=np.int8)
    with np.errstate(over="ignore"):
        kernels.fill_bits(rng.state, prims)
    return bits, prims


def sk_combinator(n: int, rng: Rng | int | None = None) -> Combinator:
    """Uniform SK-combinator with exactly ``n`` applications."""
    return combinator_from_scaffold(*sk_arrays(n, rng))


def render_sk(bits: np.ndarray, prims: np.ndarray) -> str:
    return kernels.render_scaffold(bits, prims).tobytes().decode("ascii")
