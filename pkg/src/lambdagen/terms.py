"""De Bruijn terms, size models, binary trees and SK-combinators.

Every traversal here is iterative: sampled terms reach depths far beyond
Python's recursion limit.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .errors import TermParseError

# Preorder token encoding shared with the kernels.
APP = -1
ABS = -2


@dataclass(frozen=True, slots=True)
class Index:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("De Bruijn index must be a natural number")


@dataclass(frozen=True, slots=True)
class App:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Abs:
    body: "Term"


Term = Union[Index, App, Abs]


@dataclass(frozen=True)
class SizeModel:
    """Constructor weights defining the size of a term.

    With ``var_weight`` unset indices are unary, ``Index k`` weighing
    ``zero_weight + k * succ_weight``; otherwise every index weighs
    ``var_weight``.
    """

    abs_weight: int = 1
    app_weight: int = 1
    zero_weight: int = 1
    succ_weight: int = 1
    var_weight: int | None = None

    def __post_init__(self):
        if self.abs_weight < 1 or self.app_weight < 1:
            raise ValueError("abstraction and application weights must be >= 1")
        if self.var_weight is None:
            if self.zero_weight < 0 or self.succ_weight < 1:
                raise ValueError("unary indices need zero_weight >= 0 and succ_weight >= 1")
        elif self.var_weight < 1:
            raise ValueError("constant variable weight must be >= 1")

    @classmethod
    def natural(cls) -> "SizeModel":
        return cls()

    @classmethod
    def constant(cls, var_weight: int = 1, abs_weight: int = 1, app_weight: int = 1) -> "SizeModel":
        return cls(abs_weight=abs_weight, app_weight=app_weight, var_weight=var_weight)

    @classmethod
    def from_name(cls, name: str) -> "SizeModel":
        """Parse ``natural``, ``constant``, ``unary:a,b,zero,succ`` or ``constant:a,b,var``."""
        if name == "natural":
            return cls.natural()
        if name == "constant":
            return cls.constant()
        kind, _, args = name.partition(":")
        try:
            nums = [int(v) for v in args.split(",")] if args else []
        except ValueError:
            raise ValueError(f"bad size model weights in {name!r}") from None
        if kind == "unary" and len(nums) == 4:
            return cls(abs_weight=nums[0], app_weight=nums[1], zero_weight=nums[2], succ_weight=nums[3])
        if kind == "constant" and len(nums) == 3:
            return cls.constant(var_weight=nums[2], abs_weight=nums[0], app_weight=nums[1])
        raise ValueError(f"unknown size model {name!r}")

    @property
    def unary(self) -> bool:
        return self.var_weight is None

    def index_size(self, k: int) -> int:
        if self.var_weight is not None:
            return self.var_weight
        return self.zero_weight + k * self.succ_weight

    def to_dict(self) -> dict:
        if self.unary:
            return {"abs": self.abs_weight, "app": self.app_weight,
                    "zero": self.zero_weight, "succ": self.succ_weight}
        return {"abs": self.abs_weight, "app": self.app_weight, "var": self.var_weight}


NATURAL = SizeModel.natural()


def size(t: Term, model: SizeModel = NATURAL) -> int:
    total = 0
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Index):
            total += model.index_size(node.n)
        elif isinstance(node, App):
            total += model.app_weight
            stack.append(node.right)
            stack.append(node.left)
        else:
            total += model.abs_weight
            stack.append(node.body)
    return total


def openness(t: Term) -> int:
    """Smallest m such that ``t`` is m-open (0 for closed terms)."""
    need = 0
    stack = [(t, 0)]
    while stack:
        node, depth = stack.pop()
        if isinstance(node, Index):
            need = max(need, node.n - depth + 1)
        elif isinstance(node, App):
            stack.append((node.right, depth))
            stack.append((node.left, depth))
        else:
            stack.append((node.body, depth + 1))
    return need


def is_m_open(t: Term, m: int) -> bool:
    return openness(t) <= m


def is_closed(t: Term) -> bool:
    return openness(t) == 0


def iter_indices(t: Term) -> Iterator[int]:
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Index):
            yield node.n
        elif isinstance(node, App):
            stack.append(node.right)
            stack.append(node.left)
        else:
            stack.append(node.body)


# ---------------------------------------------------------------------------
# Token arrays

def encode(t: Term) -> np.ndarray:
    out = []
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Index):
            out.append(node.n)
        elif isinstance(node, App):
            out.append(APP)
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(ABS)
            stack.append(node.body)
    return np.asarray(out, dtype=np.int64)


def decode(tokens) -> Term:
    """Rebuild a term from its preorder token array."""
    toks = tokens.tolist() if isinstance(tokens, np.ndarray) else list(tokens)
    # Walk backwards: every completed subterm is pushed onto ``done``.
    done: list = []
    for tok in reversed(toks):
        if tok >= 0:
            done.append(Index(tok))
        elif tok == APP:
            left = done.pop()
            right = done.pop()
            done.append(App(left, right))
        elif tok == ABS:
            done.append(Abs(done.pop()))
        else:
            raise ValueError(f"bad token {tok}")
    if len(done) != 1:
        raise ValueError("token array does not encode a single term")
    return done[0]


# ---------------------------------------------------------------------------
# Rendering

FORMATS = ("debruijn", "sexp", "json")


def render(t: Term, fmt: str = "debruijn") -> str:
    if fmt == "debruijn":
        return _render_debruijn(t)
    if fmt == "sexp":
        return _render_sexp(t)
    if fmt == "json":
        return _render_json(t)
    raise ValueError(f"unknown format {fmt!r}")


def _render_debruijn(t: Term) -> str:
    parts = []
    stack: list = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
        elif isinstance(node, Index):
            parts.append(str(node.n))
        elif isinstance(node, App):
            parts.append("(")
            stack.extend((")", node.right, " ", node.left))
        else:
            parts.append("\\ ")
            stack.append(node.body)
    return "".join(parts)


def _render_sexp(t: Term) -> str:
    parts = []
    stack: list = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
        elif isinstance(node, Index):
            parts.append(str(node.n))
        elif isinstance(node, App):
            parts.append("(app ")
            stack.extend((")", node.right, " ", node.left))
        else:
            parts.append("(lam ")
            stack.extend((")", node.body))
    return "".join(parts)


def _render_json(t: Term) -> str:
    parts = []
    stack: list = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
        elif isinstance(node, Index):
            parts.append('{"idx": %d}' % node.n)
        elif isinstance(node, App):
            parts.append('{"app": [')
            stack.extend(("]}", node.right, ", ", node.left))
        else:
            parts.append('{"abs": ')
            stack.extend(("}", node.body))
    return "".join(parts)


# ---------------------------------------------------------------------------
# Parsing

def parse(text: str, fmt: str = "debruijn") -> Term:
    if fmt == "debruijn":
        return _parse_debruijn(text)
    if fmt == "sexp":
        return _parse_sexp(text)
    if fmt == "json":
        return _parse_json(text)
    raise ValueError(f"unknown format {fmt!r}")


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _read_nat(text: str, pos: int) -> tuple[int, int]:
    end = pos
    while end < len(text) and text[end].isdigit():
        end += 1
    return int(text[pos:end]), end


def _parse_debruijn(text: str) -> Term:
    # Frames: "abs" awaits a body; a list [left] awaits the application's sides.
    stack: list = []
    pos = 0
    while True:
        pos = _skip_ws(text, pos)
        if pos >= len(text):
            raise TermParseError("unexpected end of input", pos)
        c = text[pos]
        if c == "\\":
            stack.append("abs")
            pos += 1
            continue
        if c == "(":
            stack.append([None])
            pos += 1
            continue
        if not c.isdigit():
            raise TermParseError(f"unexpected character {c!r}", pos)
        k, pos = _read_nat(text, pos)
        term: Term = Index(k)
        while True:
            if not stack:
                pos = _skip_ws(text, pos)
                if pos != len(text):
                    raise TermParseError("trailing input", pos)
                return term
            top = stack[-1]
            if top == "abs":
                stack.pop()
                term = Abs(term)
                continue
            if top[0] is None:
                top[0] = term
                break
            stack.pop()
            pos = _skip_ws(text, pos)
            if pos >= len(text) or text[pos] != ")":
                raise TermParseError("expected ')'", pos)
            pos += 1
            term = App(top[0], term)


_SEXP_TOKEN = re.compile(r"\s*(?:(\()|(\))|([a-z]+)|(\d+)|(\S))")


def _parse_sexp(text: str) -> Term:
    stack: list = []  # frames: ["lam"] or ["app", left?]
    pos = 0

    def next_token():
        nonlocal pos
        m = _SEXP_TOKEN.match(text, pos)
        if m is None:
            raise TermParseError("unexpected end of input", len(text))
        start = m.start(m.lastindex)
        pos = m.end()
        return m.lastindex, m.group(m.lastindex), start

    while True:
        kind, val, at = next_token()
        if kind == 1:
            kind, val, at = next_token()
            if kind != 3 or val not in ("lam", "app"):
                raise TermParseError("expected 'lam' or 'app'", at)
            stack.append([val])
            continue
        if kind != 4:
            raise TermParseError(f"unexpected token {val!r}", at)
        term: Term = Index(int(val))
        while True:
            if not stack:
                if text[pos:].strip():
                    raise TermParseError("trailing input", _skip_ws(text, pos))
                return term
            top = stack[-1]
            if top[0] == "app" and len(top) == 1:
                top.append(term)
                break
            kind, val, at = next_token()
            if kind != 2:
                raise TermParseError("expected ')'", at)
            stack.pop()
            term = Abs(term) if top[0] == "lam" else App(top[1], term)


def _parse_json(text: str) -> Term:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TermParseError(exc.msg, exc.pos) from None
    except RecursionError:
        raise TermParseError("JSON nesting too deep", 0) from None
    # Post-order rebuild without recursion.
    out: list = []
    stack: list = [(data, False)]
    while stack:
        node, ready = stack.pop()
        if not isinstance(node, dict) or len(node) != 1:
            raise TermParseError("expected a single-key object", 0)
        (key, val), = node.items()
        if key == "idx":
            if not isinstance(val, int) or isinstance(val, bool) or val < 0:
                raise TermParseError("index must be a natural number", 0)
            out.append(Index(val))
        elif key == "abs":
            if ready:
                out.append(Abs(out.pop()))
            else:
                stack.append((node, True))
                stack.append((val, False))
        elif key == "app":
            if not isinstance(val, list) or len(val) != 2:
                raise TermParseError("application needs two subterms", 0)
            if ready:
                right = out.pop()
                out.append(App(out.pop(), right))
            else:
                stack.append((node, True))
                stack.append((val[1], False))
                stack.append((val[0], False))
        else:
            raise TermParseError(f"unknown constructor {key!r}", 0)
    return out[0]


# ---------------------------------------------------------------------------
# Binary trees and combinators

@dataclass(frozen=True, slots=True)
class Leaf:
    pass


@dataclass(frozen=True, slots=True)
class Node:
    left: "BinaryTree"
    right: "BinaryTree"


BinaryTree = Union[Leaf, Node]

LEAF = Leaf()


def tree_from_preorder(bits) -> BinaryTree:
    """Build a tree from preorder bits (1 internal node, 0 leaf)."""
    done: list = []
    for bit in reversed(bits.tolist() if isinstance(bits, np.ndarray) else list(bits)):
        if bit:
            left = done.pop()
            done.append(Node(left, done.pop()))
        else:
            done.append(LEAF)
    if len(done) != 1:
        raise ValueError("bits do not encode a single tree")
    return done[0]


def tree_preorder(tree: BinaryTree) -> str:
    """Canonical shape code: preorder bits as a string of 0/1."""
    out = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Node):
            out.append("1")
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append("0")
    return "".join(out)


def internal_nodes(tree: BinaryTree) -> int:
    return tree_preorder(tree).count("1")


def leaves(tree: BinaryTree) -> int:
    return tree_preorder(tree).count("0")


@dataclass(frozen=True, slots=True)
class Prim:
    name: str

    def __post_init__(self):
        if self.name not in ("S", "K"):
            raise ValueError("primitive combinator must be S or K")


@dataclass(frozen=True, slots=True)
class CApp:
    left: "Combinator"
    right: "Combinator"


Combinator = Union[Prim, CApp]

S = Prim("S")
K = Prim("K")


def combinator_size(c: Combinator) -> int:
    count = 0
    stack = [c]
    while stack:
        node = stack.pop()
        if isinstance(node, CApp):
            count += 1
            stack.append(node.right)
            stack.append(node.left)
    return count


def render_combinator(c: Combinator) -> str:
    parts = []
    stack: list = [c]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
        elif isinstance(node, Prim):
            parts.append(node.name)
        else:
            parts.append("(")
            stack.extend((")", node.right, " ", node.left))
    return "".join(parts)


def parse_combinator(text: str) -> Combinator:
    stack: list = []
    pos = 0
    while True:
        pos = _skip_ws(text, pos)
        if pos >= len(text):
            raise TermParseError("unexpected end of input", pos)
        c = text[pos]
        if c == "(":
            stack.append([None])
            pos += 1
            continue
        if c not in "SK":
            raise TermParseError(f"unexpected character {c!r}", pos)
        pos += 1
        term: Combinator = S if c == "S" else K
        while True:
            if not stack:
                pos = _skip_ws(text, pos)
                if pos != len(text):
                    raise TermParseError("trailing input", pos)
                return term
            top = stack[-1]
            if top[0] is None:
                top[0] = term
                break
            stack.pop()
            pos = _skip_ws(text, pos)
            if pos >= len(text) or text[pos] != ")":
                raise TermParseError("expected ')'", pos)
            pos += 1
            term = CApp(top[0], term)


def combinator_from_scaffold(bits, prims) -> Combinator:
    """Fill the leaves of a preorder scaffold, in order, with ``prims``.

    ``prims`` holds one flag per leaf: 0 for S, 1 for K.
    """
    bits = bits.tolist() if isinstance(bits, np.ndarray) else list(bits)
    prims = prims.tolist() if isinstance(prims, np.ndarray) else list(prims)
    if bits.count(0) != len(prims):
        raise ValueError("need exactly one primitive per leaf")
    # Preorder leaf order equals in-order leaf order for binary trees.
    leaf_vals = iter(reversed(prims))
    done: list = []
    for bit in reversed(bits):
        if bit:
            left = done.pop()
            done.append(CApp(left, done.pop()))
        else:
            done.append(K if next(leaf_vals) else S)
    return done[0]
