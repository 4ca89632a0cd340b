"""Simple types for closed De Bruijn terms: principal type inference, an
independent checker, and a rejection sampler for typeable terms.

Inference unifies over rational trees with union-find and rejects cyclic
solutions in one pass at the end, which is equivalent to unification with
occurs check and stays near-linear on large terms.
"""
from __future__ import annotations

import string
import warnings
from dataclasses import dataclass
from typing import Union

from .boltzmann import DEFAULT_MAX_ATTEMPTS, DEFAULT_TOLERANCE, ClosedSampler
from .counting import DEFAULT_TRUNCATION
from .errors import AttemptsExhausted, OpenTermRejected, TermParseError
from .recursive import RecursiveSampler
from .rng import Rng, as_rng
from .terms import NATURAL, Abs, App, Index, SizeModel, Term, is_closed

PRACTICAL_SIZE = 60


@dataclass(frozen=True, slots=True)
class TypeVar:
    id: int


@dataclass(frozen=True, slots=True)
class Arrow:
    src: "SimpleType"
    dst: "SimpleType"


SimpleType = Union[TypeVar, Arrow]


class NotTypeable:
    """Result of inference for terms without a simple type."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "NotTypeable"


NOT_TYPEABLE = NotTypeable()


# ---------------------------------------------------------------------------
# Inference

class _Graph:
    """Type nodes: ``left[i] < 0`` marks a variable, otherwise an arrow
    ``left[i] -> right[i]``.  ``parent`` is the union-find forest."""

    def __init__(self):
        self.left: list[int] = []
        self.right: list[int] = []
        self.parent: list[int] = []

    def var(self) -> int:
        self.left.append(-1)
        self.right.append(-1)
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def arrow(self, a: int, b: int) -> int:
        self.left.append(a)
        self.right.append(b)
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        root = i
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def unify(self, a: int, b: int) -> None:
        todo = [(a, b)]
        left, right = self.left, self.right
        while todo:
            a, b = todo.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if left[a] < 0:
                self.parent[a] = b
            elif left[b] < 0:
                self.parent[b] = a
            else:
                self.parent[a] = b
                todo.append((left[a], left[b]))
                todo.append((right[a], right[b]))

    def acyclic(self) -> bool:
        """True when no class reaches itself; every constraint counts, not
        just those visible in the final type."""
        mark = [0] * len(self.parent)  # 0 new, 1 on the DFS path, 2 done
        for start in range(len(self.parent)):
            start = self.find(start)
            if mark[start]:
                continue
            stack = [(start, False)]
            while stack:
                node, leaving = stack.pop()
                if leaving:
                    mark[node] = 2
                    continue
                if mark[node] == 1:
                    return False
                if mark[node] == 2 or self.left[node] < 0:
                    mark[node] = 2
                    continue
                mark[node] = 1
                stack.append((node, True))
                stack.append((self.find(self.right[node]), False))
                stack.append((self.find(self.left[node]), False))
        return True

    def resolve(self, root: int) -> SimpleType | None:
        """Finite type of ``root`` with canonical variable names, or None if
        the part of the solution it reaches is cyclic."""
        names: dict[int, int] = {}
        # 0 unvisited, 1 on the current path, 2 finished
        mark: dict[int, int] = {}
        built: dict[int, SimpleType] = {}
        stack = [(self.find(root), False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                l, r = self.find(self.left[node]), self.find(self.right[node])
                built[node] = Arrow(built[l], built[r])
                mark[node] = 2
                continue
            state = mark.get(node, 0)
            if state == 2:
                continue
            if state == 1:
                return None
            if self.left[node] < 0:
                if node not in names:
                    names[node] = len(names)
                built[node] = TypeVar(names[node])
                mark[node] = 2
                continue
            mark[node] = 1
            stack.append((node, True))
            stack.append((self.find(self.right[node]), False))
            stack.append((self.find(self.left[node]), False))
        return built[self.find(root)]


def _constraints(t: Term, g: _Graph) -> int:
    """Build the type graph of ``t``; returns the node of its type."""
    env: list[int] = []
    # frames: (term, stage) where stage 0 = enter, 1 = exit
    stack: list = [(t, 0)]
    results: list[int] = []
    while stack:
        node, stage = stack.pop()
        if isinstance(node, Index):
            if node.n >= len(env):
                raise OpenTermRejected("term has a free index")
            results.append(env[-1 - node.n])
        elif isinstance(node, Abs):
            if stage == 0:
                env.append(g.var())
                stack.append((node, 1))
                stack.append((node.body, 0))
            else:
                body = results.pop()
                results.append(g.arrow(env.pop(), body))
        elif stage == 0:
            stack.append((node, 1))
            stack.append((node.right, 0))
            stack.append((node.left, 0))
        else:
            arg = results.pop()
            fun = results.pop()
            out = g.var()
            g.unify(fun, g.arrow(arg, out))
            results.append(out)
    return results[0]


def infer(t: Term) -> SimpleType | NotTypeable:
    """Principal simple type of a closed term, or NOT_TYPEABLE."""
    if not is_closed(t):
        raise OpenTermRejected("type inference needs a closed term")
    g = _Graph()
    root = _constraints(t, g)
    if not g.acyclic():
        return NOT_TYPEABLE
    ty = g.resolve(root)
    return NOT_TYPEABLE if ty is None else ty


def is_typeable(t: Term) -> bool:
    return not isinstance(infer(t), NotTypeable)


# ---------------------------------------------------------------------------
# Rendering

def var_name(i: int) -> str:
    letters = string.ascii_lowercase
    return letters[i] if i < 26 else f"{letters[i % 26]}{i // 26}"


def render_type(ty: SimpleType | NotTypeable) -> str:
    if isinstance(ty, NotTypeable):
        return "untypeable"
    parts: list[str] = []
    stack: list = [ty]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
        elif isinstance(node, TypeVar):
            parts.append(var_name(node.id))
        elif isinstance(node.src, Arrow):
            stack.extend((node.dst, " -> ", ")", node.src, "("))
        else:
            stack.extend((node.dst, " -> ", node.src))
    return "".join(parts)


def parse_type(text: str) -> SimpleType:
    """Inverse of :func:`render_type`; variable names map to ids in order
    of first appearance."""
    names: dict[str, int] = {}
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def atom():
        nonlocal pos
        skip()
        if pos < len(text) and text[pos] == "(":
            pos += 1
            inner = arrow()
            skip()
            if pos >= len(text) or text[pos] != ")":
                raise TermParseError("expected ')'", pos)
            pos += 1
            return inner
        start = pos
        while pos < len(text) and text[pos].isalnum():
            pos += 1
        if start == pos:
            raise TermParseError("expected a type variable", pos)
        name = text[start:pos]
        return TypeVar(names.setdefault(name, len(names)))

    def arrow():
        nonlocal pos
        # right-associative: collect operands, fold from the right
        operands = [atom()]
        while True:
            skip()
            if text.startswith("->", pos):
                pos += 2
                operands.append(atom())
            else:
                break
        ty = operands.pop()
        while operands:
            ty = Arrow(operands.pop(), ty)
        return ty

    ty = arrow()
    skip()
    if pos != len(text):
        raise TermParseError("trailing input", pos)
    return ty


# ---------------------------------------------------------------------------
# Checking
#
# Kept deliberately separate from inference: types are nested tuples,
# substitutions are dicts, and the variables of the claimed type are rigid.

def _to_tuple(ty: SimpleType):
    if isinstance(ty, TypeVar):
        return ("rigid", ty.id)
    return ("->", _to_tuple(ty.src), _to_tuple(ty.dst))


def _walk(ty, subst):
    while ty[0] == "meta" and ty in subst:
        ty = subst[ty]
    return ty


def _occurs(meta, ty, subst) -> bool:
    stack = [ty]
    while stack:
        cur = _walk(stack.pop(), subst)
        if cur == meta:
            return True
        if cur[0] == "->":
            stack.extend(cur[1:])
    return False


def _unify_rigid(a, b, subst) -> bool:
    todo = [(a, b)]
    while todo:
        a, b = todo.pop()
        a, b = _walk(a, subst), _walk(b, subst)
        if a == b:
            continue
        if a[0] == "meta":
            if _occurs(a, b, subst):
                return False
            subst[a] = b
        elif b[0] == "meta":
            if _occurs(b, a, subst):
                return False
            subst[b] = a
        elif a[0] == "->" and b[0] == "->":
            todo.append((a[1], b[1]))
            todo.append((a[2], b[2]))
        else:
            return False
    return True


def check(t: Term, ty: SimpleType) -> bool:
    """Does closed term ``t`` have type ``ty`` (variables of ``ty`` fixed)?"""
    if not is_closed(t):
        raise OpenTermRejected("type checking needs a closed term")
    subst: dict = {}
    fresh = iter(range(1 << 62))
    env: list = []
    # each frame carries the type the subterm must have
    stack: list = [(t, _to_tuple(ty))]
    while stack:
        item = stack.pop()
        if item is None:
            env.pop()
            continue
        node, want = item
        if isinstance(node, Index):
            if not _unify_rigid(env[-1 - node.n], want, subst):
                return False
        elif isinstance(node, Abs):
            dom, cod = ("meta", next(fresh)), ("meta", next(fresh))
            if not _unify_rigid(want, ("->", dom, cod), subst):
                return False
            env.append(dom)
            stack.append(None)
            stack.append((node.body, cod))
        else:
            arg = ("meta", next(fresh))
            # both children see the same environment; process the right one
            # first so a pending pop never separates them
            stack.append((node.right, arg))
            stack.append((node.left, ("->", arg, want)))
    return True


def is_instance(specific: SimpleType, general: SimpleType) -> bool:
    """Is ``specific`` a substitution instance of ``general``?"""
    binding: dict[int, SimpleType] = {}
    todo = [(general, specific)]
    while todo:
        g, s = todo.pop()
        if isinstance(g, TypeVar):
            if binding.setdefault(g.id, s) != s:
                return False
        elif isinstance(s, Arrow):
            todo.append((g.src, s.src))
            todo.append((g.dst, s.dst))
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# Sampling

@dataclass
class TypedStats:
    attempts: int = 0
    rejected: int = 0


def sample_typed(n: int, model: SizeModel = NATURAL, method: str = "recursive",
                 rng: Rng | int | None = None, max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                 eps: float = DEFAULT_TOLERANCE, N: int = DEFAULT_TRUNCATION,
                 stats: TypedStats | None = None, sampler=None) -> tuple[Term, SimpleType]:
    """Closed simply-typeable term with its principal type, by drawing
    closed terms until one is typeable.

    ``method="recursive"`` gives size exactly ``n`` (uniform among typeable
    terms of that size); ``"boltzmann"`` gives a size in the tolerance window.
    """
    if n > PRACTICAL_SIZE:
        warnings.warn(f"typeable terms of size {n} are extremely rare; expect long runs",
                      RuntimeWarning, stacklevel=2)
    rng = as_rng(rng)
    if stats is None:
        stats = TypedStats()
    if sampler is None:
        sampler = typed_base_sampler(n, model, method, eps, N)
    draw = (lambda: sampler.gen(0, n, rng)) if method == "recursive" else \
        (lambda: sampler.sample(rng, max_attempts))
    for _ in range(max_attempts):
        stats.attempts += 1
        t = draw()
        ty = infer(t)
        if not isinstance(ty, NotTypeable):
            return t, ty
        stats.rejected += 1
    raise AttemptsExhausted(max_attempts)


def typed_base_sampler(n: int, model: SizeModel = NATURAL, method: str = "recursive",
                       eps: float = DEFAULT_TOLERANCE, N: int = DEFAULT_TRUNCATION):
    if method == "recursive":
        return RecursiveSampler(model, max_size=n)
    if method == "boltzmann":
        return ClosedSampler(n, eps, N, model)
    raise ValueError(f"unknown method {method!r}; use 'recursive' or 'boltzmann'")


def typeable_fraction(n: int, model: SizeModel = NATURAL) -> tuple[int, int]:
    """(typeable, closed) counts at size ``n``, by enumeration."""
    from .recursive import enumerate_terms

    terms = enumerate_terms(0, n, model)
    return sum(is_typeable(t) for t in terms), len(terms)
