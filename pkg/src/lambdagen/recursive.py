"""Exact-size uniform generation by the recursive method, and the
exhaustive enumerator used to check it."""
from __future__ import annotations

from functools import lru_cache

from .counting import CountTable, build_count_table, inert_truncation
from .errors import EmptySizeClass, SizeGuardExceeded, TruncationExceeded
from .rng import Rng, as_rng
from .terms import ABS, APP, NATURAL, Abs, App, Index, SizeModel, Term, decode

ENUMERATION_GUARD = 20


class RecursiveSampler:
    """Uniform m-open terms of an exact size, driven by a count table.

    With the default ``N`` the table is exact for every openness level up to
    ``max_openness`` and every size up to ``max_size``.  A smaller explicit
    ``N`` samples the truncated class instead.
    """

    def __init__(self, model: SizeModel = NATURAL, max_size: int = 20, N: int | None = None,
                 max_openness: int = 0, table: CountTable | None = None):
        if table is None:
            if N is None:
                N = inert_truncation(model, max_openness, max_size)
            table = build_count_table(model, N, max_size)
        self.table = table
        self.model = table.model
        self.N = table.N
        self.max_size = table.max_size

    def count(self, m: int, n: int) -> int:
        return self.table.count(m, n)

    def gen_tokens(self, m: int, n: int, rng: Rng | int | None = None) -> list[int]:
        if m > self.N:
            raise TruncationExceeded(f"openness {m} exceeds truncation level {self.N}")
        if n < 0 or n > self.max_size:
            raise EmptySizeClass(f"size {n} outside the table (max {self.max_size})")
        if self.table.count(m, n) == 0:
            raise EmptySizeClass(f"no {m}-open term of size {n}")
        rng = as_rng(rng)
        model, table = self.model, self.table
        a, b = model.abs_weight, model.app_weight
        top = self.N + 1
        out = []
        todo = [(m, n)]
        while todo:
            lv, k = todo.pop()
            row = table.level(lv)
            r = rng.randbelow(row[k])
            # indices of size k available at this level
            if model.unary:
                j = k - model.zero_weight
                idx = j // model.succ_weight if j >= 0 and j % model.succ_weight == 0 else -1
                n_idx = 1 if idx >= 0 and (lv == top or idx < lv) else 0
            else:
                n_idx = lv if k == model.var_weight and lv < top else 0
                idx = r
            if r < n_idx:
                out.append(idx)
                continue
            r -= n_idx
            if k >= a:
                up = min(lv + 1, top)
                c = table.level(up)[k - a]
                if r < c:
                    out.append(ABS)
                    todo.append((up, k - a))
                    continue
                r -= c
            rest = k - b
            for i in range(rest + 1):
                c = row[i] * row[rest - i]
                if r < c:
                    out.append(APP)
                    # right child is popped after the left one
                    todo.append((lv, rest - i))
                    todo.append((lv, i))
                    break
                r -= c
            else:
                raise AssertionError("count table is inconsistent")
        return out

    def gen(self, m: int, n: int, rng: Rng | int | None = None) -> Term:
        """Uniformly random ``m``-open term of size exactly ``n``."""
        return decode(self.gen_tokens(m, n, rng))


def gen(m: int, n: int, rng: Rng | int | None = None, model: SizeModel = NATURAL,
        N: int | None = None) -> Term:
    return RecursiveSampler(model, max_size=max(n, 0), N=N, max_openness=m).gen(m, n, rng)


def enumerate_terms(m: int, n: int, model: SizeModel = NATURAL,
                    guard: int = ENUMERATION_GUARD) -> list[Term]:
    """Every m-open term of size exactly ``n``, in a fixed order: indices,
    then abstractions, then applications by increasing left size."""
    if n > guard:
        raise SizeGuardExceeded(f"refusing to enumerate size {n} > {guard}")
    if m < 0 or n < 0:
        return []
    return list(_enumerate(model, m, n))


@lru_cache(maxsize=None)
def _enumerate(model: SizeModel, m: int, n: int) -> tuple:
    found = []
    if model.unary:
        j = n - model.zero_weight
        if j >= 0 and j % model.succ_weight == 0 and j // model.succ_weight < m:
            found.append(Index(j // model.succ_weight))
    elif n == model.var_weight:
        found.extend(Index(k) for k in range(m))
    if n >= model.abs_weight:
        found.extend(Abs(t) for t in _enumerate(model, m + 1, n - model.abs_weight))
    rest = n - model.app_weight
    for i in range(rest + 1):
        lefts = _enumerate(model, m, i)
        if not lefts:
            continue
        rights = _enumerate(model, m, rest - i)
        found.extend(App(l, r) for l in lefts for r in rights)
    return tuple(found)


# the operation's public name; shadows the builtin only inside this namespace
enumerate = enumerate_terms
