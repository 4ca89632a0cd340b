"""Exact counting of De Bruijn terms and evaluation of their generating functions.

Two views of the same truncated openness system are provided:

* :func:`build_count_table` expands it into exact integer coefficients, one
  row per openness level ``m = 0..N`` plus the plain-term row that level ``N``
  falls back to.
* :class:`TruncatedSystem` evaluates it as real functions at a point ``x``,
  together with first derivatives in ``x`` and in optional per-index marking
  weights.  It backs the Boltzmann samplers and the tuner.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .errors import SingularityExceeded
from .terms import NATURAL, SizeModel

DEFAULT_TRUNCATION = 20
DEFAULT_DPS = 50


def working_dps() -> int:
    """Decimal digits used for generating-function arithmetic."""
    raw = os.environ.get("LAMBDAGEN_PRECISION")
    if raw:
        dps = int(raw)
        if dps < 16:
            raise ValueError("LAMBDAGEN_PRECISION must be at least 16 digits")
        return dps
    return DEFAULT_DPS


@dataclass
class OpCount:
    """Tally of big-integer multiplications."""

    mul: int = 0


# ---------------------------------------------------------------------------
# Integer tables

def index_count(model: SizeModel, m: int | None, n: int) -> int:
    """Number of indices of size ``n`` available at openness level ``m``.

    ``m=None`` stands for the plain class, where every index is available
    (only meaningful for unary models).
    """
    if model.unary:
        if n < model.zero_weight or (n - model.zero_weight) % model.succ_weight:
            return 0
        k = (n - model.zero_weight) // model.succ_weight
        return 1 if m is None or k < m else 0
    if n != model.var_weight:
        return 0
    if m is None:
        raise ValueError("plain terms are infinite per size under constant-weight indices")
    return m


@dataclass(frozen=True)
class CountTable:
    """Coefficients of the truncated openness system.

    ``counts[m][n]`` counts terms of size ``n`` at level ``m``.  Level ``N``
    falls back to plain terms under its abstractions, so rows are exact
    m-open counts wherever that fallback cannot yet produce an unbound index.
    For constant-weight index models the plain class is infinite and the
    fallback is empty instead (``plain`` is ``None``).
    """

    model: SizeModel
    N: int
    max_size: int
    counts: tuple
    plain: tuple | None
    ops: int = field(default=0, compare=False)

    def level(self, m: int) -> tuple:
        """Row for level ``m``; ``m = N + 1`` is the plain row."""
        if m <= self.N:
            return self.counts[m]
        if self.plain is None:
            return (0,) * (self.max_size + 1)
        return self.plain

    def count(self, m: int, n: int) -> int:
        return self.level(m)[n]

    def to_json(self) -> str:
        return json.dumps({
            "model": self.model.to_dict(),
            "N": self.N,
            "max_size": self.max_size,
            "counts": [[str(c) for c in row] for row in self.counts],
            "plain": None if self.plain is None else [str(c) for c in self.plain],
        })

    @classmethod
    def from_json(cls, text: str) -> "CountTable":
        data = json.loads(text)
        w = data["model"]
        if "var" in w:
            model = SizeModel.constant(w["var"], w["abs"], w["app"])
        else:
            model = SizeModel(w["abs"], w["app"], w["zero"], w["succ"])
        plain = data.get("plain")
        return cls(
            model=model, N=data["N"], max_size=data["max_size"],
            counts=tuple(tuple(int(c) for c in row) for row in data["counts"]),
            plain=None if plain is None else tuple(int(c) for c in plain),
        )


def build_count_table(model: SizeModel = NATURAL, N: int = DEFAULT_TRUNCATION,
                      max_size: int = 20) -> CountTable:
    if N < 0 or max_size < 0:
        raise ValueError("N and max_size must be non-negative")
    a, b = model.abs_weight, model.app_weight
    top = N + 1  # plain row, or the empty fallback
    has_plain = model.unary
    rows = [[0] * (max_size + 1) for _ in range(top + 1)]
    ops = 0
    for n in range(max_size + 1):
        for m in range(top, -1, -1):
            if m == top and not has_plain:
                continue
            row = rows[m]
            total = index_count(model, None if m == top else m, n)
            if n >= a:
                total += rows[min(m + 1, top)][n - a]
            rest = n - b
            if rest >= 0:
                acc = 0
                for i in range(rest + 1):
                    acc += row[i] * row[rest - i]
                ops += rest + 1
                total += acc
            row[n] = total
    return CountTable(
        model=model, N=N, max_size=max_size,
        counts=tuple(tuple(r) for r in rows[:top]),
        plain=tuple(rows[top]) if has_plain else None,
        ops=ops,
    )


def inert_truncation(model: SizeModel, m: int, max_size: int) -> int:
    """Smallest N for which level ``m`` of the table equals exact m-open counts
    for every size up to ``max_size``."""
    N = m
    while True:
        if model.unary:
            # cheapest escape: N - m abstractions, then Index N at level N
            cheapest = (N - m) * model.abs_weight + model.index_size(N)
        else:
            # cheapest escape: reach the empty fallback below level N
            cheapest = (N + 1 - m) * model.abs_weight + model.var_weight
        if cheapest > max_size:
            return N
        N += 1


# ---------------------------------------------------------------------------
# Catalan numbers

def catalan(n: int, counter: OpCount | None = None) -> int:
    """n-th Catalan number through ``(k+2) c_{k+1} = 2(2k+1) c_k``."""
    c = 1
    for k in range(n):
        c = c * (2 * (2 * k + 1)) // (k + 2)
        if counter is not None:
            counter.mul += 1
    return c


def catalan_convolution(n: int, counter: OpCount | None = None) -> int:
    """Quadratic reference: ``c_{k+1} = sum c_i c_{k-i}``."""
    cs = [1]
    for k in range(n):
        cs.append(sum(cs[i] * cs[k - i] for i in range(k + 1)))
        if counter is not None:
            counter.mul += k + 1
    return cs[n]


def catalan_series(n: int) -> list[int]:
    """Coefficients c_0..c_n of C(z) = 1 + z C(z)^2, by fixed-point iteration
    on truncated power series."""
    coeffs = [0] * (n + 1)
    coeffs[0] = 1
    for _ in range(n):
        sq = [0] * (n + 1)
        for i, ci in enumerate(coeffs):
            if ci:
                for j in range(n - i + 1):
                    sq[i + j] += ci * coeffs[j]
        coeffs = [1] + sq[:n]
    return coeffs


def formal_derivative(coeffs: Sequence[int]) -> list[int]:
    return [k * coeffs[k] for k in range(1, len(coeffs))]


def pointing_check(n: int) -> bool:
    """Check n * c_n == [z^n] z C'(z) with C' taken formally."""
    series = catalan_series(n)
    pointed = [0] + formal_derivative(series)  # multiply by z
    return pointed[n] == n * catalan(n)


# ---------------------------------------------------------------------------
# Real evaluation

@dataclass(frozen=True)
class GFValues:
    """Values of the truncated system at ``x``.

    ``values[m]`` is the level-m series, ``plain`` the plain-term series
    (``None`` for constant-weight index models).  ``dvalues`` and ``dplain``
    hold derivatives with respect to ``(x, u_0, ..., u_k)``.
    """

    x: mpmath.mpf
    values: tuple
    plain: mpmath.mpf | None
    precision: float
    dvalues: tuple = ()
    dplain: tuple = ()

    def as_floats(self) -> list[float]:
        return [float(v) for v in self.values]


class TruncatedSystem:
    """The openness-level system cut off at level ``N``.

    ``marks`` is the number of leading indices carrying their own weight
    ``u_0..u_{marks-1}`` (all weights default to 1).
    """

    def __init__(self, model: SizeModel = NATURAL, N: int = DEFAULT_TRUNCATION,
                 marks: int = 0, dps: int | None = None):
        if N < 0:
            raise ValueError("N must be non-negative")
        self.model = model
        self.N = N
        self.marks = marks
        self.dps = dps or working_dps()

    # The index series at level m, its x-derivative and u-gradient.
    def _index_terms(self, x, u, m):
        model = self.model
        k = self.marks
        val = mpmath.mpf(0)
        dx = mpmath.mpf(0)
        du = [mpmath.mpf(0)] * k
        if model.unary:
            z, s = model.zero_weight, model.succ_weight
            head = k if m is None else min(k, m)
            for i in range(head):
                e = z + i * s
                p = x ** e
                val += u[i] * p
                dx += u[i] * e * x ** (e - 1) if e else 0
                du[i] = p
            q = x ** s
            dq = s * x ** (s - 1)
            e0 = z + k * s
            t0 = x ** e0
            dt0 = e0 * x ** (e0 - 1) if e0 else mpmath.mpf(0)
            if m is None:
                # t0 / (1 - q)
                val += t0 / (1 - q)
                dx += dt0 / (1 - q) + t0 * dq / (1 - q) ** 2
            elif m > k:
                cnt = m - k
                qc = q ** cnt
                geo = (1 - qc) / (1 - q)
                dgeo = (-cnt * q ** (cnt - 1) * dq * (1 - q) + (1 - qc) * dq) / (1 - q) ** 2
                val += t0 * geo
                dx += dt0 * geo + t0 * dgeo
        else:
            v = model.var_weight
            p = x ** v
            dp = v * x ** (v - 1)
            head = min(k, m)
            for i in range(head):
                val += u[i] * p
                dx += u[i] * dp
                du[i] = p
            if m > k:
                val += (m - k) * p
                dx += (m - k) * dp
        return val, [dx] + du

    def evaluate(self, x, u: Sequence | None = None, derivatives: bool = False) -> GFValues:
        """Evaluate all levels at ``x``; raises SingularityExceeded past the
        dominant singularity."""
        with mpmath.workdps(self.dps):
            x = mpmath.mpf(x)
            if x <= 0:
                raise ValueError("x must be positive")
            if x >= 1:
                raise SingularityExceeded(f"x={x} outside the unit disc")
            u = [mpmath.mpf(1)] * self.marks if u is None else [mpmath.mpf(w) for w in u]
            if len(u) != self.marks:
                raise ValueError(f"expected {self.marks} marking weights")
            if any(w <= 0 for w in u):
                raise ValueError("marking weights must be positive")
            model = self.model
            a, b = model.abs_weight, model.app_weight
            xa, xb = x ** a, x ** b
            dxa, dxb = a * x ** (a - 1), b * x ** (b - 1)
            nparams = 1 + self.marks

            if model.unary:
                idx, didx = self._index_terms(x, u, None)
                one_m = 1 - xa
                disc = one_m ** 2 - 4 * xb * idx
                if disc < 0:
                    raise SingularityExceeded(f"x={x} beyond the plain-term singularity")
                sq = mpmath.sqrt(disc)
                plain = 2 * idx / (one_m + sq)
                dplain = []
                if derivatives:
                    for p in range(nparams):
                        dF = didx[p]
                        if p == 0:
                            dF += dxb * plain ** 2 + dxa * plain
                        if sq == 0:
                            raise SingularityExceeded("derivative diverges at the singularity")
                        dplain.append(dF / sq)
                above, dabove = plain, dplain
            else:
                plain, dplain = None, []
                above = mpmath.mpf(0)
                dabove = [mpmath.mpf(0)] * nparams

            values = [None] * (self.N + 1)
            dvalues = [None] * (self.N + 1)
            for m in range(self.N, -1, -1):
                idx, didx = self._index_terms(x, u, m)
                r = xa * above + idx
                disc = 1 - 4 * xb * r
                if disc < 0:
                    raise SingularityExceeded(f"x={x} beyond the singularity of level {m}")
                sq = mpmath.sqrt(disc)
                val = 2 * r / (1 + sq)
                values[m] = val
                if derivatives:
                    if sq == 0:
                        raise SingularityExceeded("derivative diverges at the singularity")
                    grads = []
                    for p in range(nparams):
                        dr = xa * dabove[p] + didx[p]
                        dG = dr
                        if p == 0:
                            dr += dxa * above
                            dG = dr + dxb * val ** 2
                        grads.append(dG / sq)
                    dvalues[m] = tuple(grads)
                above = val
                dabove = dvalues[m] if derivatives else None
            return GFValues(
                x=x, values=tuple(values), plain=plain,
                precision=float(mpmath.mpf(10) ** (-(self.dps - 5))),
                dvalues=tuple(dvalues) if derivatives else (),
                dplain=tuple(dplain),
            )

    def converges(self, x, u: Sequence | None = None) -> bool:
        try:
            self.evaluate(x, u)
        except SingularityExceeded:
            return False
        return True

    def singularity(self, u: Sequence | None = None, rel_tol=None):
        """Dominant singularity rho, located by bisection on discriminant sign."""
        with mpmath.workdps(self.dps):
            lo, hi = mpmath.mpf(0), mpmath.mpf(1)
            tol = mpmath.mpf(rel_tol) if rel_tol is not None else mpmath.mpf(10) ** (-(self.dps - 8))
            while hi - lo > tol * hi:
                mid = (lo + hi) / 2
                if self.converges(mid, u):
                    lo = mid
                else:
                    hi = mid
            return lo

    def mean_size(self, x, u: Sequence | None = None, level: int = 0):
        """Expected Boltzmann size x L'(x)/L(x) for the chosen level."""
        gf = self.evaluate(x, u, derivatives=True)
        with mpmath.workdps(self.dps):
            return gf.x * gf.dvalues[level][0] / gf.values[level]


def gf_eval(model: SizeModel, N: int, x, dps: int | None = None) -> GFValues:
    return TruncatedSystem(model, N, dps=dps).evaluate(x)


def truncated_series(table: CountTable, m: int, x, K: int | None = None):
    """Partial sum of level ``m`` coefficients up to size ``K``."""
    K = table.max_size if K is None else K
    x = mpmath.mpf(x)
    return mpmath.fsum(c * x ** n for n, c in enumerate(table.level(m)[:K + 1]))
