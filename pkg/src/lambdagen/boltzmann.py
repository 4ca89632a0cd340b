"""Boltzmann samplers: binary trees, plain De Bruijn terms, and closed terms
drawn from the truncated openness system with rejection."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import kernels
from .counting import DEFAULT_TRUNCATION, TruncatedSystem
from .errors import AttemptsExhausted, DegenerateTarget, LambdaGenError, NoConvergence, SingularityExceeded
from .rng import Rng, as_rng
from .terms import NATURAL, BinaryTree, SizeModel, Term, decode, tree_from_preorder

DEFAULT_TOLERANCE = 0.1
DEFAULT_MAX_ATTEMPTS = 10 ** 6


class AbortCeiling(LambdaGenError):
    """A Boltzmann run outgrew its size ceiling."""


# ---------------------------------------------------------------------------
# Binary trees

def calibrate_binary_tree(n: int) -> Fraction:
    """Control parameter centring the Boltzmann tree size (internal nodes) on n."""
    if n < 1:
        raise DegenerateTarget("target size must be at least 1")
    return Fraction(n * (n + 1), (2 * n + 1) ** 2)


def binary_tree_mean(x, dps: int = 60):
    """x C'(x) / C(x) for C(z) = 1 + z C(z)^2, evaluated at high precision."""
    with mpmath.workdps(dps):
        if isinstance(x, Fraction):
            x = mpmath.mpf(x.numerator) / x.denominator
        x = mpmath.mpf(x)
        root = mpmath.sqrt(1 - 4 * x)
        c = (1 - root) / (2 * x)
        dc = c ** 2 / root
        return x * dc / c


def sample_binary_tree(n: int, eps: float = DEFAULT_TOLERANCE, rng: Rng | int | None = None,
                       max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> BinaryTree:
    """Boltzmann binary tree with internal-node count in [(1-eps)n, (1+eps)n]."""
    rng = as_rng(rng)
    x = calibrate_binary_tree(n)
    with mpmath.workdps(30):
        xm = mpmath.mpf(x.numerator) / x.denominator
        p_node = float(xm * (1 - mpmath.sqrt(1 - 4 * xm)) / (2 * xm))
    lo, hi = _window(n, eps)
    bits = np.empty(2 * hi + 3, dtype=np.int8)
    with np.errstate(over="ignore"):
        for _ in range(max_attempts):
            count, size = kernels.tree_attempt(rng.state, p_node, hi, bits)
            if count != kernels.ABORTED and size >= lo:
                return tree_from_preorder(bits[:count])
    raise AttemptsExhausted(max_attempts)


def _window(n: int, eps: float) -> tuple[int, int]:
    if not 0 <= eps < 1:
        raise ValueError("tolerance must lie in [0, 1)")
    lo = int(np.ceil((1 - eps) * n - 1e-9))
    hi = int(np.floor((1 + eps) * n + 1e-9))
    return lo, hi


# ---------------------------------------------------------------------------
# Term oracles

@dataclass(frozen=True)
class BoltzmannOracle:
    """Branching tables of the truncated system at a fixed ``x``.

    Rows ``0..N`` are openness levels, row ``N + 1`` the plain-term class.
    For each row: probability of an application, of an abstraction, and the
    remainder for an index.  Index choice is split into a marked head
    (explicit weights) and a geometric tail with ratio ``q``.
    """

    model: SizeModel
    N: int
    x: float
    x_exact: mpmath.mpf
    p_app: np.ndarray
    p_abs: np.ndarray
    p_idx: np.ndarray
    p_head: np.ndarray
    head_w: np.ndarray
    head_tot: np.ndarray
    tail_cnt: np.ndarray
    q: float
    weights: tuple = ()
    mean_closed: float = float("nan")
    level_values: tuple = field(default=(), repr=False)

    @property
    def plain_level(self) -> int:
        return self.N + 1

    def branch_sums(self) -> np.ndarray:
        return self.p_app + self.p_abs + self.p_idx

    @classmethod
    def build(cls, model: SizeModel, N: int, x, weights: Sequence | None = None,
              dps: int | None = None) -> "BoltzmannOracle":
        marks = len(weights) if weights else 0
        system = TruncatedSystem(model, N, marks=marks, dps=dps)
        gf = system.evaluate(x, weights, derivatives=True)
        with mpmath.workdps(system.dps):
            xm = gf.x
            u = [mpmath.mpf(w) for w in weights] if weights else []
            a, b = model.abs_weight, model.app_weight
            levels = N + 2
            p_app = np.zeros(levels)
            p_abs = np.zeros(levels)
            p_idx = np.zeros(levels)
            p_head = np.zeros(levels)
            head_tot = np.zeros(levels)
            tail_cnt = np.zeros(levels, dtype=np.int64)
            if model.unary:
                zero_w, succ_w = model.zero_weight, model.succ_weight
            else:
                zero_w, succ_w = model.var_weight, 0
            head = [u[i] * xm ** (zero_w + i * succ_w) for i in range(marks)]
            q = xm ** succ_w
            t0 = xm ** (zero_w + marks * succ_w)

            def index_mass(lv):
                if lv == N + 1 and not model.unary:
                    return mpmath.mpf(0), mpmath.mpf(0), -1
                avail = marks if lv == N + 1 else min(marks, lv)
                htot = mpmath.fsum(head[:avail])
                if lv == N + 1:
                    cnt = -1
                    tail = t0 / (1 - q)
                else:
                    cnt = max(lv - marks, 0)
                    tail = t0 * cnt if q == 1 else t0 * (1 - q ** cnt) / (1 - q)
                return htot, tail, cnt

            rows = list(gf.values) + ([gf.plain] if gf.plain is not None else [None])
            for lv in range(levels):
                val = rows[lv]
                htot, tail, cnt = index_mass(lv)
                tail_cnt[lv] = cnt
                if val is None:
                    continue
                above = rows[min(lv + 1, N + 1)]
                p_app[lv] = float(xm ** b * val)
                p_abs[lv] = float(xm ** a * above / val) if above is not None else 0.0
                p_idx[lv] = float((htot + tail) / val)
                head_tot[lv] = float(htot)
                p_head[lv] = float(htot / (htot + tail)) if htot + tail > 0 else 0.0
            mean = gf.x * gf.dvalues[0][0] / gf.values[0]
            return cls(
                model=model, N=N, x=float(xm), x_exact=xm,
                p_app=p_app, p_abs=p_abs, p_idx=p_idx, p_head=p_head,
                head_w=np.array([float(h) for h in head], dtype=np.float64),
                head_tot=head_tot, tail_cnt=tail_cnt, q=float(q),
                weights=tuple(float(w) for w in u), mean_closed=float(mean),
                level_values=tuple(rows),
            )

    def _size_args(self):
        m = self.model
        if m.unary:
            return m.abs_weight, m.app_weight, m.zero_weight, m.succ_weight
        return m.abs_weight, m.app_weight, m.var_weight, 0

    def run(self, rng: Rng, root: int, lo: int, hi: int, max_attempts: int,
            out: np.ndarray, stack: np.ndarray, stats: np.ndarray) -> int:
        with np.errstate(over="ignore"):
            return int(kernels.boltzmann_window(
                rng.state, root, self.p_app, self.p_abs, self.p_head, self.head_w,
                self.head_tot, self.tail_cnt, self.q, *self._size_args(),
                lo, hi, max_attempts, out, stack, stats))

    def attempt(self, rng: Rng, root: int, ceiling: int, out: np.ndarray, stack: np.ndarray):
        with np.errstate(over="ignore"):
            return kernels.boltzmann_attempt(
                rng.state, root, self.p_app, self.p_abs, self.p_head, self.head_w,
                self.head_tot, self.tail_cnt, self.q, *self._size_args(), ceiling, out, stack)


def _buffers(ceiling: int):
    cap = 2 * ceiling + 16
    return np.empty(cap, dtype=np.int64), np.empty(cap + 2, dtype=np.int64)


def plain_oracle(x, model: SizeModel = NATURAL, N: int = 0) -> BoltzmannOracle:
    if not model.unary:
        raise ValueError("plain terms need unary indices (finitely many terms per size)")
    return BoltzmannOracle.build(model, N, x)


def sample_plain(oracle: BoltzmannOracle, rng: Rng | int | None = None,
                 ceiling: int = 10 ** 7) -> Term:
    """Plain term from the Boltzmann law at ``oracle.x``.

    Raises AbortCeiling when the run outgrows ``ceiling``.
    """
    rng = as_rng(rng)
    out, stack = _buffers(ceiling)
    count, _ = oracle.attempt(rng, oracle.plain_level, ceiling, out, stack)
    if count == kernels.ABORTED:
        raise AbortCeiling(f"size exceeded {ceiling}")
    return decode(out[:count])


# ---------------------------------------------------------------------------
# Calibration

def calibrate_terms(n: float, model: SizeModel = NATURAL, N: int = DEFAULT_TRUNCATION,
                    weights: Sequence | None = None, rel_tol: float = 1e-10,
                    max_iter: int = 400, dps: int | None = None, rho=None):
    """x in (0, rho) whose Boltzmann mean size over level 0 equals n.

    Returned as an mpmath number at working precision; the mean is monotone
    in x, so plain bisection converges.
    """
    if n <= 0:
        raise DegenerateTarget("target size must be positive")
    system = TruncatedSystem(model, N, marks=len(weights) if weights else 0, dps=dps)
    if rho is None:
        rho = system.singularity(weights)
    with mpmath.workdps(system.dps):
        lo, hi = mpmath.mpf(0), rho
        target = mpmath.mpf(n)
        # Smallest achievable mean is the smallest closed size, reached as x -> 0.
        floor_mean = system.mean_size(rho * mpmath.mpf(10) ** -(system.dps // 2), weights)
        if target <= floor_mean * (1 + mpmath.mpf(10) ** -6):
            raise NoConvergence(f"mean size {n} unreachable: the minimum is {float(floor_mean):.6g}")
        for _ in range(max_iter):
            mid = (lo + hi) / 2
            try:
                mean = system.mean_size(mid, weights)
            except SingularityExceeded:
                hi = mid
                continue
            if abs(mean - target) <= rel_tol * target:
                return mid
            if mean < target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= mpmath.mpf(10) ** -(system.dps - 5) * hi:
                break
    raise NoConvergence(f"calibration for n={n} did not converge")


# ---------------------------------------------------------------------------
# Closed terms

@dataclass
class SampleStats:
    attempts: int = 0
    too_small: int = 0
    too_large: int = 0
    in_window: int = 0
    not_closed: int = 0
    nodes_built: int = 0
    sizes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        accepted = len(self.sizes)
        return {
            "attempts": self.attempts,
            "accepted": accepted,
            "acceptance_rate": accepted / self.attempts if self.attempts else 0.0,
            "too_small": self.too_small,
            "too_large": self.too_large,
            "in_window": self.in_window,
            "not_closed": self.not_closed,
            "sizes": list(self.sizes),
        }


class ClosedSampler:
    """Closed terms with size in [(1-eps)n, (1+eps)n].

    Runs the truncated system from level 0, rejects wholesale every output
    whose level-N fallback left an unbound index, and aborts runs that
    outgrow the window (anticipated rejection).
    """

    def __init__(self, n: int, eps: float = DEFAULT_TOLERANCE, N: int = DEFAULT_TRUNCATION,
                 model: SizeModel = NATURAL, x=None, weights: Sequence | None = None,
                 oracle: BoltzmannOracle | None = None):
        if n < 1:
            raise DegenerateTarget("target size must be at least 1")
        self.n = n
        self.eps = eps
        self.lo, self.hi = _window(n, eps)
        if oracle is None:
            if x is None:
                x = calibrate_terms(n, model, N, weights)
            oracle = BoltzmannOracle.build(model, N, x, weights)
        self.oracle = oracle
        self.stats = SampleStats()
        self._out, self._stack = _buffers(self.hi)
        self._kstats = np.zeros(4, dtype=np.int64)

    def sample_tokens(self, rng: Rng | int | None = None,
                      max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> np.ndarray:
        rng = as_rng(rng)
        used = 0
        o = self.oracle
        while used < max_attempts:
            self._kstats[:] = 0
            count = o.run(rng, 0, self.lo, self.hi, max_attempts - used,
                          self._out, self._stack, self._kstats)
            used += int(self._kstats[0])
            st = self.stats
            st.attempts += int(self._kstats[0])
            st.too_small += int(self._kstats[1])
            st.too_large += int(self._kstats[2])
            st.nodes_built += int(self._kstats[3])
            if count < 0:
                break
            st.in_window += 1
            if kernels.token_openness(self._out, count) != 0:
                st.not_closed += 1
                continue
            tokens = self._out[:count].copy()
            st.sizes.append(int(kernels.token_size(tokens, count, *o._size_args())))
            return tokens
        raise AttemptsExhausted(max_attempts)

    def sample(self, rng: Rng | int | None = None, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Term:
        return decode(self.sample_tokens(rng, max_attempts))


def sample_closed(n: int, eps: float = DEFAULT_TOLERANCE, N: int = DEFAULT_TRUNCATION,
                  model: SizeModel = NATURAL, rng: Rng | int | None = None,
                  max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Term:
    return ClosedSampler(n, eps, N, model).sample(rng, max_attempts)
