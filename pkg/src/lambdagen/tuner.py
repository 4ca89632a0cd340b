"""Tuning De Bruijn index frequencies.

Leading indices get their own weights ``u_i``.  The weights and the size
parameter ``x`` are solved so that, under the weighted Boltzmann law on
closed terms, the expected size is ``n`` and index ``i`` accounts for a
fraction ``t_i`` of it.  In logarithmic coordinates

    F(xi, v) = log L_0(e^xi, e^v) - n xi - sum_i c_i v_i,   c_i = t_i n / |i|

is convex and its gradient is (E[size] - n, E[#i] - c_i), so the tuning is
the minimiser of F.  We run damped Newton with a finite-difference Hessian,
backtracking whenever a step leaves the convergence domain or fails to
decrease F.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .boltzmann import DEFAULT_MAX_ATTEMPTS, DEFAULT_TOLERANCE, ClosedSampler, calibrate_terms
from .counting import DEFAULT_TRUNCATION, TruncatedSystem
from .errors import Infeasible, NoConvergence, SingularityExceeded
from .rng import Rng
from .terms import NATURAL, SizeModel, Term

TARGET_TOL = 1e-8
# x sits extremely close to the singularity for large n; keep plenty of digits
PROFILE_DIGITS = 40


@dataclass(frozen=True)
class TuningProfile:
    n: float
    targets: dict
    weights: tuple          # u_0 .. u_{k}, as mpmath numbers
    x: object               # mpmath number
    model: SizeModel = NATURAL
    N: int = DEFAULT_TRUNCATION
    achieved: dict = field(default_factory=dict)
    mean_size: float = float("nan")
    iterations: int = 0

    @property
    def marks(self) -> int:
        return len(self.weights)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "model": self.model.to_dict(),
            "x": mpmath.nstr(self.x, PROFILE_DIGITS),
            "weights": [{"index": i, "u": mpmath.nstr(w, PROFILE_DIGITS)}
                        for i, w in enumerate(self.weights)],
            "targets": [{"index": i, "fraction": f} for i, f in sorted(self.targets.items())],
            "achieved": [{"index": i, "fraction": f} for i, f in sorted(self.achieved.items())],
            "mean_size": self.mean_size,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "TuningProfile":
        w = data["model"]
        if "var" in w:
            model = SizeModel.constant(w["var"], w["abs"], w["app"])
        else:
            model = SizeModel(w["abs"], w["app"], w["zero"], w["succ"])
        with mpmath.workdps(PROFILE_DIGITS + 5):
            weights = tuple(mpmath.mpf(item["u"]) for item in sorted(data["weights"], key=lambda d: d["index"]))
            x = mpmath.mpf(data["x"])
        return cls(
            n=data["n"], N=data["N"], model=model, x=x, weights=weights,
            targets={int(d["index"]): d["fraction"] for d in data["targets"]},
            achieved={int(d["index"]): d["fraction"] for d in data.get("achieved", [])},
            mean_size=data.get("mean_size", float("nan")),
        )

    @classmethod
    def from_json(cls, text: str) -> "TuningProfile":
        return cls.from_dict(json.loads(text))


def load_targets(text: str) -> tuple[int, dict]:
    """Parse ``{"n": int, "targets": [{"index": i, "fraction": f}, ...]}``."""
    data = json.loads(text)
    targets = {}
    for item in data.get("targets", []):
        idx = int(item["index"])
        if idx in targets:
            raise ValueError(f"duplicate target for index {idx}")
        targets[idx] = float(item["fraction"])
    return int(data["n"]), targets


def _check_feasible(targets: dict) -> None:
    if any(i < 0 for i in targets):
        raise Infeasible("indices must be natural numbers")
    if any(not 0 < t < 1 for t in targets.values()):
        raise Infeasible("each target fraction must lie strictly between 0 and 1")
    if sum(targets.values()) >= 1:
        raise Infeasible("target fractions must sum to less than 1")


class _Objective:
    def __init__(self, system: TruncatedSystem, n, free: list[int], counts: list):
        self.system = system
        self.n = mpmath.mpf(n)
        self.free = free          # marked indices whose weight is solved for
        self.counts = counts      # target expected occurrences c_i

    def point(self, y):
        x = mpmath.exp(y[0])
        u = [mpmath.mpf(1)] * self.system.marks
        for j, i in enumerate(self.free):
            u[i] = mpmath.exp(y[1 + j])
        return x, u

    def value_grad(self, y):
        """(F, grad F, expectations); raises SingularityExceeded off-domain."""
        x, u = self.point(y)
        gf = self.system.evaluate(x, u, derivatives=True)
        L0 = gf.values[0]
        d = gf.dvalues[0]
        mean = x * d[0] / L0
        occ = [u[i] * d[1 + i] / L0 for i in self.free]
        F = mpmath.log(L0) - self.n * y[0] - mpmath.fsum(c * v for c, v in zip(self.counts, y[1:]))
        grad = [mean - self.n] + [o - c for o, c in zip(occ, self.counts)]
        return F, grad, (mean, occ)

    def hessian(self, y, h):
        dim = len(y)
        H = mpmath.matrix(dim, dim)
        for j in range(dim):
            yp = list(y)
            ym = list(y)
            yp[j] += h
            ym[j] -= h
            gp = self.value_grad(yp)[1]
            gm = self.value_grad(ym)[1]
            for i in range(dim):
                H[i, j] = (gp[i] - gm[i]) / (2 * h)
        # symmetrise away finite-difference noise
        for i in range(dim):
            for j in range(i):
                s = (H[i, j] + H[j, i]) / 2
                H[i, j] = H[j, i] = s
        return H


def tune(targets: dict, n: float, model: SizeModel = NATURAL, N: int = DEFAULT_TRUNCATION,
         max_iter: int = 100, dps: int | None = None) -> TuningProfile:
    """Solve marking weights so index ``i`` takes fraction ``targets[i]`` of
    the expected size, with expected size ``n``.

    Newton runs on the reduced objective G(v) = min_xi F(xi, v): for every
    trial weight vector the size parameter is recalibrated so the mean is
    exactly ``n``.  This keeps iterates a safe distance from the singularity,
    where F is too ill-conditioned for a joint Newton step.  G is convex, its
    gradient is E[#i] - c_i at the calibrated point, and its Hessian is the
    Schur complement of the full Hessian of F.
    """
    targets = {int(i): float(t) for i, t in targets.items()}
    _check_feasible(targets)
    marks = max(targets) + 1 if targets else 0
    system = TruncatedSystem(model, N, marks=marks, dps=dps)
    free = sorted(targets)
    with mpmath.workdps(system.dps):
        counts = [mpmath.mpf(targets[i]) * n / model.index_size(i) for i in free]
        obj = _Objective(system, n, free, counts)
        h_max = mpmath.mpf(10) ** -(system.dps // 4)

        def reduced(v):
            _, u = obj.point([0] + list(v))
            rho = system.singularity(u or None)
            x = calibrate_terms(n, model, N, weights=u or None, dps=system.dps, rho=rho)
            y = [mpmath.log(x)] + list(v)
            F, grad, expect = obj.value_grad(y)
            # finite-difference step well inside the distance to rho
            return y, F, grad, expect, min(h_max, (1 - x / rho) * mpmath.mpf(10) ** -10)

        v = [mpmath.mpf(0)] * len(free)
        y, F, grad, expect, h = reduced(v)
        it = 0
        for it in range(1, max_iter + 1):
            if _converged(grad, obj.n, model, free):
                break
            H = _hessian(obj, y, h)
            # Schur complement eliminating the size coordinate
            dim = len(free)
            G = mpmath.matrix(dim, dim)
            for i in range(dim):
                for j in range(dim):
                    G[i, j] = H[i + 1, j + 1] - H[i + 1, 0] * H[0, j + 1] / H[0, 0]
            try:
                step = mpmath.lu_solve(G, mpmath.matrix([-g for g in grad[1:]]))
            except ZeroDivisionError:
                raise Infeasible("singular Hessian; targets look unreachable") from None
            alpha = mpmath.mpf(1)
            while True:
                trial = [vi + alpha * step[i] for i, vi in enumerate(v)]
                try:
                    yt, Ft, gt, et, ht = reduced(trial)
                    if Ft <= F:
                        break
                except (SingularityExceeded, NoConvergence):
                    pass
                alpha /= 2
                if alpha < mpmath.mpf(10) ** -20:
                    raise Infeasible("line search collapsed; targets look unreachable")
            v, y, F, grad, expect, h = trial, yt, Ft, gt, et, ht
            if any(abs(vi) > 60 for vi in v):
                raise Infeasible("marking weights diverged; targets look unreachable")
        else:
            if not _converged(grad, obj.n, model, free):
                raise Infeasible(f"tuning did not converge in {max_iter} Newton steps")
        x, u = obj.point(y)
        mean, occ = expect
        achieved = {i: float(o * model.index_size(i) / mean) for i, o in zip(free, occ)}
        return TuningProfile(
            n=n, targets=targets, weights=tuple(u), x=x, model=model, N=N,
            achieved=achieved, mean_size=float(mean), iterations=it,
        )


def _hessian(obj: _Objective, y, h):
    # Near the singularity the stencil may cross it; shrink until it fits.
    floor = mpmath.mpf(10) ** -(obj.system.dps * 2 // 3)
    while True:
        try:
            return obj.hessian(y, h)
        except SingularityExceeded:
            h /= 1000
            if h < floor:
                raise


def _converged(grad, n, model: SizeModel, free) -> bool:
    if abs(grad[0]) > TARGET_TOL * n:
        return False
    return all(abs(g) * model.index_size(i) <= TARGET_TOL * n for g, i in zip(grad[1:], free))


def tuned_sampler(profile: TuningProfile, eps: float = DEFAULT_TOLERANCE) -> ClosedSampler:
    n = int(round(profile.n))
    return ClosedSampler(n, eps, profile.N, profile.model, x=profile.x,
                         weights=list(profile.weights) or None)


def sample_tuned(profile: TuningProfile, eps: float = DEFAULT_TOLERANCE,
                 rng: Rng | int | None = None, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Term:
    return tuned_sampler(profile, eps).sample(rng, max_attempts)


def index_size_fractions(tokens_list, model: SizeModel = NATURAL, upto: int = 9) -> np.ndarray:
    """Aggregate share of total size contributed by indices 0..upto-1."""
    from . import kernels

    contrib = np.zeros(upto)
    total = 0
    a, b = model.abs_weight, model.app_weight
    zw, sw = (model.zero_weight, model.succ_weight) if model.unary else (model.var_weight, 0)
    for tokens in tokens_list:
        tokens = np.asarray(tokens)
        total += int(kernels.token_size(tokens, tokens.shape[0], a, b, zw, sw))
        idx = tokens[tokens >= 0]
        hist = np.bincount(idx[idx < upto], minlength=upto)
        contrib += hist * np.array([model.index_size(i) for i in range(upto)])
    return contrib / total
