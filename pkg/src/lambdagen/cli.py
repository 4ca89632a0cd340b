"""Command-line frontend: ``lambdagen count | sample | tune | typecheck``.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 ok,
1 untypeable, 2 bad flags or input, 3 sampling failure.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .boltzmann import DEFAULT_MAX_ATTEMPTS, DEFAULT_TOLERANCE, ClosedSampler
from .counting import DEFAULT_TRUNCATION, build_count_table, inert_truncation
from .errors import (AttemptsExhausted, EmptySizeClass, Infeasible, LambdaGenError, NoConvergence,
                     OpenTermRejected, SingularityExceeded, TermParseError, TruncationExceeded)
from .recursive import RecursiveSampler
from .remy import remy_shape, render_sk, sk_arrays
from .rng import Rng
from .simple_types import TypedStats, infer, render_type, sample_typed, typed_base_sampler
from .terms import FORMATS, SizeModel, decode, parse, render, size
from .tuner import TuningProfile, load_targets, tune, tuned_sampler

EXIT_OK = 0
EXIT_UNTYPEABLE = 1
EXIT_USAGE = 2
EXIT_SAMPLING = 3

METHODS = ("recursive", "boltzmann", "sk", "remy", "tuned", "typed")
SAMPLING_ERRORS = (AttemptsExhausted, EmptySizeClass, TruncationExceeded, NoConvergence,
                   SingularityExceeded)


class UsageError(Exception):
    """Invalid flag combination; the message names the flag."""


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _pos_int(text: str) -> int:
    value = _nonneg_int(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _tolerance(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not 0 <= value < 1:
        raise argparse.ArgumentTypeError("must lie in [0, 1)")
    return value


def _model(text: str) -> SizeModel:
    try:
        return SizeModel.from_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str):
    if text == "random":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'random'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambdagen",
                                     description="Random lambda terms, binary trees and SK-combinators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    model_help = "size model: natural, constant, unary:a,b,zero,succ or constant:a,b,var"

    p = sub.add_parser("count", help="number of m-open terms of a given size")
    p.add_argument("--model", type=_model, default=SizeModel.natural(), help=model_help)
    p.add_argument("--openness", type=_nonneg_int, default=0)
    p.add_argument("--size", type=_nonneg_int, required=True)
    p.add_argument("--truncation", type=_nonneg_int, default=None,
                   help="truncation level N (default: large enough to be exact)")

    p = sub.add_parser("sample", help="draw random objects")
    p.add_argument("--method", choices=METHODS, default="boltzmann")
    p.add_argument("--size", type=_nonneg_int, default=None,
                   help="target size; method tuned takes it from --profile")
    p.add_argument("--tolerance", type=_tolerance, default=DEFAULT_TOLERANCE)
    p.add_argument("--truncation", type=_nonneg_int, default=DEFAULT_TRUNCATION)
    p.add_argument("--model", type=_model, default=SizeModel.natural(), help=model_help)
    p.add_argument("--count", type=_nonneg_int, default=1)
    p.add_argument("--seed", type=_seed, default=0, help="integer seed or 'random' (default 0)")
    p.add_argument("--format", choices=FORMATS, default="debruijn")
    p.add_argument("--stats", action="store_true", help="append a JSON summary line")
    p.add_argument("--jobs", type=_pos_int, default=1)
    p.add_argument("--max-attempts", type=_pos_int, default=DEFAULT_MAX_ATTEMPTS)
    p.add_argument("--profile", help="tuning profile JSON (method tuned)")
    p.add_argument("--targets", help="targets JSON to tune on the fly (method tuned)")
    p.add_argument("--base", choices=("recursive", "boltzmann"), default="recursive",
                   help="underlying sampler for method typed")

    p = sub.add_parser("tune", help="solve index-frequency weights")
    p.add_argument("--targets", required=True, help='JSON {"n": ..., "targets": [{"index", "fraction"}]}')
    p.add_argument("--size", type=_pos_int, default=None, help="target size (overrides the file)")
    p.add_argument("--truncation", type=_nonneg_int, default=DEFAULT_TRUNCATION)
    p.add_argument("--model", type=_model, default=SizeModel.natural(), help=model_help)

    p = sub.add_parser("typecheck", help="principal type of a closed term read from stdin")
    p.add_argument("--format", choices=FORMATS, default="debruijn")
    return parser


# ---------------------------------------------------------------------------
# Subcommands

def cmd_count(args, out) -> int:
    N = args.truncation
    if N is None:
        N = inert_truncation(args.model, args.openness, args.size)
    elif args.openness > N:
        raise UsageError(f"--openness {args.openness} exceeds --truncation {N}")
    table = build_count_table(args.model, N, args.size)
    out.write(f"{table.count(args.openness, args.size)}\n")
    return EXIT_OK


def _read_text(path: str, flag: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc.strerror}") from None


def _profile(args) -> TuningProfile:
    if args.profile and args.targets:
        raise UsageError("--profile and --targets are mutually exclusive")
    if args.profile:
        try:
            return TuningProfile.from_json(_read_text(args.profile, "--profile"))
        except (ValueError, KeyError) as exc:
            raise UsageError(f"--profile: malformed profile ({exc})") from None
    if args.targets:
        _, targets = _targets(args.targets)
        return tune(targets, args.size, args.model, args.truncation)
    raise UsageError("--method tuned needs --profile or --targets")


def _targets(path: str):
    try:
        return load_targets(_read_text(path, "--targets"))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"--targets: malformed targets file ({exc})") from None


class _Job:
    """One sampler instance with its own stream; produces rendered items."""

    def __init__(self, args, shared):
        self.args = args
        self.shared = shared
        self.sizes: list[int] = []
        self.attempts = 0

    def items(self, rng: Rng, count: int):
        args, shared = self.args, self.shared
        fmt = args.format
        method = args.method
        if method in ("boltzmann", "tuned"):
            sampler = ClosedSampler(args.size, args.tolerance, args.truncation, args.model,
                                    oracle=shared.oracle)
            for _ in range(count):
                t = sampler.sample(rng, args.max_attempts)
                yield render(t, fmt)
            self.sizes.extend(sampler.stats.sizes)
            self.attempts += sampler.stats.attempts
        elif method == "recursive":
            for _ in range(count):
                tokens = shared.sampler.gen_tokens(0, args.size, rng)
                yield render(decode(tokens), fmt)
                self.sizes.append(args.size)
                self.attempts += 1
        elif method == "typed":
            stats = TypedStats()
            for _ in range(count):
                t, ty = sample_typed(args.size, args.model, args.base, rng, args.max_attempts,
                                     args.tolerance, args.truncation, stats=stats,
                                     sampler=shared.sampler)
                self.sizes.append(size(t, args.model))
                text = render(t, fmt)
                if fmt == "json":
                    yield json.dumps({"term": json.loads(text), "type": render_type(ty)})
                else:
                    yield f"{text} : {render_type(ty)}"
            self.attempts += stats.attempts
        elif method == "remy":
            for _ in range(count):
                bits = remy_shape(args.size, rng)
                code = "".join("1" if b else "0" for b in bits.tolist())
                yield json.dumps({"preorder": code}) if fmt == "json" else code
                self.sizes.append(args.size)
                self.attempts += 1
        else:  # sk
            for _ in range(count):
                text = render_sk(*sk_arrays(args.size, rng))
                yield json.dumps({"combinator": text}) if fmt == "json" else text
                self.sizes.append(args.size)
                self.attempts += 1


class _Shared:
    """Read-only state built once and shared by every job."""

    def __init__(self, args):
        self.oracle = None
        self.sampler = None
        method = args.method
        if method == "boltzmann":
            self.oracle = ClosedSampler(args.size, args.tolerance, args.truncation, args.model).oracle
        elif method == "tuned":
            profile = _profile(args)
            args.size = int(round(profile.n))
            args.truncation = profile.N
            args.model = profile.model
            self.oracle = tuned_sampler(profile, args.tolerance).oracle
        elif method == "recursive":
            self.sampler = RecursiveSampler(args.model, max_size=args.size)
        elif method == "typed":
            self.sampler = typed_base_sampler(args.size, args.model, args.base,
                                              args.tolerance, args.truncation)


def cmd_sample(args, out) -> int:
    if args.method != "tuned" and (args.profile or args.targets):
        raise UsageError("--profile/--targets only apply to --method tuned")
    if args.size is None and not (args.method == "tuned" and args.profile):
        raise UsageError("--size is required")
    if args.size == 0 and args.method in ("boltzmann", "tuned"):
        raise UsageError("--size must be positive for Boltzmann sampling")
    seed = args.seed
    if seed == "random":
        seed = secrets.randbits(63)
        print(f"seed: {seed}", file=sys.stderr)
    shared = _Shared(args)
    jobs = [_Job(args, shared) for _ in range(args.jobs)]
    base = Rng(seed)
    # contiguous shares, merged in instance order
    shares = [args.count // args.jobs + (1 if i < args.count % args.jobs else 0)
              for i in range(args.jobs)]
    as_json = args.format == "json"
    if as_json:
        out.write("[")
    first = True

    def emit(line: str):
        nonlocal first
        if as_json:
            out.write(("\n" if first else ",\n") + line)
        else:
            out.write(line + "\n")
        first = False

    if args.jobs == 1:
        for line in jobs[0].items(base.split(0), shares[0]):
            emit(line)
    else:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(lambda j, i: list(j.items(base.split(i), shares[i])), job, i)
                       for i, job in enumerate(jobs)]
            for fut in futures:
                for line in fut.result():
                    emit(line)
    if as_json:
        out.write("\n]\n" if not first else "]\n")
    if args.stats:
        sizes = [s for job in jobs for s in job.sizes]
        attempts = sum(job.attempts for job in jobs)
        out.write(json.dumps({
            "method": args.method,
            "count": len(sizes),
            "sizes": sizes,
            "attempts": attempts,
            "acceptance_rate": len(sizes) / attempts if attempts else 0.0,
        }) + "\n")
    return EXIT_OK


def cmd_tune(args, out) -> int:
    n, targets = _targets(args.targets)
    if args.size is not None:
        n = args.size
    profile = tune(targets, n, args.model, args.truncation)
    out.write(profile.to_json() + "\n")
    return EXIT_OK


def cmd_typecheck(args, out, stdin) -> int:
    text = stdin.read().strip()
    try:
        t = parse(text, args.format)
    except TermParseError as exc:
        print(f"TermParseError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        ty = infer(t)
    except OpenTermRejected as exc:
        print(f"OpenTermRejected: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(render_type(ty) + "\n")
    return EXIT_OK if ty else EXIT_UNTYPEABLE


def main(argv=None, out=None, stdin=None) -> int:
    out = out if out is not None else sys.stdout
    stdin = stdin if stdin is not None else sys.stdin
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "count":
            return cmd_count(args, out)
        if args.command == "sample":
            return cmd_sample(args, out)
        if args.command == "tune":
            return cmd_tune(args, out)
        return cmd_typecheck(args, out, stdin)
    except UsageError as exc:
        print(f"lambdagen {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"Infeasible: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SAMPLING_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except LambdaGenError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SAMPLING


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
