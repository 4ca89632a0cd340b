"""Time the hot kernels under numba and under the pure-Python fallback.

Each backend runs in its own interpreter because the choice is fixed at
import time.  Usage:

    python benchmarks/bench_kernels.py [--repeat 3] [--json]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from lambdagen import backend
from lambdagen.boltzmann import ClosedSampler, sample_binary_tree
from lambdagen.remy import remy_shape, render_sk, sk_arrays
from lambdagen.rng import Rng

repeat = int(sys.argv[1])
# calibration is mpmath work shared by both backends; keep it out of the timings
closed = ClosedSampler(1_000, 0.1)
cases = {
    "remy_shape n=1e5": lambda r: remy_shape(100_000, r),
    "sk render n=1e5": lambda r: render_sk(*sk_arrays(100_000, r)),
    "binary tree n=2e3": lambda r: sample_binary_tree(2_000, 0.1, r),
    "5 closed terms n=1e3": lambda r: [closed.sample_tokens(r) for _ in range(5)],
}
# warm-up compiles (or loads cached) kernels outside the timings
for fn in cases.values():
    fn(Rng(0))
timings = {}
for name, fn in cases.items():
    best = float("inf")
    for i in range(repeat):
        rng = Rng(i + 1)
        t0 = time.perf_counter()
        fn(rng)
        best = min(best, time.perf_counter() - t0)
    timings[name] = best
print(json.dumps({"backend": backend(), "timings": timings}))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, LAMBDAGEN_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", action="store_true", help="print raw results")
    args = parser.parse_args()

    jit = run(False, args.repeat)
    py = run(True, args.repeat)
    if args.json:
        print(json.dumps({"numba": jit, "python": py}, indent=2))
        return
    print(f"{'case':<22}{'numba [s]':>12}{'python [s]':>12}{'speedup':>10}")
    for name, t_jit in jit["timings"].items():
        t_py = py["timings"][name]
        print(f"{name:<22}{t_jit:>12.4f}{t_py:>12.4f}{t_py / t_jit:>9.1f}x")


if __name__ == "__main__":
    main()
