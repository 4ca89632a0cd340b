"""The jitted kernels and the interpreted fallback must agree bit for bit."""
import json
import os
import subprocess
import sys

import pytest

SCRIPT = r"""
import hashlib, json
import numpy as np
from lambdagen import backend
from lambdagen.boltzmann import ClosedSampler, sample_binary_tree
from lambdagen.remy import remy_shape, render_sk, sk_arrays
from lambdagen.rng import Rng
from lambdagen.terms import render, tree_preorder

rng = Rng(2718)
out = {"backend": backend()}
out["u64"] = [rng.u64() for _ in range(5)]
out["below"] = [rng.randbelow(1000003) for _ in range(5)]
out["remy"] = hashlib.sha256(remy_shape(5000, rng).tobytes()).hexdigest()
out["sk"] = hashlib.sha256(render_sk(*sk_arrays(3000, rng)).encode()).hexdigest()
out["tree"] = tree_preorder(sample_binary_tree(60, 0.2, rng))
sampler = ClosedSampler(150, 0.2)
out["terms"] = [render(sampler.sample(rng)) for _ in range(3)]
out["stats"] = [sampler.stats.attempts, sampler.stats.too_small, sampler.stats.too_large]
print(json.dumps(out))
"""


def run_with(disable: bool) -> dict:
    env = dict(os.environ)
    env["LAMBDAGEN_DISABLE_NUMBA"] = "1" if disable else "0"
    proc = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True,
                          env=env, check=True)
    return json.loads(proc.stdout)


def test_fallback_matches_numba():
    pytest.importorskip("numba")
    jit = run_with(disable=False)
    py = run_with(disable=True)
    assert jit.pop("backend") == "numba"
    assert py.pop("backend") == "python"
    assert jit == py
