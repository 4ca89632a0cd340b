"""Shared statistics for the uniformity tests."""
from collections import Counter

from scipy.stats import chisquare

ALPHA = 0.001


def uniform_pvalue(observations, support) -> float:
    """Chi-square p-value of ``observations`` against the uniform law on
    ``support``; fails fast if anything lands outside it."""
    counts = Counter(observations)
    stray = set(counts) - set(support)
    assert not stray, f"outcomes outside the support: {sorted(stray)[:3]}"
    return chisquare([counts.get(s, 0) for s in support]).pvalue
