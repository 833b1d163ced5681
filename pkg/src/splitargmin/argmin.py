"""Split-sample argmin test and the Bonferroni baseline.

The main procedure tests H0: "column r attains the smallest population
mean". The rows are shuffled once with a seeded permutation and cut into
an inference half D1 and a selection half D2. A runner-up column is
chosen on D2 (any rule measurable in D2 is allowed here, see
:mod:`splitargmin.selection`), and the one-sided studentized contrast of
column r against that runner-up is computed on D1 and compared with the
standard normal quantile. Because selection never sees D1, the statistic
is asymptotically standard normal under the null regardless of the
number of columns.

The Bonferroni baseline tests the same hypothesis without splitting:
one-sided paired z-tests of column r against every other column, each at
level alpha/(d-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import rng_for
from .errors import DomainError
from .estimators import _cached_quantile, as_sample, normal_cdf
from .selection import SelectorKind, select

__all__ = [
    "SplitView",
    "TestOutcome",
    "split_sample",
    "studentized_statistic",
    "split_test",
    "bonferroni_test",
]


@dataclass(frozen=True)
class SplitView:
    """A seeded partition of the rows into the two working halves."""

    d1: np.ndarray
    d2: np.ndarray
    seed: int


@dataclass(frozen=True)
class TestOutcome:
    """Everything a single test run reports.

    ``selected`` is the 1-based runner-up index. ``seed`` is the split
    seed (None for the Bonferroni baseline, which never splits). The
    rejection rule is always ``statistic > threshold``; for single-split
    tests ``p_value`` equals 1 - Phi(statistic), for resampling-calibrated
    tests it is the empirical upper tail probability.
    """

    statistic: float
    threshold: float
    p_value: float
    selected: int
    reject: bool
    alpha: float
    seed: Optional[int]


def split_sample(data, seed: int) -> SplitView:
    """Shuffle the rows with ``seed`` and split them into two halves.

    The inference half D1 receives floor(n/2) rows, the selection half
    D2 the rest, so with an odd row count the extra observation goes to
    selection. Deterministic given (data, seed).
    """
    x = as_sample(data, min_rows=4)
    n = x.shape[0]
    perm = rng_for(seed).permutation(n)
    n1 = n // 2
    return SplitView(d1=x[perm[:n1]], d2=x[perm[n1:]], seed=seed)


def studentized_statistic(d1, r: int, s_hat: int) -> float:
    """One-sided studentized contrast of column r against column s_hat.

    Returns sqrt(n) * (mean_r - mean_s) / sd of the per-row differences
    (n-1 denominator). A degenerate contrast (zero variance) yields 0.0
    when the mean difference is also zero, and a signed infinity
    otherwise: exact ties carry no evidence, exact separations carry
    infinite evidence.
    """
    x = as_sample(d1, min_rows=2)
    d = x.shape[1]
    if not (1 <= r <= d and 1 <= s_hat <= d):
        raise DomainError(f"indices ({r}, {s_hat}) out of range for d={d}")
    if r == s_hat:
        raise DomainError("target and runner-up must differ")
    diffs = x[:, r - 1] - x[:, s_hat - 1]
    n = diffs.size
    mean = float(diffs.mean())
    var = float(np.var(diffs, ddof=1))
    if var == 0.0:
        if mean == 0.0:
            return 0.0
        return math.inf if mean > 0 else -math.inf
    return math.sqrt(n) * mean / math.sqrt(var)


def split_test(data, r: int, alpha: float, selector: SelectorKind, seed: int) -> TestOutcome:
    """Single-split argmin test of H0: column r has the smallest mean.

    Rejects when the studentized inference-half contrast against the
    selected runner-up exceeds the 1-alpha normal quantile.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    view = split_sample(data, seed)
    s_hat = select(view.d2, r, selector)
    statistic = studentized_statistic(view.d1, r, s_hat)
    threshold = _cached_quantile(1.0 - alpha)
    return TestOutcome(
        statistic=statistic,
        threshold=threshold,
        p_value=float(1.0 - normal_cdf(statistic)),
        selected=s_hat,
        reject=bool(statistic > threshold),
        alpha=alpha,
        seed=seed,
    )


def paired_statistics(data, r: int) -> np.ndarray:
    """Full-sample one-sided studentized contrasts of column r vs every k.

    Entry k-1 holds the statistic for the contrast r minus k, with the
    same degenerate-variance conventions as :func:`studentized_statistic`;
    the entry at r-1 is -inf so it never wins a maximum.
    """
    x = as_sample(data, min_rows=2)
    d = x.shape[1]
    if not 1 <= r <= d:
        raise DomainError(f"target index r={r} out of range for d={d}")
    diffs = x[:, r - 1][:, None] - x
    n = x.shape[0]
    means = diffs.mean(axis=0)
    var = ((diffs - means) ** 2).sum(axis=0) / (n - 1)
    stats = np.zeros(d)
    pos = var > 0.0
    stats[pos] = math.sqrt(n) * means[pos] / np.sqrt(var[pos])
    degenerate = ~pos & (means != 0.0)
    stats[degenerate] = np.where(means[degenerate] > 0, math.inf, -math.inf)
    stats[r - 1] = -math.inf
    return stats


def bonferroni_test(data, r: int, alpha: float) -> TestOutcome:
    """Bonferroni-corrected one-sided paired z-tests, no sample splitting.

    Rejects when the largest of the d-1 contrast statistics exceeds the
    normal quantile at 1 - alpha/(d-1); the reported p-value is the
    Bonferroni-inflated upper tail of that maximum, capped at 1.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    x = as_sample(data, min_rows=2)
    d = x.shape[1]
    stats = paired_statistics(x, r)
    best = int(np.argmax(stats))
    statistic = float(stats[best])
    threshold = _cached_quantile(1.0 - alpha / (d - 1))
    p_value = min(1.0, (d - 1) * float(1.0 - normal_cdf(statistic)))
    return TestOutcome(
        statistic=statistic,
        threshold=threshold,
        p_value=p_value,
        selected=best + 1,
        reject=bool(statistic > threshold),
        alpha=alpha,
        seed=None,
    )
