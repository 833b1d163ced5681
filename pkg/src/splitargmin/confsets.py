"""Confidence sets for the argmin index and for the smallest mean.

Inverting the argmin test gives set-valued answers: run the level-alpha
test of "column k is the argmin" for every k and keep the survivors.
With the per-test (pointwise) level this covers each true argmin index
marginally; the one-step variant tests at alpha/d and the two-step
variant first screens the candidate list on the selection half, then
retests everything on the full sample at a level that only pays for the
screened-in indices. The same screening idea yields an interval for the
smallest mean itself, and :func:`confusion_set` reports which population
means sit close enough to the minimum to make any of this hard.

Every stage shares a single row shuffle across its d per-index tests.
That is what the construction means: one split of the data, d decisions
read off it. Giving each index its own shuffle would also be valid
pointwise, but the joint behaviour (and hence the size of the sets)
would be quite different.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from ._rng import derive_seed
from .argmin import bonferroni_test, split_sample
from .errors import DomainError
from .estimators import _as_vector, _cached_quantile, as_sample
from .multisplit import MultiSplitConfig, multisplit_test
from .selection import SelectorKind, _locations_raw

__all__ = [
    "IndexSet",
    "Interval",
    "ConfusionDiagnostic",
    "Tester",
    "pointwise_confset",
    "mcs_one_step",
    "mcs_two_step",
    "smallest_mean_c1",
    "smallest_mean_c2",
    "confusion_set",
]

_TAG_PRESCREEN = 3
_TAG_FINAL = 4
_TAG_SCREEN_SET = 5

#: A per-index test recipe: a selector (single-split test), a multi-split
#: configuration, or the string "bonferroni" for the no-split baseline.
Tester = Union[SelectorKind, MultiSplitConfig, str]


@dataclass(frozen=True)
class IndexSet:
    """Sorted tuple of 1-based column indices."""

    members: tuple[int, ...]

    def __post_init__(self) -> None:
        cleaned = tuple(sorted({int(k) for k in self.members}))
        if cleaned and cleaned[0] < 1:
            raise DomainError(f"indices are 1-based, got {cleaned[0]}")
        object.__setattr__(self, "members", cleaned)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, k: object) -> bool:
        return k in self.members


@dataclass(frozen=True)
class Interval:
    """A closed interval on the real line."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise DomainError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class ConfusionDiagnostic:
    """Competitors close enough to the best mean to be mistaken for it.

    ``critical_radius`` is sqrt((1 v log cardinality)/n), the gap scale
    below which no procedure can reliably separate the target from the
    set; with zero or one member it degrades to sqrt(1/n).
    """

    members: IndexSet
    cardinality: int
    critical_radius: float

    def __post_init__(self) -> None:
        if self.cardinality != len(self.members):
            raise DomainError("cardinality must equal the member count")


def _check_level(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")


def _select_all(d2: np.ndarray, selector: SelectorKind) -> np.ndarray:
    """Runner-up (0-based) for every target index on one selection half.

    Matches d independent calls of :func:`splitargmin.selection.select`
    on the same half, but shares the work: the plug-in rule only needs
    the two smallest locations, and the adjusted rule gets all pairwise
    contrast variances from one Gram product of the centered columns.
    """
    locs = _locations_raw(d2, selector.robust)
    d = locs.size
    if selector.base == "plugin":
        order = np.argsort(locs, kind="stable")
        out = np.full(d, order[0], dtype=np.intp)
        out[order[0]] = order[1]
        return out
    n2 = d2.shape[0]
    centered = d2 - d2.mean(axis=0)
    gram = centered.T @ centered
    diag = np.diag(gram)
    pair_var = (diag[None, :] + diag[:, None] - 2.0 * gram) / (n2 - 1)
    sds = np.sqrt(np.maximum(pair_var, 0.0))
    scores = (locs[None, :] - locs[:, None]) / np.maximum(sds, selector.kappa)
    np.fill_diagonal(scores, np.inf)
    return np.argmin(scores, axis=1)


def _shared_split_stats(d1: np.ndarray, d2: np.ndarray, selector: SelectorKind) -> np.ndarray:
    """Studentized statistic of every index on one split, vectorized.

    Entry k-1 equals what split_test would report for target k with the
    same halves, degenerate-contrast conventions included.
    """
    s_idx = _select_all(d2, selector)
    n1, d = d1.shape
    means = d1.mean(axis=0)
    diffs = d1 - d1[:, s_idx]
    gaps = means - means[s_idx]
    var = np.var(diffs, axis=0, ddof=1)
    stats = np.zeros(d)
    live = var > 0.0
    stats[live] = math.sqrt(n1) * gaps[live] / np.sqrt(var[live])
    degenerate = ~live & (gaps != 0.0)
    stats[degenerate] = np.where(gaps[degenerate] > 0, math.inf, -math.inf)
    return stats


def _stage_rejections(data, alpha: float, tester: Tester, seed: int) -> np.ndarray:
    """Boolean rejection flags of the level-alpha test of each index."""
    _check_level(alpha)
    if isinstance(tester, SelectorKind):
        x = as_sample(data, min_rows=4)
        view = split_sample(x, seed)
        stats = _shared_split_stats(view.d1, view.d2, tester)
        return stats > _cached_quantile(1.0 - alpha)
    if isinstance(tester, MultiSplitConfig):
        x = as_sample(data, min_rows=4)
        cfg = replace(tester, seed=seed)
        return np.array(
            [multisplit_test(x, r, alpha, cfg).reject for r in range(1, x.shape[1] + 1)]
        )
    if tester == "bonferroni":
        x = as_sample(data, min_rows=2)
        return np.array(
            [bonferroni_test(x, r, alpha).reject for r in range(1, x.shape[1] + 1)]
        )
    raise DomainError(f"unknown tester {tester!r}")


def pointwise_confset(data, alpha: float, tester: Tester, seed: int) -> IndexSet:
    """Indices whose level-alpha argmin test accepts.

    Each true argmin index lands in the set with probability at least
    1 - alpha asymptotically; nothing is claimed about covering the
    whole argmin set at once (see :func:`mcs_one_step` for that).
    """
    rejected = _stage_rejections(data, alpha, tester, seed)
    return IndexSet(tuple(np.flatnonzero(~rejected) + 1))


def mcs_one_step(data, alpha: float, tester: Tester, seed: int) -> IndexSet:
    """Uniform-coverage argmin set by Bonferroni: each test at alpha/d."""
    _check_level(alpha)
    x = as_sample(data, min_rows=2)
    return pointwise_confset(x, alpha / x.shape[1], tester, seed)


def mcs_two_step(data, alpha: float, tester: Tester, seed: int) -> IndexSet:
    """Uniform-coverage argmin set with a data-driven correction.

    The selection half is screened at the vanishing level 1/sqrt(|D2|);
    the full sample is then retested at alpha divided by the number of
    survivors (at least one, so the level never exceeds alpha). With few
    plausible argmins this is far less conservative than alpha/d.
    """
    _check_level(alpha)
    x = as_sample(data, min_rows=8)
    view = split_sample(x, seed)
    n2 = view.d2.shape[0]
    screened_out = _stage_rejections(
        view.d2, 1.0 / math.sqrt(n2), tester, derive_seed(seed, _TAG_PRESCREEN)
    )
    survivors = int((~screened_out).sum())
    final_level = alpha / max(1, survivors)
    rejected = _stage_rejections(x, final_level, tester, derive_seed(seed, _TAG_FINAL))
    return IndexSet(tuple(np.flatnonzero(~rejected) + 1))


def _minimum_band(x: np.ndarray, alpha: float) -> Interval:
    """Min over columns of simultaneous z-limits at level alpha/(2d)."""
    n, d = x.shape
    means = x.mean(axis=0)
    half = _cached_quantile(1.0 - alpha / (2 * d)) * x.std(axis=0, ddof=1) / math.sqrt(n)
    return Interval(lo=float(np.min(means - half)), hi=float(np.min(means + half)))


def smallest_mean_c1(data, alpha: float) -> Interval:
    """Interval for the smallest column mean, Bonferroni over all columns.

    Both endpoints are minima of per-column z-limits at level
    alpha/(2d), so the interval always brackets the smallest sample
    mean. Simple and seedless, at the price of paying for all d columns.
    """
    _check_level(alpha)
    x = as_sample(data, min_rows=2)
    return _minimum_band(x, alpha)


def smallest_mean_c2(data, alpha: float, seed: int) -> tuple[Interval, int]:
    """Screened interval for the smallest mean, and the shortlist size.

    The selection half shortlists plausible argmin columns through the
    two-step set at the shrinking level alpha/log(|D2|) (adjusted
    selector); the inference half then pays Bonferroni only over the
    shortlist. An empty shortlist falls back to all columns. Whether the
    screening is worth it depends on how many near-minima the data has:
    a short list beats :func:`smallest_mean_c1` on width, a long one
    loses to it because only half the rows remain for the interval.
    """
    _check_level(alpha)
    x = as_sample(data, min_rows=16)
    view = split_sample(x, seed)
    n2 = view.d2.shape[0]
    shortlist = mcs_two_step(
        view.d2,
        alpha / math.log(n2),
        SelectorKind("adjusted"),
        derive_seed(seed, _TAG_SCREEN_SET),
    )
    members = shortlist.members or tuple(range(1, x.shape[1] + 1))
    kept = view.d1[:, np.asarray(members, dtype=np.intp) - 1]
    return _minimum_band(kept, alpha), len(members)


def confusion_set(mu, r: int, n: int, radius_scale: float) -> ConfusionDiagnostic:
    """Population diagnostic: which competitors can be confused with r.

    A column k lands in the set when it is neither r nor an exact
    argmin among the competitors, its gap above the overall minimum is
    at least half of r's own gap, and at most
    radius_scale * sqrt(log(d)/n). Adding a constant to all of ``mu``
    changes nothing; only gaps matter.
    """
    vec = _as_vector(mu)
    d = vec.size
    if d < 2:
        raise DomainError(f"need at least 2 means, got {d}")
    if not 1 <= r <= d:
        raise DomainError(f"target index r={r} out of range for d={d}")
    if n < 1:
        raise DomainError("n must be a positive integer")
    if not radius_scale > 0:
        raise DomainError("radius_scale must be positive")
    gaps = vec - vec.min()
    rivals = np.delete(np.arange(d), r - 1)
    rival_best = rivals[vec[rivals] == vec[rivals].min()]
    eligible = np.ones(d, dtype=bool)
    eligible[r - 1] = False
    eligible[rival_best] = False
    lower = gaps[r - 1] / 2.0
    upper = radius_scale * math.sqrt(math.log(d) / n)
    inside = eligible & (gaps >= lower) & (gaps <= upper)
    members = IndexSet(tuple(np.flatnonzero(inside) + 1))
    tau = len(members)
    radius = math.sqrt(max(1.0, math.log(tau)) / n) if tau >= 1 else math.sqrt(1.0 / n)
    return ConfusionDiagnostic(members=members, cardinality=tau, critical_radius=radius)
