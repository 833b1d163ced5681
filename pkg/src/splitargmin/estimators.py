"""Location estimators, contrast variances, and normal-distribution numerics.

This module holds the numerical kernel shared by every inference procedure
in the package: column means, the variance of a two-column contrast, robust
location estimators (median-of-means and Catoni's M-estimator), and the
standard normal cdf/quantile pair. Everything here is a pure function of
its arguments.

Indices in public signatures are 1-based, matching the reporting
convention used throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional

import numpy as np

from .errors import DomainError, InputError

__all__ = [
    "ColumnStats",
    "ContrastSpec",
    "RobustParams",
    "column_means",
    "contrast_variance",
    "mom_estimate",
    "mom_blocks_theory",
    "catoni_estimate",
    "normal_cdf",
    "normal_quantile",
]


# ---------------------------------------------------------------------------
# input validation helpers

def as_sample(data, min_rows: int = 1) -> np.ndarray:
    """Validate and return ``data`` as an (n, d) float matrix.

    Raises
    ------
    InputError
        If the array is not two-dimensional or contains non-finite entries.
    DomainError
        If the matrix is empty, has fewer than two columns, or fewer than
        ``min_rows`` rows.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise InputError(f"expected a 2-d sample matrix, got shape {x.shape}")
    n, d = x.shape
    if n == 0 or d == 0:
        raise DomainError("sample is empty")
    if d < 2:
        raise DomainError(f"need at least 2 columns, got {d}")
    if n < min_rows:
        raise DomainError(f"need at least {min_rows} rows, got {n}")
    if not np.isfinite(x).all():
        raise InputError("sample contains non-finite entries")
    return x


def _as_vector(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise InputError(f"expected a 1-d vector, got shape {x.shape}")
    if x.size == 0:
        raise DomainError("vector is empty")
    if not np.isfinite(x).all():
        raise InputError("vector contains non-finite entries")
    return x


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class ColumnStats:
    """Per-column sample means together with the row count they came from."""

    means: np.ndarray
    count: int


@dataclass(frozen=True)
class ContrastSpec:
    """A two-column contrast (column ``r`` minus column ``k``), 1-based."""

    r: int
    k: int

    def __post_init__(self) -> None:
        if self.r < 1 or self.k < 1:
            raise DomainError(f"contrast indices must be >= 1, got ({self.r}, {self.k})")
        if self.r == self.k:
            raise DomainError("contrast needs two distinct indices")


@dataclass(frozen=True)
class RobustParams:
    """Configuration of a robust location estimator.

    ``mom_blocks=None`` means the block count is chosen as floor(sqrt(n))
    at call time. The block count must not exceed n/2 when used on a
    sample of size n.
    """

    kind: Literal["mom", "catoni"]
    mom_blocks: Optional[int] = None
    catoni_delta: float = 0.05

    def __post_init__(self) -> None:
        if self.kind not in ("mom", "catoni"):
            raise DomainError(f"unknown robust estimator kind {self.kind!r}")
        if self.mom_blocks is not None and self.mom_blocks < 1:
            raise DomainError("mom_blocks must be a positive integer")
        if not 0.0 < self.catoni_delta < 1.0:
            raise DomainError("catoni_delta must lie in (0, 1)")


# ---------------------------------------------------------------------------
# means and contrasts

def column_means(sample) -> ColumnStats:
    """Column-wise sample means.

    Parameters
    ----------
    sample : array-like, shape (n, d)
        Observation matrix, one row per draw, d >= 2 columns.
    """
    x = as_sample(sample)
    return ColumnStats(means=x.mean(axis=0), count=x.shape[0])


def contrast_variance(sample, c: ContrastSpec) -> float:
    """Unbiased sample variance of the per-row contrast ``X_r - X_k``.

    Works directly on the n per-row differences, so the cost is O(n)
    regardless of how many columns the sample has. The result coincides
    with the quadratic form gamma' Sigma gamma for the (n-1)-denominator
    sample covariance Sigma and gamma = e_r - e_k.
    """
    x = as_sample(sample, min_rows=2)
    d = x.shape[1]
    if c.r > d or c.k > d:
        raise DomainError(f"contrast ({c.r}, {c.k}) out of range for d={d}")
    diffs = x[:, c.r - 1] - x[:, c.k - 1]
    return float(np.var(diffs, ddof=1))


# ---------------------------------------------------------------------------
# median of means

def _block_starts(n: int, blocks: int) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.full(blocks, n // blocks, dtype=int)
    sizes[: n % blocks] += 1
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    return starts, sizes


def mom_estimate(values, blocks: int) -> float:
    """Median of block means over ``blocks`` contiguous blocks.

    The input order defines the blocks: the first (n mod blocks) blocks
    receive one extra element so the partition stays disjoint and as even
    as possible. The median of an even number of block means is the
    midpoint of the two central order statistics. With ``blocks=1`` this
    is exactly the arithmetic mean.
    """
    x = _as_vector(values)
    n = x.size
    if not 1 <= blocks <= n:
        raise DomainError(f"block count must satisfy 1 <= V <= n, got V={blocks}, n={n}")
    if blocks == 1:
        return float(x.mean())
    starts, sizes = _block_starts(n, blocks)
    means = np.add.reduceat(x, starts) / sizes
    return float(np.median(means))


def _mom_columns(x: np.ndarray, blocks: int) -> np.ndarray:
    """Column-wise median of means with a shared block layout."""
    n = x.shape[0]
    if not 1 <= blocks <= n:
        raise DomainError(f"block count must satisfy 1 <= V <= n, got V={blocks}, n={n}")
    if blocks == 1:
        return x.mean(axis=0)
    starts, sizes = _block_starts(n, blocks)
    means = np.add.reduceat(x, starts, axis=0) / sizes[:, None]
    return np.median(means, axis=0)


def mom_blocks_theory(n: int, c_n: float, c_n_prime: float) -> int:
    """Theoretical block-count rule V = ceil(4.5 * ceil(log(1/eta))).

    ``eta`` is the smallest of 1/2 and the largest of 1/c_n_prime,
    exp(-c_n), and exp(-n/18). The constants ``c_n`` and ``c_n_prime``
    have no universal default and must be supplied by the caller.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    if c_n <= 0 or c_n_prime <= 0:
        raise DomainError("c_n and c_n_prime must be positive")
    eta = min(0.5, max(1.0 / c_n_prime, math.exp(-c_n), math.exp(-n / 18.0)))
    return int(math.ceil(4.5 * math.ceil(math.log(1.0 / eta))))


# ---------------------------------------------------------------------------
# Catoni's M-estimator

_CATONI_MAX_ITER = 200


def _catoni_influence(u: np.ndarray) -> np.ndarray:
    # log(1 + u + u^2/2) for u >= 0, extended as an odd function
    au = np.abs(u)
    return np.sign(u) * np.log1p(au * (1.0 + 0.5 * au))


def _catoni_columns(x: np.ndarray, delta: float) -> np.ndarray:
    """Catoni location estimate of every column of ``x``, via bisection."""
    n = x.shape[0]
    if n < 2:
        raise DomainError("catoni estimate needs at least 2 values")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    log_inv = math.log(1.0 / delta)
    if n <= 2.0 * log_inv:
        raise DomainError(
            f"catoni estimate needs n > 2 log(1/delta) = {2.0 * log_inv:.4g}, got n={n}"
        )

    out = x[0].copy()  # zero-variance columns resolve to their common value
    s2 = x.var(axis=0, ddof=1)
    active = s2 > 0.0
    if not active.any():
        return out

    xa = x[:, active]
    s2a = s2[active]
    eta2 = 2.0 * s2a * log_inv / (n - 2.0 * log_inv)
    alpha = np.sqrt(2.0 * log_inv / (n * (s2a + eta2)))

    # The estimating equation g(theta) = sum_i f(alpha (x_i - theta)) is
    # strictly decreasing, and the bracket below has g(lo) > 0 > g(hi)
    # because |f(1)| bounds the per-term contribution at the endpoints.
    lo = xa.min(axis=0) - 1.0 / alpha
    hi = xa.max(axis=0) + 1.0 / alpha
    tol = 1e-10 * n
    theta = 0.5 * (lo + hi)
    for _ in range(_CATONI_MAX_ITER):
        g = _catoni_influence(alpha * (xa - theta)).sum(axis=0)
        done = np.abs(g) <= tol
        if done.all():
            break
        go_up = (g > 0.0) & ~done
        go_down = ~(g > 0.0) & ~done
        lo = np.where(go_up, theta, lo)
        hi = np.where(go_down, theta, hi)
        theta = np.where(done, theta, 0.5 * (lo + hi))

    out[active] = theta
    return out


def catoni_estimate(values, delta: float = 0.05) -> float:
    """Catoni's soft-truncation M-estimate of location.

    Solves sum_i f(alpha (x_i - theta)) = 0 for theta, where f is the
    odd influence function log(1 + u + u^2/2) and alpha is the usual
    variance-adjusted scale built from the confidence parameter
    ``delta``. The residual of the estimating equation at the returned
    value is at most 1e-10 * n.

    Raises
    ------
    DomainError
        If n <= 2 log(1/delta), where the scale is undefined.
    """
    x = _as_vector(values)
    if x.size < 2:
        raise DomainError("catoni estimate needs at least 2 values")
    return float(_catoni_columns(x[:, None], delta)[0])


# ---------------------------------------------------------------------------
# standard normal cdf and quantile
#
# Hand-rolled and vectorized so the package has no hard dependency beyond
# numpy. The cdf uses a positive-term series for the central region and
# the Laplace continued fraction for the Mills ratio in the tails; both
# are checked against an erfc-based oracle in the test suite.

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_INV_SQRT_TWO_PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_TAIL_CUT = 5.0
_SERIES_TERMS = 80
_CF_DEPTH = 128
_QUANTILE_ITERS = 96


def _erf_series(z: np.ndarray) -> np.ndarray:
    # erf(z) = 2 z exp(-z^2)/sqrt(pi) * sum_k (2 z^2)^k / (2k+1)!!
    # All terms are positive, so there is no cancellation; 80 terms are
    # fully converged for z <= TAIL_CUT/sqrt(2).
    z2 = 2.0 * z * z
    term = np.ones_like(z)
    acc = np.ones_like(z)
    for k in range(1, _SERIES_TERMS):
        term = term * (z2 / (2.0 * k + 1.0))
        acc = acc + term
    return 2.0 * _INV_SQRT_PI * z * np.exp(-z * z) * acc


def _mills_cf(a: np.ndarray) -> np.ndarray:
    # Upper tail via the Laplace continued fraction:
    #   1 - Phi(a) = phi(a) / (a + 1/(a + 2/(a + 3/(a + ...))))
    # evaluated backwards at fixed depth; relatively accurate for a >= cut.
    t = np.zeros_like(a)
    for k in range(_CF_DEPTH, 0, -1):
        t = k / (a + t)
    return _INV_SQRT_TWO_PI * np.exp(-0.5 * a * a) / (a + t)


def normal_cdf(x):
    """Standard normal cdf, elementwise; scalars in, float out."""
    arr = np.asarray(x, dtype=float)
    a = np.abs(arr)
    q = np.empty_like(a)  # upper-tail probability at |x|
    central = a < _TAIL_CUT
    if central.any():
        q[central] = 0.5 * (1.0 - _erf_series(a[central] / _SQRT2))
    tail = ~central
    if tail.any():
        q[tail] = _mills_cf(a[tail])
    out = np.where(arr >= 0.0, 1.0 - q, q)
    if arr.ndim == 0:
        return float(out)
    return out


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on (0, 1), elementwise.

    Computed by bisection against the cdf, which is monotone, so the
    result inherits the cdf's accuracy; the round trip
    ``normal_quantile(normal_cdf(x))`` reproduces x to well below 1e-6
    over [-6, 6].
    """
    arr = np.asarray(p, dtype=float)
    bad = ~np.isfinite(arr) | (arr <= 0.0) | (arr >= 1.0)
    if bad.any():
        raise DomainError("quantile needs p in the open interval (0, 1)")
    lo = np.full(arr.shape, -40.0)
    hi = np.full(arr.shape, 40.0)
    for _ in range(_QUANTILE_ITERS):
        mid = 0.5 * (lo + hi)
        below = normal_cdf(mid) < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    if arr.ndim == 0:
        return float(out)
    return out


@lru_cache(maxsize=1024)
def _cached_quantile(p: float) -> float:
    """Memoized scalar quantile for hot paths that reuse a few levels."""
    return float(normal_quantile(p))
