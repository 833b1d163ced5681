"""Runner-up selection on the selection half of a split sample.

Given a target index r, the selectors estimate which competing column has
the smallest location. The plug-in rule compares raw location estimates;
the adjusted rule divides each location gap by the standard deviation of
the corresponding per-row contrast, so noisy columns are not favoured
merely for being noisy. Either rule can run on robust locations
(median-of-means or Catoni) instead of plain column means.

Ties always resolve to the smallest index, which keeps runs reproducible.
Returned indices are 1-based and never equal to r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DomainError
from .estimators import (
    RobustParams,
    _catoni_columns,
    _mom_columns,
    as_sample,
)

__all__ = ["SelectorKind", "column_locations", "select_plugin", "select_adjusted", "select"]


@dataclass(frozen=True)
class SelectorKind:
    """Which selection rule to run, and on which location estimates.

    ``base`` picks the comparison rule, ``robust`` optionally swaps the
    plain column means for a robust location estimator, and ``kappa`` is
    the floor applied to contrast standard deviations in the adjusted
    rule so a degenerate contrast cannot blow up the score.
    """

    base: Literal["plugin", "adjusted"] = "plugin"
    robust: Optional[RobustParams] = None
    kappa: float = 1e-8

    def __post_init__(self) -> None:
        if self.base not in ("plugin", "adjusted"):
            raise DomainError(f"unknown selector base {self.base!r}")
        if self.robust is not None and not isinstance(self.robust, RobustParams):
            raise DomainError("robust must be a RobustParams instance or None")
        if self.kappa <= 0:
            raise DomainError("kappa must be positive")


def column_locations(d2, robust: Optional[RobustParams] = None) -> np.ndarray:
    """Location estimate of every column of the selection half.

    Plain column means when ``robust`` is None; otherwise median-of-means
    (block count floor(sqrt(n)) unless configured, capped at n/2) or the
    Catoni estimator with the configured delta.
    """
    return _locations_raw(as_sample(d2), robust)


def _check_target(d: int, r: int) -> None:
    if d < 2:
        raise DomainError(f"selection needs at least 2 columns, got {d}")
    if not 1 <= r <= d:
        raise DomainError(f"target index r={r} out of range for d={d}")


def _locations_raw(x: np.ndarray, robust: Optional[RobustParams]) -> np.ndarray:
    if robust is None:
        return x.mean(axis=0)
    n = x.shape[0]
    if robust.kind == "mom":
        blocks = robust.mom_blocks if robust.mom_blocks is not None else max(1, int(math.isqrt(n)))
        if blocks > n // 2 and n >= 2:
            raise DomainError(f"median-of-means needs V <= n/2, got V={blocks}, n={n}")
        return _mom_columns(x, blocks)
    return _catoni_columns(x, robust.catoni_delta)


def _select_raw(x: np.ndarray, r0: int, selector: SelectorKind) -> int:
    """Selection core on a pre-validated matrix; r0 and result are 0-based."""
    locs = _locations_raw(x, selector.robust)
    if selector.base == "plugin":
        locs = locs.copy()
        locs[r0] = np.inf
        return int(np.argmin(locs))
    diffs = x - x[:, r0][:, None]
    sds = np.sqrt(np.var(diffs, axis=0, ddof=1))
    scores = (locs - locs[r0]) / np.maximum(sds, selector.kappa)
    scores[r0] = np.inf
    return int(np.argmin(scores))


def select_plugin(d2, r: int, robust: Optional[RobustParams] = None) -> int:
    """Smallest index (1-based) minimizing the location over columns k != r."""
    x = as_sample(d2)
    _check_target(x.shape[1], r)
    return _select_raw(x, r - 1, SelectorKind("plugin", robust)) + 1


def select_adjusted(
    d2,
    r: int,
    robust: Optional[RobustParams] = None,
    kappa: float = 1e-8,
) -> int:
    """Noise-adjusted runner-up: minimize (loc_k - loc_r) / (sd_k v kappa).

    ``sd_k`` is the plain sample standard deviation of the per-row
    contrast X_k - X_r on the selection half, floored at ``kappa``; the
    robust option affects locations only, never the denominator.
    """
    x = as_sample(d2, min_rows=2)
    _check_target(x.shape[1], r)
    return _select_raw(x, r - 1, SelectorKind("adjusted", robust, kappa)) + 1


def select(d2, r: int, selector: SelectorKind) -> int:
    """Dispatch to the configured selection rule."""
    min_rows = 1 if selector.base == "plugin" else 2
    x = as_sample(d2, min_rows=min_rows)
    _check_target(x.shape[1], r)
    return _select_raw(x, r - 1, selector) + 1
