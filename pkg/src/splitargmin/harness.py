"""Scenario generators and the Monte Carlo experiment runner.

The simulation studies all share one shape: draw n rows from a location
family with some mean vector and covariance, run a procedure, tally how
often it rejects (or covers, for set- and interval-valued procedures),
and repeat a few thousand times. This module provides the mean and
covariance scenarios used in those studies, Gaussian and heavy-tailed
row generators, a replication runner with per-rep derived seeds, and
the named suites behind the ``simulate`` command.

Replications are independent given their seeds: rep i draws its data
from the child seed (seed, i, 0) and its procedure randomness from
(seed, i, 1), so a run can be split across processes, reproduced rep by
rep, or extended without disturbing earlier draws. Two methods run with
the same seed see the same data stream, which pairs their Monte Carlo
estimates and makes power differences much better determined than the
individual powers.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Optional

import numpy as np

from ._rng import derive_seed, rng_for
from .argmin import bonferroni_test, split_test
from .confsets import mcs_one_step, mcs_two_step, pointwise_confset, smallest_mean_c1, smallest_mean_c2
from .errors import DomainError, SplitArgminError
from .estimators import RobustParams, _as_vector
from .multisplit import MultiSplitConfig, multisplit_test
from .selection import SelectorKind

__all__ = [
    "MeanScenario",
    "CovScenario",
    "Experiment",
    "Method",
    "MCResult",
    "SuiteRow",
    "build_mean",
    "toeplitz_cholesky",
    "gen_gaussian",
    "gen_student_t3",
    "run_monte_carlo",
    "standard_method",
    "suite_names",
    "run_suite",
    "write_csv",
    "write_json",
]

_MEAN_KINDS = (
    "a",
    "b",
    "c",
    "a0",
    "b0",
    "c0",
    "tied",
    "tied-far",
    "highdim-null",
    "highdim-alt",
    "tied-block",
)


@dataclass(frozen=True)
class MeanScenario:
    """A named mean vector of length ``d``.

    Kinds "a", "b", "c" are the alternative signal shapes (one weak
    column hiding the true argmin, a linear ramp, and a spiky vector
    with a few near-ties); their "0"-suffixed twins replace the first
    entry by the vector minimum, turning H0 for column 1 true. "tied"
    is all zeros, "tied-far" four zeros with the rest parked at 10,
    "highdim-null"/"highdim-alt" the two-column race used in the
    dimension sweep, and "tied-block" puts ``theta_size`` exact argmins
    at zero with everything else at ``zeta``.
    """

    kind: str
    d: int
    zeta: Optional[float] = None
    theta_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in _MEAN_KINDS:
            raise DomainError(f"unknown mean scenario kind {self.kind!r}")
        if self.d < 2:
            raise DomainError("mean scenarios need d >= 2")
        if self.kind == "tied-block":
            if self.zeta is None or self.theta_size is None:
                raise DomainError("tied-block needs both zeta and theta_size")
            if not 1 <= self.theta_size <= self.d:
                raise DomainError(
                    f"theta_size must lie in 1..{self.d}, got {self.theta_size}"
                )
            if not self.zeta >= 0:
                raise DomainError("zeta must be nonnegative")
        elif self.zeta is not None or self.theta_size is not None:
            raise DomainError(f"kind {self.kind!r} takes no zeta/theta_size")


def build_mean(scn: MeanScenario) -> np.ndarray:
    """Materialize the scenario's mean vector."""
    d = scn.d
    kind = scn.kind
    if kind in ("b", "b0") and d < 3:
        raise DomainError("ramp scenarios need d >= 3")
    if kind in ("c", "c0") and d < 5:
        raise DomainError("spiky scenarios need d >= 5")
    if kind == "tied-far" and d < 5:
        raise DomainError("tied-far needs d >= 5")
    if kind in ("highdim-null", "highdim-alt") and d < 3:
        raise DomainError("highdim scenarios need d >= 3")

    if kind in ("a", "a0"):
        mu = np.full(d, 0.1)
        mu[1] = 0.0
        if kind == "a0":
            mu[0] = 0.0
    elif kind in ("b", "b0"):
        mu = 0.1 + (np.arange(1, d + 1) - 2.0) / (d - 2.0) * 0.9
        mu[0] = 0.2 if kind == "b" else 0.1
    elif kind in ("c", "c0"):
        mu = np.full(d, 10.0)
        mu[1:4] = 0.0
        mu[0] = 0.05 if kind == "c" else 0.0
    elif kind == "tied":
        mu = np.zeros(d)
    elif kind == "tied-far":
        mu = np.full(d, 10.0)
        mu[:4] = 0.0
    elif kind == "highdim-null":
        mu = np.ones(d)
        mu[:2] = 0.0
    elif kind == "highdim-alt":
        mu = np.ones(d)
        mu[0] = 0.15
        mu[1] = 0.0
    else:  # tied-block
        mu = np.full(d, float(scn.zeta))
        mu[: scn.theta_size] = 0.0
    return mu


_COV_KINDS = ("toeplitz", "toeplitz-unequal", "diag-unequal")


@dataclass(frozen=True)
class CovScenario:
    """Covariance recipe: Toeplitz correlation rho^|j-k| times variances.

    "toeplitz" uses unit variances, the "unequal" kinds set the variance
    to 20 from the third column on (the first two stay at 1), and
    "diag-unequal" is the rho=0 special case used in the dimension
    sweep.
    """

    kind: str
    d: int
    rho: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _COV_KINDS:
            raise DomainError(f"unknown covariance kind {self.kind!r}")
        if self.d < 2:
            raise DomainError("covariance scenarios need d >= 2")
        if not abs(self.rho) < 1:
            raise DomainError(f"|rho| must be < 1, got {self.rho}")
        if self.kind == "diag-unequal" and self.rho != 0.0:
            raise DomainError("diag-unequal is diagonal; rho must be 0")

    def variances(self) -> np.ndarray:
        var = np.ones(self.d)
        if self.kind in ("toeplitz-unequal", "diag-unequal"):
            var[2:] = 20.0
        return var


def toeplitz_cholesky(rho: float, d: int, diag=None) -> np.ndarray:
    """Lower Cholesky factor of diag^{1/2} R diag^{1/2}, R_jk = rho^|j-k|.

    ``diag`` may be a scalar or a length-d vector of variances (default
    all ones). The factor L satisfies L L^T = Sigma to square-root
    machine precision; rows of L @ z with standard normal z then carry
    exactly the requested covariance.
    """
    if d < 1:
        raise DomainError("dimension must be positive")
    if not abs(rho) < 1:
        raise DomainError(f"|rho| must be < 1, got {rho}")
    if diag is None:
        var = np.ones(d)
    else:
        var = np.broadcast_to(np.asarray(diag, dtype=float), (d,)).copy()
    if not np.all(var > 0):
        raise DomainError("variances must be positive")
    scale = np.sqrt(var)
    if rho == 0.0:
        return np.diag(scale)
    corr = rho ** np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    sigma = scale[:, None] * corr * scale[None, :]
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as err:  # unreachable for |rho| < 1
        raise DomainError(f"covariance factorization failed: {err}") from err


@lru_cache(maxsize=32)
def _scenario_scale(kind: str, d: int, rho: float):
    """Cached (cholesky, diagonal-scale) pair for a covariance scenario.

    Exactly one of the two entries is not None: diagonal scenarios keep
    the per-column scale vector so generation is a broadcast multiply
    instead of a d x d product.
    """
    cov = CovScenario(kind, d, rho)
    var = cov.variances()
    if rho == 0.0:
        scale = np.sqrt(var)
        scale.flags.writeable = False
        return None, scale
    factor = toeplitz_cholesky(rho, d, var)
    factor.flags.writeable = False
    return factor, None


def _colored_rows(z: np.ndarray, cov: CovScenario) -> np.ndarray:
    factor, scale = _scenario_scale(cov.kind, cov.d, cov.rho)
    if factor is None:
        return z * scale
    return z @ factor.T


def gen_gaussian(mu, cov: CovScenario, rows: int, seed: int) -> np.ndarray:
    """Draw ``rows`` i.i.d. N(mu, Sigma) observations, seeded."""
    loc = _as_vector(mu)
    if loc.size != cov.d:
        raise DomainError(f"mean length {loc.size} != covariance dimension {cov.d}")
    if rows < 1:
        raise DomainError("rows must be positive")
    z = rng_for(seed).standard_normal((rows, cov.d))
    return loc + _colored_rows(z, cov)


def gen_student_t3(mu, cov: CovScenario, rows: int, seed: int) -> np.ndarray:
    """Draw multivariate t rows with 3 degrees of freedom, location mu.

    Each row is mu + L z / sqrt(u/3) with z standard normal and u an
    independent chi-squared(3) variable, giving finite variance but an
    infinite third moment. The normal block is drawn before the mixing
    variables, so the two generators agree on z for a given seed.
    """
    loc = _as_vector(mu)
    if loc.size != cov.d:
        raise DomainError(f"mean length {loc.size} != covariance dimension {cov.d}")
    if rows < 1:
        raise DomainError("rows must be positive")
    rng = rng_for(seed)
    z = rng.standard_normal((rows, cov.d))
    u = rng.chisquare(3.0, size=rows)
    return loc + _colored_rows(z, cov) / np.sqrt(u / 3.0)[:, None]


@dataclass(frozen=True)
class Experiment:
    """One simulation cell: data law, sample size, level, and target."""

    name: str
    mean: MeanScenario
    cov: CovScenario
    rows: int
    alpha: float = 0.05
    target: int = 1
    tails: Literal["gaussian", "t3"] = "gaussian"

    def __post_init__(self) -> None:
        if self.mean.d != self.cov.d:
            raise DomainError("mean and covariance dimensions differ")
        if self.rows < 4:
            raise DomainError("experiments need at least 4 rows")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if not 1 <= self.target <= self.mean.d:
            raise DomainError(f"target {self.target} out of range for d={self.mean.d}")
        if self.tails not in ("gaussian", "t3"):
            raise DomainError(f"unknown tail kind {self.tails!r}")


@dataclass(frozen=True)
class Method:
    """A procedure under study, picklable so reps can fan out to workers.

    ``kind`` "test" tallies rejections of the target; "set" tallies
    uniform coverage (every true argmin inside) and set size; "interval"
    tallies coverage of the smallest mean, width, and the column count
    the width was paid for. A test with no selector is the Bonferroni
    baseline; ``splits`` > 1 aggregates that many random splits with a
    resampling-calibrated threshold.
    """

    name: str
    kind: Literal["test", "set", "interval"]
    selector: Optional[SelectorKind] = None
    splits: int = 1
    subsamples: int = 500
    variant: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in ("test", "set", "interval"):
            raise DomainError(f"unknown method kind {self.kind!r}")
        if self.kind == "set" and self.variant not in ("pointwise", "one-step", "two-step"):
            raise DomainError(f"set methods need a variant, got {self.variant!r}")
        if self.kind == "interval" and self.variant not in ("c1", "c2"):
            raise DomainError(f"interval methods need variant c1 or c2, got {self.variant!r}")
        if self.splits < 1:
            raise DomainError("splits must be >= 1")


@dataclass(frozen=True)
class MCResult:
    """Aggregated Monte Carlo estimates for one (experiment, method) cell."""

    rate: float
    se: float
    reps: int
    avg_set_size: Optional[float] = None
    avg_width: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise DomainError(f"rate must lie in [0, 1], got {self.rate}")
        if self.reps < 1:
            raise DomainError("reps must be >= 1")


@dataclass(frozen=True)
class SuiteRow:
    """One emitted table line."""

    scenario: str
    method: str
    alpha: float
    result: MCResult
    wall_ms: float


def _generate(exp: Experiment, mu: np.ndarray, seed: int) -> np.ndarray:
    if exp.tails == "t3":
        return gen_student_t3(mu, exp.cov, exp.rows, seed)
    return gen_gaussian(mu, exp.cov, exp.rows, seed)


def _run_once(method: Method, data: np.ndarray, exp: Experiment, seed: int):
    if method.kind == "test":
        if method.selector is None:
            return bonferroni_test(data, exp.target, exp.alpha)
        if method.splits > 1:
            cfg = MultiSplitConfig(
                splits=method.splits,
                subsamples=method.subsamples,
                base_selector=method.selector,
                seed=seed,
            )
            return multisplit_test(data, exp.target, exp.alpha, cfg)
        return split_test(data, exp.target, exp.alpha, method.selector, seed)
    if method.kind == "set":
        tester = method.selector if method.selector is not None else "bonferroni"
        if method.variant == "pointwise":
            return pointwise_confset(data, exp.alpha, tester, seed)
        if method.variant == "one-step":
            return mcs_one_step(data, exp.alpha, tester, seed)
        return mcs_two_step(data, exp.alpha, tester, seed)
    if method.variant == "c1":
        return smallest_mean_c1(data, exp.alpha)
    return smallest_mean_c2(data, exp.alpha, seed)


def _accumulate(exp: Experiment, method: Method, start: int, stop: int, seed: int):
    """Tally (hits, set sizes, widths) over the rep range [start, stop)."""
    mu = build_mean(exp.mean)
    mu_star = float(mu.min())
    truth = frozenset(int(k) for k in np.flatnonzero(mu == mu_star) + 1)
    hits = 0
    size_sum = 0.0
    width_sum = 0.0
    for rep in range(start, stop):
        data_seed = derive_seed(seed, rep, 0)
        proc_seed = derive_seed(seed, rep, 1)
        data = _generate(exp, mu, data_seed)
        try:
            out = _run_once(method, data, exp, proc_seed)
        except SplitArgminError as err:
            raise type(err)(
                f"{method.name} failed on rep {rep} "
                f"(data seed {data_seed}, procedure seed {proc_seed}): {err}"
            ) from err
        if method.kind == "test":
            hits += out.reject
        elif method.kind == "set":
            hits += truth <= set(out.members)
            size_sum += len(out)
        else:
            interval, d_hat = out if method.variant == "c2" else (out, exp.mean.d)
            hits += interval.lo <= mu_star <= interval.hi
            size_sum += d_hat
            width_sum += interval.width
    return hits, size_sum, width_sum


def run_monte_carlo(
    exp: Experiment, method: Method, reps: int, seed: int, threads: int = 1
) -> MCResult:
    """Estimate a method's operating characteristics on one experiment.

    Rep i is fully determined by the child seeds (seed, i, 0) and
    (seed, i, 1), so the result is identical for any ``threads`` value;
    workers just cover disjoint rep ranges. A failing rep aborts the
    whole run and reports its seeds.
    """
    if reps < 1:
        raise DomainError("reps must be >= 1")
    if threads <= 1 or reps == 1:
        hits, size_sum, width_sum = _accumulate(exp, method, 0, reps, seed)
    else:
        workers = min(threads, reps)
        bounds = np.linspace(0, reps, workers + 1).astype(int)
        hits, size_sum, width_sum = 0, 0.0, 0.0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = [
                pool.submit(_accumulate, exp, method, int(lo), int(hi), seed)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for part in parts:
                h, s, w = part.result()
                hits += h
                size_sum += s
                width_sum += w
    rate = hits / reps
    return MCResult(
        rate=rate,
        se=math.sqrt(rate * (1.0 - rate) / reps),
        reps=reps,
        avg_set_size=size_sum / reps if method.kind != "test" else None,
        avg_width=width_sum / reps if method.kind == "interval" else None,
    )


# ---------------------------------------------------------------------------
# named methods and suites

_PLUG = SelectorKind("plugin")
_ADJ = SelectorKind("adjusted")

_REGISTRY = {
    "bonferroni": Method("bonferroni", "test"),
    "split-plug": Method("split-plug", "test", _PLUG),
    "split-adj": Method("split-adj", "test", _ADJ),
    "split-plug-x10": Method("split-plug-x10", "test", _PLUG, splits=10),
    "split-adj-x10": Method("split-adj-x10", "test", _ADJ, splits=10),
    "split-plug-mom": Method("split-plug-mom", "test", SelectorKind("plugin", RobustParams("mom"))),
    "split-adj-mom": Method("split-adj-mom", "test", SelectorKind("adjusted", RobustParams("mom"))),
    "split-plug-catoni": Method(
        "split-plug-catoni", "test", SelectorKind("plugin", RobustParams("catoni"))
    ),
    "split-adj-catoni": Method(
        "split-adj-catoni", "test", SelectorKind("adjusted", RobustParams("catoni"))
    ),
    "pointwise-plug": Method("pointwise-plug", "set", _PLUG, variant="pointwise"),
    "pointwise-adj": Method("pointwise-adj", "set", _ADJ, variant="pointwise"),
    "mcs-plug-1step": Method("mcs-plug-1step", "set", _PLUG, variant="one-step"),
    "mcs-adj-1step": Method("mcs-adj-1step", "set", _ADJ, variant="one-step"),
    "mcs-plug-2step": Method("mcs-plug-2step", "set", _PLUG, variant="two-step"),
    "mcs-adj-2step": Method("mcs-adj-2step", "set", _ADJ, variant="two-step"),
    "minmean-c1": Method("minmean-c1", "interval", variant="c1"),
    "minmean-c2": Method("minmean-c2", "interval", variant="c2"),
}


def standard_method(name: str) -> Method:
    """Look up one of the named procedures used by the suites."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise DomainError(f"unknown method {name!r}") from None


_RHOS = (0.0, 0.4, 0.8)
_THETA_SIZES = (2, 5, 10, 15, 20)


def _mcs_gap(theta: int, n_total: int) -> float:
    return 10.0 * math.sqrt(math.log(theta) / n_total)


def _suite_type1():
    lines = []
    methods = tuple(standard_method(m) for m in ("split-plug", "split-adj", "bonferroni"))
    for kind, d in (("tied", 4), ("tied-far", 100)):
        for alpha in (0.05, 0.10, 0.25, 0.50):
            exp = Experiment(
                name=f"{kind}/d={d}",
                mean=MeanScenario(kind, d),
                cov=CovScenario("toeplitz", d, 0.0),
                rows=500,
                alpha=alpha,
            )
            lines.append((exp, methods))
    return lines


def _power_grid(cov_kind: str, tails: str, method_names):
    d = 100
    rows = 3000 if tails == "t3" else 1000
    tag = {"toeplitz": "", "toeplitz-unequal": "/unequal"}[cov_kind] + (
        "/t3" if tails == "t3" else ""
    )
    methods = tuple(standard_method(m) for m in method_names)
    lines = []
    for kind in ("a", "b", "c", "a0", "b0", "c0"):
        for rho in _RHOS:
            exp = Experiment(
                name=f"{kind}/rho={rho:g}{tag}",
                mean=MeanScenario(kind, d),
                cov=CovScenario(cov_kind, d, rho),
                rows=rows,
                tails=tails,
            )
            line_methods = methods
            if kind in ("b", "b0") and rho == 0.4 and tails == "gaussian":
                line_methods = methods + tuple(
                    standard_method(m) for m in ("split-plug-x10", "split-adj-x10")
                )
            lines.append((exp, line_methods))
    return lines


def _suite_power_equal():
    return _power_grid("toeplitz", "gaussian", ("split-plug", "split-adj", "bonferroni"))


def _suite_power_unequal():
    return _power_grid(
        "toeplitz-unequal", "gaussian", ("split-plug", "split-adj", "bonferroni")
    )


def _suite_robust():
    names = (
        "split-plug",
        "split-adj",
        "split-plug-mom",
        "split-adj-mom",
        "split-plug-catoni",
        "split-adj-catoni",
    )
    return _power_grid("toeplitz", "t3", names)


def _suite_highdim():
    methods = tuple(standard_method(m) for m in ("split-plug", "split-adj", "bonferroni"))
    lines = []
    for kind in ("highdim-null", "highdim-alt"):
        for d in (10, 150, 300, 500, 1000):
            exp = Experiment(
                name=f"{kind}/d={d}",
                mean=MeanScenario(kind, d),
                cov=CovScenario("diag-unequal", d, 0.0),
                rows=500,
            )
            lines.append((exp, methods))
    return lines


def _suite_mcs_coverage():
    d, rows = 100, 1000
    names = (
        "pointwise-plug",
        "pointwise-adj",
        "mcs-plug-1step",
        "mcs-adj-1step",
        "mcs-plug-2step",
        "mcs-adj-2step",
    )
    methods = tuple(standard_method(m) for m in names)
    lines = []
    for theta in _THETA_SIZES:
        for rho in _RHOS:
            exp = Experiment(
                name=f"tied-block/t={theta}/rho={rho:g}",
                mean=MeanScenario("tied-block", d, zeta=_mcs_gap(theta, rows), theta_size=theta),
                cov=CovScenario("toeplitz", d, rho),
                rows=rows,
            )
            lines.append((exp, methods))
    return lines


def _suite_minmean():
    d, rows = 1000, 2000
    methods = (standard_method("minmean-c1"), standard_method("minmean-c2"))
    lines = []
    for theta in _THETA_SIZES:
        for rho in _RHOS:
            exp = Experiment(
                name=f"minmean/t={theta}/rho={rho:g}",
                mean=MeanScenario("tied-block", d, zeta=1.0, theta_size=theta),
                cov=CovScenario("toeplitz", d, rho),
                rows=rows,
            )
            lines.append((exp, methods))
    return lines


_SUITES = {
    "type1": (_suite_type1, 2000),
    "power-equal": (_suite_power_equal, 2000),
    "power-unequal": (_suite_power_unequal, 2000),
    "highdim": (_suite_highdim, 2000),
    "mcs-coverage": (_suite_mcs_coverage, 2000),
    "minmean": (_suite_minmean, 1000),
    "robust": (_suite_robust, 2000),
}


def suite_names() -> tuple[str, ...]:
    return tuple(_SUITES)


def run_suite(
    name: str, reps: Optional[int] = None, seed: int = 0, threads: int = 1
) -> list[SuiteRow]:
    """Run every (experiment, method) cell of a named suite.

    Within a suite all methods of a cell see the same data stream (the
    seed is shared), so cross-method comparisons are paired.
    """
    try:
        builder, default_reps = _SUITES[name]
    except KeyError:
        raise DomainError(f"unknown suite {name!r}") from None
    n = reps if reps is not None else default_reps
    rows = []
    for exp, methods in builder():
        for method in methods:
            started = time.perf_counter()
            result = run_monte_carlo(exp, method, n, seed, threads=threads)
            wall_ms = (time.perf_counter() - started) * 1e3
            rows.append(SuiteRow(exp.name, method.name, exp.alpha, result, wall_ms))
    return rows


_CSV_COLUMNS = (
    "scenario",
    "method",
    "alpha",
    "rate",
    "se",
    "avg_size",
    "avg_width",
    "reps",
    "wall_ms",
)


def _row_record(row: SuiteRow) -> dict:
    r = row.result
    return {
        "scenario": row.scenario,
        "method": row.method,
        "alpha": row.alpha,
        "rate": r.rate,
        "se": round(r.se, 6),
        "avg_size": None if r.avg_set_size is None else round(r.avg_set_size, 4),
        "avg_width": None if r.avg_width is None else round(r.avg_width, 6),
        "reps": r.reps,
        "wall_ms": round(row.wall_ms, 1),
    }


def write_csv(rows, path) -> None:
    """Write suite rows as a CSV table (empty cells for absent fields)."""
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            record = _row_record(row)
            writer.writerow({k: ("" if v is None else v) for k, v in record.items()})


def write_json(rows, path) -> None:
    """Write suite rows as a JSON array of records."""
    with open(path, "w") as handle:
        json.dump([_row_record(row) for row in rows], handle, indent=2)
        handle.write("\n")
