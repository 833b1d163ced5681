"""Operating-characteristic gate for the whole package.

Each test replays one published behaviour of the procedures (size and
power fingerprints, coverage levels, interval widths, exact algebraic
properties) at desk-scale replication counts and records a single
pass/fail line through the ``acceptance`` fixture. Tolerances for the
Monte Carlo numbers are three binomial standard errors unless the
target value carries its own band. Run with ``--full`` to lift the
2000-rep cells to table scale.
"""

import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from splitargmin import (
    ContrastSpec,
    CovScenario,
    Experiment,
    MeanScenario,
    SelectorKind,
    catoni_estimate,
    contrast_variance,
    derive_seed,
    gen_gaussian,
    mcs_two_step,
    mom_estimate,
    normal_cdf,
    normal_quantile,
    run_monte_carlo,
    select,
    split_test,
    standard_method,
    studentized_statistic,
)
from splitargmin.cli import main as cli_main


def _cell(
    mean,
    cov,
    rows,
    method,
    reps,
    *,
    alpha=0.05,
    target=1,
    tails="gaussian",
    seed=0,
):
    exp = Experiment("cell", mean, cov, rows, alpha=alpha, target=target, tails=tails)
    return run_monte_carlo(exp, standard_method(method), reps, seed)


def test_size_on_fully_tied_null(acceptance):
    mean = MeanScenario("tied", 4)
    cov = CovScenario("toeplitz", 4, rho=0.0)
    reps = 5000
    notes, ok = [], True
    for alpha in (0.05, 0.10, 0.25, 0.50):
        for name, tag in (("split-plug", "plug"), ("split-adj", "adj")):
            rate = _cell(mean, cov, 500, name, reps, alpha=alpha, seed=101).rate
            ok &= abs(rate - alpha) <= 0.015
            notes.append(f"{tag}@{alpha:g}={rate:.3f}")
        bonf = _cell(mean, cov, 500, "bonferroni", reps, alpha=alpha, seed=101).rate
        ok &= bonf < alpha
        notes.append(f"bonf@{alpha:g}={bonf:.3f}")
    acceptance("criterion 1, tied-null size d=4", ok, " ".join(notes))


def test_power_under_equal_variance(acceptance, mc_reps):
    reps = mc_reps(2000)
    d, rows = 100, 1000
    plug_a = _cell(
        MeanScenario("a", d), CovScenario("toeplitz", d, rho=0.0), rows, "split-plug", reps, seed=102
    ).rate
    adj_a = _cell(
        MeanScenario("a", d), CovScenario("toeplitz", d, rho=0.8), rows, "split-adj", reps, seed=102
    ).rate
    plug_b = _cell(
        MeanScenario("b", d), CovScenario("toeplitz", d, rho=0.8), rows, "split-plug", reps, seed=102
    ).rate
    ok = (
        abs(plug_a - 0.219) <= 0.03
        and abs(adj_a - 0.931) <= 0.02
        and abs(plug_b - 0.679) <= 0.03
    )
    acceptance(
        "criterion 2, power spot cells d=100",
        ok,
        f"plug(a,0)={plug_a:.3f} adj(a,.8)={adj_a:.3f} plug(b,.8)={plug_b:.3f}",
    )


def test_size_on_single_column_nulls(acceptance, mc_reps):
    reps = mc_reps(2000)
    d, rows = 100, 1000
    plug_c0 = _cell(
        MeanScenario("c0", d), CovScenario("toeplitz", d, rho=0.0), rows, "split-plug", reps, seed=103
    ).rate
    adj_a0 = _cell(
        MeanScenario("a0", d), CovScenario("toeplitz", d, rho=0.4), rows, "split-adj", reps, seed=103
    ).rate
    ok = abs(plug_c0 - 0.053) <= 0.015 and abs(adj_a0 - 0.020) <= 0.012
    acceptance(
        "criterion 3, null spot cells d=100",
        ok,
        f"plug(c0,0)={plug_c0:.3f} adj(a0,.4)={adj_a0:.3f}",
    )


def test_power_gap_under_unequal_variance(acceptance, mc_reps):
    reps = mc_reps(2000)
    d, rows = 100, 1000
    cov = CovScenario("toeplitz-unequal", d, rho=0.8)
    adj = _cell(MeanScenario("a", d), cov, rows, "split-adj", reps, seed=104).rate
    plug = _cell(MeanScenario("a", d), cov, rows, "split-plug", reps, seed=104).rate
    ok = abs(adj - 0.841) <= 0.03 and plug <= 0.10
    acceptance(
        "criterion 4, heteroskedastic plug/adj gap",
        ok,
        f"adj(a,.8)={adj:.3f} plug(a,.8)={plug:.3f}",
    )


def test_ordering_in_high_dimensions(acceptance, mc_reps):
    reps = mc_reps(2000)
    rows = 500
    notes, ok = [], True

    d = 1000
    cov = CovScenario("diag-unequal", d)
    power = {}
    for name in ("split-adj", "split-plug", "bonferroni"):
        power[name] = _cell(
            MeanScenario("highdim-alt", d), cov, rows, name, reps, seed=105
        ).rate
        size = _cell(MeanScenario("highdim-null", d), cov, rows, name, reps, seed=105)
        ok &= size.rate <= 0.05 + 3 * size.se
        notes.append(f"{name}:pow={power[name]:.3f},size={size.rate:.3f}")
    ok &= power["split-adj"] >= power["split-plug"] >= 5 * power["bonferroni"]

    d = 10
    cov = CovScenario("diag-unequal", d)
    for name in ("split-adj", "split-plug", "bonferroni"):
        low = _cell(MeanScenario("highdim-alt", d), cov, rows, name, reps, seed=105).rate
        ok &= low >= 0.3
        notes.append(f"{name}@d10={low:.3f}")
    acceptance("criterion 5, high-dimension ordering", ok, " ".join(notes))


def test_multisplit_power_uplift(acceptance):
    reps = 1000
    d, rows = 100, 1000
    cov = CovScenario("toeplitz", d, rho=0.4)
    single = _cell(MeanScenario("b", d), cov, rows, "split-adj", reps, seed=106).rate
    multi = _cell(MeanScenario("b", d), cov, rows, "split-adj-x10", reps, seed=106).rate
    null = _cell(MeanScenario("b0", d), cov, rows, "split-adj-x10", reps, seed=106)
    ok = multi - single >= 0.10 and null.rate <= 0.05 + 3 * null.se
    acceptance(
        "criterion 6, ten-split uplift",
        ok,
        f"x10={multi:.3f} x1={single:.3f} null={null.rate:.3f}",
    )


def test_argmin_set_coverage(acceptance, mc_reps):
    reps = mc_reps(2000)
    d, rows = 100, 1000

    def block(theta):
        zeta = 10.0 * math.sqrt(math.log(theta) / rows)
        return MeanScenario("tied-block", d, zeta=zeta, theta_size=theta)

    cov = CovScenario("toeplitz", d, rho=0.0)
    two = _cell(block(10), cov, rows, "mcs-plug-2step", reps, seed=107)
    one = _cell(block(10), cov, rows, "mcs-plug-1step", reps, seed=107)
    point = _cell(block(20), cov, rows, "pointwise-plug", reps, seed=107)
    ok = (
        abs(two.rate - 0.958) <= 0.02
        and abs(two.avg_set_size - 9.94) <= 0.1
        and one.rate >= 0.99
        and abs(point.rate - 0.620) <= 0.04
    )
    acceptance(
        "criterion 7, argmin set coverage",
        ok,
        f"2step={two.rate:.3f}/{two.avg_set_size:.2f} 1step={one.rate:.3f} "
        f"pointwise={point.rate:.3f}",
    )


def test_smallest_mean_interval_widths(acceptance):
    reps = 1000
    d, rows = 1000, 2000
    cov = CovScenario("toeplitz", d, rho=0.0)

    def block(theta):
        return MeanScenario("tied-block", d, zeta=1.0, theta_size=theta)

    notes, ok = [], True
    c1_width = {}
    for theta in (2, 5, 10, 15, 20):
        res = _cell(block(theta), cov, rows, "minmean-c1", reps, seed=108)
        c1_width[theta] = res.avg_width
        ok &= abs(res.avg_width - 0.181) <= 0.005
        notes.append(f"c1@{theta}={res.avg_width:.3f}")

    narrow = _cell(block(2), cov, rows, "minmean-c2", reps, seed=108)
    ok &= abs(narrow.avg_width - 0.142) <= 0.01
    ok &= abs(narrow.avg_set_size - 1.99) <= 0.05
    notes.append(f"c2@2={narrow.avg_width:.3f}/{narrow.avg_set_size:.2f}")

    wide = _cell(block(20), cov, rows, "minmean-c2", reps, seed=108)
    ok &= wide.avg_width > c1_width[20]
    notes.append(f"c2@20={wide.avg_width:.3f}")
    acceptance("criterion 8, smallest-mean widths", ok, " ".join(notes))


def test_robust_variants_on_heavy_tails(acceptance, mc_reps):
    reps = mc_reps(2000)
    d, rows = 100, 3000
    cov = CovScenario("toeplitz", d, rho=0.8)
    alt, null = MeanScenario("a", d), MeanScenario("a0", d)

    catoni = _cell(alt, cov, rows, "split-adj-catoni", reps, tails="t3", seed=109).rate
    mom = _cell(alt, cov, rows, "split-adj-mom", reps, tails="t3", seed=109).rate
    ok = abs(catoni - 0.938) <= 0.02 and abs(mom - 0.829) <= 0.03
    notes = [f"catoni={catoni:.3f}", f"mom={mom:.3f}"]
    for name in ("split-plug-mom", "split-adj-mom", "split-plug-catoni", "split-adj-catoni"):
        res = _cell(null, cov, rows, name, reps, tails="t3", seed=109)
        ok &= res.rate <= 0.05 + 3 * res.se
        notes.append(f"{name.removeprefix('split-')}:size={res.rate:.3f}")
    acceptance("criterion 9, heavy-tail robust cells", ok, " ".join(notes))


def test_exact_property_suite(acceptance, tmp_path, capsys):
    rng = np.random.default_rng(110)
    failed = []

    if not all(
        mom_estimate(v, 1) == v.mean()
        for v in (rng.normal(size=int(k)) for k in rng.integers(2, 40, size=200))
    ):
        failed.append("mom-v1")

    vals = rng.standard_t(3, size=60)
    theta = catoni_estimate(vals, 0.05)
    log_inv = math.log(1 / 0.05)
    s2 = vals.var(ddof=1)
    eta2 = 2 * s2 * log_inv / (vals.size - 2 * log_inv)
    scale = math.sqrt(2 * log_inv / (vals.size * (s2 + eta2)))
    u = scale * (vals - theta)
    residual = float(np.sum(np.sign(u) * np.log1p(np.abs(u) * (1 + 0.5 * np.abs(u)))))
    sym = abs(catoni_estimate([-3.0, 3.0] * 5)) <= 1e-9
    if not (abs(residual) <= 1e-10 * vals.size and sym and catoni_estimate([2.5] * 8) == 2.5):
        failed.append("catoni")

    invariant = True
    for _ in range(1000):
        n, d = int(rng.integers(6, 25)), int(rng.integers(2, 8))
        x = rng.normal(size=(n, d))
        r = int(rng.integers(1, d + 1))
        a, b = float(rng.uniform(0.05, 20.0)), float(rng.uniform(-50.0, 50.0))
        for base in ("plugin", "adjusted"):
            kind = SelectorKind(base)
            invariant &= select(a * x + b, r, kind) == select(x, r, kind)
    if not invariant:
        failed.append("selector-invariance")

    d1 = rng.normal(size=(15, 3))
    seq = []
    for c in (0.0, 0.2, 0.5, 1.5, 4.0):
        bumped = d1.copy()
        bumped[:, 1] += c
        seq.append(studentized_statistic(bumped, 2, 1))
    if not all(u < v for u, v in zip(seq, seq[1:])):
        failed.append("monotone-shift")

    quad_ok = True
    for _ in range(100):
        x = rng.normal(size=(5, 4)) * rng.uniform(0.1, 5.0)
        r, k = rng.choice(4, size=2, replace=False) + 1
        gamma = np.zeros(4)
        gamma[r - 1], gamma[k - 1] = 1.0, -1.0
        quad = float(gamma @ np.cov(x.T, ddof=1) @ gamma)
        got = contrast_variance(x, ContrastSpec(int(r), int(k)))
        quad_ok &= abs(got - quad) <= 1e-12 * max(1.0, abs(quad))
    if not quad_ok:
        failed.append("contrast-quadratic")

    grid = np.linspace(1e-6, 1 - 1e-6, 501)
    if not all(abs(normal_cdf(normal_quantile(p)) - p) <= 1e-6 for p in grid):
        failed.append("quantile-roundtrip")

    data = rng.normal(size=(40, 5))
    det = (
        split_test(data, 1, 0.05, SelectorKind("adjusted"), 42)
        == split_test(data, 1, 0.05, SelectorKind("adjusted"), 42)
        and mcs_two_step(data, 0.1, SelectorKind("adjusted"), 7)
        == mcs_two_step(data, 0.1, SelectorKind("adjusted"), 7)
    )
    exp = Experiment("det", MeanScenario("a", 5), CovScenario("toeplitz", 5), 40)
    det &= run_monte_carlo(exp, standard_method("split-adj"), 10, 3) == run_monte_carlo(
        exp, standard_method("split-adj"), 10, 3
    )
    if not det:
        failed.append("determinism")

    sample = rng.normal(size=(24, 3))
    lo_path, hi_path = tmp_path / "lo.csv", tmp_path / "hi.csv"
    np.savetxt(lo_path, sample, delimiter=",")
    np.savetxt(hi_path, -sample, delimiter=",")
    cli_main(["test", "--r", "1", "--seed", "5", str(lo_path)])
    via_min = capsys.readouterr().out
    cli_main(["test", "--r", "1", "--seed", "5", "--mode", "max", str(hi_path)])
    via_max = capsys.readouterr().out
    if via_min != via_max:
        failed.append("mode-max")

    acceptance(
        "criterion 10, exact property suite",
        not failed,
        ",".join(failed) if failed else "all exact",
    )


def test_pvalue_uniformity_under_ties(acceptance):
    reps = 10_000
    cov = CovScenario("toeplitz", 4, rho=0.0)
    mu = np.zeros(4)
    pvals = np.empty(reps)
    for rep in range(reps):
        data = gen_gaussian(mu, cov, 500, derive_seed(111, rep, 0))
        pvals[rep] = split_test(
            data, 1, 0.05, SelectorKind("adjusted"), derive_seed(111, rep, 1)
        ).p_value
    ks = scipy_stats.kstest(pvals, "uniform")
    acceptance(
        "criterion 11, tied-null p-value uniformity",
        ks.pvalue > 0.01,
        f"ks-stat={ks.statistic:.4f} ks-p={ks.pvalue:.3f}",
    )
