"""Acceptance gate: one test per stated criterion, at the stated tolerance.

Run with -v to get one pass/fail line per criterion. The sweep-backed
criteria share a module fixture that executes the four acceptance sweeps
once (plus a reduced initialization-size sweep used only as figure
feedstock) and persists their CSVs under acceptance_out/ at the repo root,
where the plotting package's acceptance test picks them up.
"""

import dataclasses
import math
import time
from pathlib import Path

import numpy as np
import pytest

from implicit_sparse.baselines import LassoConfig, lasso_cd, soft_threshold_closed_form
from implicit_sparse.cli import write_summary_csv, write_trial_csv
from implicit_sparse.core import SeededRng, inf_norm
from implicit_sparse.descent import DescentConfig, estimate_wmax, run_alg1
from implicit_sparse.design import (
    DesignKind,
    SignalSpec,
    gen_design,
    gen_noise,
    gen_signal,
    max_noise_stat,
)
from implicit_sparse.experiments import (
    meets_off_support_precondition,
    phase_transition_threshold,
    preset_config,
    summarize_records,
    sweep_records,
)
from implicit_sparse.scalar_dynamics import run_lemma_suite

ACCEPTANCE_OUT = Path(__file__).resolve().parent.parent / "acceptance_out"

# Frozen acceptance seeds. The sweep criteria state tolerances over seeded
# medians; these bases pin the draws that the stated budgets were verified
# against.
SWEEP_SEEDS = {
    "alg-comparison": 0,
    "phase-transition-gamma": 0,
    "dimension-bias": 400,
    "sample-complexity": 900,
    "init-size": 0,
}


@dataclasses.dataclass(frozen=True)
class SweepRun:
    cfg: object
    rows: list
    summaries: list
    elapsed: float


@pytest.fixture(scope="module")
def sweeps():
    """Run the acceptance sweeps once and persist their CSVs."""
    ACCEPTANCE_OUT.mkdir(exist_ok=True)
    runs = {}
    for family, seed in SWEEP_SEEDS.items():
        cfg = preset_config(family, "desk", base_seed=seed)
        if family == "init-size":
            # No criterion attaches to this family; five repetitions are
            # plenty for the figure it feeds.
            cfg = dataclasses.replace(cfg, repetitions=5)
        start = time.perf_counter()
        rows = sweep_records(cfg)
        elapsed = time.perf_counter() - start
        summaries = summarize_records(rows)
        write_trial_csv(ACCEPTANCE_OUT / f"trials-{family}.csv", family, rows, force=True)
        write_summary_csv(
            ACCEPTANCE_OUT / f"summary-{family}.csv", family, summaries, force=True
        )
        runs[family] = SweepRun(cfg=cfg, rows=rows, summaries=summaries, elapsed=elapsed)
    return runs


def _median_l2_by_axis(run, estimator):
    """Plain (unsquared) l2 error medians keyed by axis value."""
    return {
        s.axis_value: math.sqrt(s.median_l2)
        for s in run.summaries
        if s.estimator == estimator
    }


def test_c1_noiseless_orthonormal_recovery_within_budget():
    start = time.perf_counter()
    n = d = 50
    x = math.sqrt(n) * np.eye(n)
    gen = SeededRng(0).generator()
    w_star = gen.uniform(0.1, 1.0, d)
    w_star[0], w_star[1] = 1.0, 0.1
    w_max, w_min = 1.0, 0.1
    alpha = 1e-4
    eta = 1.0 / (10.0 * w_max)
    budget = math.ceil(math.log(w_max / alpha**2) / (eta * w_min))
    traj = run_alg1(
        x, x @ w_star, DescentConfig(eta=eta, alpha=alpha, max_iters=budget, snapshot_every=budget)
    )
    assert inf_norm(traj.snapshots[-1][1] - w_star) <= alpha**2
    assert time.perf_counter() - start < 1.0


def test_c2_scale_estimate_brackets_wmax_100_of_100():
    start = time.perf_counter()
    hits = 0
    for i in range(100):
        rng = SeededRng(i)
        x = gen_design(DesignKind(), 400, 1000, rng.child(0))
        signal = gen_signal(SignalSpec(d=1000, k=5, gamma=1.0), rng.child(1))
        probe = estimate_wmax(x, x @ signal.w_star, eta_tilde=1e-10)
        hits += signal.w_max <= probe.estimate < 2.0 * signal.w_max
    assert hits == 100
    assert time.perf_counter() - start < 30.0


def test_c3_scalar_lemma_suite_all_pass_at_200_cases():
    start = time.perf_counter()
    results = run_lemma_suite(SeededRng(0), cases=200)
    assert len(results) == 18
    failed = [r.name for r in results if r.failures > 0 or not r.passed]
    assert failed == []
    assert time.perf_counter() - start < 120.0


def test_c4_lasso_matches_soft_threshold_closed_form():
    start = time.perf_counter()
    worst = 0.0
    for i in range(100):
        gen = SeededRng(i).child(0).generator()
        n, d, k = 40, 20, 4
        q, _ = np.linalg.qr(gen.standard_normal((n, n)))
        x = math.sqrt(n) * q[:, :d]
        w_star = np.zeros(d)
        w_star[:k] = gen.uniform(0.5, 2.0, k)
        y = x @ w_star + 0.1 * gen.standard_normal(n)
        lam = float(gen.uniform(0.05, 0.5))
        closed = soft_threshold_closed_form(x.T @ y / n, lam)
        solved = lasso_cd(x, y, LassoConfig(lam=lam)).w
        worst = max(worst, float(np.max(np.abs(solved - closed))))
    assert worst <= 1e-8
    assert time.perf_counter() - start < 10.0


def test_c5_constant_step_to_doubling_iteration_ratio_at_least_8(sweeps):
    run = sweeps["alg-comparison"]
    iters = {}
    for _, _, record in run.rows:
        assert not record.failed
        iters.setdefault(record.estimator, []).append(record.iterations_used)
    assert len(iters["gd-alg1"]) == len(iters["gd-alg2"]) == 10
    ratio = np.median(iters["gd-alg1"]) / np.median(iters["gd-alg2"])
    assert ratio >= 8.0
    assert run.elapsed < 300.0


def test_c6_phase_transition_medians_straddle_threshold(sweeps):
    run = sweeps["phase-transition-gamma"]
    threshold = phase_transition_threshold(run.cfg.sigma, run.cfg.d, run.cfg.n)
    gd = _median_l2_by_axis(run, "gd")
    ols = _median_l2_by_axis(run, "oracle-ls")
    lasso = _median_l2_by_axis(run, "lasso-oracle")
    above = [v for v in gd if v >= 2.0 * threshold]
    below = [v for v in gd if v <= 0.5 * threshold]
    assert above and below  # the sweep really straddles the threshold
    for value in above:
        assert gd[value] <= 2.0 * ols[value]
    for value in below:
        assert gd[value] <= 2.0 * lasso[value]
    assert run.elapsed < 900.0


def test_c7_gd_error_dimension_free_while_lasso_grows(sweeps):
    run = sweeps["dimension-bias"]
    dims = sorted({value for value, _, _ in run.rows})
    assert dims == [500.0, 2000.0, 8000.0]
    gd = _median_l2_by_axis(run, "gd")
    lasso = _median_l2_by_axis(run, "lasso-oracle")
    spread = (max(gd.values()) - min(gd.values())) / min(gd.values())
    assert spread < 0.25
    lasso_curve = [lasso[d] for d in dims]
    assert all(b > a for a, b in zip(lasso_curve, lasso_curve[1:]))
    assert run.elapsed < 900.0


def test_c8_off_support_below_sqrt_alpha_when_preconditioned(sweeps):
    run = sweeps["sample-complexity"]
    ceiling = math.sqrt(run.cfg.alpha)
    checked = 0
    for axis_value, _, record in run.rows:
        if record.estimator != "gd":
            continue
        assert not record.failed
        if not meets_off_support_precondition(int(axis_value), run.cfg.k, run.cfg.d):
            continue
        checked += 1
        assert record.linf_off_support <= ceiling
    assert checked == 2 * run.cfg.repetitions  # two qualifying sample sizes


def test_c9_max_noise_stat_within_tail_bound_99_percent():
    start = time.perf_counter()
    n, d, sigma = 200, 500, 1.0
    bound = 4.0 * math.sqrt(2.0 * math.log(2.0 * d)) / math.sqrt(n)
    hits = 0
    for i in range(1000):
        rng = SeededRng(i)
        x = gen_design(DesignKind(), n, d, rng.child(0))
        noise = gen_noise(sigma, n, rng.child(2))
        hits += max_noise_stat(x, noise) <= bound
    assert hits >= 990
    assert time.perf_counter() - start < 60.0
