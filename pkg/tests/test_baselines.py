import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from implicit_sparse.baselines import (
    LassoConfig,
    LassoPath,
    lasso_cd,
    lasso_path,
    oracle_lambda_select,
    oracle_ls,
    soft_threshold_closed_form,
)
from implicit_sparse.core import inf_norm
from implicit_sparse.design import SparseSignal
from implicit_sparse.errors import DimensionError, ParameterError, SingularityError


def _instances():
    """The two fixed instances shared by the frozen-value tests.

    Draw order matters: the expected values below were computed by an
    independent proximal-gradient/lstsq implementation on exactly these
    draws from default_rng(777).
    """
    rng = np.random.default_rng(777)
    n = 40
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    x_orth = np.sqrt(n) * q[:, :12]
    noise_orth = rng.normal(0, 0.4, size=n)
    x_gen = rng.normal(size=(30, 10))
    w_gen = np.zeros(10)
    w_gen[[1, 4, 7]] = [2.0, -1.0, 0.5]
    y_gen = x_gen @ w_gen + rng.normal(0, 0.2, size=30)
    return x_orth, noise_orth, x_gen, w_gen, y_gen


X_ORTH, NOISE_ORTH, X_GEN, W_GEN, Y_GEN = _instances()


# ---------------------------------------------------------------- soft threshold


def test_soft_threshold_arithmetic():
    out = soft_threshold_closed_form(np.array([1.0, 0.2]), 0.5)
    assert out.tolist() == [0.5, 0.0]


def test_soft_threshold_zero_lambda_is_identity():
    w = np.array([0.3, -1.7, 0.0])
    assert np.array_equal(soft_threshold_closed_form(w, 0.0), w)


def test_soft_threshold_preserves_sign():
    assert soft_threshold_closed_form(np.array([-1.0]), 0.4).tolist() == [-0.6]


def test_soft_threshold_rejects_negative_lambda():
    with pytest.raises(ParameterError):
        soft_threshold_closed_form(np.array([1.0]), -0.1)


@given(z=st.floats(-1e6, 1e6), lam=st.floats(0.0, 1e6))
def test_soft_threshold_never_grows_or_flips(z, lam):
    out = float(soft_threshold_closed_form(np.array([z]), lam)[0])
    assert abs(out) <= abs(z)
    assert out * z >= 0.0


# ---------------------------------------------------------------- lasso_cd


def test_zero_lambda_recovers_least_squares():
    w_ls = np.linalg.lstsq(X_GEN, Y_GEN, rcond=None)[0]
    result = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.0))
    assert result.converged
    assert result.w == pytest.approx(w_ls, abs=1e-8)


def test_full_shrinkage_at_lambda_max():
    n = X_GEN.shape[0]
    lam_max = inf_norm(X_GEN.T @ Y_GEN / n)
    for lam in (lam_max, 1.5 * lam_max):
        result = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=lam))
        assert result.converged
        assert np.all(result.w == 0.0)


def test_orthonormal_solution_is_soft_thresholded_least_squares():
    y = X_ORTH @ np.concatenate([[1.0, -0.75, 0.5, 0.25], np.zeros(8)]) + NOISE_ORTH
    w_ls = np.linalg.lstsq(X_ORTH, y, rcond=None)[0]
    for lam in (0.05, 0.3, 0.9):
        result = lasso_cd(X_ORTH, y, LassoConfig(lam=lam))
        assert result.converged
        assert result.w == pytest.approx(soft_threshold_closed_form(w_ls, lam), abs=1e-8)


def test_general_instance_matches_proximal_oracle():
    # frozen from an independent ISTA run at tolerance 1e-15
    result = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.1))
    assert result.converged
    expected = np.zeros(10)
    expected[[1, 4, 7]] = [1.841411846907139, -0.8837675865050965, 0.3773839679560459]
    assert result.w == pytest.approx(expected, abs=1e-7)
    assert result.objectives[-1] == pytest.approx(0.3410299420359468, abs=1e-10)


def test_objective_never_increases_sweep_over_sweep():
    result = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.02))
    diffs = np.diff(result.objectives)
    assert np.all(diffs <= 1e-12 * (1.0 + np.abs(result.objectives[:-1])))
    assert len(result.objectives) == result.sweeps + 1


def test_nonconvergence_is_flagged_not_raised():
    result = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.01, max_sweeps=1))
    assert not result.converged
    assert result.sweeps == 1
    assert np.all(np.isfinite(result.w))


def test_exact_zeros_in_solution():
    # coordinate descent parks sub-threshold coordinates at literal 0.0,
    # so support inspection needs no epsilon
    result = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.1))
    assert set(np.flatnonzero(result.w)) == {1, 4, 7}


def test_lasso_cd_validation():
    with pytest.raises(DimensionError):
        lasso_cd(X_GEN, Y_GEN[:-1], LassoConfig(lam=0.1))
    with pytest.raises(DimensionError):
        lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.1), warm_start=np.zeros(3))
    with pytest.raises(ParameterError):
        LassoConfig(lam=-0.5)
    with pytest.raises(ParameterError):
        LassoConfig(lam=0.1, tol=0.0)
    with pytest.raises(ParameterError):
        LassoConfig(lam=0.1, max_sweeps=0)


def test_warm_start_does_not_change_the_answer():
    cold = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.05))
    warm = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=0.05), warm_start=np.ones(10))
    assert warm.w == pytest.approx(cold.w, abs=1e-8)


def test_closed_form_equivalence_on_100_draws():
    # the two routes (iterative CD, one-shot threshold) must agree on
    # orthonormal designs across random targets and penalties
    rng = np.random.default_rng(40)
    for _ in range(100):
        y = X_ORTH @ rng.normal(size=12) + rng.normal(0, 0.5, size=40)
        lam = float(rng.uniform(0.01, 2.0))
        w_ls = np.linalg.lstsq(X_ORTH, y, rcond=None)[0]
        result = lasso_cd(X_ORTH, y, LassoConfig(lam=lam))
        assert result.w == pytest.approx(soft_threshold_closed_form(w_ls, lam), abs=1e-8)


# ---------------------------------------------------------------- lasso_path


def test_path_grid_shape_and_spacing():
    path = lasso_path(X_GEN, Y_GEN, count=200)
    assert path.lambdas.shape == (200,)
    assert path.solutions.shape == (200, 10)
    ratios = path.lambdas[1:] / path.lambdas[:-1]
    assert ratios == pytest.approx(np.full(199, ratios[0]), rel=1e-12)
    assert np.all(np.diff(path.lambdas) < 0)
    assert path.lambdas[0] == pytest.approx(inf_norm(X_GEN.T @ Y_GEN / 30), rel=1e-15)


def test_path_starts_at_the_zero_solution():
    path = lasso_path(X_GEN, Y_GEN, count=50)
    assert np.all(path.solutions[0] == 0.0)


def test_warm_started_path_matches_cold_starts():
    path = lasso_path(X_GEN, Y_GEN, count=25)
    for lam, warm_solution in zip(path.lambdas, path.solutions):
        cold = lasso_cd(X_GEN, Y_GEN, LassoConfig(lam=float(lam)))
        assert warm_solution == pytest.approx(cold.w, abs=1e-6)


def test_support_grows_as_lambda_shrinks_on_orthonormal_designs():
    y = X_ORTH @ np.concatenate([[1.0, -0.75, 0.5, 0.25], np.zeros(8)]) + NOISE_ORTH
    path = lasso_path(X_ORTH, y, count=40)
    sizes = [int(np.count_nonzero(s)) for s in path.solutions]
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))


def test_path_validation():
    with pytest.raises(ParameterError):
        lasso_path(X_GEN, np.zeros(30))  # X'y = 0 leaves no positive lambda_max
    with pytest.raises(ParameterError):
        lasso_path(X_GEN, Y_GEN, lambda_min_ratio=1.0)
    with pytest.raises(ParameterError):
        lasso_path(X_GEN, Y_GEN, count=0)


# ---------------------------------------------------------------- selection


def test_select_exact_member():
    w_star = np.zeros(10)
    w_star[2] = 1.0
    signal = SparseSignal.from_vector(w_star)
    solutions = np.vstack([np.zeros(10), w_star, 0.5 * w_star])
    path = LassoPath(
        lambdas=np.array([1.0, 0.1, 0.01]),
        solutions=solutions,
        converged=np.ones(3, dtype=bool),
    )
    lam, chosen = oracle_lambda_select(path, signal)
    assert lam == 0.1
    assert np.array_equal(chosen, w_star)


def test_select_single_entry_path():
    signal = SparseSignal.from_vector(np.array([1.0, 0.0]))
    path = LassoPath(
        lambdas=np.array([0.5]),
        solutions=np.array([[0.2, 0.0]]),
        converged=np.ones(1, dtype=bool),
    )
    lam, chosen = oracle_lambda_select(path, signal)
    assert lam == 0.5
    assert chosen.tolist() == [0.2, 0.0]


def test_select_breaks_ties_toward_larger_lambda():
    signal = SparseSignal.from_vector(np.array([1.0]))
    path = LassoPath(
        lambdas=np.array([2.0, 1.0]),
        solutions=np.array([[0.5], [0.5]]),
        converged=np.ones(2, dtype=bool),
    )
    lam, _ = oracle_lambda_select(path, signal)
    assert lam == 2.0


def test_select_on_noiseless_orthonormal_instance():
    # the closed-form path error is strictly decreasing in lambda here, so
    # the smallest grid value wins; frozen from the closed-form oracle
    w_star = np.concatenate([[1.0, -0.75, 0.5, 0.25], np.zeros(8)])
    signal = SparseSignal.from_vector(w_star)
    path = lasso_path(X_ORTH, X_ORTH @ w_star, count=200)
    lam, chosen = oracle_lambda_select(path, signal)
    assert lam == pytest.approx(1e-4, rel=1e-12)
    assert float(np.linalg.norm(chosen - w_star)) == pytest.approx(2e-4, rel=1e-4)


# ---------------------------------------------------------------- oracle_ls


def test_oracle_ls_empty_support_is_zero():
    out = oracle_ls(X_GEN, Y_GEN, np.array([], dtype=int))
    assert np.array_equal(out, np.zeros(10))


def test_oracle_ls_recovers_noiseless_signal():
    y = X_GEN @ W_GEN
    out = oracle_ls(X_GEN, y, np.array([1, 4, 7]))
    assert out == pytest.approx(W_GEN, abs=1e-10)


def test_oracle_ls_frozen_noisy_values():
    out = oracle_ls(X_GEN, Y_GEN, np.array([1, 4, 7]))
    expected = [1.960085798494488, -0.9437692659610193, 0.5066276928642431]
    assert out[[1, 4, 7]] == pytest.approx(expected, rel=1e-12)
    assert np.all(out[[0, 2, 3, 5, 6, 8, 9]] == 0.0)


def test_oracle_ls_residual_orthogonal_to_selected_columns():
    support = np.array([1, 4, 7])
    out = oracle_ls(X_GEN, Y_GEN, support)
    residual = Y_GEN - X_GEN @ out
    assert inf_norm(X_GEN[:, support].T @ residual) < 1e-8


def test_oracle_ls_error_ignores_padding_columns():
    # appending junk columns outside the support must not move the estimate
    rng = np.random.default_rng(9)
    x_wide = np.hstack([X_GEN, rng.normal(size=(30, 6))])
    narrow = oracle_ls(X_GEN, Y_GEN, np.array([1, 4, 7]))
    wide = oracle_ls(x_wide, Y_GEN, np.array([1, 4, 7]))
    assert np.array_equal(wide[:10], narrow)
    assert np.all(wide[10:] == 0.0)


def test_oracle_ls_singular_restriction():
    x = np.column_stack([X_GEN[:, 0], X_GEN[:, 0], X_GEN[:, 1]])
    with pytest.raises(SingularityError):
        oracle_ls(x, Y_GEN, np.array([0, 1]))


def test_oracle_ls_more_columns_than_rows():
    x = np.random.default_rng(0).normal(size=(3, 8))
    with pytest.raises(SingularityError):
        oracle_ls(x, np.zeros(3), np.arange(5))


def test_oracle_ls_index_validation():
    with pytest.raises(ParameterError):
        oracle_ls(X_GEN, Y_GEN, np.array([0, 10]))
    with pytest.raises(ParameterError):
        oracle_ls(X_GEN, Y_GEN, np.array([3, 3]))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.floats(1e-3, 1.0))
def test_lasso_objective_at_solution_beats_natural_candidates(seed, lam):
    # optimality spot-check: the solver's objective is no worse than at the
    # zero vector or the least squares solution
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(25, 8))
    y = rng.normal(size=25)

    def objective(w):
        r = x @ w - y
        return 0.5 * float(r @ r) / 25 + lam * float(np.abs(w).sum())

    result = lasso_cd(x, y, LassoConfig(lam=lam))
    w_ls = np.linalg.lstsq(x, y, rcond=None)[0]
    slack = 1e-10
    assert result.objectives[-1] <= objective(np.zeros(8)) + slack
    assert result.objectives[-1] <= objective(w_ls) + slack
