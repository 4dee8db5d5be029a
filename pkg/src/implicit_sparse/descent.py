"""Multiplicative gradient descent on the split parametrization w = u⊙u − v⊙v.

Both halves start at a small constant alpha and see mirrored update factors:
u picks up the positive part of the target, v the negative part, and the
product u⊙v only ever shrinks, which is what keeps off-support coordinates
pinned near alpha² while on-support ones grow. Two drivers are provided: a
constant-step loop (`run_alg1`) and a variant that doubles per-coordinate
step sizes on a fixed schedule so small targets stop paying for the largest
one (`run_alg2`). Alongside them live the one-step scale estimator for
picking the step size, recommended-setting formulas, and the signal/error
decomposition used by the diagnostics and safety stop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import as_matrix, as_vector, inf_norm, mat_apply, mat_t_apply
from .design import SparseSignal
from .errors import DimensionError, DivergenceError, ParameterError

__all__ = [
    "DescentConfig",
    "DescentState",
    "ErrorDecomposition",
    "RecommendedSettings",
    "RunMonitor",
    "Trajectory",
    "WmaxEstimate",
    "decompose",
    "estimate_wmax",
    "gd_step",
    "gradient_factors",
    "initial_state",
    "kappa_eff_of",
    "recommended_settings",
    "run_alg1",
    "run_alg2",
]

DIVERGENCE_NORM_FACTOR = 1e6


@dataclass(frozen=True)
class DescentState:
    """Iterate state: the two parameter halves plus per-coordinate step info.

    `m` holds the per-coordinate step-size multipliers (all ones under the
    constant-step algorithm; powers of two that only ever double under the
    doubling schedule). The effective step vector is base_eta * m.
    """

    u: np.ndarray
    v: np.ndarray
    m: np.ndarray
    base_eta: float
    t: int
    alpha: float

    @property
    def w(self) -> np.ndarray:
        return self.u * self.u - self.v * self.v


@dataclass(frozen=True)
class DescentConfig:
    eta: float
    alpha: float
    max_iters: int
    tau: Optional[int] = None
    z_hat: Optional[float] = None
    snapshot_every: int = 1
    safety_stop_threshold: Optional[float] = None

    def __post_init__(self):
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.max_iters < 0:
            raise ParameterError("max_iters must be nonnegative")
        if self.snapshot_every < 1:
            raise ParameterError("snapshot_every must be at least 1")
        if self.tau is not None and self.tau < 1:
            raise ParameterError(f"tau must be a positive integer, got {self.tau}")
        if self.z_hat is not None and not self.z_hat > 0:
            raise ParameterError(f"z_hat must be positive, got {self.z_hat}")


@dataclass(frozen=True)
class RunMonitor:
    """Optional per-iteration checks for a descent run.

    With `signal` set, the run watches the error mass (off-support weight
    plus wrong-sign weight) and records a safety stop once its sup-norm
    crosses the configured threshold (default sqrt(alpha)). With `target`
    and `target_tol` set, the run stops early once w is within tolerance
    of the target in the chosen norm.
    """

    signal: Optional[SparseSignal] = None
    target: Optional[np.ndarray] = None
    target_tol: Optional[float] = None
    target_norm: str = "linf"

    def __post_init__(self):
        if self.target_norm not in ("linf", "l2"):
            raise ParameterError(f"target_norm must be linf or l2, got {self.target_norm!r}")
        if (self.target is None) != (self.target_tol is None):
            raise ParameterError("target and target_tol must be given together")


@dataclass(frozen=True)
class Trajectory:
    snapshots: list[tuple[int, np.ndarray]]
    final_state: DescentState
    stop_reason: str  # max-iters | safety-stop | target-reached


@dataclass(frozen=True)
class ErrorDecomposition:
    s_t: np.ndarray
    e_t: np.ndarray
    b_t: np.ndarray
    p_t: np.ndarray


@dataclass(frozen=True)
class WmaxEstimate:
    """One-step scale estimate: w_max <= estimate < 2*w_max on good designs.

    `production_eta` is the step size to run with afterwards, 1/(20*estimate);
    None when the probe saw a flat gradient (zero signal and noise).
    """

    estimate: float
    f_max: float
    degenerate: bool
    production_eta: Optional[float]


@dataclass(frozen=True)
class RecommendedSettings:
    kappa_eff: float
    delta_budget: float
    alpha_budget: float
    eta_budget: float
    t_budget_alg1: float
    t_budget_alg2: float


def _gradient_r(x: np.ndarray, y: np.ndarray, w: np.ndarray, eta_vec: np.ndarray) -> np.ndarray:
    x = as_matrix(x)
    y = as_vector(y)
    w = as_vector(w)
    eta_vec = as_vector(eta_vec)
    n, d = x.shape
    if y.shape[0] != n or w.shape[0] != d or eta_vec.shape[0] != d:
        raise DimensionError(
            f"shape mismatch: X {x.shape}, y {y.shape}, w {w.shape}, eta {eta_vec.shape}"
        )
    if not np.all(eta_vec > 0):
        raise ParameterError("eta_vec must be coordinate-wise positive")
    return 4.0 * eta_vec * (mat_t_apply(x, mat_apply(x, w) - y) / n)


def gradient_factors(
    x: np.ndarray, y: np.ndarray, w: np.ndarray, eta_vec: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Update factors (1 - r, 1 + r) with r = 4*eta_vec ⊙ Xᵀ(Xw - y)/n.

    The first factor multiplies u, the second multiplies v; they always sum
    to 2 coordinate-wise.
    """
    r = _gradient_r(x, y, w, eta_vec)
    return 1.0 - r, 1.0 + r


def initial_state(d: int, alpha: float, eta: float) -> DescentState:
    """Fresh state u = v = alpha*1 (so w = 0), unit multipliers, t = 0."""
    if not alpha > 0 or not eta > 0:
        raise ParameterError("alpha and eta must be positive")
    return DescentState(
        u=np.full(d, alpha),
        v=np.full(d, alpha),
        m=np.ones(d),
        base_eta=eta,
        t=0,
        alpha=alpha,
    )


def gd_step(state: DescentState, x: np.ndarray, y: np.ndarray) -> DescentState:
    """One multiplicative update; raises on non-finite iterates."""
    with np.errstate(over="ignore", invalid="ignore"):
        plus, minus = gradient_factors(x, y, state.w, state.base_eta * state.m)
        u = state.u * plus
        v = state.v * minus
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise DivergenceError(
            f"non-finite iterate at t={state.t + 1}; step size is likely too large"
        )
    return DescentState(u=u, v=v, m=state.m, base_eta=state.base_eta, t=state.t + 1, alpha=state.alpha)


def estimate_wmax(x: np.ndarray, y: np.ndarray, eta_tilde: float = 1e-10) -> WmaxEstimate:
    """Estimate the largest target magnitude from one probe step at u = v = 1.

    The probe runs one gradient step with a tiny step size and reads the
    largest deviation of the update factors from 1: with f_max over both
    factor vectors' sup-norms, the estimate is (f_max - 1)/(3*eta_tilde).
    Since f_max = 1 + ‖r‖∞ identically, the deviation is computed directly
    from r rather than from the factors, which would shear off half the
    mantissa against the leading 1.
    """
    if not eta_tilde > 0:
        raise ParameterError(f"eta_tilde must be positive, got {eta_tilde}")
    x = as_matrix(x)
    y = as_vector(y)
    d = x.shape[1]
    # u = v = 1 means w = 0
    r = _gradient_r(x, y, np.zeros(d), np.full(d, eta_tilde))
    r_norm = inf_norm(r)
    f_max = 1.0 + r_norm
    if r_norm == 0.0:
        return WmaxEstimate(estimate=0.0, f_max=1.0, degenerate=True, production_eta=None)
    estimate = r_norm / (3.0 * eta_tilde)
    return WmaxEstimate(
        estimate=estimate,
        f_max=f_max,
        degenerate=False,
        production_eta=1.0 / (20.0 * estimate),
    )


def kappa_eff_of(signal: SparseSignal, eps: float, maxnoise: float) -> float:
    """Effective condition number w_max/(w_min ∨ eps ∨ maxnoise), at least 1."""
    if eps < 0 or maxnoise < 0:
        raise ParameterError("eps and maxnoise must be nonnegative")
    denom = max(signal.w_min, eps, maxnoise)
    if denom == 0.0:
        return 1.0 if signal.w_max == 0.0 else math.inf
    return max(1.0, signal.w_max / denom)


def recommended_settings(
    w_max_hat: float,
    w_min: float,
    eps: float,
    d: int,
    k: int,
    maxnoise: float,
    budget_constant: float = 1.0,
) -> RecommendedSettings:
    """Evaluate the theory's parameter formulas at the given problem scales.

    Time budgets carry a unit multiplicative constant by default (exposed as
    `budget_constant`): the analysis leaves them unnamed and experiments
    calibrate them. eps = 0 demands exact recovery, which pushes
    alpha_budget to 0 and the constant-step budget to infinity.
    """
    if not (w_max_hat > 0 and w_min > 0 and d >= 1 and k >= 1):
        raise ParameterError("w_max_hat, w_min must be positive; d, k at least 1")
    if eps < 0 or maxnoise < 0:
        raise ParameterError("eps and maxnoise must be nonnegative")
    kappa = max(1.0, w_max_hat / max(w_min, eps, maxnoise))
    log_kappa = math.log(kappa)
    delta = 1.0 / (math.sqrt(k) * max(1.0, log_kappa))
    alpha = min(
        min(eps * eps, eps, 1.0) / max((2.0 * d + 1.0) ** 2, w_max_hat**2),
        math.sqrt(w_min) / 2.0,
    )
    eta = 1.0 / (20.0 * w_max_hat)
    log_inv_alpha = math.inf if alpha == 0.0 else math.log(1.0 / alpha)
    t1 = budget_constant * kappa / (eta * w_max_hat) * log_inv_alpha
    t2 = 0.0 if log_kappa == 0.0 else budget_constant * log_kappa * log_inv_alpha
    return RecommendedSettings(
        kappa_eff=kappa,
        delta_budget=delta,
        alpha_budget=alpha,
        eta_budget=eta,
        t_budget_alg1=t1 if math.isinf(t1) else float(math.ceil(t1)),
        t_budget_alg2=t2 if math.isinf(t2) else float(math.ceil(t2)),
    )


def decompose(
    w_plus: np.ndarray,
    w_minus: np.ndarray,
    signal: SparseSignal,
    x: np.ndarray,
    xi: np.ndarray,
) -> ErrorDecomposition:
    """Split an iterate into its signal and error parts.

    s_t collects the correctly-signed halves on the support; e_t is the rest
    (off-support weight plus wrong-sign weight on the support), so
    s_t + e_t = w_t exactly. b_t = XᵀX e_t/n − Xᵀξ/n is the bounded-error
    drive and p_t = (XᵀX/n − I)(s_t − w*) the proportional one.
    """
    w_plus = as_vector(w_plus)
    w_minus = as_vector(w_minus)
    x = as_matrix(x)
    xi = as_vector(xi)
    w_star = signal.w_star
    d = w_star.shape[0]
    n = x.shape[0]
    if w_plus.shape[0] != d or w_minus.shape[0] != d or x.shape[1] != d or xi.shape[0] != n:
        raise DimensionError(
            f"shape mismatch: w+ {w_plus.shape}, w- {w_minus.shape}, "
            f"X {x.shape}, xi {xi.shape}, signal d={d}"
        )
    pos = w_star > 0
    neg = w_star < 0
    w_t = w_plus - w_minus
    s_t = np.where(pos, w_plus, 0.0) - np.where(neg, w_minus, 0.0)
    e_t = np.where(pos | neg, 0.0, w_t) + np.where(neg, w_plus, 0.0) - np.where(pos, w_minus, 0.0)
    b_t = mat_t_apply(x, mat_apply(x, e_t)) / n - mat_t_apply(x, xi) / n
    shifted = s_t - w_star
    p_t = mat_t_apply(x, mat_apply(x, shifted)) / n - shifted
    return ErrorDecomposition(s_t=s_t, e_t=e_t, b_t=b_t, p_t=p_t)


def _error_mass_sup(state: DescentState, signal: SparseSignal) -> float:
    """‖e_t‖∞ straight from the state (no design matrix needed)."""
    w_star = signal.w_star
    wp = state.u * state.u
    wm = state.v * state.v
    pos = w_star > 0
    neg = w_star < 0
    e = np.where(pos | neg, 0.0, wp - wm) + np.where(neg, wp, 0.0) - np.where(pos, wm, 0.0)
    return inf_norm(e)


def _target_gap(state: DescentState, monitor: RunMonitor) -> float:
    diff = state.w - monitor.target
    if monitor.target_norm == "l2":
        return float(np.linalg.norm(diff))
    return inf_norm(diff)


def _run(
    x: np.ndarray,
    y: np.ndarray,
    cfg: DescentConfig,
    monitor: Optional[RunMonitor],
    doubling: bool,
) -> Trajectory:
    x = as_matrix(x)
    y = as_vector(y)
    d = x.shape[1]
    state = initial_state(d, cfg.alpha, cfg.eta)

    if doubling:
        if cfg.tau is None or cfg.z_hat is None:
            raise ParameterError("the doubling schedule needs tau and z_hat set")
        period_log = math.ceil(math.log(1.0 / cfg.alpha))
        if period_log < 1:
            raise ParameterError("the doubling schedule needs alpha < 1")
        period = cfg.tau * period_log

    z = cfg.z_hat if cfg.z_hat is not None else 0.0
    norm_cap = DIVERGENCE_NORM_FACTOR * (1.0 + z)
    safety_cap = (
        cfg.safety_stop_threshold
        if cfg.safety_stop_threshold is not None
        else math.sqrt(cfg.alpha)
    )

    snapshots: list[tuple[int, np.ndarray]] = [(0, state.w)]
    stop_reason = "max-iters"
    for _ in range(cfg.max_iters):
        if doubling and state.t % period == 0:
            stage = state.t // period
            if stage >= 2:
                threshold = 2.0 ** (-stage - 1) * cfg.z_hat
                small = np.maximum(state.u * state.u, state.v * state.v) <= threshold
                state = DescentState(
                    u=state.u,
                    v=state.v,
                    m=np.where(small, 2.0 * state.m, state.m),
                    base_eta=state.base_eta,
                    t=state.t,
                    alpha=state.alpha,
                )
        state = gd_step(state, x, y)
        w = state.w
        if inf_norm(w) > norm_cap:
            raise DivergenceError(
                f"iterate norm {inf_norm(w):.3e} exceeded {norm_cap:.3e} at t={state.t}"
            )
        if state.t % cfg.snapshot_every == 0:
            snapshots.append((state.t, w))
        if monitor is not None:
            if monitor.target is not None and _target_gap(state, monitor) <= monitor.target_tol:
                stop_reason = "target-reached"
                break
            if monitor.signal is not None and _error_mass_sup(state, monitor.signal) > safety_cap:
                stop_reason = "safety-stop"
                break
    if snapshots[-1][0] != state.t:
        snapshots.append((state.t, state.w))
    return Trajectory(snapshots=snapshots, final_state=state, stop_reason=stop_reason)


def run_alg1(
    x: np.ndarray, y: np.ndarray, cfg: DescentConfig, monitor: Optional[RunMonitor] = None
) -> Trajectory:
    """Constant-step descent: every coordinate runs at cfg.eta throughout."""
    return _run(x, y, cfg, monitor, doubling=False)


def run_alg2(
    x: np.ndarray, y: np.ndarray, cfg: DescentConfig, monitor: Optional[RunMonitor] = None
) -> Trajectory:
    """Doubling-schedule descent.

    Every tau*ceil(ln(1/alpha)) iterations — at stage s >= 2, i.e. from the
    second multiple on — coordinates whose squares both sit at or below
    2^(-s-1) * z_hat get their step multiplier doubled, so targets far below
    z_hat stop paying the global step's conditioning price. The check uses
    the current state at index t before the step that produces t+1.
    """
    return _run(x, y, cfg, monitor, doubling=True)
