"""One-dimensional multiplicative-update sequences and their guarantees.

Every convergence claim the descent machinery relies on reduces to facts
about the scalar recurrence x_{t+1} = x_t * (1 - 4*eta*(x_t - x_star + b_t))^2
under various error regimes. This module exposes those sequences directly,
the closed-form time bounds attached to them, and a randomized verification
suite (`run_lemma_suite`) that asserts each stated inequality.

A note on arithmetic: the stated inequalities are exact claims in real
arithmetic, and several of them (monotonicity, tube containment) get within
one double-precision ulp of equality near the fixed point, where compound
rounding produces spurious hair-width violations. The suite therefore checks
every per-step claim in exact rational arithmetic (floats are exact
rationals, and a single step is a degree-3 polynomial, so this is cheap) and
advances trajectories through float-representable admissible states. Claims
with genuine real-arithmetic margins (the time bounds) are checked in plain
float with strict, slack-free comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import SeededRng
from .errors import ParameterError

__all__ = [
    "ErrorStream",
    "HittingTimes",
    "LemmaCheckResult",
    "ScalarSequenceSpec",
    "bound_noise_time",
    "bound_signal_time",
    "halving_schedule_bound",
    "hitting_time",
    "iterate_bounded",
    "iterate_pair",
    "iterate_plain",
    "large_error_decay_time",
    "race_hitting_times",
    "run_lemma_suite",
    "sandwich",
    "shrinkage_floor",
]


class ErrorStream:
    """A bounded per-iteration disturbance b_t with a declared bound B.

    Streams may depend on the iteration index and on the current deviation
    x_t - x_star (which is what the adversarial kind keys on). Random kinds
    hold their own generator, so reuse one instance for one trajectory.
    """

    def __init__(self, bound: float, kind: str, fn: Callable[[int, float], float]):
        if bound < 0:
            raise ParameterError(f"stream bound must be nonnegative, got {bound}")
        self.bound = bound
        self.kind = kind
        self._fn = fn

    def value(self, t: int, deviation: float) -> float:
        b = self._fn(t, deviation)
        if abs(b) > self.bound:
            raise ParameterError(
                f"stream produced |b_{t}| = {abs(b)} above its bound {self.bound}"
            )
        return b

    @classmethod
    def zero(cls) -> "ErrorStream":
        return cls(0.0, "zero", lambda t, dev: 0.0)

    @classmethod
    def constant(cls, value: float) -> "ErrorStream":
        return cls(abs(value), "constant", lambda t, dev: value)

    @classmethod
    def uniform(cls, bound: float, rng: SeededRng) -> "ErrorStream":
        g = rng.generator()
        return cls(bound, "uniform", lambda t, dev: float(g.uniform(-bound, bound)))

    @classmethod
    def adversarial(cls, bound: float) -> "ErrorStream":
        # Worst-case sign: always push the iterate away from its target.
        return cls(bound, "adversarial", lambda t, dev: -bound * math.copysign(1.0, dev))

    @classmethod
    def replayed(cls, values: Sequence[float], bound: float | None = None) -> "ErrorStream":
        values = [float(v) for v in values]
        observed = max((abs(v) for v in values), default=0.0)
        if bound is None:
            bound = observed
        elif observed > bound:
            raise ParameterError(
                f"declared bound {bound} below the trace's maximum {observed}"
            )

        def fn(t: int, dev: float) -> float:
            if t >= len(values):
                raise ParameterError(f"replayed stream exhausted at t={t}")
            return values[t]

        return cls(bound, "replayed", fn)


@dataclass(frozen=True)
class ScalarSequenceSpec:
    """One scalar sequence: start, target, step size, errors, length."""

    x0: float
    x_star: float
    eta: float
    horizon: int
    error_stream: Optional[ErrorStream] = None

    def __post_init__(self):
        if not self.x0 > 0:
            raise ParameterError(f"x0 must be positive, got {self.x0}")
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.horizon < 0:
            raise ParameterError("horizon must be nonnegative")

    @property
    def stream(self) -> ErrorStream:
        return self.error_stream if self.error_stream is not None else ErrorStream.zero()


@dataclass(frozen=True)
class HittingTimes:
    """First crossing times of a signal/noise pair of sequences.

    t_signal: first t with x_t >= x_star - eps; t_noise: first t with
    y_t >= alpha. Under alpha <= sqrt(eps)/x_star (and the step-size and
    target-separation conditions) t_signal <= t_noise whenever both exist.
    """

    t_signal: Optional[int]
    t_noise: Optional[int]


def _plain_step(x: float, x_star: float, eta: float) -> float:
    f = 1.0 - 4.0 * eta * (x - x_star)
    return x * f * f


def _bounded_step(x: float, x_star: float, eta: float, b: float) -> float:
    f = 1.0 - 4.0 * eta * (x - x_star + b)
    return x * f * f


def iterate_plain(spec: ScalarSequenceSpec) -> list[float]:
    """The error-free sequence x_{t+1} = x_t*(1 - 4*eta*(x_t - x_star))^2.

    Returns [x_0, ..., x_horizon]. The spec's stream must have bound 0.
    """
    if spec.stream.bound != 0.0:
        raise ParameterError("iterate_plain requires an error-free spec (bound 0)")
    xs = [spec.x0]
    x = spec.x0
    for _ in range(spec.horizon):
        x = _plain_step(x, spec.x_star, spec.eta)
        xs.append(x)
    return xs


def iterate_bounded(spec: ScalarSequenceSpec) -> list[float]:
    """The disturbed sequence x_{t+1} = x_t*(1 - 4*eta*(x_t - x_star + b_t))^2."""
    stream = spec.stream
    xs = [spec.x0]
    x = spec.x0
    for t in range(spec.horizon):
        b = stream.value(t, x - spec.x_star)
        x = _bounded_step(x, spec.x_star, spec.eta, b)
        xs.append(x)
    return xs


def sandwich(spec: ScalarSequenceSpec) -> tuple[list[float], list[float]]:
    """Envelope sequences: lower runs with constant error +B, upper with -B.

    For any stream bounded by B, the disturbed sequence stays between the
    two envelopes, and both stay in [0, x_star + B]. Requires
    x0 <= x_star + B and eta <= 1/(16*(x_star + B)).
    """
    B = spec.stream.bound
    top = spec.x_star + B
    if spec.x0 > top:
        raise ParameterError(f"sandwich needs x0 <= x_star + B = {top}, got {spec.x0}")
    if spec.eta > 1.0 / (16.0 * top):
        raise ParameterError(
            f"sandwich needs eta <= 1/(16*(x_star+B)) = {1.0 / (16.0 * top)}"
        )
    lower = [spec.x0]
    upper = [spec.x0]
    lo = hi = spec.x0
    for _ in range(spec.horizon):
        lo = _bounded_step(lo, spec.x_star, spec.eta, B)
        hi = _bounded_step(hi, spec.x_star, spec.eta, -B)
        lower.append(lo)
        upper.append(hi)
    return lower, upper


def iterate_pair(spec: ScalarSequenceSpec) -> tuple[list[float], list[float]]:
    """Co-evolving split sequences for a signed target.

    Both halves start at x0 (read as alpha^2) and see opposite-sign factors:
    x+ <- x+*(1 - 4*eta*(x - x_star + b))^2, x- <- x-*(1 + ...)^2 with
    x = x+ - x-. The off-sign half stays near its initialization; the
    product x+ * x- never exceeds x0^2.
    """
    mag = abs(spec.x_star)
    if mag <= 0:
        raise ParameterError("pair iteration needs a nonzero target")
    if spec.x0 > mag / 4.0:
        raise ParameterError(f"pair iteration needs x0 <= |x_star|/4 = {mag / 4.0}")
    B = spec.stream.bound
    if spec.eta > 1.0 / (12.0 * (mag + B)):
        raise ParameterError(
            f"pair iteration needs eta <= 1/(12*(|x_star|+B)) = {1.0 / (12.0 * (mag + B))}"
        )
    stream = spec.stream
    xp = xm = spec.x0
    plus, minus = [xp], [xm]
    for t in range(spec.horizon):
        x = xp - xm
        b = stream.value(t, x - spec.x_star)
        g = 4.0 * spec.eta * (x - spec.x_star + b)
        xp = xp * (1.0 - g) ** 2
        xm = xm * (1.0 + g) ** 2
        plus.append(xp)
        minus.append(xm)
    return plus, minus


def hitting_time(sequence: Sequence[float], threshold: float, direction: str = "up") -> Optional[int]:
    """First index crossing the threshold (>= for "up", <= for "down")."""
    if direction not in ("up", "down"):
        raise ParameterError(f"direction must be 'up' or 'down', got {direction!r}")
    for i, v in enumerate(sequence):
        if (direction == "up" and v >= threshold) or (direction == "down" and v <= threshold):
            return i
    return None


def bound_signal_time(x_star: float, alpha: float, eps: float, eta: float) -> float:
    """Upper bound on the time for the error-free sequence started at alpha^2
    to reach x_star - eps: 12/(32*eta*x_star) * log(x_star^2/(alpha^2*eps)).
    Meaningful for 0 < alpha^2 < x_star, eps > 0, eta <= 1/(8*x_star)."""
    return 12.0 / (32.0 * eta * x_star) * math.log(x_star**2 / (alpha**2 * eps))


def bound_noise_time(B: float, x0: float, eta: float) -> float:
    """Time for which a purely error-driven sequence x_{t+1} = x_t*(1+4*eta*b_t)^2
    from x0 in (0,1) is guaranteed to stay at or below sqrt(x0):
    1/(32*eta*B) * log(1/x0^2), for eta <= 1/(8*B)."""
    return 1.0 / (32.0 * eta * B) * math.log(1.0 / x0**2)


def large_error_decay_time(x_star: float, B: float, eta: float) -> float:
    """Iterations after which a sequence started in [x_star+2B, x_star+4B]
    under errors bounded by B has fallen to at most x_star + 2B (and stays
    nonnegative throughout): 1/(10*eta*B), for eta <= 1/(20*B)."""
    del x_star  # the bound is target-free; kept for call-site readability
    return 1.0 / (10.0 * eta * B)


def shrinkage_floor(
    error_stream: ErrorStream, eta: float, alpha: float, horizon: int
) -> tuple[float, float]:
    """Growth and shrink products over the horizon.

    growth = prod (1 + 8*eta*|s_t|)^2, shrink = prod (1 - 4*eta*|s_t|)^2.
    Whenever growth <= 1/alpha (and eta <= 1/(8*B)), shrink >= alpha.
    """
    growth = 1.0
    shrink = 1.0
    for t in range(horizon):
        s = abs(error_stream.value(t, 0.0))
        growth *= (1.0 + 8.0 * eta * s) ** 2
        shrink *= (1.0 - 4.0 * eta * s) ** 2
    return growth, shrink


def halving_schedule_bound(B: float, eta: float, T_base: int, stages: int) -> float:
    """Bound on the growth product when errors halve over doubling intervals.

    Interval j (length T_base * 2^j) carries |p_t| <= 2^(-j)*B. For
    i = stages - 1 the product of (1 + 4*eta*p_t)^2 over all stages is at
    most (1 + 4*eta*2^(-i)*B)^(2*(i+1)*T_i) with T_i = 2^i*T_base. The
    worst-case product is evaluated exactly in rational arithmetic and
    asserted against the bound before returning it. Requires eta <= 1/(4*B).
    """
    if T_base < 1 or stages < 1:
        raise ParameterError("T_base and stages must be positive integers")
    i = stages - 1
    eta_q, B_q = Fraction(eta), Fraction(B)
    prod = Fraction(1)
    for j in range(stages):
        factor = (1 + 4 * eta_q * B_q / 2**j) ** 2
        prod *= factor ** (T_base * 2**j)
    bound_q = (1 + 4 * eta_q * B_q / 2**i) ** (2 * (i + 1) * T_base * 2**i)
    assert prod <= bound_q
    try:
        return float(bound_q)
    except OverflowError:
        return math.inf


def race_hitting_times(
    x_star: float, y_star: float, alpha: float, eps: float, eta: float, horizon: int
) -> HittingTimes:
    """Run the error-free signal and noise sequences side by side from alpha^2
    and report when each crosses its finish line."""
    x = y = alpha * alpha
    t_signal = t_noise = None
    for t in range(horizon + 1):
        if t_signal is None and x >= x_star - eps:
            t_signal = t
        if t_noise is None and y >= alpha:
            t_noise = t
        if t_signal is not None and t_noise is not None:
            break
        x = _plain_step(x, x_star, eta)
        y = _plain_step(y, y_star, eta)
    return HittingTimes(t_signal=t_signal, t_noise=t_noise)


# --------------------------------------------------------------------------
# randomized verification suite
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaCheckResult:
    name: str
    cases: int
    failures: int
    worst_margin: float  # largest observed (violation - allowance); <= 0 is clean

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _exact_plain_step(x: float, x_star: float, eta: float) -> Fraction:
    g = Fraction(x) - Fraction(x_star)
    f = 1 - 4 * Fraction(eta) * g
    return Fraction(x) * f * f


def _exact_bounded_step(x: float, x_star: float, eta: float, b: float) -> Fraction:
    g = Fraction(x) - Fraction(x_star) + Fraction(b)
    f = 1 - 4 * Fraction(eta) * g
    return Fraction(x) * f * f


def _shadow(value: Fraction, lo: float | None = None, hi: float | None = None) -> float:
    # Nearest float to an exact in-range value is at most half an ulp outside
    # the range, so a single nextafter is enough to re-enter it.
    f = float(value)
    if hi is not None and f > hi:
        f = math.nextafter(f, -math.inf)
    if lo is not None and f < lo:
        f = math.nextafter(f, math.inf)
    return f


def _logu(g, a: float, b: float) -> float:
    return float(math.exp(g.uniform(math.log(a), math.log(b))))


def _check_monotone_below(rng: SeededRng, cases: int, horizon: int = 120) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        eta = (1.0 / (8.0 * xs)) * float(g.uniform(0.1, 1.0))
        x = xs * _logu(g, 1e-8, 1.0)
        bad = False
        for _ in range(horizon):
            nxt = _exact_plain_step(x, xs, eta)
            m = float(max(Fraction(x) - nxt, nxt - Fraction(xs))) / xs
            worst = max(worst, m)
            if m > 0:
                bad = True
                break
            x = _shadow(nxt, lo=x, hi=xs)
        failures += bad
    return LemmaCheckResult("monotone-below", cases, failures, worst)


def _check_monotone_above(rng: SeededRng, cases: int, horizon: int = 120) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        eta = (1.0 / (12.0 * xs)) * float(g.uniform(0.1, 1.0))
        x = xs * float(g.uniform(1.0, 1.5))
        bad = False
        for _ in range(horizon):
            nxt = _exact_plain_step(x, xs, eta)
            m = float(max(nxt - Fraction(x), Fraction(xs) - nxt)) / xs
            worst = max(worst, m)
            if m > 0:
                bad = True
                break
            x = _shadow(nxt, lo=xs, hi=x)
        failures += bad
    return LemmaCheckResult("monotone-above", cases, failures, worst)


def _shadow_plain_run(x0: float, xs: float, eta: float, steps: int, below: bool) -> float:
    """Advance `steps` through float-representable admissible states."""
    x = x0
    for _ in range(steps):
        nxt = _exact_plain_step(x, xs, eta)
        x = _shadow(nxt, lo=None if below else xs, hi=xs if below else None)
    return x


def _check_gap_halving(rng: SeededRng, cases: int, above: bool) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        if above:
            eta = (1.0 / (12.0 * xs)) * float(g.uniform(0.1, 1.0))
            x0 = xs + (xs / 2.0) * float(g.uniform(0.0, 1.0))
            steps = math.ceil(1.0 / (8.0 * eta * xs))
        else:
            eta = (1.0 / (8.0 * xs)) * float(g.uniform(0.1, 1.0))
            x0 = xs - (xs / 2.0) * float(g.uniform(0.0, 1.0))
            steps = math.ceil(1.0 / (4.0 * eta * xs))
        x = _shadow_plain_run(x0, xs, eta, steps, below=not above)
        m = (abs(xs - x) - 0.5 * abs(x0 - xs)) / xs
        worst = max(worst, m)
        failures += m > 0
    name = "gap-halving-above" if above else "gap-halving-below"
    return LemmaCheckResult(name, cases, failures, worst)


def _check_exponential_near(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        eta = (1.0 / (12.0 * xs)) * float(g.uniform(0.1, 1.0))
        gap = (xs / 2.0) * float(g.uniform(0.1, 1.0))
        eps = gap * _logu(g, 1e-3, 0.9)
        below = bool(g.integers(0, 2))
        x0 = xs - gap if below else xs + gap
        steps = math.ceil(3.0 / (8.0 * eta * xs) * math.log(gap / eps))
        x = _shadow_plain_run(x0, xs, eta, steps, below=below)
        m = (abs(xs - x) - eps) / xs
        worst = max(worst, m)
        failures += m > 0
    return LemmaCheckResult("exp-approach-near", cases, failures, worst)


def _check_exponential_far(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        eta = (1.0 / (8.0 * xs)) * float(g.uniform(0.1, 1.0))
        x0 = (xs / 2.0) * _logu(g, 1e-10, 1.0)
        eps = xs * _logu(g, 1e-6, 0.3)
        steps = math.ceil(3.0 / (8.0 * eta * xs) * math.log(xs**2 / (4.0 * x0 * eps)))
        x = _shadow_plain_run(x0, xs, eta, steps, below=True)
        m = ((xs - eps) - x) / xs  # ceiling holds by admissible stepping
        worst = max(worst, m)
        failures += m > 0
    return LemmaCheckResult("exp-approach-far", cases, failures, worst)


def _check_signal_time(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        alpha = min(_logu(g, 1e-8, 1e-1), 0.9 * math.sqrt(xs))
        eta = (1.0 / (8.0 * xs)) * float(g.uniform(0.1, 1.0))
        eps = xs * _logu(g, 1e-4, 0.3)
        bound = bound_signal_time(xs, alpha, eps, eta)
        t_max = math.ceil(bound)
        x = alpha * alpha
        hit = None
        for t in range(t_max + 1):
            if x >= xs - eps:
                hit = t
                break
            x = _shadow(_exact_plain_step(x, xs, eta), hi=xs)
        if hit is None:
            failures += 1
            worst = max(worst, 1.0)
        else:
            worst = max(worst, (hit - t_max) / max(t_max, 1))
    return LemmaCheckResult("signal-time-bound", cases, failures, worst)


def _check_noise_time(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        B = _logu(g, 1e-3, 1e3)
        eta = (1.0 / (8.0 * B)) * float(g.uniform(0.1, 1.0))
        alpha = _logu(g, 1e-8, 1e-1)
        x0 = alpha * alpha
        t_max = math.floor(bound_noise_time(B, x0, eta))
        cap = math.sqrt(x0)
        x = x0
        bad = False
        for _ in range(t_max + 1):
            m = (x - cap) / cap
            worst = max(worst, m)
            if m > 0:
                bad = True
                break
            x = x * (1.0 + 4.0 * eta * B) ** 2  # worst admissible stream
        failures += bad
    return LemmaCheckResult("noise-time-bound", cases, failures, worst)


def _check_sandwich(rng: SeededRng, cases: int, horizon: int = 250) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for case in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        B = xs * _logu(g, 1e-3, 1.0)
        eta = (1.0 / (16.0 * (xs + B))) * float(g.uniform(0.1, 1.0))
        x0 = (xs + B) * float(g.uniform(1e-6, 1.0))
        lo = x = hi = x0
        top = Fraction(xs) + Fraction(B)
        adversarial = case % 2 == 0
        bad = False
        for _ in range(horizon):
            if adversarial:
                b = -B * math.copysign(1.0, x - xs)
            else:
                b = float(g.uniform(-B, B))
            lo_n = _exact_bounded_step(lo, xs, eta, B)
            x_n = _exact_bounded_step(x, xs, eta, b)
            hi_n = _exact_bounded_step(hi, xs, eta, -B)
            m = float(max(-lo_n, lo_n - x_n, x_n - hi_n, hi_n - top)) / xs
            worst = max(worst, m)
            if m > 0:
                bad = True
                break
            lo, x, hi = float(lo_n), float(x_n), float(hi_n)
            # re-enter the admissible order after rounding
            x = min(x, float(top))
            lo = min(lo, x)
            hi = min(max(hi, x), float(top))
        failures += bad
    return LemmaCheckResult("sandwich-envelope", cases, failures, worst)


def _check_tube(rng: SeededRng, cases: int, horizon: int = 250) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    kinds = ["uniform", "outward", "inward"]
    for case in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        B = (xs / 5.0) * float(g.uniform(0.01, 1.0))
        eta = (5.0 / (96.0 * xs)) * float(g.uniform(0.1, 1.0))
        x = xs + B * float(g.uniform(-0.999, 0.999))
        kind = kinds[case % 3]
        bad = False
        for _ in range(horizon):
            if kind == "uniform":
                b = float(g.uniform(-B, B))
            elif kind == "outward":
                b = -B * math.copysign(1.0, x - xs)
            else:
                b = B * math.copysign(1.0, x - xs)
            dist = abs(Fraction(x) - Fraction(xs))
            nxt = _exact_bounded_step(x, xs, eta, b)
            ndist = abs(nxt - Fraction(xs))
            if dist <= Fraction(B):
                m = float(ndist - Fraction(B)) / xs
            elif x <= 1.2 * xs:
                m = float(ndist - dist) / xs
            else:  # rounding pushed the state past the admissible cap: skip
                m = -math.inf
            worst = max(worst, m)
            if m > 0:
                bad = True
                break
            x = float(nxt)
        failures += bad
    return LemmaCheckResult("tube-absorption", cases, failures, worst)


def _check_bounded_halving(rng: SeededRng, cases: int, above: bool) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        eta = (5.0 / (96.0 * xs)) * float(g.uniform(0.1, 1.0))
        if above:
            B = (xs / 20.0) * float(g.uniform(0.01, 0.95))
            x0 = float(g.uniform(xs + 4.0 * B, 1.2 * xs))
            steps = math.ceil(1.0 / (4.0 * eta * xs))
        else:
            B = xs * _logu(g, 1e-4, 1.0 / 9.0)
            lo, hi = (xs - B) / 2.0, xs - 5.0 * B
            if hi <= lo:
                continue
            x0 = float(g.uniform(lo, hi))
            steps = math.ceil(5.0 / (8.0 * eta * xs))
        x = x0
        for _ in range(steps):
            x = _bounded_step(x, xs, eta, float(g.uniform(-B, B)))
        m = (abs(xs - x) - 0.5 * abs(x0 - xs)) / xs
        worst = max(worst, m)
        failures += m > 0
    name = "bounded-halving-above" if above else "bounded-halving-below"
    return LemmaCheckResult(name, cases, failures, worst)


def _check_bounded_exponential(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for case in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        eta = (5.0 / (96.0 * xs)) * float(g.uniform(0.1, 1.0))
        if case % 2 == 0:  # start at a moderate distance
            gap = (xs / 5.0) * float(g.uniform(0.3, 1.0))
            eps = gap * float(g.uniform(0.01, 0.5))
            B = (gap - eps) * float(g.uniform(0.1, 0.9))
            x0 = xs - gap if g.integers(0, 2) else xs + gap
            steps = math.ceil(15.0 / (32.0 * eta * xs) * math.log(gap / eps))
            x = x0
            for _ in range(steps):
                x = _bounded_step(x, xs, eta, float(g.uniform(-B, B)))
            m = (abs(xs - x) - (B + eps)) / xs
        else:  # start far below
            B = (xs / 5.0) * float(g.uniform(0.01, 1.0))
            eps = xs * _logu(g, 1e-4, 0.1)
            hi0 = xs - B - eps
            if hi0 <= 0:
                continue
            x0 = hi0 * _logu(g, 1e-8, 1.0)
            steps = math.ceil(15.0 / (32.0 * eta * xs) * math.log(xs**2 / (x0 * eps)))
            x = x0
            for _ in range(steps):
                x = _bounded_step(x, xs, eta, float(g.uniform(-B, B)))
            m = max((xs - B - eps) - x, x - (xs + B)) / xs
        worst = max(worst, m)
        failures += m > 0
    return LemmaCheckResult("bounded-exp-approach", cases, failures, worst)


def _check_large_errors(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    kinds = ["const-", "const+", "uniform", "adversarial"]
    for case in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        B = xs * _logu(g, 1e-2, 1e2)
        eta = (1.0 / (20.0 * B)) * float(g.uniform(0.1, 1.0))
        x0 = float(g.uniform(xs + 2.0 * B, xs + 4.0 * B))
        t_bound = math.ceil(large_error_decay_time(xs, B, eta))
        kind = kinds[case % 4]
        x = x0
        hit_t = 0 if x0 <= xs + 2.0 * B else None
        bad = False
        for t in range(1, t_bound + 1):
            if kind == "const-":
                b = -B
            elif kind == "const+":
                b = B
            elif kind == "uniform":
                b = float(g.uniform(-B, B))
            else:
                b = -B if x > xs + B else B
            x = _bounded_step(x, xs, eta, b)
            if x < 0:
                bad = True
                break
            if hit_t is None and x <= xs + 2.0 * B:
                hit_t = t
        if bad or hit_t is None:
            failures += 1
            worst = max(worst, 1.0)
        else:
            worst = max(worst, (hit_t - t_bound) / t_bound)
    return LemmaCheckResult("large-error-decay", cases, failures, worst)


def _check_shrinkage(rng: SeededRng, cases: int, horizon: int = 250) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        B = _logu(g, 1e-3, 1e3)
        eta = (1.0 / (8.0 * B)) * float(g.uniform(0.1, 1.0))
        trace = [float(v) for v in g.uniform(0.0, B, size=horizon)]
        stream = ErrorStream.replayed(trace, bound=B)
        growth, shrink = shrinkage_floor(stream, eta, alpha=1.0, horizon=horizon)
        # choose alpha so the premise growth <= 1/alpha holds
        alpha = min(1.0, 1.0 / growth) * float(g.uniform(0.5, 1.0))
        if growth <= 1.0 / alpha:
            m = alpha - shrink
            worst = max(worst, m)
            failures += m > 0
    return LemmaCheckResult("shrinkage-implication", cases, failures, worst)


def _check_halving_schedule(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    for _ in range(cases):
        B = _logu(g, 1e-3, 1e3)
        eta = (1.0 / (4.0 * B)) * float(g.uniform(0.1, 1.0))
        try:
            halving_schedule_bound(
                B, eta, T_base=int(g.integers(1, 9)), stages=int(g.integers(1, 6))
            )
        except AssertionError:
            failures += 1
    worst = 1.0 if failures else -1.0
    return LemmaCheckResult("halving-schedule-product", cases, failures, worst)


def _check_pair(rng: SeededRng, cases: int, horizon: int = 300) -> LemmaCheckResult:
    g = rng.generator()
    fail_prod = fail_sign = 0
    worst = -math.inf
    kinds = ["uniform", "const+", "const-", "adversarial"]
    for case in range(cases):
        mag = _logu(g, 1e-3, 1e3)
        xs = mag if g.integers(0, 2) else -mag
        B = mag * _logu(g, 1e-3, 1.0)
        eta = (1.0 / (12.0 * (mag + B))) * float(g.uniform(0.1, 1.0))
        alpha2 = (mag / 4.0) * _logu(g, 1e-10, 1.0)
        cap = Fraction(alpha2) ** 2
        kind = kinds[case % 4]
        xp = xm = alpha2
        prod_bound = 1.0
        bad_p = bad_s = False
        for _ in range(horizon):
            x = xp - xm
            if kind == "uniform":
                b = float(g.uniform(-B, B))
            elif kind == "const+":
                b = B
            elif kind == "const-":
                b = -B
            else:
                b = B * math.copysign(1.0, x - xs)
            gq = 4 * Fraction(eta) * (Fraction(x) - Fraction(xs) + Fraction(b))
            xp_n = Fraction(xp) * (1 - gq) ** 2
            xm_n = Fraction(xm) * (1 + gq) ** 2
            mp = float(xp_n * xm_n - cap) / float(cap)
            worst = max(worst, mp)
            if mp > 0:
                bad_p = True
                break
            xp, xm = float(xp_n), float(xm_n)
            prod_bound *= 1.0 + 4.0 * eta * abs(b)
            wrong = xm if xs > 0 else xp
            ms = (wrong - alpha2 * prod_bound) / alpha2
            worst = max(worst, ms)
            if ms > 0:
                bad_s = True
                break
        fail_prod += bad_p
        fail_sign += bad_s
    return LemmaCheckResult("pair-product-and-sign", cases, fail_prod + fail_sign, worst)


def _check_race(rng: SeededRng, cases: int) -> LemmaCheckResult:
    g = rng.generator()
    failures = 0
    worst = -math.inf
    for _ in range(cases):
        xs = _logu(g, 1e-3, 1e3)
        ys = (xs / 12.0) * float(g.uniform(0.3, 1.0))
        eta = (1.0 / (8.0 * xs)) * float(g.uniform(0.3, 1.0))
        eps = xs * _logu(g, 1e-4, 0.3)
        alpha = min(
            (math.sqrt(eps) / xs) * float(g.uniform(0.05, 1.0)),
            0.9 * math.sqrt(xs),
        )
        horizon = math.ceil(bound_signal_time(xs, alpha, eps, eta)) + 1
        times = race_hitting_times(xs, ys, alpha, eps, eta, horizon)
        ok = times.t_signal is not None and (
            times.t_noise is None or times.t_signal <= times.t_noise
        )
        failures += not ok
        worst = max(worst, -1.0 if ok else 1.0)
    return LemmaCheckResult("signal-noise-race", cases, failures, worst)


def run_lemma_suite(rng: SeededRng, cases: int = 200) -> list[LemmaCheckResult]:
    """Run every scalar-sequence guarantee at `cases` random draws each.

    Parameters are drawn log-uniformly (targets in [1e-3, 1e3], initial
    scales in [1e-8, 1e-1]) with step sizes at the maximal admissible value
    times U[0.1, 1], so both stiff and loose regimes are exercised. Returns
    one result row per named check; every inequality is asserted with no
    slack.
    """
    checks = [
        lambda r: _check_monotone_below(r, cases),
        lambda r: _check_monotone_above(r, cases),
        lambda r: _check_gap_halving(r, cases, above=False),
        lambda r: _check_gap_halving(r, cases, above=True),
        lambda r: _check_exponential_near(r, cases),
        lambda r: _check_exponential_far(r, cases),
        lambda r: _check_signal_time(r, cases),
        lambda r: _check_noise_time(r, cases),
        lambda r: _check_sandwich(r, cases),
        lambda r: _check_tube(r, cases),
        lambda r: _check_bounded_halving(r, cases, above=False),
        lambda r: _check_bounded_halving(r, cases, above=True),
        lambda r: _check_bounded_exponential(r, cases),
        lambda r: _check_large_errors(r, cases),
        lambda r: _check_shrinkage(r, cases),
        lambda r: _check_halving_schedule(r, cases),
        lambda r: _check_pair(r, cases),
        lambda r: _check_race(r, cases),
    ]
    return [check(rng.child(i)) for i, check in enumerate(checks)]
