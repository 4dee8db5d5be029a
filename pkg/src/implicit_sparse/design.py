"""Design matrices, sparse signals, noise, and restricted-isometry checks.

Generators are pure functions of a :class:`~implicit_sparse.core.SeededRng`,
so every instance is reproducible from (seed, stream) alone. The RIP
certificate enumerates column subsets exactly rather than sampling; it
refuses (with a capacity error) instead of silently degrading.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import SeededRng, inf_norm, mat_apply, mat_t_apply
from .errors import CapacityError, DimensionError, ParameterError

RIP_ENUMERATION_CAP = 200_000

__all__ = [
    "DesignKind",
    "RipCertificate",
    "SignalSpec",
    "SparseSignal",
    "gen_design",
    "gen_noise",
    "gen_signal",
    "max_noise_stat",
    "max_noise_tail_bound",
    "rip_delta_exact",
    "rip_inf_residual",
]


@dataclass(frozen=True)
class DesignKind:
    """Law of the design-matrix rows.

    variant: "rademacher", "gaussian-isotropic" or "gaussian-equicorrelated".
    mu: row correlation for the equicorrelated variant (covariance
        (1-mu)*I + mu*ones); must lie in [0, 1).
    """

    variant: str = "rademacher"
    mu: float = 0.0

    def __post_init__(self):
        if self.variant not in (
            "rademacher",
            "gaussian-isotropic",
            "gaussian-equicorrelated",
        ):
            raise ParameterError(f"unknown design variant {self.variant!r}")
        if self.variant == "gaussian-equicorrelated" and not (0.0 <= self.mu < 1.0):
            raise ParameterError(f"equicorrelated mu must be in [0, 1), got {self.mu}")


@dataclass(frozen=True)
class SparseSignal:
    """A ground-truth parameter vector together with its support statistics."""

    w_star: np.ndarray
    support: np.ndarray  # sorted indices of the nonzero coordinates
    w_max: float
    w_min: float

    @classmethod
    def from_vector(cls, w_star: np.ndarray) -> "SparseSignal":
        w_star = np.asarray(w_star, dtype=np.float64)
        support = np.flatnonzero(w_star)
        mags = np.abs(w_star[support])
        w_max = float(mags.max()) if support.size else 0.0
        w_min = float(mags.min()) if support.size else 0.0
        return cls(w_star=w_star, support=support, w_max=w_max, w_min=w_min)

    @property
    def k(self) -> int:
        return int(self.support.size)

    @property
    def kappa(self) -> float:
        """Magnitude condition number w_max / w_min (1 for an empty signal)."""
        if self.w_min > 0:
            return self.w_max / self.w_min
        return 1.0 if self.w_max == 0 else math.inf

    def off_support_mask(self, d: int | None = None) -> np.ndarray:
        mask = np.ones(self.w_star.shape[0] if d is None else d, dtype=bool)
        mask[self.support] = False
        return mask


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for a random k-sparse signal.

    magnitudes "constant" places |gamma| on every supported coordinate;
    "geometric" places base**0 .. base**(k-1) (a condition number of
    base**(k-1)). The sign pattern is either "all-positive" or
    "random-signs" (each supported coordinate flipped independently).
    """

    d: int
    k: int
    magnitudes: str = "constant"
    gamma: float = 1.0
    base: float = 2.0
    sign_pattern: str = "all-positive"

    def __post_init__(self):
        if self.k > self.d:
            raise ParameterError(f"sparsity k={self.k} exceeds dimension d={self.d}")
        if self.k < 1:
            raise ParameterError("k must be at least 1")
        if self.magnitudes not in ("constant", "geometric"):
            raise ParameterError(f"unknown magnitude variant {self.magnitudes!r}")
        if self.magnitudes == "constant" and self.gamma == 0:
            raise ParameterError("gamma must be nonzero")
        if self.magnitudes == "geometric" and not self.base > 1:
            raise ParameterError("geometric base must exceed 1")
        if self.sign_pattern not in ("all-positive", "random-signs"):
            raise ParameterError(f"unknown sign pattern {self.sign_pattern!r}")


@dataclass(frozen=True)
class RipCertificate:
    """Result of a restricted-isometry check at one sparsity level."""

    sparsity_level: int
    delta: float
    method: str = "exact-enumeration"
    subsets_checked: int = 0


def gen_design(kind: DesignKind, n: int, d: int, rng: SeededRng) -> np.ndarray:
    """Draw an n-by-d design matrix with i.i.d. rows from the given law."""
    if n < 1 or d < 1:
        raise ParameterError(f"need n, d >= 1, got n={n}, d={d}")
    g = rng.generator()
    if kind.variant == "rademacher":
        return (2.0 * g.integers(0, 2, size=(n, d)) - 1.0).astype(np.float64)
    if kind.variant == "gaussian-isotropic":
        return g.standard_normal((n, d))
    # Equicorrelated rows: sqrt(1-mu)*g + sqrt(mu)*h*ones gives covariance
    # (1-mu)*I + mu*ones exactly, with no Cholesky factor involved.
    base = g.standard_normal((n, d))
    shared = g.standard_normal((n, 1))
    return math.sqrt(1.0 - kind.mu) * base + math.sqrt(kind.mu) * shared


def gen_signal(spec: SignalSpec, rng: SeededRng) -> SparseSignal:
    """Draw a sparse signal: uniform support, spec'd magnitudes and signs."""
    g = rng.generator()
    support = g.choice(spec.d, size=spec.k, replace=False)
    if spec.magnitudes == "constant":
        mags = np.full(spec.k, abs(spec.gamma))
    else:
        mags = spec.base ** np.arange(spec.k, dtype=np.float64)
    if spec.sign_pattern == "random-signs":
        signs = 2.0 * g.integers(0, 2, size=spec.k) - 1.0
    else:
        signs = np.ones(spec.k)
    w_star = np.zeros(spec.d)
    w_star[support] = mags * signs
    return SparseSignal.from_vector(w_star)


def gen_noise(sigma: float, n: int, rng: SeededRng) -> np.ndarray:
    """n i.i.d. centered Gaussian draws with standard deviation sigma."""
    if sigma < 0:
        raise ParameterError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0.0:
        return np.zeros(n)
    return sigma * rng.generator().standard_normal(n)


def max_noise_stat(x: np.ndarray, xi: np.ndarray) -> float:
    """The coordinate-wise noise floor ||X^T xi / n||_inf."""
    n = x.shape[0]
    return inf_norm(mat_t_apply(x, xi) / n)


def max_noise_tail_bound(sigma: float, d: int, n: int) -> float:
    """High-probability ceiling for max_noise_stat: 4*sqrt(2*sigma^2*log(2d))/sqrt(n).

    Holds with probability at least 1 - 1/(8*d^3) for unit-column designs
    with independent sub-Gaussian noise.
    """
    return 4.0 * math.sqrt(2.0 * sigma * sigma * math.log(2.0 * d)) / math.sqrt(n)


def rip_inf_residual(x: np.ndarray, z: np.ndarray) -> float:
    """||(X^T X / n - I) z||_inf, the testable half of the RIP sup-norm bound."""
    if x.shape[1] != z.shape[0]:
        raise DimensionError(
            f"design has {x.shape[1]} columns but z has length {z.shape[0]}"
        )
    n = x.shape[0]
    return inf_norm(mat_t_apply(x, mat_apply(x, z)) / n - z)


def _jacobi_eigen_extremes(a: np.ndarray, tol: float = 1e-12) -> tuple[float, float]:
    """(min, max) eigenvalue of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every off-diagonal pair in order until the largest
    off-diagonal magnitude drops below tol. Quadratic convergence makes a
    generous sweep cap safe for the tiny matrices this is used on.
    """
    a = np.array(a, dtype=np.float64)
    m = a.shape[0]
    if m == 1:
        return float(a[0, 0]), float(a[0, 0])
    for _ in range(60):
        off = np.abs(a - np.diag(np.diag(a))).max()
        if off < tol:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) < tol / (4 * m):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = a[q, p] = 0.0
    diag = np.diag(a)
    return float(diag.min()), float(diag.max())


def rip_delta_exact(x: np.ndarray, s: int) -> RipCertificate:
    """Exact restricted-isometry constant at sparsity s by subset enumeration.

    delta = max over all s-column subsets T of max(lambda_max(G_T) - 1,
    1 - lambda_min(G_T)), where G_T is the Gram matrix of the chosen
    columns of X/sqrt(n). Refuses when C(d, s) exceeds the enumeration cap.
    """
    n, d = x.shape
    if not 1 <= s <= d:
        raise ParameterError(f"sparsity level must be in [1, {d}], got {s}")
    total = math.comb(d, s)
    if total > RIP_ENUMERATION_CAP:
        raise CapacityError(
            f"C({d}, {s}) = {total} subsets exceeds the cap of {RIP_ENUMERATION_CAP}"
        )
    scaled = x / math.sqrt(n)
    delta = 0.0
    for subset in itertools.combinations(range(d), s):
        cols = scaled[:, subset]
        gram = cols.T @ cols
        lo, hi = _jacobi_eigen_extremes(gram)
        delta = max(delta, hi - 1.0, 1.0 - lo)
    return RipCertificate(
        sparsity_level=s, delta=delta, method="exact-enumeration", subsets_checked=total
    )
