"""Stationary laws and closed-form performance metrics of the gap process.

The gap diffusion is positive recurrent iff every tail sum of the skew
vector is strictly positive, and then the stationary law is a product of
exponentials with rates lambda_i = sum_{j >= i} a_tilde_j (equivalently
exponent vector eta = -lambda, which also equals 2 Lam^-1 R^-1 rho).

For the route-to-one-of-the-d-shortest family the stationary workload and
imbalance have explicit closed forms, as do the ratios comparing the fully
symmetric scheme (d=K) with shortest-queue routing (d=1), and the gap law
in the overloaded shortest-queue regime b > aK.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SchemeSpec, SystemParams

__all__ = [
    "StabilityReport",
    "ProductExpLaw",
    "MetricsReport",
    "stability_check",
    "eta_vector",
    "stationary_law",
    "unstable_gap_law",
    "metrics",
]


def _coerce_a_tilde(src) -> np.ndarray:
    if isinstance(src, SystemParams):
        return np.asarray(src.a_tilde, dtype=float)
    if isinstance(src, SchemeSpec):
        return np.asarray(src.expand(), dtype=float)
    return np.asarray(src, dtype=float)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    margins: np.ndarray  # tail sums; all must be strictly positive

    def __bool__(self) -> bool:
        return self.stable


def _tail_sums(a: np.ndarray) -> np.ndarray:
    return np.cumsum(a[::-1])[::-1]


def stability_check(src) -> StabilityReport:
    a = _coerce_a_tilde(src)
    margins = _tail_sums(a)
    return StabilityReport(stable=bool(np.all(margins > 0.0)), margins=margins)


def eta_vector(src) -> np.ndarray:
    """Exponents of the stationary density, eta_i = -sum_{j>=i} a_tilde_j."""
    return -_tail_sums(_coerce_a_tilde(src))


@dataclass(frozen=True)
class ProductExpLaw:
    """Product of independent exponentials, density prod_i l_i exp(-l_i x_i)."""

    rates: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if not rates or any(not (r > 0.0) for r in rates):
            raise ValueError(f"rates must be positive, got {rates}")
        object.__setattr__(self, "rates", rates)

    @property
    def dim(self) -> int:
        return len(self.rates)

    def means(self) -> np.ndarray:
        return 1.0 / np.asarray(self.rates)

    def density(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0):
            return 0.0
        lam = np.asarray(self.rates)
        return float(np.prod(lam) * math.exp(-float(lam @ x)))

    def marginal_cdf(self, i: int):
        lam = self.rates[i]
        return lambda x: -np.expm1(-lam * np.maximum(np.asarray(x, dtype=float), 0.0))

    def sample(self, m: int, seed: int) -> np.ndarray:
        """Inverse-CDF sampling, one counter-keyed stream per coordinate."""
        out = np.empty((m, self.dim))
        for i, lam in enumerate(self.rates):
            gen = np.random.Generator(
                np.random.Philox(key=np.array([seed, i], dtype=np.uint64))
            )
            out[:, i] = -np.log1p(-gen.random(m)) / lam
        return out


def stationary_law(src) -> ProductExpLaw:
    a = _coerce_a_tilde(src)
    rep = stability_check(a)
    if not rep.stable:
        raise ValueError(
            "no stationary law: stability needs every tail sum of a_tilde "
            f"strictly positive, margins {rep.margins.tolist()}"
        )
    return ProductExpLaw(rates=tuple(rep.margins.tolist()))


def _mjsq_shape(a: np.ndarray) -> tuple[float, float]:
    """Decompose a skew vector as (a - b, a, ..., a); errors otherwise."""
    K = len(a)
    if K < 2:
        raise ValueError("gap laws need K >= 2")
    tail = a[1:]
    if np.any(tail != tail[0]):
        raise ValueError(
            f"not a shortest-queue-type skew vector (tail entries differ): {a.tolist()}"
        )
    av = float(tail[0])
    if av < 0.0:
        raise ValueError(f"tail skew must be nonnegative, got {av}")
    return av, av - float(a[0])


def unstable_gap_law(src) -> ProductExpLaw:
    """Limit law of the K-1 gaps in the overloaded shortest-queue regime.

    For skew (a-b, a, ..., a) with a >= 0 and b > aK the gaps between
    consecutive ranked queues converge to independent exponentials with
    rates b(K-i)/K, i = 1..K-1; the shortest queue itself escapes linearly.
    """
    a_tilde = _coerce_a_tilde(src)
    K = len(a_tilde)
    a, b = _mjsq_shape(a_tilde)
    if b == a * K:
        raise ValueError("critical boundary b = aK is not covered")
    if b < a * K:
        raise ValueError(
            f"parameters are stable (b={b} < aK={a * K}); use stationary_law"
        )
    return ProductExpLaw(rates=tuple(b * (K - i) / K for i in range(1, K)))


@dataclass(frozen=True)
class MetricsReport:
    K: int
    a: float
    b: float
    d: int
    upsilon: float
    W_mean: float | None = None
    D_mean: float | None = None
    R_W: float | None = None
    R_D: float | None = None
    D_stab: float | None = None
    D_unst: float | None = None

    def to_json_dict(self) -> dict:
        keys = ("W_mean", "D_mean", "R_W", "R_D", "D_stab", "D_unst")
        return {k: getattr(self, k) for k in keys if getattr(self, k) is not None}


def metrics(scheme: SchemeSpec) -> MetricsReport:
    """Closed-form stationary workload/imbalance metrics for a d-scheme.

    Stable branch (b < aK): mean workload E W^d, mean imbalance E D^d,
    the d=K over d=1 ratios R_W and R_D, and the stable imbalance D_stab
    (= E D^1). Overloaded shortest-queue branch (d=1, b > aK): the mean
    imbalance D_unst of the escaping system. The boundary b = aK errors.
    """
    if scheme.kind != "d_scheme":
        raise ValueError("metrics are defined for the d-scheme family")
    K, a, b, d = scheme.K, scheme.a, scheme.b, scheme.d
    ups = a * K - b
    if b == a * K:
        raise ValueError("critical boundary b = aK is not covered")
    if b > a * K:
        if d != 1:
            raise ValueError(
                f"overloaded regime (b={b} > aK={a * K}) is only covered for d=1"
            )
        d_unst = sum(K / (b * (K - i)) for i in range(1, K))
        return MetricsReport(K=K, a=a, b=b, d=d, upsilon=ups, D_unst=d_unst)
    # stable branch; every tail sum is positive iff b < aK (binding at i=1)
    lam = -eta_vector(scheme)
    w_mean = (K - d) / a if d < K else 0.0
    w_mean += sum(
        (K - j + 1) * d / ((K - j + 1) * a * d - (d - j + 1) * b) for j in range(1, d + 1)
    )
    d_mean = sum(d / ((K - j + 1) * a * d - (d - j + 1) * b) for j in range(2, d + 1))
    d_mean += sum(1.0 / ((K - j + 1) * a) for j in range(d + 1, K + 1))
    # cross-validate against the gap-mean route sum_j (K-j+1)/lambda_j
    w_check = float(np.arange(K, 0, -1, dtype=float) @ (1.0 / lam))
    d_check = float(np.sum(1.0 / lam[1:])) if K >= 2 else 0.0
    if abs(w_mean - w_check) > 1e-10 * max(1.0, abs(w_mean)) or abs(
        d_mean - d_check
    ) > 1e-10 * max(1.0, abs(d_mean)):
        raise AssertionError(
            f"metric closed forms disagree with gap means: W {w_mean} vs {w_check}, "
            f"D {d_mean} vs {d_check}"
        )
    r_w = K * K * a / ((K - 1) * ups + K * a)
    r_d = K * a / ups
    d_stab = sum(1.0 / ((K - i) * a) for i in range(1, K))
    return MetricsReport(
        K=K, a=a, b=b, d=d, upsilon=ups,
        W_mean=w_mean, D_mean=d_mean, R_W=r_w, R_D=r_d, D_stab=d_stab,
    )
