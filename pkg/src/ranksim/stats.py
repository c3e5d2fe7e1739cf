"""Sample statistics used to compare simulation output against target laws."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .stationary import ProductExpLaw

__all__ = [
    "SampleSet",
    "FitThresholds",
    "FitReport",
    "CTMC_THRESHOLDS",
    "DIFFUSION_THRESHOLDS",
    "ks_distance",
    "ks_two_sample",
    "fit_product_exp",
    "slope_estimate",
    "write_samples_csv",
]


@dataclass
class SampleSet:
    """Scalar samples plus a declared thinning factor for autocorrelation.

    No automatic autocorrelation estimation happens here; the producer
    declares how many raw samples amount to one effectively independent one.
    """

    values: np.ndarray
    label: str
    thinning: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if not self.thinning >= 1.0:
            raise ValueError(f"thinning factor must be >= 1, got {self.thinning}")

    @property
    def effective_count(self) -> float:
        return self.values.size / self.thinning


@dataclass(frozen=True)
class FitThresholds:
    ks: float
    mean_rel: float


CTMC_THRESHOLDS = FitThresholds(ks=0.05, mean_rel=0.10)
DIFFUSION_THRESHOLDS = FitThresholds(ks=0.03, mean_rel=0.05)


def ks_distance(values, cdf) -> float:
    """Exact sup distance between the sample ECDF and a monotone cdf."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    grid = np.arange(1, x.size + 1) / x.size
    return float(np.max(np.maximum(grid - f, f - (grid - 1.0 / x.size))))


def ks_two_sample(a, b) -> float:
    """Exact sup distance between two sample ECDFs."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


@dataclass(frozen=True)
class FitReport:
    label: str
    rate: float
    ks: float
    mean_rel_error: float
    effective_count: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "rate": self.rate,
            "ks": self.ks,
            "mean_rel_error": self.mean_rel_error,
            "effective_count": self.effective_count,
            "passed": self.passed,
        }


def fit_product_exp(
    sample_sets: list[SampleSet],
    law: ProductExpLaw,
    thresholds: FitThresholds = CTMC_THRESHOLDS,
) -> list[FitReport]:
    """Per-coordinate KS and relative-mean comparison against a product law."""
    if len(sample_sets) != law.dim:
        raise ValueError(f"{len(sample_sets)} sample sets for a {law.dim}-d law")
    reports = []
    for i, s in enumerate(sample_sets):
        lam = law.rates[i]
        ks = ks_distance(s.values, law.marginal_cdf(i))
        mean_rel = abs(float(s.values.mean()) * lam - 1.0)
        reports.append(
            FitReport(
                label=s.label,
                rate=lam,
                ks=ks,
                mean_rel_error=mean_rel,
                effective_count=s.effective_count,
                passed=bool(ks < thresholds.ks and mean_rel < thresholds.mean_rel),
            )
        )
    return reports


def write_samples_csv(s: SampleSet, dest) -> None:
    """One column headed by the sample label, full double precision."""
    with Path(dest).open("w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([s.label])
        for v in s.values:
            w.writerow([repr(float(v))])


def slope_estimate(t, values, window_fraction: float = 0.5) -> tuple[float, float]:
    """Least-squares slope of values over the trailing window of the grid.

    Returns (slope, standard error). The window covers the final
    window_fraction of the time span.
    """
    t = np.asarray(t, dtype=float).ravel()
    v = np.asarray(values, dtype=float).ravel()
    if t.size != v.size or t.size < 3:
        raise ValueError("need matching grids with at least 3 points")
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError(f"window_fraction must lie in (0, 1], got {window_fraction}")
    cut = t[-1] - window_fraction * (t[-1] - t[0])
    sel = t >= cut
    ts, vs = t[sel], v[sel]
    if ts.size < 3:
        raise ValueError("window too small for a slope fit")
    tc = ts - ts.mean()
    denom = float(tc @ tc)
    slope = float(tc @ vs) / denom
    resid = vs - vs.mean() - slope * tc
    dof = ts.size - 2
    se = math.sqrt(max(float(resid @ resid), 0.0) / dof / denom) if dof > 0 else 0.0
    return slope, se
