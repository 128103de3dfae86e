"""Confidence intervals for independent samples and correlated time series."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    df: float
    level: float = 0.95

    @property
    def half_width(self):
        if not np.isfinite(self.df) or self.df <= 0:
            return float("nan")
        return float(stats.t.ppf(0.5 + self.level / 2, self.df) * self.se)

    def as_dict(self):
        return {**asdict(self), "half_width": self.half_width}


def sample_mean(x, level=0.95):
    """Mean of independent samples with the usual t interval."""
    x = np.asarray(x, dtype=float)
    x = x[np.isfinite(x)]
    if x.size < 2:
        raise ValueError("need at least two samples for a confidence interval")
    return Estimate(float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size)), x.size - 1.0, level)


def batch_means(x, n_batches=20, level=0.95):
    """Mean of a correlated series; variance from ``n_batches`` contiguous batch means.

    Trailing samples that do not fill a batch are dropped.
    """
    x = np.asarray(x, dtype=float)
    if n_batches < 2:
        raise ValueError("need at least two batches")
    b = x.size // n_batches
    if b < 1:
        raise ValueError(f"series of length {x.size} too short for {n_batches} batches")
    means = x[: b * n_batches].reshape(n_batches, b).mean(axis=1)
    return Estimate(float(means.mean()), float(means.std(ddof=1) / np.sqrt(n_batches)),
                    n_batches - 1.0, level)


@dataclass(frozen=True)
class Comparison:
    gap: float
    se: float
    df: float
    half_width: float
    within: bool

    def as_dict(self):
        return asdict(self)


def compare(a, b, level=0.95):
    """Difference of two independent estimates against a Welch-Satterthwaite interval."""
    se = float(np.hypot(a.se, b.se))
    if se == 0.0:
        gap = abs(a.mean - b.mean)
        return Comparison(gap, 0.0, float("inf"), 0.0, bool(gap == 0.0))
    df = se**4 / (a.se**4 / a.df + b.se**4 / b.df)
    half = float(stats.t.ppf(0.5 + level / 2, df) * se)
    gap = abs(a.mean - b.mean)
    return Comparison(gap, se, float(df), half, bool(gap <= half))
