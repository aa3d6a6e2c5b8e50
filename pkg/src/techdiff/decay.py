"""Spatial decay fitting: how adoption falls off with distance to adopters.

The workhorse is a count-weighted least-squares fit of log adoption rate on
distance, giving the per-km decay rate kappa, the intercept level u0, and
the boundary d* = -log(epsilon)/kappa beyond which spillovers drop below the
threshold fraction epsilon. Power-law and linear alternatives are fitted on
their own scales for the functional-form comparison.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import InputError


class NoDecayError(ValueError):
    """Fitted slope implies no decay with distance (kappa <= 0)."""


@dataclass
class DecayCurve:
    """Binned adoption-versus-distance data.

    Parallel arrays: bin midpoint (km, strictly increasing), adoption rate
    in [0, 1], and observation count per bin.
    """

    distance: np.ndarray
    rate: np.ndarray
    count: np.ndarray

    def __post_init__(self):
        self.distance = np.asarray(self.distance, dtype=float)
        self.rate = np.asarray(self.rate, dtype=float)
        self.count = np.asarray(self.count, dtype=np.int64)
        if not (self.distance.size == self.rate.size == self.count.size):
            raise InputError("curve arrays must have equal length")
        if np.any(np.diff(self.distance) <= 0):
            raise InputError("bin distances must be strictly increasing")
        if np.any((self.rate < 0) | (self.rate > 1)):
            raise InputError("rates must lie in [0, 1]")
        if np.any(self.count < 1):
            raise InputError("bin counts must be >= 1")

    @property
    def n_bins(self) -> int:
        return int(self.distance.size)


@dataclass
class DecayFit:
    """Result of fitting one functional form to a decay curve."""

    form: str                 # 'exponential' | 'power' | 'linear'
    kappa_or_slope: float     # kappa (per km), alpha (power), or beta (linear)
    u0: float
    r_squared: float
    kappa_stderr: float
    d_star: float | None = None   # exponential only
    epsilon: float | None = None
    n_bins_used: int = 0
    n_bins_dropped: int = 0


def bin_adoption_by_distance(distances: np.ndarray, outcomes: np.ndarray,
                             bin_width: float = 5.0) -> DecayCurve:
    """Aggregate binary outcomes into adoption rates by distance bin.

    Bins are [k*w, (k+1)*w); each bin reports the mean distance of its
    observations (the midpoint of the observed mass, which keeps the curve
    faithful when mass is uneven within a bin). Empty bins are omitted.
    """
    distances = np.asarray(distances, dtype=float)
    outcomes = np.asarray(outcomes, dtype=float)
    if distances.size == 0 or distances.size != outcomes.size:
        raise InputError("distances and outcomes must be equal-length and nonempty")
    if bin_width <= 0:
        raise InputError("bin_width must be positive")
    idx = np.floor(distances / bin_width).astype(np.int64)
    counts = np.bincount(idx)
    sums = np.bincount(idx, weights=outcomes)
    dsums = np.bincount(idx, weights=distances)
    filled = np.flatnonzero(counts)
    mids = dsums[filled] / counts[filled]
    return DecayCurve(mids, sums[filled] / counts[filled], counts[filled])


def _weighted_ols(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    """WLS of y on [1, x]; returns (intercept, slope, slope_se, weighted R^2)."""
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (x - xbar) ** 2).sum()
    if sxx <= 0:
        raise InputError("no variation in the regressor across bins")
    sxy = (w * (x - xbar) * (y - ybar)).sum()
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = y - intercept - slope * x
    ssr = (w * resid**2).sum()
    sst = (w * (y - ybar) ** 2).sum()
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    dof = x.size - 2
    slope_se = np.sqrt(ssr / dof / sxx) if dof > 0 else np.nan
    return intercept, slope, slope_se, max(0.0, min(1.0, r2))


def fit_exponential(curve: DecayCurve, epsilon: float = 0.05) -> DecayFit:
    """Fit u(d) = u0 * exp(-kappa d) by count-weighted log-linear regression.

    Bins with zero rate are dropped (log undefined) and the drop is both
    warned about and recorded on the fit. R-squared is on the log scale.
    """
    keep = curve.rate > 0
    dropped = int((~keep).sum())
    if dropped:
        warnings.warn(f"dropping {dropped} zero-rate bins from exponential fit",
                      stacklevel=2)
    if keep.sum() < 3:
        raise InputError("exponential fit needs at least 3 bins with positive rate")
    d = curve.distance[keep]
    logr = np.log(curve.rate[keep])
    w = curve.count[keep].astype(float)
    intercept, slope, slope_se, r2 = _weighted_ols(d, logr, w)
    kappa = -slope
    if kappa <= 0:
        raise NoDecayError(f"no decay detected (kappa = {kappa:.3g} <= 0)")
    return DecayFit(
        form="exponential",
        kappa_or_slope=float(kappa),
        u0=float(np.exp(intercept)),
        r_squared=float(r2),
        kappa_stderr=float(slope_se),
        d_star=spatial_boundary(kappa, epsilon),
        epsilon=epsilon,
        n_bins_used=int(keep.sum()),
        n_bins_dropped=dropped,
    )


def spatial_boundary(kappa: float, epsilon: float) -> float:
    """Distance beyond which spillovers fall below fraction ``epsilon``."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    return float(-np.log(epsilon) / kappa)


def _fit_power(curve: DecayCurve) -> DecayFit:
    keep = (curve.rate > 0) & (curve.distance > 0)
    dropped = int((~keep).sum())
    if keep.sum() < 3:
        raise InputError("power fit needs at least 3 positive-rate, positive-distance bins")
    logd = np.log(curve.distance[keep])
    logr = np.log(curve.rate[keep])
    w = curve.count[keep].astype(float)
    intercept, slope, slope_se, r2 = _weighted_ols(logd, logr, w)
    return DecayFit(
        form="power",
        kappa_or_slope=float(-slope),
        u0=float(np.exp(intercept)),
        r_squared=float(r2),
        kappa_stderr=float(slope_se),
        n_bins_used=int(keep.sum()),
        n_bins_dropped=dropped,
    )


def _fit_linear(curve: DecayCurve) -> DecayFit:
    if curve.n_bins < 3:
        raise InputError("linear fit needs at least 3 bins")
    w = curve.count.astype(float)
    intercept, slope, slope_se, r2 = _weighted_ols(curve.distance, curve.rate, w)
    return DecayFit(
        form="linear",
        kappa_or_slope=float(-slope),
        u0=float(intercept),
        r_squared=float(r2),
        kappa_stderr=float(slope_se),
        n_bins_used=curve.n_bins,
        n_bins_dropped=0,
    )


def fit_alternatives(curve: DecayCurve, epsilon: float = 0.05) -> dict:
    """Fit exponential, power-law and linear forms; pick the best R-squared.

    Each form's R-squared is computed on its own fitting scale (log, log-log,
    level), so 'best' compares specification fits, not a common loss. Ties
    break toward exponential.
    """
    fits = {
        "exponential": fit_exponential(curve, epsilon),
        "power": _fit_power(curve),
        "linear": _fit_linear(curve),
    }
    best = "exponential"
    for form in ("power", "linear"):
        if fits[form].r_squared > fits[best].r_squared:
            best = form
    fits["best"] = best
    return fits
