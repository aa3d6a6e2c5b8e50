"""Event-study estimators: traditional, spatial-adjusted, and
network-adjusted difference-in-differences with two-way fixed effects.

All estimators share one within-transformation core: variables are demeaned
by firm and by year (alternating until group means vanish, which weighted
samples need), then the treatment interaction is estimated by (weighted)
least squares on the transformed data. Outcomes are linear-probability;
effects are reported in percentage points.

Treatment assignment is an explicit caller input (a boolean mask over
firms): the estimators never infer who was treated. For simulated datasets
the generator records its treated set (firms within the spatial boundary of
the shock epicenter) in the generation log.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .data import AdoptionPanel, InputError
from .geo import panel_min_distance


class EstimationError(RuntimeError):
    """Regression cannot be estimated (degenerate or collinear design)."""


@dataclass(frozen=True)
class EventSpec:
    """Event-study window: pre years strictly before the event, post from it."""

    event_year: int = 2020
    pre: tuple[int, int] = (2017, 2019)
    post: tuple[int, int] = (2020, 2023)

    def __post_init__(self):
        if self.pre[1] >= self.event_year:
            raise InputError("pre window must end strictly before the event year")
        if self.post[0] != self.event_year:
            raise InputError("post window must start at the event year")
        if self.pre[0] > self.pre[1] or self.post[0] > self.post[1]:
            raise InputError("window bounds out of order")

    @property
    def pre_years(self) -> list[int]:
        return list(range(self.pre[0], self.pre[1] + 1))

    @property
    def post_years(self) -> list[int]:
        return list(range(self.post[0], self.post[1] + 1))

    @property
    def window_years(self) -> list[int]:
        return self.pre_years + self.post_years


@dataclass
class DidEstimate:
    method: str               # 'traditional' | 'spatial' | 'network'
    effect: float             # percentage points
    ci_low: float | None = None
    ci_high: float | None = None
    n_obs: int = 0


@dataclass
class FERegression:
    beta: np.ndarray
    stderr: np.ndarray
    ssr: float
    sst: float
    dof: int
    n_obs: int

    @property
    def r2_within(self) -> float:
        return 1.0 - self.ssr / self.sst if self.sst > 0 else 0.0


def two_way_within(cols: np.ndarray, firm_idx: np.ndarray, year_idx: np.ndarray,
                   weights: np.ndarray | None = None, tol: float = 1e-12,
                   max_iter: int = 500) -> np.ndarray:
    """Demean columns by firm and by year, alternating to convergence.

    Exact in one pass for balanced unweighted panels; weighted samples
    iterate until every (weighted) group mean is below ``tol``.
    """
    out = np.array(cols, dtype=float, copy=True)
    if out.ndim == 1:
        out = out[:, None]
    w = np.ones(out.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    n_f = int(firm_idx.max()) + 1
    n_y = int(year_idx.max()) + 1
    wf = np.bincount(firm_idx, weights=w, minlength=n_f)
    wy = np.bincount(year_idx, weights=w, minlength=n_y)
    for _ in range(max_iter):
        gap = 0.0
        for idx, gw, size in ((firm_idx, wf, n_f), (year_idx, wy, n_y)):
            for c in range(out.shape[1]):
                means = np.bincount(idx, weights=w * out[:, c], minlength=size) / gw
                gap = max(gap, float(np.abs(means).max()))
                out[:, c] -= means[idx]
        if gap < tol:
            return out
    raise EstimationError(f"within transformation did not converge (gap {gap:.3e})")


def fe_ols(y: np.ndarray, X: np.ndarray, firm_idx: np.ndarray,
           year_idx: np.ndarray, weights: np.ndarray | None = None,
           names: list[str] | None = None) -> FERegression:
    """Two-way FE least squares via the within transformation."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != y.size:
        X = X.T
    k = X.shape[1]
    names = names or [f"x{j}" for j in range(k)]
    w = np.ones(y.size) if weights is None else np.asarray(weights, dtype=float)

    trans = two_way_within(np.column_stack([y, X]), firm_idx, year_idx, weights)
    yt, Xt = trans[:, 0], trans[:, 1:]

    scale = np.sqrt((w[:, None] * Xt**2).sum(axis=0))
    dead = np.flatnonzero(scale < 1e-10 * np.sqrt(w.sum()))
    if dead.size:
        raise EstimationError(
            f"regressor {names[dead[0]]!r} has no within variation (absorbed by fixed effects)"
        )
    A = Xt.T @ (w[:, None] * Xt)
    if np.linalg.matrix_rank(A, tol=1e-10 * np.trace(A) / k) < k:
        raise EstimationError(f"collinear regressors among {names}")
    b = Xt.T @ (w * yt)
    beta = np.linalg.solve(A, b)
    resid = yt - Xt @ beta
    ssr = float((w * resid**2).sum())
    sst = float((w * yt**2).sum())
    n_f = np.unique(firm_idx).size
    n_y = np.unique(year_idx).size
    dof = y.size - n_f - n_y + 1 - k
    if dof <= 0:
        raise EstimationError("no residual degrees of freedom")
    cov = ssr / dof * np.linalg.inv(A)
    return FERegression(beta, np.sqrt(np.diag(cov)), ssr, sst, dof, int(y.size))


def _window_sample(panel: AdoptionPanel, tech: str, spec: EventSpec):
    """Flatten the firm x window-year block into regression rows."""
    for year in spec.window_years:
        panel.year_index(year)  # raises if uncovered
    t_cols = [panel.year_index(y) for y in spec.window_years]
    k = panel.tech_index(tech)
    y = panel.adopted[:, t_cols, k].astype(float).ravel()
    n, tw = panel.n_firms, len(t_cols)
    firm_idx = np.repeat(np.arange(n), tw)
    year_pos = np.tile(np.arange(tw), n)
    years = np.array(spec.window_years)[year_pos]
    return y, firm_idx, year_pos, years


def _check_treated(treated: np.ndarray, n_firms: int) -> np.ndarray:
    treated = np.asarray(treated, dtype=bool)
    if treated.shape != (n_firms,):
        raise InputError(f"treated mask must have shape ({n_firms},)")
    if treated.all() or not treated.any():
        raise EstimationError("treated set is degenerate (all or no firms treated)")
    return treated


def traditional_did(panel: AdoptionPanel, tech: str, spec: EventSpec,
                    treated: np.ndarray) -> DidEstimate:
    """Two-way FE estimate of the treated x post interaction, in pp."""
    treated = _check_treated(treated, panel.n_firms)
    y, firm_idx, year_pos, years = _window_sample(panel, tech, spec)
    if y.std() == 0:
        raise EstimationError(f"outcome for {tech!r} has no variation in the window")
    d = (treated[firm_idx] & (years >= spec.event_year)).astype(float)
    fit = fe_ols(y, d, firm_idx, year_pos, names=["treated_x_post"])
    return DidEstimate("traditional", float(fit.beta[0]) * 100.0, n_obs=fit.n_obs)


def spatial_did(panel: AdoptionPanel, tech: str, spec: EventSpec,
                treated: np.ndarray, kappa_hat: float, dm: np.ndarray,
                weight_cap_km: float | None = None) -> DidEstimate:
    """Spatial-adjusted DID: distance-to-nearest-adopter regressor plus
    exp(-kappa_hat * d) observation weights.

    Distances use the previous-year adopter convention; adopted firms carry
    distance 0 (their nearest adopter is themselves). Window years whose
    previous year has no adopters are dropped with a warning. Weights are
    floored at the one-percent spatial boundary (distances are capped at
    ``weight_cap_km``, default -log(0.01)/kappa_hat) so far-from-adopter
    observations stay negligible without degenerating the weighted design.
    """
    if kappa_hat <= 0:
        raise InputError("kappa_hat must be positive")
    if weight_cap_km is None:
        weight_cap_km = -np.log(0.01) / kappa_hat
    treated = _check_treated(treated, panel.n_firms)
    dmin = panel_min_distance(panel, dm, tech, adopter_year="previous")
    y, firm_idx, year_pos, years = _window_sample(panel, tech, spec)
    t_cols = [panel.year_index(yy) for yy in spec.window_years]
    dvals = dmin[:, t_cols].ravel()

    ok_years = ~np.isnan(dmin[0, t_cols])
    if not ok_years.all():
        bad = [yy for yy, ok in zip(spec.window_years, ok_years) if not ok]
        warnings.warn(f"{tech}: dropping years {bad} (no adopters in prior year)",
                      stacklevel=2)
    keep = ~np.isnan(dvals)
    if keep.sum() == 0:
        raise EstimationError(f"no usable window years for {tech!r}")
    y, dvals = y[keep], dvals[keep]
    firm_idx, year_pos, years = firm_idx[keep], year_pos[keep], years[keep]
    if y.std() == 0:
        raise EstimationError(f"outcome for {tech!r} has no variation in the window")

    d = (treated[firm_idx] & (years >= spec.event_year)).astype(float)
    dvals = np.minimum(dvals, weight_cap_km)  # exposure saturates at the boundary
    w = np.exp(-kappa_hat * dvals)
    fit = fe_ols(y, np.column_stack([d, dvals]), firm_idx, year_pos, weights=w,
                 names=["treated_x_post", "dist_nearest_adopter"])
    return DidEstimate("spatial", float(fit.beta[0]) * 100.0, n_obs=fit.n_obs)


def network_did(panel: AdoptionPanel, tech: str, spec: EventSpec,
                treated: np.ndarray, lambda2_series: dict[int, float],
                base_year: int = 2019) -> DidEstimate:
    """Network-adjusted DID: outcome deflated by lambda2(t)/lambda2(base)."""
    treated = _check_treated(treated, panel.n_firms)
    base = lambda2_series.get(base_year)
    if base is None or base <= 0:
        raise ValueError(f"lambda2 at base year {base_year} missing or non-positive")
    missing = [yy for yy in spec.window_years if yy not in lambda2_series]
    if missing:
        raise InputError(f"lambda2 series missing window years {missing}")
    y, firm_idx, year_pos, years = _window_sample(panel, tech, spec)
    ratio = np.array([lambda2_series[yy] / base for yy in spec.window_years])
    y = y / ratio[year_pos]
    if y.std() == 0:
        raise EstimationError(f"outcome for {tech!r} has no variation in the window")
    d = (treated[firm_idx] & (years >= spec.event_year)).astype(float)
    fit = fe_ols(y, d, firm_idx, year_pos, names=["treated_x_post"])
    return DidEstimate("network", float(fit.beta[0]) * 100.0, n_obs=fit.n_obs)


@dataclass
class PretrendResult:
    lead_years: list[int]
    coef: np.ndarray          # percentage points
    stderr: np.ndarray
    f_stat: float
    p_value: float
    n_obs: int

    @property
    def individually_significant(self) -> np.ndarray:
        t = np.abs(self.coef) / self.stderr
        return t > 1.96


def pretrend_test(panel: AdoptionPanel, tech: str, spec: EventSpec,
                  treated: np.ndarray, n_leads: int = 2) -> PretrendResult:
    """Joint F test that all treated-group lead coefficients are zero.

    Lead ell is the indicator treated x 1[t = event_year - ell]. The design
    needs a pre-window reference period, so ``n_leads`` must be strictly
    less than the pre-window length (with the post indicator included,
    exhausting the pre window makes the interactions collinear with the
    firm effects). P-values come from the F distribution.
    """
    treated = _check_treated(treated, panel.n_firms)
    n_pre = len(spec.pre_years)
    if n_leads < 1 or n_leads >= n_pre:
        raise InputError(
            f"n_leads must be in [1, {n_pre - 1}] for a {n_pre}-year pre window"
        )
    y, firm_idx, year_pos, years = _window_sample(panel, tech, spec)
    if y.std() == 0:
        raise EstimationError(f"outcome for {tech!r} has no variation in the window")
    post = (treated[firm_idx] & (years >= spec.event_year)).astype(float)
    lead_years = [spec.event_year - ell for ell in range(1, n_leads + 1)]
    leads = np.column_stack([
        (treated[firm_idx] & (years == ly)).astype(float) for ly in lead_years
    ])
    names = ["treated_x_post"] + [f"lead_{ly}" for ly in lead_years]
    full = fe_ols(y, np.column_stack([post, leads]), firm_idx, year_pos, names=names)
    restricted = fe_ols(y, post, firm_idx, year_pos, names=["treated_x_post"])
    q = n_leads
    f_stat = (restricted.ssr - full.ssr) / q / (full.ssr / full.dof)
    f_stat = max(0.0, float(f_stat))
    p_value = float(stats.f.sf(f_stat, q, full.dof))
    return PretrendResult(
        lead_years=lead_years,
        coef=full.beta[1:] * 100.0,
        stderr=full.stderr[1:] * 100.0,
        f_stat=f_stat,
        p_value=p_value,
        n_obs=full.n_obs,
    )


@dataclass
class DynamicEffects:
    rel_years: list[int]      # year - event_year, reference year omitted
    coef: np.ndarray          # percentage points
    stderr: np.ndarray


def dynamic_effects(panel: AdoptionPanel, tech: str, spec: EventSpec,
                    treated: np.ndarray) -> DynamicEffects:
    """Per-year treated interactions relative to the last pre year."""
    treated = _check_treated(treated, panel.n_firms)
    y, firm_idx, year_pos, years = _window_sample(panel, tech, spec)
    if y.std() == 0:
        raise EstimationError(f"outcome for {tech!r} has no variation in the window")
    ref = spec.event_year - 1
    ev_years = [yy for yy in spec.window_years if yy != ref]
    X = np.column_stack([
        (treated[firm_idx] & (years == yy)).astype(float) for yy in ev_years
    ])
    fit = fe_ols(y, X, firm_idx, year_pos, names=[f"y{yy}" for yy in ev_years])
    return DynamicEffects(
        rel_years=[yy - spec.event_year for yy in ev_years],
        coef=fit.beta * 100.0,
        stderr=fit.stderr * 100.0,
    )


def placebo_window(panel: AdoptionPanel, spec: EventSpec, placebo_year: int) -> EventSpec | None:
    """Shift the event window to a placebo year, truncated to the panel.

    Returns None (infeasible) unless at least 2 pre years and 1 post year
    fit inside the panel.
    """
    first, last = panel.years[0], panel.years[-1]
    pre_len = len(spec.pre_years)
    post_len = len(spec.post_years)
    pre_lo = max(first, placebo_year - pre_len)
    pre_hi = placebo_year - 1
    post_hi = min(last, placebo_year + post_len - 1)
    if placebo_year < spec.event_year:
        # an early placebo window must not swallow the true event
        post_hi = min(post_hi, spec.event_year - 1)
    if pre_hi - pre_lo + 1 < 2 or post_hi < placebo_year or placebo_year > last:
        return None
    return EventSpec(placebo_year, (pre_lo, pre_hi), (placebo_year, post_hi))


@dataclass
class PlaceboEstimate:
    placebo_year: int
    traditional: DidEstimate
    spatial: DidEstimate
    significant: bool         # does the traditional CI exclude zero?


def placebo_test(panel: AdoptionPanel, tech: str, spec: EventSpec,
                 treated: np.ndarray, placebo_years: list[int], dm: np.ndarray,
                 kappa_hat: float, B: int = 200, seed: int = 0) -> list[PlaceboEstimate]:
    """Re-run traditional and spatial DID at artificial event years.

    Each feasible placebo year gets bootstrap CIs; infeasible windows
    (fewer than 2 pre or 1 post year inside the panel) are skipped with a
    warning. A placebo is flagged significant when the traditional CI
    excludes zero.
    """
    from .bootstrap import EstimationBundle, cluster_bootstrap

    out: list[PlaceboEstimate] = []
    bundle = EstimationBundle(panel=panel, dm=dm, treated=treated)
    for p_year in placebo_years:
        p_spec = placebo_window(panel, spec, p_year)
        if p_spec is None:
            warnings.warn(f"placebo year {p_year} infeasible inside panel, skipped",
                          stacklevel=2)
            continue

        def trad_stat(b: EstimationBundle, s=p_spec) -> float:
            return traditional_did(b.panel, tech, s, b.treated).effect

        def spat_stat(b: EstimationBundle, s=p_spec) -> float:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return spatial_did(b.panel, tech, s, b.treated, kappa_hat, b.dm).effect

        trad = cluster_bootstrap(bundle, trad_stat, B=B, seed=seed)
        spat = cluster_bootstrap(bundle, spat_stat, B=B, seed=seed + 1)
        out.append(PlaceboEstimate(
            placebo_year=p_year,
            traditional=DidEstimate("traditional", trad.point, trad.ci_low,
                                    trad.ci_high, n_obs=panel.n_firms),
            spatial=DidEstimate("spatial", spat.point, spat.ci_low,
                                spat.ci_high, n_obs=panel.n_firms),
            significant=not (trad.ci_low <= 0.0 <= trad.ci_high),
        ))
    return out


def dual_channel_r2(panel: AdoptionPanel, tech: str, dm: np.ndarray,
                    degree: np.ndarray, lambda2_series: dict[int, float]) -> dict:
    """Compare spatial-only, network-only and combined regressions.

    Spatial regressor: distance to nearest previous-year adopter (0 for
    adopters). Network regressors: firm degree and the tech's lambda2(t).
    All three regressions use firm fixed effects on the identical sample;
    year effects are omitted because lambda2(t) is itself a year-level
    regressor and would be absorbed. Improvement is
    r2_both - max(r2_spatial, r2_network) on the within (firm-demeaned)
    scale, where nesting guarantees it is non-negative.
    """
    dmin = panel_min_distance(panel, dm, tech, adopter_year="previous")
    years = [yy for t, yy in enumerate(panel.years)
             if not np.isnan(dmin[0, t]) and yy in lambda2_series]
    if len(years) < 2:
        raise EstimationError(f"too few usable years for {tech!r}")
    t_cols = [panel.year_index(yy) for yy in years]
    k = panel.tech_index(tech)
    n, tw = panel.n_firms, len(t_cols)
    y = panel.adopted[:, t_cols, k].astype(float).ravel()
    firm_idx = np.repeat(np.arange(n), tw)
    year_pos = np.tile(np.arange(tw), n)

    x_dist = dmin[:, t_cols].ravel()
    x_dist = np.minimum(x_dist, np.nanmax(np.where(np.isinf(x_dist), np.nan, x_dist)))
    x_deg = degree[:, t_cols].ravel()
    x_l2 = np.array([lambda2_series[yy] for yy in years])[year_pos]

    def within_r2(cols: np.ndarray, names: list[str]) -> float:
        X = np.column_stack(cols) if isinstance(cols, (list, tuple)) else cols
        demeaned = _firm_demean(np.column_stack([y, X]), firm_idx, n)
        yt, Xt = demeaned[:, 0], demeaned[:, 1:]
        scale = np.sqrt((Xt**2).sum(axis=0))
        dead = np.flatnonzero(scale < 1e-10 * np.sqrt(y.size))
        if dead.size:
            raise EstimationError(f"regressor {names[dead[0]]!r} is degenerate")
        beta, *_ = np.linalg.lstsq(Xt, yt, rcond=None)
        ssr = float(((yt - Xt @ beta) ** 2).sum())
        sst = float((yt**2).sum())
        return 1.0 - ssr / sst if sst > 0 else 0.0

    r2_spatial = within_r2([x_dist], ["dist_nearest_adopter"])
    r2_network = within_r2([x_deg, x_l2], ["degree", "lambda2"])
    r2_both = within_r2([x_dist, x_deg, x_l2],
                        ["dist_nearest_adopter", "degree", "lambda2"])
    return {
        "r2_spatial": r2_spatial,
        "r2_network": r2_network,
        "r2_both": r2_both,
        "improvement": r2_both - max(r2_spatial, r2_network),
        "years": years,
    }


def _firm_demean(cols: np.ndarray, firm_idx: np.ndarray, n_firms: int) -> np.ndarray:
    out = np.array(cols, dtype=float, copy=True)
    counts = np.bincount(firm_idx, minlength=n_firms).astype(float)
    for c in range(out.shape[1]):
        means = np.bincount(firm_idx, weights=out[:, c], minlength=n_firms) / counts
        out[:, c] -= means[firm_idx]
    return out
