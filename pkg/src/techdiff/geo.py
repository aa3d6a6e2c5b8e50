"""Geographic primitives: great-circle distances and nearest-adopter series."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .data import AdoptionPanel, FirmTable, InputError

EARTH_RADIUS_KM = 6371.0


class GeoPoint(NamedTuple):
    latitude: float
    longitude: float


class NoAdoptersError(ValueError):
    """No adopter exists in the reference year; distances are undefined."""


def _check_point(p: GeoPoint) -> None:
    lat, lon = p
    if not (-90.0 <= lat <= 90.0):
        raise InputError(f"latitude {lat} out of [-90, 90]")
    if not (-180.0 <= lon <= 180.0):
        raise InputError(f"longitude {lon} out of [-180, 180]")


def haversine(a: GeoPoint | tuple[float, float], b: GeoPoint | tuple[float, float]) -> float:
    """Great-circle distance in km between two (latitude, longitude) points.

    Uses the spherical haversine formula with Earth radius 6371 km, so the
    result lies in [0, pi * 6371].
    """
    a = GeoPoint(*a)
    b = GeoPoint(*b)
    _check_point(a)
    _check_point(b)
    phi1, lam1, phi2, lam2 = map(np.radians, (a.latitude, a.longitude, b.latitude, b.longitude))
    s = np.sin((phi2 - phi1) / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin((lam2 - lam1) / 2.0) ** 2
    return float(2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(s, 0.0, 1.0))))


def distance_matrix(firms: FirmTable, kernel: str = "haversine") -> np.ndarray:
    """Dense symmetric n x n matrix of pairwise firm distances in km.

    ``kernel='haversine'`` is the default great-circle distance.
    ``kernel='euclidean'`` is the flat-projection alternative used for
    robustness comparisons: straight-line distance on a local equirectangular
    projection about the mean latitude.
    """
    if firms.n < 2:
        raise InputError("distance matrix requires at least 2 firms")
    lat = np.radians(firms.lat)
    lon = np.radians(firms.lon)
    if kernel == "haversine":
        dphi = lat[:, None] - lat[None, :]
        dlam = lon[:, None] - lon[None, :]
        s = np.sin(dphi / 2.0) ** 2 + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlam / 2.0) ** 2
        dm = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(s, 0.0, 1.0)))
    elif kernel == "euclidean":
        coslat0 = np.cos(lat.mean())
        x = EARTH_RADIUS_KM * lon * coslat0
        y = EARTH_RADIUS_KM * lat
        dm = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
    else:
        raise InputError(f"unknown distance kernel {kernel!r}")
    np.fill_diagonal(dm, 0.0)
    # enforce exact symmetry against accumulation-order noise
    return (dm + dm.T) / 2.0


def nearest_adopter_distance(panel: AdoptionPanel, dm: np.ndarray, tech: str,
                             year: int, adopter_year: str = "previous") -> dict[int, float]:
    """Distance from each current non-adopter to its nearest adopter.

    Adopter reference set: firms adopted by ``year - 1`` under the default
    ``adopter_year='previous'`` convention, or by ``year`` itself under
    ``'same'``. Returns {firm index -> km} for firms with no adoption at
    ``year``; firms already adopted are excluded.

    Raises NoAdoptersError when the reference adopter set is empty (caller
    should skip that tech-year).
    """
    ty = panel.year_index(year)
    if adopter_year == "previous":
        if ty == 0:
            raise InputError(f"year {year} has no previous panel year")
        ref = panel.adopters(tech, panel.years[ty - 1])
    elif adopter_year == "same":
        ref = panel.adopters(tech, year)
    else:
        raise InputError(f"adopter_year must be 'previous' or 'same', got {adopter_year!r}")
    if not ref.any():
        raise NoAdoptersError(f"no adopters of {tech!r} in reference year for {year}")
    now = panel.adopters(tech, year)
    out_firms = np.flatnonzero(~now)
    if out_firms.size == 0:
        return {}
    dmin = dm[np.ix_(out_firms, np.flatnonzero(ref))].min(axis=1)
    return {int(i): float(d) for i, d in zip(out_firms, dmin)}


def at_risk_distances(panel: AdoptionPanel, dm: np.ndarray, tech: str,
                      year: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decay-regression sample for one tech-year.

    At-risk firms are those not yet adopted at ``year - 1``. Returns
    (firm indices, distance to nearest ``year - 1`` adopter, outcome
    = adoption indicator at ``year``). Raises NoAdoptersError when no
    adopter exists at ``year - 1``.
    """
    ty = panel.year_index(year)
    if ty == 0:
        raise InputError(f"year {year} has no previous panel year")
    prev = panel.adopters(tech, panel.years[ty - 1])
    if not prev.any():
        raise NoAdoptersError(f"no adopters of {tech!r} at {panel.years[ty - 1]}")
    at_risk = np.flatnonzero(~prev)
    if at_risk.size == 0:
        return at_risk, np.empty(0), np.empty(0, dtype=np.int8)
    dmin = dm[np.ix_(at_risk, np.flatnonzero(prev))].min(axis=1)
    outcome = panel.adopted[at_risk, ty, panel.tech_index(tech)]
    return at_risk, dmin, outcome


def panel_min_distance(panel: AdoptionPanel, dm: np.ndarray, tech: str,
                       adopter_year: str = "previous") -> np.ndarray:
    """Full (n_firms, n_years) nearest-adopter exposure regressor.

    Every firm's distance to the nearest *other* adopter in the reference
    year, adopters included (a firm never counts itself, which would tie
    the regressor mechanically to the outcome). A firm with no other
    adopter gets +inf; years whose reference adopter set is empty are NaN
    (callers drop or error on those tech-years). The first panel year is
    NaN under the 'previous' convention.
    """
    n, t_all = panel.n_firms, len(panel.years)
    k = panel.tech_index(tech)
    out = np.full((n, t_all), np.nan)
    for t, year in enumerate(panel.years):
        if adopter_year == "previous":
            if t == 0:
                continue
            ref = panel.adopted[:, t - 1, k].astype(bool)
        else:
            ref = panel.adopted[:, t, k].astype(bool)
        if not ref.any():
            continue
        cols = np.flatnonzero(ref)
        D = dm[:, cols].astype(float)
        for pos, j in enumerate(cols):
            D[j, pos] = np.inf  # mask self
        out[:, t] = D.min(axis=1)
    return out
