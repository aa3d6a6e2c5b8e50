"""Core data containers and delimited-file I/O.

Three file schemas tie the toolkit together (all UTF-8, comma-delimited,
header row required, '.' decimal separator):

    firms:  firm_id, latitude, longitude
    panel:  firm_id, year, tech, adopted        (adopted in {0,1}, cumulative)
    edges:  year, firm_i, firm_j, weight_musd   (undirected, i != j)

Simulated and externally supplied datasets share these schemas, so anything
the generator writes can be re-ingested by the estimation commands.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "techdiff-1"


class InputError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class FirmTable:
    """Firm identities with geographic coordinates, in a fixed row order."""

    ids: tuple[str, ...]
    lat: np.ndarray
    lon: np.ndarray

    def __post_init__(self):
        lat = np.asarray(self.lat, dtype=float)
        lon = np.asarray(self.lon, dtype=float)
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)
        if len(self.ids) != lat.size or lat.size != lon.size:
            raise InputError("firm ids and coordinate arrays must have equal length")
        if len(set(self.ids)) != len(self.ids):
            raise InputError("duplicate firm_id in firm table")
        if np.any((lat < -90.0) | (lat > 90.0)):
            raise InputError("latitude out of [-90, 90]")
        if np.any((lon < -180.0) | (lon > 180.0)):
            raise InputError("longitude out of [-180, 180]")

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self) -> dict[str, int]:
        return {fid: k for k, fid in enumerate(self.ids)}


@dataclass
class AdoptionPanel:
    """Cumulative binary adoption indicators, firm x year x technology.

    ``adopted[i, t, k]`` is 1 if firm ``i`` has adopted technology ``k`` by
    year ``years[t]``. Monotone in t per firm-tech (adoption never reverts).
    """

    firm_ids: tuple[str, ...]
    years: tuple[int, ...]
    techs: tuple[str, ...]
    adopted: np.ndarray  # shape (n_firms, n_years, n_techs), int8

    def __post_init__(self):
        self.adopted = np.asarray(self.adopted, dtype=np.int8)
        expect = (len(self.firm_ids), len(self.years), len(self.techs))
        if self.adopted.shape != expect:
            raise InputError(f"panel shape {self.adopted.shape} != {expect}")
        if not np.all((self.adopted == 0) | (self.adopted == 1)):
            raise InputError("adoption indicators must be 0/1")
        if np.any(np.diff(self.adopted, axis=1) < 0):
            raise InputError("adoption panel not cumulative (indicator reverts)")
        if list(self.years) != sorted(self.years):
            raise InputError("panel years must be ascending")

    @property
    def n_firms(self) -> int:
        return len(self.firm_ids)

    def year_index(self, year: int) -> int:
        try:
            return self.years.index(year)
        except ValueError:
            raise InputError(f"year {year} not covered by panel {self.years[0]}-{self.years[-1]}")

    def tech_index(self, tech: str) -> int:
        try:
            return self.techs.index(tech)
        except ValueError:
            raise InputError(f"unknown technology {tech!r}")

    def adopters(self, tech: str, year: int) -> np.ndarray:
        """Boolean mask of firms that have adopted `tech` by `year`."""
        return self.adopted[:, self.year_index(year), self.tech_index(tech)].astype(bool)

    def adoption_rate(self, tech: str, year: int) -> float:
        return float(self.adopters(tech, year).mean())


@dataclass(frozen=True)
class YearNetwork:
    """Weighted undirected supply-chain graph for one year.

    Edges are stored once per unordered pair with ``i < j`` and positive
    weight (transaction value, millions of currency units). The graph must
    span all ``n`` nodes in a single connected component.
    """

    n: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        ei = np.asarray(self.edge_i, dtype=np.int64)
        ej = np.asarray(self.edge_j, dtype=np.int64)
        w = np.asarray(self.weight, dtype=float)
        object.__setattr__(self, "edge_i", ei)
        object.__setattr__(self, "edge_j", ej)
        object.__setattr__(self, "weight", w)
        if not (ei.size == ej.size == w.size):
            raise InputError("edge arrays must have equal length")
        if ei.size == 0:
            raise InputError("network has no edges")
        if np.any(ei >= ej):
            raise InputError("edges must satisfy i < j (undirected, stored once)")
        if np.any(ei < 0) or np.any(ej >= self.n):
            raise InputError("edge endpoint out of range")
        if np.any(w <= 0):
            raise InputError("edge weights must be positive")
        pair_key = ei * self.n + ej
        if np.unique(pair_key).size != pair_key.size:
            raise InputError("duplicate edge (unordered pair listed twice)")
        if not _is_connected(self.n, ei, ej):
            raise DisconnectedError(
                f"network on {self.n} nodes is not connected"
            )

    @property
    def n_edges(self) -> int:
        return int(self.edge_i.size)

    def reweighted(self, new_weight: np.ndarray) -> "YearNetwork":
        return YearNetwork(self.n, self.edge_i.copy(), self.edge_j.copy(),
                           np.asarray(new_weight, dtype=float))


class DisconnectedError(InputError):
    """Graph violates the single-connected-component assumption."""


def _is_connected(n: int, edge_i: np.ndarray, edge_j: np.ndarray) -> bool:
    """Union-find connectivity check on an edge list."""
    parent = np.arange(n, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in zip(edge_i.tolist(), edge_j.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(k) for k in range(n)}) == 1


@dataclass
class Dataset:
    """A coherent panel bundle: firms + adoption panel + per-year networks.

    ``log`` carries generator metadata (config echo, lambda2 traces,
    treated-set definition) when the dataset is synthetic; it is None for
    externally ingested data unless a generation log file is present.
    """

    firms: FirmTable
    panel: AdoptionPanel
    networks: dict[int, YearNetwork]
    log: dict | None = field(default=None)

    def __post_init__(self):
        if self.firms.ids != self.panel.firm_ids:
            raise InputError("firm table and panel disagree on firm order")
        for year, net in self.networks.items():
            if net.n != self.firms.n:
                raise InputError(f"network for {year} has {net.n} nodes, expected {self.firms.n}")

    @property
    def years(self) -> tuple[int, ...]:
        return self.panel.years

    @property
    def techs(self) -> tuple[str, ...]:
        return self.panel.techs

    def resample_firms(self, idx: np.ndarray) -> "Dataset":
        """Rebuild the bundle on a with-replacement draw of firm rows.

        Duplicated firms become distinct clusters (fresh ids); network edges
        survive between every pair of copies of two *distinct* original
        firms, and copies of the same firm are never linked (no self loops).
        """
        idx = np.asarray(idx, dtype=np.int64)
        new_ids = tuple(f"{self.firms.ids[k]}#{c}" for c, k in enumerate(idx))
        firms = FirmTable(new_ids, self.firms.lat[idx], self.firms.lon[idx])
        panel = AdoptionPanel(new_ids, self.panel.years, self.panel.techs,
                              self.panel.adopted[idx])
        networks = {year: resample_network(net, idx)
                    for year, net in self.networks.items()}
        return Dataset(firms, panel, networks, log=None)


def resample_network(net: YearNetwork, idx: np.ndarray) -> YearNetwork:
    """Project a network onto a with-replacement draw of its nodes.

    Every pair of copies of two distinct original endpoints inherits the
    original edge weight; copies of the same original firm are never linked
    (no self loops). Raises DisconnectedError if the result is not a single
    component.
    """
    idx = np.asarray(idx, dtype=np.int64)
    copies: dict[int, list[int]] = {}
    for new_pos, orig in enumerate(idx.tolist()):
        copies.setdefault(orig, []).append(new_pos)
    ei, ej, ww = [], [], []
    for a, b, w in zip(net.edge_i.tolist(), net.edge_j.tolist(), net.weight.tolist()):
        for ca in copies.get(a, ()):
            for cb in copies.get(b, ()):
                lo, hi = (ca, cb) if ca < cb else (cb, ca)
                ei.append(lo)
                ej.append(hi)
                ww.append(w)
    if not ei:
        raise DisconnectedError("resampled network has no edges")
    return YearNetwork(len(idx), np.array(ei), np.array(ej), np.array(ww))


# ---------------------------------------------------------------------------
# Delimited-file I/O
# ---------------------------------------------------------------------------

def _read_rows(path: Path, required: list[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty file, expected header {required}")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise InputError(f"{path}: missing columns {missing}")
        return list(reader)


def read_firms(path: str | Path) -> FirmTable:
    path = Path(path)
    rows = _read_rows(path, ["firm_id", "latitude", "longitude"])
    if not rows:
        raise InputError(f"{path}: no firm rows")
    ids, lat, lon = [], [], []
    for k, row in enumerate(rows, start=2):
        try:
            ids.append(row["firm_id"])
            lat.append(float(row["latitude"]))
            lon.append(float(row["longitude"]))
        except ValueError as exc:
            raise InputError(f"{path}:{k}: {exc}") from exc
    return FirmTable(tuple(ids), np.array(lat), np.array(lon))


def write_firms(path: str | Path, firms: FirmTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["firm_id", "latitude", "longitude"])
        for fid, la, lo in zip(firms.ids, firms.lat, firms.lon):
            out.writerow([fid, f"{la:.6f}", f"{lo:.6f}"])


def read_panel(path: str | Path, firms: FirmTable) -> AdoptionPanel:
    path = Path(path)
    rows = _read_rows(path, ["firm_id", "year", "tech", "adopted"])
    if not rows:
        raise InputError(f"{path}: no panel rows")
    fidx = firms.index()
    years = sorted({int(r["year"]) for r in rows})
    techs = sorted({r["tech"] for r in rows})
    yidx = {y: t for t, y in enumerate(years)}
    tidx = {s: k for k, s in enumerate(techs)}
    adopted = np.zeros((firms.n, len(years), len(techs)), dtype=np.int8)
    seen = np.zeros_like(adopted, dtype=bool)
    for k, row in enumerate(rows, start=2):
        try:
            i = fidx[row["firm_id"]]
        except KeyError:
            raise InputError(f"{path}:{k}: firm_id {row['firm_id']!r} not in firm table")
        t = yidx[int(row["year"])]
        j = tidx[row["tech"]]
        val = int(row["adopted"])
        if val not in (0, 1):
            raise InputError(f"{path}:{k}: adopted must be 0 or 1, got {val}")
        adopted[i, t, j] = val
        seen[i, t, j] = True
    if not seen.all():
        raise InputError(f"{path}: panel is not balanced (missing firm-year-tech rows)")
    return AdoptionPanel(firms.ids, tuple(years), tuple(techs), adopted)


def write_panel(path: str | Path, panel: AdoptionPanel) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["firm_id", "year", "tech", "adopted"])
        for i, fid in enumerate(panel.firm_ids):
            for t, year in enumerate(panel.years):
                for j, tech in enumerate(panel.techs):
                    out.writerow([fid, year, tech, int(panel.adopted[i, t, j])])


def read_edges(path: str | Path, firms: FirmTable) -> dict[int, YearNetwork]:
    path = Path(path)
    rows = _read_rows(path, ["year", "firm_i", "firm_j", "weight_musd"])
    if not rows:
        raise InputError(f"{path}: no edge rows")
    fidx = firms.index()
    by_year: dict[int, list[tuple[int, int, float]]] = {}
    for k, row in enumerate(rows, start=2):
        try:
            a = fidx[row["firm_i"]]
            b = fidx[row["firm_j"]]
        except KeyError as exc:
            raise InputError(f"{path}:{k}: unknown firm_id {exc.args[0]!r}")
        w = float(row["weight_musd"])
        if a == b:
            raise InputError(f"{path}:{k}: self loop on {row['firm_i']!r}")
        lo, hi = (a, b) if a < b else (b, a)
        by_year.setdefault(int(row["year"]), []).append((lo, hi, w))
    networks = {}
    for year in sorted(by_year):
        tri = by_year[year]
        networks[year] = YearNetwork(
            firms.n,
            np.array([e[0] for e in tri]),
            np.array([e[1] for e in tri]),
            np.array([e[2] for e in tri]),
        )
    return networks


def write_edges(path: str | Path, networks: dict[int, YearNetwork],
                firms: FirmTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["year", "firm_i", "firm_j", "weight_musd"])
        for year in sorted(networks):
            net = networks[year]
            for a, b, w in zip(net.edge_i.tolist(), net.edge_j.tolist(), net.weight.tolist()):
                out.writerow([year, firms.ids[a], firms.ids[b], f"{w:.4f}"])
