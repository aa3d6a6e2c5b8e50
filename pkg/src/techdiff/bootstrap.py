"""Firm-cluster percentile bootstrap for arbitrary panel statistics.

Firms are resampled with replacement carrying all their panel rows; each
replicate re-estimates the statistic on the resampled bundle and the
confidence interval is read off the empirical percentiles (nearest-rank, no
interpolation). Replicates draw from independent RNG streams spawned from
the root seed, so results are deterministic and parallel-safe.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .data import AdoptionPanel, InputError, YearNetwork, resample_network


class InferenceError(RuntimeError):
    """Too many replicates failed to estimate."""

    def __init__(self, message: str, failures: list[str]):
        super().__init__(message)
        self.failures = failures


@dataclass
class EstimationBundle:
    """Everything a statistic callback may need, resampled as one unit."""

    panel: AdoptionPanel
    dm: np.ndarray | None = None
    treated: np.ndarray | None = None
    networks: dict[int, YearNetwork] | None = None

    @property
    def n_clusters(self) -> int:
        return self.panel.n_firms

    def resample(self, idx: np.ndarray) -> "EstimationBundle":
        idx = np.asarray(idx, dtype=np.int64)
        new_ids = tuple(f"{self.panel.firm_ids[k]}#{c}" for c, k in enumerate(idx))
        panel = AdoptionPanel(new_ids, self.panel.years, self.panel.techs,
                              self.panel.adopted[idx])
        dm = self.dm[np.ix_(idx, idx)] if self.dm is not None else None
        treated = self.treated[idx] if self.treated is not None else None
        networks = None
        if self.networks is not None:
            networks = {year: resample_network(net, idx)
                        for year, net in self.networks.items()}
        return EstimationBundle(panel, dm, treated, networks)


@dataclass
class BootstrapResult:
    point: float
    ci_low: float
    ci_high: float
    replicates: int
    failed: int
    level: float
    stats: np.ndarray  # successful replicate statistics, draw order


def nearest_rank(sorted_stats: np.ndarray, q: float) -> float:
    """The ceil(q*m)-th order statistic (1-based), no interpolation."""
    m = sorted_stats.size
    rank = int(np.ceil(q * m))
    rank = min(max(rank, 1), m)
    return float(sorted_stats[rank - 1])


def cluster_bootstrap(data: EstimationBundle, statistic: Callable[[EstimationBundle], float],
                      B: int = 1000, seed: int = 0, level: float = 0.95,
                      max_failure_rate: float = 0.05) -> BootstrapResult:
    """Percentile CI for ``statistic`` under firm-cluster resampling.

    The point estimate always comes from the original (unresampled) data;
    the interval comes purely from the replicate distribution. Replicates
    whose estimation raises are counted as failed; more than
    ``max_failure_rate`` failures aborts with an InferenceError carrying the
    failure log.
    """
    if B < 100:
        raise InputError("cluster bootstrap needs B >= 100 replicates")
    if not (0.0 < level < 1.0):
        raise InputError("level must lie in (0, 1)")
    n = data.n_clusters
    point = float(statistic(data))

    root = np.random.SeedSequence(seed)
    streams = root.spawn(B)
    stats_ok: list[float] = []
    failures: list[str] = []
    for b in range(B):
        rng = np.random.default_rng(streams[b])
        idx = rng.integers(0, n, size=n)
        try:
            stats_ok.append(float(statistic(data.resample(idx))))
        except Exception as exc:  # noqa: BLE001 - failure accounting is the contract
            failures.append(f"replicate {b}: {type(exc).__name__}: {exc}")
    failed = len(failures)
    if failed > max_failure_rate * B:
        raise InferenceError(
            f"{failed}/{B} bootstrap replicates failed", failures)
    arr = np.array(stats_ok)
    ordered = np.sort(arr)
    alpha = (1.0 - level) / 2.0
    return BootstrapResult(
        point=point,
        ci_low=nearest_rank(ordered, alpha),
        ci_high=nearest_rank(ordered, 1.0 - alpha),
        replicates=B,
        failed=failed,
        level=level,
        stats=arr,
    )
