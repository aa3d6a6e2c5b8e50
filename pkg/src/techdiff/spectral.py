"""Graph Laplacians, adopter-weighted networks, and spectral machinery.

The Laplacian is L = D - A with A the weighted adjacency matrix and D the
diagonal weighted-degree matrix. Its second-smallest eigenvalue (algebraic
connectivity) measures how tightly the network is coupled and sets the
mixing time of diffusion on the graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .data import AdoptionPanel, DisconnectedError, InputError, YearNetwork


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach tolerance within max_iter."""

    def __init__(self, message: str, best_estimate: float, residual: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.residual = residual


class SizeError(ValueError):
    """Matrix exceeds the configured dense-solver cap."""


@dataclass(frozen=True)
class MultiplierScheme:
    """Edge-weight multipliers by endpoint adoption status."""

    both_adopted: float = 1.0
    one_adopted: float = 0.5
    neither: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.neither <= self.one_adopted <= self.both_adopted):
            raise InputError(
                "multipliers must satisfy 0 < neither <= one_adopted <= both_adopted"
            )


@dataclass
class LaplacianSpectrum:
    """Ascending eigenvalues (and optionally orthonormal eigenvectors)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])

    def component_count(self, tol: float = 1e-8) -> int:
        """Multiplicity of the (near-)zero eigenvalue = number of components."""
        return int(np.sum(self.eigenvalues < tol))

    @property
    def is_connected(self) -> bool:
        return self.component_count() == 1


@dataclass
class Lambda2Result:
    lambda2: float
    n_iter: int
    residual: float
    converged: bool


def build_laplacian(net: YearNetwork) -> np.ndarray:
    """Dense graph Laplacian L = D - A of a connected weighted network."""
    L = np.zeros((net.n, net.n))
    i, j, w = net.edge_i, net.edge_j, net.weight
    L[i, j] = -w
    L[j, i] = -w
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def tech_weighted_network(net: YearNetwork, panel: AdoptionPanel, tech: str,
                          year: int, m: MultiplierScheme = MultiplierScheme()) -> YearNetwork:
    """Scale each edge weight by the pair's adoption status at ``year``.

    Both endpoints adopted -> ``m.both_adopted``; exactly one -> ``m.one_adopted``;
    neither -> ``m.neither``.
    """
    if net.n != panel.n_firms:
        raise InputError(
            f"network has {net.n} nodes but panel covers {panel.n_firms} firms"
        )
    adopters = panel.adopters(tech, year)
    n_adopted = adopters[net.edge_i].astype(int) + adopters[net.edge_j].astype(int)
    factors = np.choose(n_adopted, [m.neither, m.one_adopted, m.both_adopted])
    return net.reweighted(net.weight * factors)


def dense_spectrum(L: np.ndarray, with_vectors: bool = True,
                   dense_cap: int = 2000) -> LaplacianSpectrum:
    """Full eigendecomposition of a Laplacian; the oracle for Lanczos.

    Accepts raw Laplacian matrices (including disconnected ones, whose zero
    eigenvalue has multiplicity = component count).
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if n > dense_cap:
        raise SizeError(f"n={n} exceeds dense cap {dense_cap}")
    if with_vectors:
        vals, vecs = np.linalg.eigh(L)
        return LaplacianSpectrum(vals, vecs)
    return LaplacianSpectrum(np.linalg.eigvalsh(L))


def lambda2_lanczos(L: np.ndarray, max_iter: int = 500,
                    tol: float = 1e-10) -> Lambda2Result:
    """Algebraic connectivity via Lanczos iteration with null-space deflation.

    The start vector and every Krylov vector are re-projected against the
    constant vector (the known null space of a connected Laplacian), so the
    smallest Ritz value of the tridiagonal T_k converges to lambda2 rather
    than 0. Full reorthogonalization keeps the Lanczos basis orthonormal;
    T_k eigenvalues come from the standard symmetric (QR-type) tridiagonal
    solver. Convergence is declared when the Ritz residual bound
    beta_k * |s_k| drops below ``tol``.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if n < 2:
        raise InputError("lambda2 requires at least 2 nodes")
    ones = np.full(n, 1.0 / np.sqrt(n))
    k_max = min(max_iter, n - 1)

    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v -= (v @ ones) * ones
    v /= np.linalg.norm(v)

    V = np.zeros((n, k_max))
    alphas = np.zeros(k_max)
    betas = np.zeros(k_max)
    V[:, 0] = v

    theta = np.nan
    res = np.inf
    for k in range(k_max):
        w = L @ V[:, k]
        alphas[k] = V[:, k] @ w
        w -= alphas[k] * V[:, k]
        if k > 0:
            w -= betas[k - 1] * V[:, k - 1]
        # suppress null-mode drift, then full reorthogonalization
        w -= (w @ ones) * ones
        w -= V[:, : k + 1] @ (V[:, : k + 1].T @ w)
        beta = np.linalg.norm(w)
        betas[k] = beta

        theta, s_last = _smallest_ritz(alphas[: k + 1], betas[:k])
        res = beta * abs(s_last)
        if res <= tol or k + 1 == n - 1:
            return Lambda2Result(float(theta), k + 1, float(res), True)
        if beta <= 1e-14:  # invariant subspace found; Ritz value is exact
            return Lambda2Result(float(theta), k + 1, float(beta), True)
        V[:, k + 1] = w / beta

    raise ConvergenceError(
        f"lambda2 not converged after {k_max} iterations (residual {res:.3e})",
        best_estimate=float(theta), residual=float(res),
    )


def _smallest_ritz(diag: np.ndarray, offdiag: np.ndarray) -> tuple[float, float]:
    """Smallest eigenvalue of a symmetric tridiagonal and its last component."""
    if diag.size == 1:
        return float(diag[0]), 1.0
    vals, vecs = eigh_tridiagonal(diag, offdiag, select="i", select_range=(0, 0))
    return float(vals[0]), float(vecs[-1, 0])


def mixing_time(lambda2: float, epsilon: float) -> float:
    """Time for network diffusion to come within ``epsilon`` of equilibrium.

    tau = log(1/epsilon) / lambda2; undefined (infinite) for lambda2 <= 0.
    """
    if lambda2 <= 0.0:
        raise ValueError("mixing time undefined for lambda2 <= 0 (disconnected network)")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    return float(np.log(1.0 / epsilon) / lambda2)


def diffuse_modes(L: np.ndarray, u0: np.ndarray, t: float,
                  spectrum: LaplacianSpectrum | None = None) -> np.ndarray:
    """Exact spectral solution of du/dt = -L u at time ``t``.

    Decomposes u0 over the eigenvector modes, each decaying at rate
    exp(-lambda_i t); as t -> infinity every node converges to the mean of
    u0 (on a connected graph).
    """
    if spectrum is None or spectrum.eigenvectors is None:
        spectrum = dense_spectrum(np.asarray(L, dtype=float), with_vectors=True)
    V = spectrum.eigenvectors
    coeffs = V.T @ np.asarray(u0, dtype=float)
    return V @ (np.exp(-spectrum.eigenvalues * t) * coeffs)


def network_stats(net: YearNetwork) -> dict:
    """Descriptive statistics of a connected network.

    Clustering, path length and betweenness follow the unweighted skeleton;
    betweenness uses the standard (n-1)(n-2)/2 pair normalization.
    """
    g = nx.Graph()
    g.add_nodes_from(range(net.n))
    for a, b, w in zip(net.edge_i.tolist(), net.edge_j.tolist(), net.weight.tolist()):
        g.add_edge(a, b, weight=w)
    if not nx.is_connected(g):
        raise DisconnectedError("network statistics require a connected graph")
    n, m = net.n, net.n_edges
    degree = np.array([g.degree(k) for k in range(n)], dtype=float)
    wdegree = np.array([g.degree(k, weight="weight") for k in range(n)], dtype=float)
    betweenness = nx.betweenness_centrality(g, normalized=True)
    return {
        "density": 2.0 * m / (n * (n - 1)),
        "average_degree": float(degree.mean()),
        "clustering_coefficient": float(nx.average_clustering(g)),
        "average_path_length": float(nx.average_shortest_path_length(g)),
        "degree": degree,
        "weighted_degree": wdegree,
        "betweenness": np.array([betweenness[k] for k in range(n)]),
    }


def lambda2_series(networks: dict[int, YearNetwork], panel: AdoptionPanel,
                   tech: str, m: MultiplierScheme = MultiplierScheme(),
                   dense_cap: int = 2000) -> dict[int, float]:
    """Adopter-weighted algebraic connectivity per year for one technology."""
    out = {}
    for year in sorted(networks):
        if year not in panel.years:
            continue
        weighted = tech_weighted_network(networks[year], panel, tech, year, m)
        L = build_laplacian(weighted)
        out[year] = dense_spectrum(L, with_vectors=False, dense_cap=dense_cap).lambda2
    return out
