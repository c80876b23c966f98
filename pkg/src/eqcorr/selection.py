"""Universe reduction: cluster correlated stocks, keep one name per cluster.

Pairwise Spearman correlations turn into distances 1 - rho, the distance
matrix feeds bottom-up agglomerative clustering (average linkage by default),
the tree is cut at k clusters, and each cluster contributes its highest
annualized-Sharpe member.  Merging order is fully deterministic: on equal
linkage distance the pair with the lexicographically smallest cluster ids
(each cluster identified by its smallest original column index) merges first.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateColumnWarning, DegenerateUniverseError
from .market_data import ReturnsPanel
from .report import sharpe

LINKAGES = ("single", "complete", "average")


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster ids in [0, k) per column of the panel that produced them."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or self.k < 1:
            raise DataError("invalid cluster assignment")
        if labels.min() < 0 or labels.max() >= self.k:
            raise DataError("cluster labels out of range")
        if len(np.unique(labels)) != self.k:
            raise DataError("every cluster id in [0, k) must be used")

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)


def distance_matrix(correlations: np.ndarray) -> np.ndarray:
    """Distance 1 - rho; perfectly correlated names are distance zero."""
    rho = np.asarray(correlations, dtype=np.float64)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DataError("correlation matrix must be square")
    if not np.allclose(rho, rho.T, atol=1e-12):
        raise DataError("correlation matrix must be symmetric")
    if np.any(np.abs(rho) > 1.0 + 1e-12):
        raise DataError("correlations must lie in [-1, 1]")
    dist = 1.0 - rho
    np.fill_diagonal(dist, 0.0)
    return np.clip(dist, 0.0, 2.0)


def cluster(dist: np.ndarray, k: int, linkage: str = "average") -> ClusterAssignment:
    """Agglomerative clustering of a distance matrix, cut at k clusters."""
    if linkage not in LINKAGES:
        raise DataError(f"unknown linkage {linkage!r}")
    D = np.asarray(dist, dtype=np.float64)
    d = D.shape[0]
    if D.ndim != 2 or D.shape != (d, d):
        raise DataError("distance matrix must be square")
    if not (1 <= k <= d):
        raise DegenerateUniverseError(f"need 1 <= k <= {d}, got k={k}")

    # Working copy over active cluster ids; id = smallest original member.
    work = D.copy()
    np.fill_diagonal(work, np.inf)
    active = np.ones(d, dtype=bool)
    sizes = np.ones(d, dtype=np.int64)
    parent = np.arange(d)

    for _ in range(d - k):
        sub = np.where(
            active[:, None] & active[None, :], work, np.inf
        )
        vmin = sub.min()
        # lexicographically smallest (i, j), i < j, attaining the minimum
        ii, jj = np.where(np.triu(sub == vmin, 1))
        a, b = int(ii[0]), int(jj[0])
        na, nb = sizes[a], sizes[b]
        da, db = work[a], work[b]
        if linkage == "single":
            merged = np.minimum(da, db)
        elif linkage == "complete":
            merged = np.maximum(da, db)
        else:
            merged = (na * da + nb * db) / (na + nb)
        work[a, :] = merged
        work[:, a] = merged
        work[a, a] = np.inf
        active[b] = False
        sizes[a] = na + nb
        parent[parent == b] = a

    roots = sorted(set(parent.tolist()))
    relabel = {root: i for i, root in enumerate(roots)}
    labels = np.array([relabel[r] for r in parent], dtype=np.int64)
    return ClusterAssignment(labels=labels, k=k)


def _annualized_daily_sharpe(column: np.ndarray) -> float:
    # a flat column simply never wins the cluster, so the undefined-sharpe
    # warning would be noise here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        value = sharpe(column, "daily")
    return -np.inf if np.isnan(value) else float(value)


def select(train: ReturnsPanel, clusters: ClusterAssignment) -> list[str]:
    """One ticker per cluster: the highest annualized daily Sharpe, ties to
    the lexicographically smallest ticker; result sorted by ticker."""
    if len(train.tickers) != len(clusters.labels):
        raise DataError("cluster assignment does not match panel width")
    chosen: list[str] = []
    for cid in range(clusters.k):
        idx = clusters.members(cid)
        best = min(
            ((-_annualized_daily_sharpe(train.returns[:, j]), train.tickers[j]) for j in idx)
        )
        chosen.append(best[1])
    return sorted(chosen)
