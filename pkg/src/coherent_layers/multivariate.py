"""Correlation structure, principal components and response histograms."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass
class PcaResult:
    eigenvalues: np.ndarray  # descending
    loadings: np.ndarray  # variables x components
    communalities: np.ndarray  # over retained components
    n_retained: int
    names: list = None

    @property
    def explained(self):
        return self.eigenvalues / self.eigenvalues.sum()

    @property
    def retained_share(self):
        return float(self.explained[: self.n_retained].sum())


def _check_variance(name, x):
    if np.ptp(x) == 0:
        raise DomainError(f"trajectory {name!r} has zero variance")


def correlation_matrix(bundle):
    """Pearson correlations between named trajectories over their common grid.

    Parameters
    ----------
    bundle : dict
        Name to 1-d trajectory, all of equal length.
    """
    names = list(bundle)
    if len(names) < 2:
        raise DomainError("need at least two trajectories")
    X = np.array([np.asarray(bundle[n], dtype=float) for n in names])
    if X.ndim != 2:
        raise DomainError("trajectories must share one grid")
    for n, x in zip(names, X):
        _check_variance(n, x)
    C = np.corrcoef(X)
    np.fill_diagonal(C, 1.0)
    return C


def pca(corr, names=None, atol=1e-10):
    """Eigen-decompose a correlation matrix; keep components with eigenvalue > 1."""
    C = np.asarray(corr, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DomainError("correlation matrix must be square")
    if not np.allclose(C, C.T, atol=atol, rtol=0):
        raise DomainError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(C), 1.0, atol=atol, rtol=0):
        raise DomainError("correlation matrix must have a unit diagonal")
    w, V = np.linalg.eigh(C)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    # orient each eigenvector so its loadings sum non-negative
    V = V * np.where(V.sum(axis=0) < 0, -1.0, 1.0)
    loadings = V * np.sqrt(np.clip(w, 0, None))
    k = int(np.sum(w > 1.0))
    communalities = np.sum(loadings[:, :k] ** 2, axis=1)
    return PcaResult(w, loadings, communalities, k, names)


def pairwise_r2(a, b):
    """Squared Pearson correlation, i.e. the R^2 of a simple linear regression."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError("trajectories must be 1-d and of equal length")
    _check_variance("a", a)
    _check_variance("b", b)
    da, db = a - a.mean(), b - b.mean()
    return float((da @ db) ** 2 / ((da @ da) * (db @ db)))


def histogram(matrix, B, bin_edges):
    """Counts of responses at stimulus ``B`` per right-closed bin.

    Bin ``i`` holds ``edges[i] < x <= edges[i+1]``; the first bin also takes
    ``x == edges[0]``.
    """
    if not 1 <= B <= matrix.stimulus_count:
        raise DomainError(f"B={B} outside the stimulus grid 1..{matrix.stimulus_count}")
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be strictly increasing")
    x = matrix.oriented_values[:, B - 1]
    idx = np.searchsorted(edges, x, side="left") - 1
    idx[x == edges[0]] = 0
    inside = (idx >= 0) & (idx < len(edges) - 1)
    return np.bincount(idx[inside], minlength=len(edges) - 1)
