"""Per-view PCA keeping the leading components up to a variance target."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = ["ReducedView", "pca_reduce"]

# round-off slack when comparing cumulative variance against the target
_CUM_EPS = 1e-10


@dataclass(frozen=True)
class ReducedView:
    """Principal-component scores of one view.

    Attributes
    ----------
    matrix : (N, c) array
        Scores of the centred data on the retained components.
    components_kept : int
    variance_explained : float
        Cumulative explained-variance ratio of the retained components.
    mean_vector : (p,) array
    components : (c, p) array
        Unit loading vectors, one per row.
    explained_variance_ratio : (c,) array
    """

    matrix: np.ndarray
    components_kept: int
    variance_explained: float
    mean_vector: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.matrix @ self.components + self.mean_vector


def pca_reduce(view, variance_target: float = 0.8, name: str = "view") -> ReducedView:
    """Project a view onto its first ``c`` principal components.

    ``c`` is the smallest count whose cumulative explained variance reaches
    ``variance_target``. The covariance uses the 1/(N-1) normalisation and
    the data are centred but not scaled. When the view is wider than it is
    tall the eigenproblem is solved on the N x N Gram matrix instead.
    Each component's sign is chosen so its largest-magnitude loading is
    positive.
    """
    X = np.asarray(view, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if n < 2:
        raise DataError(f"{name}: PCA needs at least 2 samples")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{name}: non-finite values")
    if not 0.0 < variance_target <= 1.0:
        raise DataError(f"variance_target must lie in (0, 1], got {variance_target}")

    mean = X.mean(axis=0)
    Xc = X - mean
    total = float(np.sum(Xc * Xc)) / (n - 1)
    if total <= 0.0 or np.all(Xc == 0.0):
        raise DataError(f"{name}: zero variance (all rows identical)")

    if p <= n:
        evals, evecs = np.linalg.eigh(Xc.T @ Xc / (n - 1))
        order = np.argsort(evals)[::-1]
        evals = np.clip(evals[order], 0.0, None)
        V = evecs[:, order].T                              # (p, p) rows = components
    else:
        evals, U = np.linalg.eigh(Xc @ Xc.T / (n - 1))
        order = np.argsort(evals)[::-1]
        evals = np.clip(evals[order], 0.0, None)
        U = U[:, order]
        keep = evals > evals[0] * 1e-12
        evals, U = evals[keep], U[:, keep]
        V = (Xc.T @ U / np.sqrt(evals * (n - 1))).T        # (r, p)

    ratio = evals / total
    cum = np.cumsum(ratio)
    reached = np.flatnonzero(cum >= variance_target - _CUM_EPS)
    c = int(reached[0]) + 1 if len(reached) else len(cum)

    comps = V[:c].copy()
    lead = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(c), lead])
    signs[signs == 0] = 1.0
    comps *= signs[:, None]

    scores = Xc @ comps.T
    return ReducedView(
        matrix=scores,
        components_kept=c,
        variance_explained=float(min(cum[c - 1], 1.0)),
        mean_vector=mean,
        components=comps,
        explained_variance_ratio=ratio[:c].copy(),
    )
