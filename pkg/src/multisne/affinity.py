"""Perplexity-calibrated Gaussian affinities for one data view."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigError, DataError
from .preprocess import ReducedView

__all__ = [
    "AffinityMatrix",
    "squared_distances",
    "calibrate_row",
    "compute_view_affinities",
    "shannon_entropy",
    "DEFAULT_PERPLEXITY_GRID",
]

DEFAULT_PERPLEXITY_GRID = (2.0, 10.0, 20.0, 50.0, 80.0, 100.0, 200.0)

BETA_INIT = 0.5          # sigma = 1
BETA_MIN = 0.5e-40       # sigma = 1e20
BETA_MAX = 0.5e40        # sigma = 1e-20
MAX_SEARCH_STEPS = 50
PERPLEXITY_TOL = 1e-3


@dataclass(frozen=True)
class AffinityMatrix:
    """High-dimensional neighbour probabilities of one view.

    ``joint`` sums to one over ``active x active`` pairs. In the default
    ``"joint"`` mode it is the symmetrised matrix
    ``(p_j|i + p_i|j) / (2 n_active)``; in ``"conditional"`` mode it is the
    row-stochastic conditional matrix divided by ``n_active`` and therefore
    not symmetric. Inactive rows and columns are zero, and ``sigmas`` /
    ``achieved_perplexity`` are NaN there.
    """

    joint: np.ndarray
    conditional: np.ndarray
    sigmas: np.ndarray
    achieved_perplexity: np.ndarray
    perplexity_target: float
    active_mask: np.ndarray
    clamped: np.ndarray
    mode: str = "joint"

    @property
    def n_samples(self) -> int:
        return self.joint.shape[0]

    @property
    def n_active(self) -> int:
        return int(self.active_mask.sum())


def squared_distances(view, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Pairwise squared Euclidean distances.

    Rows and columns of samples outside ``mask`` hold ``inf`` (the kernel
    maps them to zero weight); the diagonal is always zero.
    """
    X = np.asarray(view, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite values in view")
    n = X.shape[0]
    D = squareform(pdist(X, "sqeuclidean")) if n > 1 else np.zeros((n, n))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        D[~mask, :] = np.inf
        D[:, ~mask] = np.inf
        np.fill_diagonal(D, 0.0)
    return D


def shannon_entropy(prob_row) -> float:
    """Entropy in bits, with 0 log 0 taken as 0."""
    p = np.asarray(prob_row, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, not 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _row_stats(Dr, beta):
    """Kernel rows and perplexities for shifted distance rows ``Dr``."""
    W = np.exp(-Dr * beta[:, None])
    W[~np.isfinite(Dr)] = 0.0
    s = W.sum(axis=1)
    # entropy (nats) = log s + beta * <d>_P; inf * 0 terms are excluded
    finite = np.where(np.isfinite(Dr), Dr, 0.0)
    H = np.log(s) + beta * np.sum(finite * W, axis=1) / s
    return W / s[:, None], np.exp(H)


def _calibrate(D: np.ndarray, target: float, tol: float = PERPLEXITY_TOL,
               max_steps: int = MAX_SEARCH_STEPS):
    """Bisection on the Gaussian precision, all rows at once.

    ``D`` is a square distance block with ``inf`` on the diagonal (self) and
    on excluded entries. Returns conditional rows, betas, perplexities and
    the clamp flags.
    """
    n = D.shape[0]
    dmin = np.min(D, axis=1)
    Dr = D - dmin[:, None]

    beta = np.full(n, BETA_INIT)
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    P, perp = _row_stats(Dr, beta)
    todo = np.abs(perp - target) >= tol
    steps = 0
    while steps < max_steps and np.any(todo):
        idx = np.flatnonzero(todo)
        b, pp = beta[idx], perp[idx]
        too_flat = pp > target
        # perplexity too high -> narrow the kernel (raise beta)
        lo[idx[too_flat]] = b[too_flat]
        hi[idx[~too_flat]] = b[~too_flat]
        new = np.where(
            too_flat,
            np.where(np.isinf(hi[idx]), b * 2.0, 0.5 * (b + hi[idx])),
            np.where(lo[idx] == 0.0, b * 0.5, 0.5 * (b + lo[idx])),
        )
        beta[idx] = np.clip(new, BETA_MIN, BETA_MAX)
        P[idx], perp[idx] = _row_stats(Dr[idx], beta[idx])
        todo[idx] = np.abs(perp[idx] - target) >= tol
        steps += 1
    return P, beta, perp, todo


def calibrate_row(distances_row, target_perplexity: float, self_index: int,
                  mask=None, tol: float = PERPLEXITY_TOL,
                  max_steps: int = MAX_SEARCH_STEPS):
    """Find the bandwidth giving one row the target perplexity.

    Returns ``(sigma, conditional_row)``. The row is zero at ``self_index``
    and at entries outside ``mask``. If the search cannot meet the tolerance
    (for example when every active distance is tied) the best row found is
    returned; tied minimal distances then share the mass uniformly.
    """
    d = np.array(distances_row, dtype=float)
    n = d.shape[0]
    active = np.ones(n, dtype=bool) if mask is None else np.array(mask, dtype=bool)
    active[self_index] = False
    if active.sum() < 2:
        raise DataError("calibration needs at least 2 active neighbours")
    d[~active] = np.inf
    P, beta, _, _ = _calibrate(d[None, :], float(target_perplexity), tol, max_steps)
    return float(np.sqrt(1.0 / (2.0 * beta[0]))), P[0]


def compute_view_affinities(view, target_perplexity: float,
                            mask: Optional[np.ndarray] = None,
                            mode: str = "joint",
                            tol: float = PERPLEXITY_TOL,
                            max_steps: int = MAX_SEARCH_STEPS) -> AffinityMatrix:
    """Calibrate every active row and assemble the view's probability matrix.

    Parameters
    ----------
    view : array or ReducedView
    target_perplexity : float
        Must not exceed ``n_active - 1`` (the uniform distribution's
        perplexity).
    mask : bool array, optional
        Samples observed in this view. Others get zero rows and columns.
    mode : {"joint", "conditional"}
    """
    if mode not in ("joint", "conditional"):
        raise ConfigError(f"unknown affinity mode {mode!r}")
    X = view.matrix if isinstance(view, ReducedView) else np.asarray(view, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    active = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool).copy()
    if active.shape != (n,):
        raise DataError(f"mask must have {n} entries")
    idx = np.flatnonzero(active)
    na = len(idx)
    if na < 3:
        raise DataError(f"need at least 3 active samples, got {na}")
    if not target_perplexity > 0:
        raise ConfigError("perplexity must be positive")
    if target_perplexity > na - 1:
        raise ConfigError(
            f"perplexity {target_perplexity} exceeds the {na - 1} available neighbours")

    D = squared_distances(X[idx])
    np.fill_diagonal(D, np.inf)
    P, beta, perp, flagged = _calibrate(D, float(target_perplexity), tol, max_steps)

    cond = np.zeros((n, n))
    cond[np.ix_(idx, idx)] = P
    if mode == "joint":
        joint = (cond + cond.T) / (2.0 * na)
    else:
        joint = cond / na

    sigmas = np.full(n, np.nan)
    sigmas[idx] = np.sqrt(1.0 / (2.0 * beta))
    achieved = np.full(n, np.nan)
    achieved[idx] = perp
    clamped = np.zeros(n, dtype=bool)
    clamped[idx] = flagged
    for a in (joint, cond, sigmas, achieved, active, clamped):
        a.setflags(write=False)
    return AffinityMatrix(
        joint=joint,
        conditional=cond,
        sigmas=sigmas,
        achieved_perplexity=achieved,
        perplexity_target=float(target_perplexity),
        active_mask=active,
        clamped=clamped,
        mode=mode,
    )
