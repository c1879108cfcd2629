"""Student-t embedding affinities, the weighted multi-view KL cost (with
optional per-view pair masks), its gradient, and the optimiser.

A single cost covers the three variants:

* no masks                      -> multi-SNE
* only the label view masked    -> S-multi-SNE
* any view masked               -> G-multi-SNE

Masks restrict which pairs are summed for a view; the low-dimensional ``Q``
is always normalised over all pairs.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .affinity import AffinityMatrix
from .errors import ConfigError, NumericalError

__all__ = [
    "PROB_FLOOR",
    "ViewWeights",
    "IndicatorMatrix",
    "OptimizerConfig",
    "Embedding",
    "build_indicator",
    "low_dim_affinities",
    "kl_divergence",
    "total_cost",
    "gradient",
    "initial_coords",
    "optimize",
]

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class ViewWeights:
    """Non-negative per-view weights, normalised to sum to one."""

    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise ConfigError("weights must be a non-empty 1-D sequence")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise ConfigError(f"invalid view weights {self.weights}")
        object.__setattr__(self, "weights", tuple(float(x) for x in w / w.sum()))

    @classmethod
    def equal(cls, n_views: int) -> "ViewWeights":
        return cls((1.0,) * n_views)

    def __len__(self):
        return len(self.weights)

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)


@dataclass(frozen=True)
class IndicatorMatrix:
    pair_mask: np.ndarray
    row_mask: np.ndarray


def build_indicator(row_mask) -> IndicatorMatrix:
    """Pair mask that is true where both samples are observed."""
    row = np.asarray(row_mask, dtype=bool)
    pair = np.outer(row, row)
    row = row.copy()
    for a in (row, pair):
        a.setflags(write=False)
    return IndicatorMatrix(pair_mask=pair, row_mask=row)


@dataclass
class OptimizerConfig:
    n_iter: int = 1000
    learning_rate: float = 200.0
    momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch_iter: int = 250
    exaggeration: float = 12.0
    exaggeration_iters: int = 250
    init_sd: float = 1e-4
    n_components: int = 2
    use_gains: bool = True
    min_gain: float = 0.01

    def validate(self) -> None:
        if self.n_iter < 0 or self.exaggeration_iters < 0 or self.momentum_switch_iter < 0:
            raise ConfigError("iteration counts must be non-negative")
        if self.learning_rate <= 0 or self.init_sd <= 0 or self.exaggeration <= 0:
            raise ConfigError("learning_rate, init_sd and exaggeration must be positive")
        if not (0 <= self.momentum < 1 and 0 <= self.final_momentum < 1):
            raise ConfigError("momentum must lie in [0, 1)")
        if self.n_components < 1:
            raise ConfigError("n_components must be >= 1")
        if not 0 < self.min_gain <= 1:
            raise ConfigError("min_gain must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Embedding:
    """Optimised coordinates plus the cost after every update.

    ``cost_trace[t]`` is the (un-exaggerated) cost after ``t`` updates, so the
    trace has ``n_iter + 1`` entries.
    """

    coords: np.ndarray
    cost_trace: np.ndarray
    config_echo: dict
    seed: int
    sample_ids: tuple = field(default=())

    @property
    def final_cost(self) -> float:
        return float(self.cost_trace[-1])

    @property
    def post_exaggeration_cost(self) -> float:
        k = min(self.config_echo.get("exaggeration_iters", 0), len(self.cost_trace) - 1)
        return float(self.cost_trace[k])


# ---------------------------------------------------------------------------
# low-dimensional side


def _student_t(Y: np.ndarray) -> np.ndarray:
    """Unnormalised kernel (1 + |y_i - y_j|^2)^-1 with a zero diagonal."""
    n = Y.shape[0]
    D = np.zeros((n, n))
    for k in range(Y.shape[1]):
        diff = Y[:, k, None] - Y[None, :, k]
        D += diff * diff
    num = 1.0 / (1.0 + D)
    np.fill_diagonal(num, 0.0)
    return num


def low_dim_affinities(coords) -> np.ndarray:
    """Student-t (one degree of freedom) neighbour probabilities of ``coords``."""
    Y = np.asarray(coords, dtype=float)
    if Y.ndim != 2 or Y.shape[0] < 2:
        raise ValueError("need an (N, d) array with N >= 2")
    num = _student_t(Y)
    return num / num.sum()


def kl_divergence(p, q, pair_mask=None, floor: float = PROB_FLOOR) -> float:
    """sum over masked pairs of p log(p / q); zero-probability terms vanish.

    Both ``p`` and ``q`` are clipped at ``floor`` inside the logarithm, so
    ``kl_divergence(P, P) == 0`` exactly.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {q.shape}")
    use = p > 0
    if pair_mask is not None:
        use &= np.asarray(pair_mask, dtype=bool)
    pu, qu = p[use], q[use]
    if floor <= 0 and np.any(qu <= 0):
        raise NumericalError("q is zero where p is positive")
    return float(np.sum(pu * np.log(np.maximum(pu, floor) / np.maximum(qu, floor))))


def _resolve_masks(affinities, weights, indicators):
    if weights is None:
        weights = ViewWeights.equal(len(affinities))
    elif not isinstance(weights, ViewWeights):
        weights = ViewWeights(tuple(weights))
    if len(weights) != len(affinities):
        raise ConfigError(f"{len(weights)} weights for {len(affinities)} views")
    if indicators is None:
        indicators = [None] * len(affinities)
    if len(indicators) != len(affinities):
        raise ConfigError("one indicator (or None) per view is required")
    masks = []
    for aff, ind in zip(affinities, indicators):
        if ind is None:
            ind = build_indicator(aff.active_mask)
        masks.append(ind.pair_mask)
    return weights, masks


def total_cost(affinities: Sequence[AffinityMatrix], weights, Q,
               indicators: Optional[Sequence[Optional[IndicatorMatrix]]] = None) -> float:
    """Weighted sum of per-view KL divergences to the shared ``Q``.

    ``indicators[m]`` restricts view ``m`` to its masked pairs; ``None`` uses
    the pairs of the view's active samples.
    """
    weights, masks = _resolve_masks(affinities, weights, indicators)
    return float(sum(w * kl_divergence(a.joint, Q, m)
                     for w, a, m in zip(weights.weights, affinities, masks)))


class _Objective:
    """Per-run constants of the cost.

    With ``A = sum_m w_m (mask_m * P_m)`` and ``s = sum_m w_m sum(mask_m * P_m)``
    the cost is ``const - sum(A * log q)`` and the gradient is
    ``4 sum_j (alpha A_ij - s q_ij) (1 + |y_i - y_j|^2)^-1 (y_i - y_j)``,
    alpha being the early-exaggeration factor.
    """

    def __init__(self, affinities, weights, indicators, floor=PROB_FLOOR, order=None):
        weights, masks = _resolve_masks(affinities, weights, indicators)
        n = affinities[0].joint.shape[0]
        A = np.zeros((n, n))
        s = 0.0
        const = 0.0
        for w, aff, mask in zip(weights.weights, affinities, masks):
            if aff.joint.shape != (n, n):
                raise ConfigError("all affinity matrices must share one sample count")
            P = aff.joint * mask
            if order is not None:
                P = P[np.ix_(order, order)]
            A += w * P
            s += w * float(P.sum())
            pos = P > 0
            const += w * float(np.sum(P[pos] * np.log(np.maximum(P[pos], floor))))
        # conditional-mode matrices are asymmetric; the gradient needs the
        # symmetric part (a no-op for joint matrices)
        self.A = (A + A.T) / 2.0
        self.s = s
        self.const = const
        self.floor = floor
        self.weights = weights

    def cost(self, Q) -> float:
        return self.const - float(np.sum(self.A * np.log(np.maximum(Q, self.floor))))

    def gradient(self, Y, num, Q, alpha=1.0) -> np.ndarray:
        K = (alpha * self.A - self.s * Q) * num
        return 4.0 * (K.sum(axis=1)[:, None] * Y - K @ Y)


def gradient(affinities: Sequence[AffinityMatrix], weights, coords,
             indicators: Optional[Sequence[Optional[IndicatorMatrix]]] = None) -> np.ndarray:
    """Exact gradient of :func:`total_cost` with respect to ``coords``
    (away from the probability floor)."""
    Y = np.asarray(coords, dtype=float)
    obj = _Objective(affinities, weights, indicators)
    num = _student_t(Y)
    return obj.gradient(Y, num, num / num.sum())


def _id_seed(sample_id) -> int:
    digest = hashlib.blake2b(str(sample_id).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def initial_coords(n: int, n_components: int, sd: float, seed: int,
                   sample_ids: Optional[Sequence] = None) -> np.ndarray:
    """Gaussian start drawn per sample id, so reordering samples reorders
    the start identically."""
    ids = sample_ids if sample_ids else [str(i) for i in range(n)]
    if len(ids) != n:
        raise ConfigError(f"expected {n} sample ids, got {len(ids)}")
    Y = np.empty((n, n_components))
    for i, sid in enumerate(ids):
        Y[i] = np.random.default_rng([int(seed), _id_seed(sid)]).normal(0.0, sd, n_components)
    return Y


def optimize(affinities: Sequence[AffinityMatrix], weights=None,
             config: Optional[OptimizerConfig] = None, seed: int = 0,
             sample_ids: Optional[Sequence] = None,
             indicators: Optional[Sequence[Optional[IndicatorMatrix]]] = None,
             init: Optional[np.ndarray] = None) -> Embedding:
    """Gradient descent with momentum and per-coordinate gains.

    Early exaggeration scales the attractive term for the first
    ``exaggeration_iters`` updates. Coordinates are re-centred after every
    update. Raises :class:`NumericalError` if the cost stops being finite.

    With ``sample_ids`` given, the iterations run with samples sorted by id
    and the result is mapped back. Every floating-point sum then happens in
    the same order whatever the input order, so a permuted input gives the
    permuted output exactly.
    """
    if not affinities:
        raise ConfigError("at least one affinity matrix is required")
    cfg = config or OptimizerConfig()
    cfg.validate()
    n = affinities[0].joint.shape[0]
    if init is None:
        Y = initial_coords(n, cfg.n_components, cfg.init_sd, seed, sample_ids)
    else:
        Y = np.array(init, dtype=float)
        if Y.shape != (n, cfg.n_components):
            raise ConfigError(f"init must have shape {(n, cfg.n_components)}")
    order = None
    if sample_ids:
        order = np.array(sorted(range(n), key=lambda i: str(sample_ids[i])), dtype=np.int64)
        if np.array_equal(order, np.arange(n)):
            order = None
        else:
            Y = Y[order]
    obj = _Objective(affinities, weights, indicators, order=order)

    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    trace = np.empty(cfg.n_iter + 1)

    # overflow shows up as a non-finite cost or coordinate and is reported below
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(cfg.n_iter + 1):
            num = _student_t(Y)
            Q = num / num.sum()
            c = obj.cost(Q)
            if not np.isfinite(c):
                raise NumericalError(f"non-finite cost at iteration {it}")
            trace[it] = c
            if it == cfg.n_iter:
                break
            alpha = cfg.exaggeration if it < cfg.exaggeration_iters else 1.0
            mom = cfg.momentum if it < cfg.momentum_switch_iter else cfg.final_momentum
            grad = obj.gradient(Y, num, Q, alpha)
            if cfg.use_gains:
                inc = update * grad < 0.0
                gains = np.where(inc, gains + 0.2, gains * 0.8)
                np.maximum(gains, cfg.min_gain, out=gains)
                update = mom * update - cfg.learning_rate * (gains * grad)
            else:
                update = mom * update - cfg.learning_rate * grad
            Y = Y + update
            Y = Y - Y.mean(axis=0)
            if not np.all(np.isfinite(Y)):
                raise NumericalError(f"non-finite coordinates at iteration {it + 1}")

    if order is not None:
        back = np.empty_like(Y)
        back[order] = Y
        Y = back
    echo = cfg.to_dict()
    echo["weights"] = list(obj.weights.weights)
    return Embedding(
        coords=Y,
        cost_trace=trace,
        config_echo=echo,
        seed=int(seed),
        sample_ids=tuple(sample_ids) if sample_ids else tuple(str(i) for i in range(n)),
    )
