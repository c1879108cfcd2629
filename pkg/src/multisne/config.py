"""Pipeline configuration: defaults, JSON loading and validation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .classify import DEFAULT_K_GRID
from .errors import ConfigError
from .sne import OptimizerConfig

__all__ = ["PipelineConfig", "VARIANTS", "DEFAULT_RATES"]

VARIANTS = ("auto", "multi", "semi", "generalized")
DEFAULT_RATES = (0.1, 0.2, 0.5, 0.8)


@dataclass
class PipelineConfig:
    """Every knob of an embed or benchmark run.

    ``perplexity_grid``, when set, replaces the fixed ``perplexity`` by a
    sweep. ``label_perplexity`` of None shares the run perplexity with the
    label view. ``weights`` is ``"equal"`` or one weight per view, the label
    view last.
    """

    perplexity: float = 30.0
    perplexity_grid: Optional[list] = None
    label_perplexity: Optional[float] = None
    pca_variance: float = 0.8
    use_pca: bool = True
    affinity_mode: str = "joint"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    weights: object = "equal"
    k: Optional[int] = None
    k_grid: list = field(default_factory=lambda: list(DEFAULT_K_GRID))
    cv_folds: int = 5
    variant: str = "auto"
    train_rate: Optional[float] = None
    rates: list = field(default_factory=lambda: list(DEFAULT_RATES))
    n_iter: int = 100
    seed: int = 0
    output_dir: str = "out"

    def validate(self) -> "PipelineConfig":
        if not self.perplexity > 0:
            raise ConfigError("perplexity must be positive")
        if self.perplexity_grid is not None:
            if not self.perplexity_grid or any(not p > 0 for p in self.perplexity_grid):
                raise ConfigError("perplexity grid must be a non-empty list of positive values")
        if self.label_perplexity is not None and not self.label_perplexity > 0:
            raise ConfigError("label_perplexity must be positive")
        if not 0 < self.pca_variance <= 1:
            raise ConfigError("pca_variance must lie in (0, 1]")
        if self.affinity_mode not in ("joint", "conditional"):
            raise ConfigError(f"affinity_mode must be 'joint' or 'conditional', got {self.affinity_mode!r}")
        self.optimizer.validate()
        if self.weights != "equal":
            if not isinstance(self.weights, (list, tuple)) or not self.weights \
                    or any(not isinstance(w, (int, float)) or w < 0 for w in self.weights):
                raise ConfigError("weights must be 'equal' or a list of non-negative numbers")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be positive")
        if not self.k_grid or any(int(k) < 1 for k in self.k_grid):
            raise ConfigError("k_grid must be a non-empty list of positive integers")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.train_rate is not None and not 0 < self.train_rate < 1:
            raise ConfigError("train_rate must lie in (0, 1)")
        if not self.rates or any(not 0 < r < 1 for r in self.rates):
            raise ConfigError("rates must be fractions in (0, 1)")
        if self.n_iter < 1:
            raise ConfigError("n_iter must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["optimizer"] = self.optimizer.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {unknown}")
        opt = d.pop("optimizer", None) or {}
        if isinstance(opt, dict):
            okeys = {f.name for f in fields(OptimizerConfig)}
            bad = sorted(set(opt) - okeys)
            if bad:
                raise ConfigError(f"unknown optimizer key(s): {bad}")
            opt = OptimizerConfig(**opt)
        try:
            return cls(optimizer=opt, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)
