"""Multi-view t-SNE (multi-SNE) with semi-supervised and missing-view variants."""

from .affinity import AffinityMatrix, compute_view_affinities
from .classify import KNNClassifier, grid_search_k, knn_predict
from .config import PipelineConfig
from .dataset import (IngestionConfig, LabelView, MultiViewDataset, SplitSpec, build_label_view,
                      load_multiview, stratified_split)
from .errors import ConfigError, DataError, MultiSNEError, NumericalError
from .evaluate import BenchmarkReport, EvalReport, compute_metrics, run_benchmark
from .pipeline import embed_dataset
from .preprocess import ReducedView, pca_reduce
from .sne import Embedding, OptimizerConfig, ViewWeights, optimize
from .synth import NdsParams, generate_nds, subset_nds

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix", "compute_view_affinities",
    "KNNClassifier", "grid_search_k", "knn_predict",
    "PipelineConfig",
    "IngestionConfig", "LabelView", "MultiViewDataset", "SplitSpec", "build_label_view",
    "load_multiview", "stratified_split",
    "ConfigError", "DataError", "MultiSNEError", "NumericalError",
    "BenchmarkReport", "EvalReport", "compute_metrics", "run_benchmark",
    "embed_dataset",
    "ReducedView", "pca_reduce",
    "Embedding", "OptimizerConfig", "ViewWeights", "optimize",
    "NdsParams", "generate_nds", "subset_nds",
]
