"""Ensemble PCA, classical PCA and Robust PCA with a noise benchmark harness."""
from .dataio import (
    DatasetSpec,
    load_csv,
    load_model,
    load_report,
    parse_dataset,
    save_csv,
    save_model,
    save_report,
    synth_low_rank_sparse,
    synth_wave,
)
from .epca import EpcaConfig, EpcaModel, fit_epca
from .evaluation import BoxplotStats, ErrorReport, boxplot_stats, relative_error, score_method
from .exceptions import (
    DatasetIOError,
    DegenerateClusteringWarning,
    EnsemblePCAError,
    InsufficientSamples,
    InvalidBagSize,
    InvalidInput,
    InvalidRank,
    PairingWarning,
    ParseError,
    ShapeError,
)
from .experiments import MethodSettings, run_fixed, run_grid
from .kmeans import Clustering, kmeans
from .linalg import covariance, mean_center, orient, svd, svt, soft_threshold, sym_eig
from .noise import NoiseSpec, corrupt_outliers, corrupt_sparse, corrupt_white
from .pca import PcaModel, fit_pca, project
from .rpca import RpcaConfig, RpcaResult, rpca_components, rpca_ialm

__version__ = "0.1.0"
