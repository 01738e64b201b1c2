"""Enriched robust multi-view kernel subspace clustering."""
from mvksc._backend import BACKEND
from mvksc.data import MultiViewDataset, load_dataset, normalize, save_dataset
from mvksc.kernels import KernelSpec, gram
from mvksc.metrics import accuracy, nmi
from mvksc.solver import ClusteringResult, SolverConfig, fit

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClusteringResult",
    "KernelSpec",
    "MultiViewDataset",
    "SolverConfig",
    "accuracy",
    "fit",
    "gram",
    "load_dataset",
    "nmi",
    "normalize",
    "save_dataset",
]
