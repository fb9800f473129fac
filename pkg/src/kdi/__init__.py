"""Kernel density integral transform, KDI correlation and KDE-valley clustering."""

from .clustering import ClusterResult, ari, cluster_kdi, cluster_raw_kde
from .core import (
    Column,
    DataError,
    FittedKdi,
    fit,
    inverse_transform,
    load_model,
    minmax,
    quantile,
    save_model,
    transform,
)
from .correlation import bootstrap_sd, general_gamma, kdi_corr, pearson, spearman
from .fast_eval import EvalPlan, Strategy
from .kernels import KernelSpec, kernel_cdf, kernel_pdf

__all__ = [
    "ClusterResult", "Column", "DataError", "EvalPlan", "FittedKdi", "KernelSpec", "Strategy",
    "ari", "bootstrap_sd", "cluster_kdi", "cluster_raw_kde", "fit", "general_gamma",
    "inverse_transform", "kdi_corr", "kernel_cdf", "kernel_pdf", "load_model", "minmax",
    "pearson", "quantile", "save_model", "spearman", "transform",
]
