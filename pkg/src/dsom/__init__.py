"""Dirichlet sampling on manifolds: new points as random convex combinations of data rows."""

from __future__ import annotations

from .dataset import Dataset, Normalization, denormalize, normalize
from .diagnostics import (
    ConvergenceReport,
    DensityGrid,
    LeakageReport,
    conv_corr,
    conv_mean,
    convergence_report,
    kde_grid,
    leakage,
)
from .errors import (
    DegenerateDataError,
    DSoMError,
    InvalidArgumentError,
    ParseError,
    SchemaError,
    UnsupportedFormatError,
)
from .io import CsvSchema, load_csv, load_ply, save_csv, save_ply
from .rand import DirichletParams, RngStream, sample_dirichlet, sample_gamma, sample_uniform_indices
from .sampler import (
    Exponent,
    Metric,
    MetricContext,
    Provenance,
    SamplerConfig,
    SimulatedSet,
    build_metric,
    sample,
    sample_normalized,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceReport", "CsvSchema", "Dataset", "DegenerateDataError", "DensityGrid",
    "DirichletParams", "DSoMError", "Exponent", "InvalidArgumentError", "LeakageReport",
    "Metric", "MetricContext", "Normalization", "ParseError", "Provenance", "RngStream",
    "SamplerConfig", "SchemaError", "SimulatedSet", "UnsupportedFormatError", "build_metric",
    "conv_corr", "conv_mean", "convergence_report", "denormalize", "kde_grid", "leakage",
    "load_csv", "load_ply", "normalize", "sample", "sample_dirichlet", "sample_gamma",
    "sample_normalized", "sample_uniform_indices", "save_csv", "save_ply",
]
