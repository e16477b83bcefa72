"""Robust multivariate location/scatter estimation and outlier detection.

Estimates the center and scatter of multivariate data so that a minority
of arbitrarily bad rows cannot distort them, by finding the h-subset of
rows whose covariance has minimal determinant.  Provides a randomized
search (:func:`fast_mcd`), a deterministic one (:func:`det_mcd`), an exact
univariate solver (:func:`uni_mcd`), a regularized variant for n < p
(:func:`mrcd`), reweighting and outlier flagging on top of any raw fit,
and diagnostic figures.  The ``robust-scatter`` console script exposes all
of it on CSV files.
"""

from .bench import BenchReport, BenchRow, bench_breakdown, bench_efficiency, bench_equivariance
from .core import (
    ChiSquare,
    DataMatrix,
    EstimatorKind,
    HSubset,
    LocationScatter,
    as_data_matrix,
    chi2_cdf,
    chi2_quantile,
    classical_estimate,
    consistency_factor_raw,
    consistency_factor_reweight,
    default_h,
    h_from_alpha,
    mahalanobis_all,
    sample_covariance,
    spd_log_det,
    statistical_distance,
    subset_stats,
)
from .cstep import ConcentrationResult, c_step, concentrate, select_smallest
from .detmcd import (
    InitialEstimate,
    StandardizedData,
    det_mcd,
    det_mcd_range,
    initial_scatters,
    qn_scale,
    refine_scatter,
    standardize,
)
from .errors import (
    DegenerateData,
    DomainError,
    InstanceTooLarge,
    RobustScatterError,
    SingularMatrix,
    SingularSubset,
    TooFewInliers,
    ZeroScale,
)
from .fastmcd import FastMcdConfig, fast_mcd, initial_subset
from .mrcd import MrcdConfig, MrcdResult, TargetKind, mrcd, regularized_cov, target_matrix
from .reweight import (
    DdPlotData,
    OutlierReport,
    dd_plot_data,
    outlier_report,
    reweight,
    robust_correlation,
    robust_distances,
)
from .univariate import UniMcdResult, lts_location, uni_mcd, uni_mcd_bruteforce

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "RobustScatterError",
    "DomainError",
    "SingularMatrix",
    "SingularSubset",
    "DegenerateData",
    "ZeroScale",
    "TooFewInliers",
    "InstanceTooLarge",
    # core
    "DataMatrix",
    "as_data_matrix",
    "EstimatorKind",
    "LocationScatter",
    "HSubset",
    "ChiSquare",
    "subset_stats",
    "sample_covariance",
    "spd_log_det",
    "statistical_distance",
    "mahalanobis_all",
    "chi2_cdf",
    "chi2_quantile",
    "consistency_factor_raw",
    "consistency_factor_reweight",
    "default_h",
    "h_from_alpha",
    "classical_estimate",
    # concentration
    "ConcentrationResult",
    "c_step",
    "concentrate",
    "select_smallest",
    # estimators
    "FastMcdConfig",
    "fast_mcd",
    "initial_subset",
    "StandardizedData",
    "InitialEstimate",
    "qn_scale",
    "standardize",
    "initial_scatters",
    "refine_scatter",
    "det_mcd",
    "det_mcd_range",
    "TargetKind",
    "MrcdConfig",
    "MrcdResult",
    "target_matrix",
    "regularized_cov",
    "mrcd",
    "UniMcdResult",
    "uni_mcd",
    "uni_mcd_bruteforce",
    "lts_location",
    # reweighting and diagnostics
    "OutlierReport",
    "DdPlotData",
    "robust_distances",
    "outlier_report",
    "reweight",
    "robust_correlation",
    "dd_plot_data",
    # benchmarks
    "BenchRow",
    "BenchReport",
    "bench_efficiency",
    "bench_breakdown",
    "bench_equivariance",
]
