"""Directed information, transfer entropy and Granger causality graphs.

Exact finite-horizon measures for discrete processes, analytic rates of
Gaussian VAR models, k-nearest-neighbor estimators of conditional mutual
information and surrogate-tested causality graphs.
"""
from ._accel import backend_name
from .discrete_exact import (JointPmf, PmfError, causal_cond_entropy_exact,
                             delayed_directed_information_exact, directed_information_exact,
                             instantaneous_exchange_exact, mutual_information_exact)
from .estimators import EstimationError, EstimatorConfig, fp_cmi, ksg_mi
from .gaussian_oracle import (ModelError, OracleError, VarModel, analytic_rate, gaussian_cmi,
                              simulate_var, stationary_autocov, true_graph)
from .graph import CausalityGraph, EdgeTestResult
from .inference import (InferenceConfig, bh_adjust, circular_shift_surrogate, edge_pvalue,
                        infer_graph)
from .measures import (MeasureEstimate, directed_info_rate, estimate_rate,
                       instantaneous_exchange_rate, transfer_entropy_rate)
from .timeseries import DataError, EmbeddingSpec, TimeSeriesSet, embed, load_csv, standardize

__version__ = "0.1.0"

__all__ = [
    "CausalityGraph", "DataError", "EdgeTestResult", "EmbeddingSpec", "EstimationError",
    "EstimatorConfig", "InferenceConfig", "JointPmf", "MeasureEstimate", "ModelError",
    "OracleError", "PmfError", "TimeSeriesSet", "VarModel", "analytic_rate", "backend_name",
    "bh_adjust", "causal_cond_entropy_exact", "circular_shift_surrogate",
    "delayed_directed_information_exact", "directed_info_rate", "directed_information_exact",
    "edge_pvalue", "embed", "estimate_rate", "fp_cmi", "gaussian_cmi", "infer_graph",
    "instantaneous_exchange_exact", "instantaneous_exchange_rate", "ksg_mi", "load_csv",
    "mutual_information_exact", "simulate_var", "standardize", "stationary_autocov",
    "transfer_entropy_rate", "true_graph",
]
