"""Intrinsic dimension estimators for finite and analytic metric measure spaces."""

from ._backend import BACKEND
from .chavez import DistanceMoments, dim_dist, dim_dist_stderr, distance_moments_exact, distance_moments_sampled, table1
from .concentration import (
    ConcentrationCurve,
    alpha_analytic,
    alpha_feature_lower,
    alpha_subset_exact,
    breakpoint_grid,
    check_mean_median_bound,
    concentration_curve,
    dim_alpha,
    integrate_alpha,
)
from .errors import DataError, IdimError, ParameterError
from .features import FeatureVector, char_size, generate_features, mcshane_feature, obs_diam
from .gromov import Parametrization, StepFunction, dconc_estimate, dist_to_singleton, me1
from .io import load_dataset, save_dataset
from .report import DimensionReport
from .space import (
    Equilateral,
    FiniteSpace,
    HammingCube,
    Hypercube,
    ParetoRay,
    Sphere,
    TwoSpheres,
    build_equilateral,
    pairwise_distance,
    sample_analytic,
)
from .values import DIVERGENT_ZERO, UNDEFINED, encode_value

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConcentrationCurve",
    "DIVERGENT_ZERO",
    "DataError",
    "DimensionReport",
    "DistanceMoments",
    "Equilateral",
    "FeatureVector",
    "FiniteSpace",
    "HammingCube",
    "Hypercube",
    "IdimError",
    "Parametrization",
    "ParameterError",
    "ParetoRay",
    "Sphere",
    "StepFunction",
    "TwoSpheres",
    "UNDEFINED",
    "alpha_analytic",
    "alpha_feature_lower",
    "alpha_subset_exact",
    "breakpoint_grid",
    "build_equilateral",
    "char_size",
    "check_mean_median_bound",
    "concentration_curve",
    "dconc_estimate",
    "dim_alpha",
    "dim_dist",
    "dim_dist_stderr",
    "dist_to_singleton",
    "distance_moments_exact",
    "distance_moments_sampled",
    "encode_value",
    "generate_features",
    "integrate_alpha",
    "load_dataset",
    "mcshane_feature",
    "me1",
    "obs_diam",
    "pairwise_distance",
    "sample_analytic",
    "save_dataset",
    "table1",
]
