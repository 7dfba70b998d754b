"""Fixed points of interference mappings.

Building blocks: mapping families and sampled property checkers
(:mod:`ifp.mappings`), asymptotic mappings (:mod:`ifp.asymptotic`),
spectral radii and contraction certificates (:mod:`ifp.spectral`),
the fixed-point iteration with rate bounds (:mod:`ifp.solver`),
and the wireless load-coupling application (:mod:`ifp.wireless`).
"""
from .mappings import (AffineMapping, ConcaveCompositeMapping, LoadCouplingMapping,
                       Mapping, PropertyReport, ScaledMapping, apply_mapping,
                       check_contractivity, check_monotonicity, check_scalability,
                       load_mapping, save_mapping, scale_mapping)
from .asymptotic import (AnalyticLinear, AsymptoticMapping, NumericLimit,
                         asymptotic_apply, build_asymptotic, check_homogeneity,
                         verify_concave_inf, verify_convex_sup)
from .norms import Norm, ONE_NORM, SUP_NORM, weighted_sup
from .solver import (IterationTrace, RateBound, StopRule, concave_lower_bound,
                     fit_geometric_rate, fixed_point_iterate, max_epsilon,
                     read_trace_csv, trace_to_csv, upper_bound_curve,
                     verify_sandwich)
from .spectral import (ContractionResult, ExistenceResult, SpectralResult,
                       contraction_modulus, epsilon_power_method, fixed_point_exists,
                       krause_iteration, verify_rho_lower_bounds_modulus)
from .wireless import (NetworkSnapshot, SnapshotConfig, build_M, calibrate_beta,
                       generate_snapshot, load_apply, load_snapshot, save_snapshot)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
