"""Asymptotic mappings: the linear behaviour of an interference map at infinity.

For every shipped mapping family the limit (1/t) T(t x) as t grows is a
nonnegative linear map, so the analytic backend is exact.  A numeric-limit
backend evaluates the scaling limit directly and serves as a cross-check
and as a fallback for future variants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import wireless
from .mappings import (AffineMapping, ConcaveCompositeMapping, LoadCouplingMapping,
                       Mapping, PropertyReport, ScaledMapping, apply_mapping, dim,
                       is_concave, is_convex, sample_domain_points)

# 4^36 ~ 4.7e21: far enough that sqrt-type terms drop below rel_tol even for
# sample entries as small as 1e-3
DEFAULT_T_SCHEDULE = tuple(4.0 ** k for k in range(1, 37))
DEFAULT_REL_TOL = 1e-8


class LimitNotConverged(RuntimeError):
    """The scaling limit did not settle over the t schedule; the source
    mapping may lack an asymptotic mapping with full domain."""


@dataclass(frozen=True)
class AnalyticLinear:
    """Exact backend: the asymptotic map is x -> M_eff x."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        if np.any(M < 0):
            raise ValueError("asymptotic matrix must be nonnegative")
        object.__setattr__(self, "matrix", M)


@dataclass(frozen=True)
class NumericLimit:
    """Limit backend: evaluate (1/t) T(t x) along a growing t schedule."""

    source: Mapping
    t_schedule: tuple = DEFAULT_T_SCHEDULE
    rel_tol: float = DEFAULT_REL_TOL


AsymptoticMapping = Union[AnalyticLinear, NumericLimit]


def asymptotic_dim(am: AsymptoticMapping) -> int:
    if isinstance(am, AnalyticLinear):
        return am.matrix.shape[0]
    return dim(am.source)


def build_asymptotic(mapping: Mapping) -> AsymptoticMapping:
    """Asymptotic mapping of a shipped variant, analytic whenever possible.

    The sqrt and offset terms of the concave composite vanish in the limit,
    so its asymptotic matrix is just A.  For load coupling the matrix is
    diag(p)^-1 M diag(p).  Scalings multiply through the limit.
    """
    if isinstance(mapping, AffineMapping):
        return AnalyticLinear(mapping.matrix)
    if isinstance(mapping, ConcaveCompositeMapping):
        return AnalyticLinear(mapping.matrix)
    if isinstance(mapping, LoadCouplingMapping):
        return AnalyticLinear(wireless.asymptotic_matrix(mapping.snapshot))
    if isinstance(mapping, ScaledMapping):
        inner = build_asymptotic(mapping.inner)
        if isinstance(inner, AnalyticLinear):
            return AnalyticLinear(mapping.beta * inner.matrix)
        return NumericLimit(mapping)
    return NumericLimit(mapping)


def asymptotic_apply(am: AsymptoticMapping, x) -> np.ndarray:
    """Evaluate the asymptotic mapping at x >= 0."""
    x = np.asarray(x, dtype=float)
    if x.shape != (asymptotic_dim(am),):
        raise ValueError(f"expected dim {asymptotic_dim(am)}, got shape {x.shape}")
    if isinstance(am, AnalyticLinear):
        return am.matrix @ x
    if not np.any(x > 0):
        return np.zeros_like(x)
    prev = None
    for t in am.t_schedule:
        cur = apply_mapping(am.source, t * x) / t
        if prev is not None:
            scale = np.maximum(np.abs(cur), np.abs(prev))
            if np.all(np.abs(cur - prev) <= am.rel_tol * (scale + 1e-300)):
                return cur
        prev = cur
    raise LimitNotConverged("scaling limit did not converge over the t schedule")


def check_homogeneity(am: AsymptoticMapping, n_samples: int = 100, seed: int = 0) -> PropertyReport:
    """Sampled check of eval(alpha x) = alpha eval(x) for alpha in ]0, 10]."""
    rng = np.random.default_rng(seed)
    n = asymptotic_dim(am)
    xs = sample_domain_points(n, n_samples, rng)
    rel_tol = 1e-9 if isinstance(am, AnalyticLinear) else 10.0 * am.rel_tol
    violations = []
    for x in xs:
        alpha = rng.uniform(0.0, 10.0)
        if alpha == 0.0:
            alpha = 10.0
        lhs = asymptotic_apply(am, alpha * x)
        rhs = alpha * asymptotic_apply(am, x)
        if np.any(np.abs(lhs - rhs) > rel_tol * (1.0 + np.abs(rhs))):
            violations.append((x.copy(), alpha, lhs - rhs))
    return PropertyReport("positive_homogeneity", n_samples, tuple(violations))


def verify_convex_sup(mapping: Mapping, am: AsymptoticMapping,
                      n_samples: int = 200, seed: int = 0) -> PropertyReport:
    """For convex maps each increment T(x+d) - T(x) lies below the asymptotic
    value at d (the asymptotic function is the sup of increments)."""
    if not is_convex(mapping):
        raise ValueError("verify_convex_sup requires a convex mapping variant")
    rng = np.random.default_rng(seed)
    n = dim(mapping)
    xs = sample_domain_points(n, n_samples, rng)
    violations = []
    for x in xs:
        d = 10.0 ** rng.uniform(-3.0, 3.0, size=n) * rng.integers(0, 2, size=n)
        tx = apply_mapping(mapping, x)
        incr = apply_mapping(mapping, x + d) - tx
        bound = asymptotic_apply(am, d)
        tol = 1e-10 * (1.0 + float(np.max(np.abs(tx))))
        if np.any(incr > bound + tol):
            violations.append((x.copy(), d.copy(), incr - bound))
    return PropertyReport("convex_sup_characterization", n_samples, tuple(violations))


def verify_concave_inf(mapping: Mapping, am: AsymptoticMapping,
                       n_samples: int = 200, seed: int = 0) -> PropertyReport:
    """For concave maps each increment lies above the asymptotic value at d,
    and the gap closes as the base point grows (checked at x = 1e6 * ones)."""
    if not is_concave(mapping):
        raise ValueError("verify_concave_inf requires a concave mapping variant")
    rng = np.random.default_rng(seed)
    n = dim(mapping)
    xs = sample_domain_points(n, n_samples, rng)
    violations = []
    for x in xs:
        d = 10.0 ** rng.uniform(-3.0, 3.0, size=n) * rng.integers(0, 2, size=n)
        tx = apply_mapping(mapping, x)
        incr = apply_mapping(mapping, x + d) - tx
        bound = asymptotic_apply(am, d)
        tol = 1e-10 * (1.0 + float(np.max(np.abs(tx))))
        if np.any(incr < bound - tol):
            violations.append((x.copy(), d.copy(), incr - bound))
    # tail check: at a large base point the increments approach the infimum
    x_big = 1e6 * np.ones(n)
    d = np.ones(n)
    gap = apply_mapping(mapping, x_big + d) - apply_mapping(mapping, x_big) \
        - asymptotic_apply(am, d)
    gap_tol = 1e-3 * (1.0 + float(np.max(np.abs(asymptotic_apply(am, d)))))
    if np.any(np.abs(gap) > gap_tol):
        violations.append((x_big, d, gap))
    return PropertyReport("concave_inf_characterization", n_samples, tuple(violations))
