"""Spectral radius of asymptotic mappings and contraction certificates.

Two solvers are provided: the normalized (Krause) iteration, which is fast
when the map is concave and primitive, and an epsilon-perturbed normalized
iteration that only needs monotonicity and continuity and produces certified
upper bounds on the spectral radius for every perturbation level p.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotic import (AnalyticLinear, AsymptoticMapping, asymptotic_apply,
                         asymptotic_dim, build_asymptotic)
from .mappings import Mapping, PropertyReport, check_contractivity, is_convex
from .norms import Norm, SUP_NORM

DEFAULT_P_SCHEDULE = (1e2, 1e3, 1e4, 1e5)


class SpectralIterationError(RuntimeError):
    """Base class for spectral solver failures."""


class KrauseNotConverged(SpectralIterationError):
    """Normalized iteration hit max_iter without settling."""


class KrauseOscillation(KrauseNotConverged):
    """Period-2 oscillation detected; typical of non-primitive maps.
    Callers should switch to the epsilon-perturbed method."""


class ReducibleStructure(SpectralIterationError):
    """The computed eigenvector is not strictly positive, so no
    contraction modulus can be claimed."""


@dataclass(frozen=True)
class SpectralResult:
    rho: float
    eigenvector: np.ndarray        # unit norm in the chosen norm
    iterations: int
    residual: float                # ||T_inf(v) - rho v||
    method: str                    # "krause" or "epsilon"
    upper_bound_certified: bool
    p_estimates: tuple = field(default_factory=tuple)  # (p, estimate) pairs, epsilon method

    def to_kv_lines(self) -> list[str]:
        from . import textio
        lines = [
            f"method = {self.method}",
            f"rho = {textio.fmt(self.rho)}",
            f"iterations = {self.iterations}",
            f"residual = {textio.fmt(self.residual)}",
            f"upper_bound_certified = {str(self.upper_bound_certified).lower()}",
            f"eigenvector = {textio.fmt_vec(self.eigenvector)}",
        ]
        for p, est in self.p_estimates:
            lines.append(f"estimate_p_{textio.fmt(p)} = {textio.fmt(est)}")
        return lines


def krause_iteration(am: AsymptoticMapping, x1, norm: Norm = SUP_NORM,
                     tol: float = 1e-12, max_iter: int = 10_000) -> SpectralResult:
    """Normalized iteration x <- T_inf(x)/||T_inf(x)||.

    Converges to the eigenpair attaining the spectral radius when the map is
    concave and primitive.  Raises KrauseOscillation on detected period-2
    cycling and KrauseNotConverged when max_iter runs out; in both cases the
    epsilon method is the certified fallback.
    """
    x = np.asarray(x1, dtype=float)
    nx = norm(x)
    if nx <= 0:
        raise ValueError("x1 must be nonzero and nonnegative")
    x = x / nx
    prev = None  # x_{n-1}, for oscillation detection
    osc_run = 0
    for n in range(1, max_iter + 1):
        y = asymptotic_apply(am, x)
        ny = norm(y)
        if ny <= 0.0:
            raise KrauseNotConverged("iterate annihilated: ||T_inf(x)|| = 0")
        x_next = y / ny
        step = norm(x_next - x)
        if step < tol:
            rho = norm(asymptotic_apply(am, x_next))
            residual = norm(asymptotic_apply(am, x_next) - rho * x_next)
            return SpectralResult(rho=float(rho), eigenvector=x_next, iterations=n,
                                  residual=float(residual), method="krause",
                                  upper_bound_certified=False)
        if prev is not None and norm(x_next - prev) < tol and step >= 10.0 * tol:
            osc_run += 1
            if osc_run >= 5:
                raise KrauseOscillation("period-2 oscillation detected")
        else:
            osc_run = 0
        prev, x = x, x_next
    raise KrauseNotConverged(f"no convergence after {max_iter} iterations")


def default_epsilon(am: AsymptoticMapping) -> float:
    ones = np.ones(asymptotic_dim(am))
    # the systematic excess of the largest-p estimate over rho grows with
    # epsilon, so keep it small relative to the map's scale
    return 1e-4 * (1.0 + float(np.max(np.abs(asymptotic_apply(am, ones)))))


def epsilon_power_method(am: AsymptoticMapping, epsilon: float | None = None,
                         p_schedule=DEFAULT_P_SCHEDULE, norm: Norm = SUP_NORM,
                         tol: float = 1e-12, max_iter: int = 50_000) -> SpectralResult:
    """Spectral radius via the perturbed map T_eps(x) = T_inf(x) + eps * 1.

    For each p the iteration x <- p T_eps(x)/||T_eps(x)|| is run to its fixed
    point; ||T_eps(x_p)||/p is an upper bound on the spectral radius for every
    p and tends to it as p grows.  The returned rho is the final (largest-p)
    estimate, flagged as a certified upper bound.
    """
    if epsilon is None:
        epsilon = default_epsilon(am)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p_schedule = tuple(float(p) for p in p_schedule)
    if not p_schedule or any(p <= 0 for p in p_schedule):
        raise ValueError("p_schedule must be a nonempty list of positive scalars")
    n_dim = asymptotic_dim(am)
    x = np.ones(n_dim)
    estimates = []
    total_iters = 0
    for p in p_schedule:
        for _ in range(max_iter):
            y = asymptotic_apply(am, x) + epsilon
            x_next = p * y / norm(y)
            total_iters += 1
            if norm(x_next - x) <= tol * p:
                x = x_next
                break
            x = x_next
        else:
            raise SpectralIterationError(f"inner iteration did not converge for p={p}")
        t_eps = asymptotic_apply(am, x) + epsilon
        estimates.append((p, float(norm(t_eps) / p)))
    p_max, rho = estimates[-1]
    v = x / norm(x)
    residual = float(norm(asymptotic_apply(am, v) - rho * v))
    return SpectralResult(rho=rho, eigenvector=v, iterations=total_iters,
                          residual=residual, method="epsilon",
                          upper_bound_certified=True, p_estimates=tuple(estimates))


def solve_eigenpair(am: AsymptoticMapping, norm: Norm = SUP_NORM,
                    tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """rho and a unit eigenvector: Krause first, epsilon method as fallback."""
    res = solve_spectral(am, norm=norm, tol=tol)
    return res.rho, res.eigenvector


def solve_spectral(am: AsymptoticMapping, norm: Norm = SUP_NORM,
                   tol: float = 1e-12) -> SpectralResult:
    if isinstance(am, AnalyticLinear) and not np.any(am.matrix > 0):
        # zero map: rho = 0, any positive direction is as good as any other
        n = am.matrix.shape[0]
        v = np.ones(n) / norm(np.ones(n))
        return SpectralResult(rho=0.0, eigenvector=v, iterations=0, residual=0.0,
                              method="krause", upper_bound_certified=False)
    try:
        return krause_iteration(am, np.ones(asymptotic_dim(am)), norm=norm, tol=tol)
    except KrauseNotConverged:
        return epsilon_power_method(am, norm=norm, tol=tol)


@dataclass(frozen=True)
class ExistenceResult:
    exists: bool
    rho: float
    spectral: SpectralResult


def fixed_point_exists(mapping: Mapping, norm: Norm = SUP_NORM) -> ExistenceResult:
    """A standard interference mapping has a fixed point iff the spectral
    radius of its asymptotic mapping is strictly below one."""
    res = solve_spectral(build_asymptotic(mapping), norm=norm)
    return ExistenceResult(exists=res.rho < 1.0, rho=res.rho, spectral=res)


@dataclass(frozen=True)
class ContractionResult:
    contractive: bool
    rho: float
    c: float | None = None
    v: np.ndarray | None = None


def contraction_modulus(mapping: Mapping, norm: Norm = SUP_NORM) -> ContractionResult:
    """Smallest certified contraction modulus of a convex mapping.

    If rho < 1 the map is c-contractive for c = rho in the direction of the
    positive eigenvector; if rho >= 1 it is not contractive at all (for
    convex standard maps the condition is necessary too).
    """
    if not is_convex(mapping):
        raise ValueError("contraction_modulus requires a convex (affine-family) mapping")
    am = build_asymptotic(mapping)
    assert isinstance(am, AnalyticLinear)
    if not np.any(am.matrix > 0):
        # constant map: 0-contractive in any positive direction
        n = am.matrix.shape[0]
        return ContractionResult(contractive=True, rho=0.0, c=0.0, v=np.ones(n))
    res = solve_spectral(am, norm=norm)
    v = res.eigenvector
    if np.min(v) <= 1e-9 * np.max(v):
        raise ReducibleStructure("eigenvector is not strictly positive; "
                                 "no contraction modulus can be certified")
    if res.rho >= 1.0:
        return ContractionResult(contractive=False, rho=res.rho)
    return ContractionResult(contractive=True, rho=res.rho, c=res.rho, v=v)


def verify_rho_lower_bounds_modulus(mapping: Mapping, v, c: float,
                                    norm: Norm = SUP_NORM,
                                    n_samples: int = 100, seed: int = 0) -> PropertyReport:
    """Given a valid (v, c) contractivity certificate, the spectral radius of
    the asymptotic map can never exceed c.  Any failure here is a bug."""
    report = check_contractivity(mapping, v, c, n_samples=n_samples, seed=seed)
    if not report.passed:
        raise ValueError("(v, c) is not a valid contractivity certificate for this mapping")
    res = solve_spectral(build_asymptotic(mapping), norm=norm)
    violations = []
    if res.rho > c + 1e-9:
        violations.append(("rho_exceeds_modulus", res.rho, c))
    return PropertyReport("rho_lower_bounds_modulus", n_samples, tuple(violations))
