"""The standard fixed-point iteration, its traces, and rate bounds.

The iteration x_{n+1} = T(x_n) is recorded in full; when the fixed point is
known the error curve is filled in, a geometric upper bound (for contractive
maps) and a geometric lower bound (for concave maps, from the spectral radius
of the asymptotic map) can be attached, and an empirical rate is fitted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import textio
from .mappings import Mapping, PropertyReport, apply_mapping, dim
from .norms import Norm, SUP_NORM


@dataclass(frozen=True)
class StopRule:
    tol: float = 1e-10
    max_iter: int = 100_000

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


@dataclass(frozen=True)
class IterationTrace:
    """Record of one fixed-point run.

    iterates[0] is the initial point; residuals[k] = ||iterates[k+1] - iterates[k]||.
    errors (when a reference fixed point was supplied) has one entry per iterate.
    """

    iterates: tuple
    residuals: tuple
    errors: tuple | None
    converged: bool
    diverged: bool
    norm: Norm

    def __post_init__(self):
        if len(self.residuals) != len(self.iterates) - 1:
            raise ValueError("need exactly one residual per step")
        if self.errors is not None and len(self.errors) != len(self.iterates):
            raise ValueError("need one error per iterate")


@dataclass(frozen=True)
class RateBound:
    """Geometric envelope, indexed by iteration n = 1 .. n_max.

    kind "upper": values[n-1] = c^(n-1) * B * dist0 (error of the n-th iterate).
    kind "lower": values[n-1] = rho^n * epsilon * ||v|| (error after n applications).
    """

    kind: str
    values: tuple
    params: dict


def fixed_point_iterate(mapping: Mapping, x1, stop: StopRule,
                        norm: Norm = SUP_NORM, x_star=None) -> IterationTrace:
    """Iterate x <- T(x) until the stop rule triggers.

    Divergence is flagged (never silent) when residuals grow for 50
    consecutive steps and the iterate norm passes 1e12; expected whenever
    the asymptotic spectral radius is >= 1.
    """
    x = np.asarray(x1, dtype=float)
    if x.shape != (dim(mapping),):
        raise ValueError("x1 dimension mismatch")
    x_star = None if x_star is None else np.asarray(x_star, dtype=float)
    iterates = [x]
    residuals: list[float] = []
    errors = None if x_star is None else [float(norm(x - x_star))]
    converged = diverged = False
    grow_run = 0
    prev_res = np.inf
    for _ in range(stop.max_iter):
        x_next = apply_mapping(mapping, x)
        res = float(norm(x_next - x))
        iterates.append(x_next)
        residuals.append(res)
        if errors is not None:
            errors.append(float(norm(x_next - x_star)))
        if res < stop.tol:
            converged = True
            break
        grow_run = grow_run + 1 if res > prev_res else 0
        if grow_run >= 50 and norm(x_next) > 1e12:
            diverged = True
            break
        prev_res = res
        x = x_next
    return IterationTrace(iterates=tuple(iterates), residuals=tuple(residuals),
                          errors=None if errors is None else tuple(errors),
                          converged=converged, diverged=diverged, norm=norm)


def upper_bound_curve(c: float, B: float, dist0: float, n_max: int) -> RateBound:
    """Geometric upper envelope c^(n-1) B ||x_1 - x*|| for n = 1 .. n_max."""
    if not 0.0 <= c < 1.0:
        raise ValueError("c must lie in [0, 1[")
    if B <= 0 or dist0 < 0 or n_max < 1:
        raise ValueError("need B > 0, dist0 >= 0, n_max >= 1")
    n = np.arange(1, n_max + 1)
    return RateBound("upper", tuple(c ** (n - 1) * B * dist0), {"c": c, "B": B, "dist0": dist0})


def concave_lower_bound(rho: float, epsilon: float, v, norm: Norm, n_max: int) -> RateBound:
    """Geometric lower envelope rho^n eps ||v|| for n = 1 .. n_max."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1[")
    if epsilon <= 0 or n_max < 1:
        raise ValueError("need epsilon > 0 and n_max >= 1")
    v_norm = float(norm(np.asarray(v, dtype=float)))
    n = np.arange(1, n_max + 1)
    return RateBound("lower", tuple(rho ** n * epsilon * v_norm),
                     {"rho": rho, "epsilon": epsilon, "v_norm": v_norm})


def max_epsilon(x_star, v) -> float:
    """Largest eps with x* - eps v still in the nonnegative orthant."""
    x_star = np.asarray(x_star, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(x_star <= 0):
        raise ValueError("x_star must be strictly positive")
    if np.any(v < 0) or not np.any(v > 0):
        raise ValueError("v must be nonnegative and nonzero")
    mask = v > 0
    with np.errstate(over="ignore"):
        # subnormal v entries may overflow the quotient; inf never attains the min
        return float(np.min(x_star[mask] / v[mask]))


def bound_constant_B(norm: Norm, v) -> float:
    """The constant B of the geometric upper bound for a given norm.

    In the weighted sup norm with weights v the contractivity inequality
    telescopes with B = 1.  For other norms we fall back to norm equivalence,
    which gives the sufficient (not tight) value max(v)/min(v).
    """
    v = np.asarray(v, dtype=float)
    if norm.kind == "weighted_sup" and norm.weights is not None \
            and norm.weights.shape == v.shape and np.allclose(norm.weights, v):
        return 1.0
    return float(np.max(v) / np.min(v))


def verify_sandwich(mapping: Mapping, x_star, v, rho: float, epsilon: float,
                    n_max: int = 100) -> PropertyReport:
    """Check the concave-map displacement inequalities along an eigendirection.

    From x* + eps v: T^n stays >= x* + rho^n eps v.
    From x* - eps v (requires x* >= eps v): T^n stays <= x* - rho^n eps v.
    Together the iterates sandwich the fixed point at geometric speed no
    better than rho, which is what forces the error lower bound.
    """
    x_star = np.asarray(x_star, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(x_star - epsilon * v < -1e-15 * np.max(x_star)):
        raise ValueError("precondition x* >= eps v violated")
    slack = 1e-9 * (1.0 + float(np.max(np.abs(x_star))))
    up = x_star + epsilon * v
    down = np.maximum(x_star - epsilon * v, 0.0)  # clip the one rounding-negative coord
    violations = []
    for n in range(1, n_max + 1):
        up = apply_mapping(mapping, up)
        down = apply_mapping(mapping, down)
        shift = rho ** n * epsilon * v
        if np.any(up < x_star + shift - slack):
            violations.append(("above", n, up - (x_star + shift)))
        if np.any(down > x_star - shift + slack):
            violations.append(("below", n, down - (x_star - shift)))
    return PropertyReport("concave_sandwich", n_max, tuple(violations))


@dataclass(frozen=True)
class RateFit:
    c_hat: float
    r_squared: float


def fit_geometric_rate(trace: IterationTrace) -> RateFit:
    """Fit log(error) vs n by least squares over the tail half of the trace.

    Errors at or below the double-precision plateau are excluded first; at
    least 5 usable points are required.
    """
    if trace.errors is None:
        raise ValueError("trace has no error curve; supply x_star when iterating")
    errors = np.asarray(trace.errors, dtype=float)
    floor = 1e-12 * (1.0 + float(trace.norm(trace.iterates[-1])))
    usable = np.flatnonzero(errors > floor)
    if usable.size < 5:
        raise ValueError("insufficient usable points: trace already at the rounding floor")
    tail = usable[usable.size // 2:]
    slope, intercept = np.polyfit(tail, np.log(errors[tail]), 1)
    pred = slope * tail + intercept
    log_err = np.log(errors[tail])
    ss_res = float(np.sum((log_err - pred) ** 2))
    ss_tot = float(np.sum((log_err - np.mean(log_err)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(c_hat=float(np.exp(slope)), r_squared=r2)


# ---------------------------------------------------------------------------
# CSV export: columns n, residual, error, lower_bound, upper_bound

def trace_to_csv(trace: IterationTrace, path, lower: RateBound | None = None,
                 upper: RateBound | None = None) -> None:
    """One row per iterate (n starts at 1); empty fields where undefined."""
    def cell(seq, idx):
        if seq is None or idx >= len(seq):
            return ""
        return textio.fmt(seq[idx])

    rows = ["n,residual,error,lower_bound,upper_bound"]
    for k in range(len(trace.iterates)):
        rows.append(",".join([
            str(k + 1),
            cell(trace.residuals, k),
            cell(trace.errors, k),
            cell(lower.values if lower else None, k),
            cell(upper.values if upper else None, k),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")


def read_trace_csv(path) -> dict[str, list[float | None]]:
    """Re-parse a trace CSV into columns (None for empty cells)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    cols: dict[str, list[float | None]] = {name: [] for name in header}
    for line in lines[1:]:
        for name, tok in zip(header, line.split(",")):
            cols[name].append(float(tok) if tok else None)
    return cols
