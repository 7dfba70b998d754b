import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifp import (AffineMapping, ConcaveCompositeMapping, ScaledMapping, StopRule,
                 SUP_NORM, apply_mapping, build_asymptotic, concave_lower_bound,
                 fit_geometric_rate, fixed_point_iterate, max_epsilon, trace_to_csv,
                 upper_bound_curve, verify_sandwich, weighted_sup)
from ifp.solver import bound_constant_B, read_trace_csv
from ifp.spectral import solve_eigenpair

A22 = np.array([[0.0, 0.5], [0.5, 0.0]])
SYM = np.array([[0.2, 0.5], [0.5, 0.2]])


def test_iterate_converges_to_linear_solve_fixed_point():
    m = AffineMapping(A22, np.ones(2))
    x_star = np.linalg.solve(np.eye(2) - A22, np.ones(2))
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-9), x_star=x_star)
    assert trace.converged and not trace.diverged
    assert np.allclose(trace.iterates[-1], [2.0, 2.0], atol=1e-8)
    assert trace.errors[-1] < 1e-8


def test_iterate_stationary_at_fixed_point():
    m = AffineMapping(A22, np.ones(2))
    trace = fixed_point_iterate(m, np.array([2.0, 2.0]), StopRule(tol=1e-9))
    assert trace.converged
    assert len(trace.residuals) == 1 and trace.residuals[0] == 0.0


def test_iterate_flags_divergence_when_rho_exceeds_one():
    m = ScaledMapping(AffineMapping(SYM, np.ones(2)), 2.0)  # rho = 1.4
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-9, max_iter=5000))
    assert trace.diverged and not trace.converged


def test_monotone_trajectory_from_zero():
    m = ConcaveCompositeMapping(SYM, np.ones(2), np.ones(2))
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-12))
    x_star = trace.iterates[-1]
    for a, b in zip(trace.iterates, trace.iterates[1:]):
        assert np.all(b >= a)
        assert np.all(a <= x_star + 1e-12)


def test_upper_bound_curve_values():
    assert upper_bound_curve(0.5, 1.0, 4.0, 3).values[2] == pytest.approx(1.0)
    assert upper_bound_curve(0.5, 2.0, 4.0, 1).values[0] == pytest.approx(8.0)
    assert upper_bound_curve(0.7, 1.0, 2.0, 11).values[10] == pytest.approx(2 * 0.7**10)
    with pytest.raises(ValueError):
        upper_bound_curve(1.0, 1.0, 1.0, 5)


def test_concave_lower_bound_values():
    assert concave_lower_bound(0.7, 1.5, [2.0], SUP_NORM, 2).values[1] == pytest.approx(1.47)
    assert all(v == 0.0 for v in concave_lower_bound(0.0, 1.0, [1.0], SUP_NORM, 5).values)
    b = concave_lower_bound(0.99, 1.0, [1.0], SUP_NORM, 100)
    assert b.values[99] == pytest.approx(0.99**100)
    assert b.values[99] == pytest.approx(0.36603, abs=1e-5)


def test_max_epsilon_examples():
    assert max_epsilon([2.0, 3.0], [1.0, 2.0]) == pytest.approx(1.5)
    assert max_epsilon([2.0, 3.0], [1.0, 0.0]) == pytest.approx(2.0)
    assert max_epsilon([2.0, 3.0], [2.0, 3.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        max_epsilon([2.0, 3.0], [0.0, 0.0])


@settings(deadline=None)
@given(st.lists(st.floats(0.1, 1e3), min_size=3, max_size=3),
       st.lists(st.floats(0.0, 10.0), min_size=3, max_size=3))
def test_max_epsilon_touches_the_boundary(x_star, v):
    x_star, v = np.array(x_star), np.array(v)
    if not np.any(v > 0):
        return
    eps = max_epsilon(x_star, v)
    rest = x_star - eps * v
    assert np.all(rest >= -1e-9 * np.max(x_star))
    assert np.min(np.abs(rest[v > 0])) <= 1e-9 * np.max(x_star)


@settings(deadline=None)
@given(st.floats(0.0, 0.999), st.floats(0.01, 10.0), st.integers(2, 50))
def test_upper_bound_curve_is_nonincreasing(c, dist0, n_max):
    vals = upper_bound_curve(c, 1.0, dist0, n_max).values
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_sandwich_concave_composite():
    m = ConcaveCompositeMapping(SYM, np.ones(2), np.ones(2))
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-13))
    x_star = trace.iterates[-1]
    rho, v = solve_eigenpair(build_asymptotic(m))
    eps = max_epsilon(x_star, v)
    assert verify_sandwich(m, x_star, v, rho, eps, n_max=100).passed


def test_sandwich_affine_equality():
    # affine case: T^n(x* +/- eps v) - x* = +/- rho^n eps v exactly
    m = AffineMapping(SYM, np.ones(2))
    x_star = np.linalg.solve(np.eye(2) - SYM, np.ones(2))
    v = np.ones(2)
    eps = 0.5 * max_epsilon(x_star, v)
    assert verify_sandwich(m, x_star, v, 0.7, eps, n_max=50).passed
    up = x_star + eps * v
    for n in range(1, 20):
        up = apply_mapping(m, up)
        assert np.allclose(up - x_star, 0.7**n * eps * v, rtol=1e-10)


def test_sandwich_precondition():
    m = AffineMapping(SYM, np.ones(2))
    x_star = np.linalg.solve(np.eye(2) - SYM, np.ones(2))
    with pytest.raises(ValueError):
        verify_sandwich(m, x_star, np.ones(2), 0.7, 10 * np.max(x_star))


def test_error_lower_bound_from_perturbed_start():
    m = ConcaveCompositeMapping(SYM, np.ones(2), np.ones(2))
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-13))
    x_star = trace.iterates[-1]
    rho, v = solve_eigenpair(build_asymptotic(m))
    eps = max_epsilon(x_star, v)
    run = fixed_point_iterate(m, x_star - eps * v, StopRule(tol=1e-15, max_iter=200),
                              x_star=x_star)
    bound = concave_lower_bound(rho, eps, v, SUP_NORM, 200)
    floor = 1e-12 * SUP_NORM(x_star)
    for n in range(1, len(run.errors)):
        if run.errors[n] > floor:
            assert bound.values[n - 1] <= run.errors[n] * (1 + 1e-12)


def test_upper_bound_holds_in_weighted_norm():
    m = AffineMapping(SYM, np.ones(2))
    from ifp import contraction_modulus
    cert = contraction_modulus(m)
    norm = weighted_sup(cert.v)
    assert bound_constant_B(norm, cert.v) == 1.0
    x_star = np.linalg.solve(np.eye(2) - SYM, np.ones(2))
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-12), norm=norm,
                                x_star=x_star)
    env = upper_bound_curve(cert.c, 1.0, trace.errors[0], len(trace.iterates))
    # slack absorbs rounding accumulated in c**n over the run
    for n, err in enumerate(trace.errors):
        assert err <= env.values[n] * (1 + 1e-6) + 1e-12


def test_fit_recovers_synthetic_geometric_sequence():
    errors = tuple(0.8**n * 5.0 for n in range(40))
    iterates = tuple(np.array([e, e]) for e in errors)
    from ifp.solver import IterationTrace
    trace = IterationTrace(iterates=iterates,
                           residuals=tuple(0.0 for _ in range(39)),
                           errors=errors, converged=True, diverged=False,
                           norm=SUP_NORM)
    fit = fit_geometric_rate(trace)
    assert fit.c_hat == pytest.approx(0.8, rel=1e-10)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_recovers_dominant_eigenvalue():
    A = np.array([[0.25, 0.25], [0.25, 0.25]])  # rho exactly 0.5
    m = AffineMapping(A, np.ones(2))
    x_star = np.linalg.solve(np.eye(2) - A, np.ones(2))
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-11), x_star=x_star)
    fit = fit_geometric_rate(trace)
    assert 0.475 <= fit.c_hat <= 0.525


def test_fit_requires_usable_points():
    m = AffineMapping(A22, np.ones(2))
    trace = fixed_point_iterate(m, np.array([2.0, 2.0]), StopRule(tol=1e-9),
                                x_star=np.array([2.0, 2.0]))
    with pytest.raises(ValueError):
        fit_geometric_rate(trace)


def test_trace_csv_roundtrip(tmp_path):
    m = AffineMapping(SYM, np.ones(2))
    x_star = np.linalg.solve(np.eye(2) - SYM, np.ones(2))
    trace = fixed_point_iterate(m, np.zeros(2), StopRule(tol=1e-10), x_star=x_star)
    lower = concave_lower_bound(0.7, 1.0, np.ones(2), SUP_NORM, 10)
    path = tmp_path / "trace.csv"
    trace_to_csv(trace, path, lower=lower)
    cols = read_trace_csv(path)
    assert cols["n"][0] == 1
    assert cols["residual"][:len(trace.residuals)] == pytest.approx(list(trace.residuals))
    assert cols["error"] == pytest.approx(list(trace.errors))
    assert cols["residual"][-1] is None          # one fewer residual than iterates
    assert cols["upper_bound"][0] is None
    assert cols["lower_bound"][:10] == pytest.approx(list(lower.values))
