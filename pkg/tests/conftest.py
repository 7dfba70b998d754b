"""Shared oracles and generators for the test suite.

The matrix power-iteration oracle here is deliberately independent of the
library's spectral solvers: plain 500-step normalized multiplication, no
perturbation, no convergence test.
"""
import numpy as np


def power_iteration_rho(A, steps=500):
    """Dominant eigenvalue of a nonnegative matrix by brute-force iteration."""
    A = np.asarray(A, dtype=float)
    x = np.ones(A.shape[0])
    for _ in range(steps):
        y = A @ x
        m = np.max(y)
        if m == 0.0:
            return 0.0
        x = y / m
    return float(np.max(A @ x) / np.max(x))


def random_positive_matrix(rng, n, target_rho):
    """Random strictly positive (hence primitive) matrix scaled to target_rho."""
    A = rng.uniform(0.1, 1.0, size=(n, n))
    return A * (target_rho / power_iteration_rho(A))


def random_nonneg_matrix(rng, n, target_rho):
    """Random sparse-ish nonnegative matrix scaled to target_rho."""
    A = rng.uniform(0.0, 1.0, size=(n, n)) * (rng.random((n, n)) < 0.7)
    A += 0.01  # keep it irreducible so the scaling target is meaningful
    return A * (target_rho / power_iteration_rho(A))
