"""Monotone norms on the nonnegative orthant.

All norms here satisfy 0 <= x <= y (coordinatewise) => ||x|| <= ||y||,
which is the property the iteration theory relies on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Norm:
    """A monotone norm: sup norm, 1-norm, or a weighted sup norm.

    The weighted sup norm ||x||_v = max_i |x_i| / v_i needs a strictly
    positive weight vector v.
    """

    kind: str
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("sup", "one", "weighted_sup"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "weighted_sup":
            if self.weights is None:
                raise ValueError("weighted_sup norm needs a weight vector")
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or w.size == 0 or np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise ValueError("weighted_sup weights must be a finite positive vector")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValueError(f"norm kind {self.kind!r} takes no weights")

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "one":
            return float(np.sum(np.abs(x)))
        if self.kind == "weighted_sup":
            return float(np.max(np.abs(x) / self.weights))
        return float(np.max(np.abs(x)))


SUP_NORM = Norm("sup")
ONE_NORM = Norm("one")


def weighted_sup(v) -> Norm:
    """Weighted sup norm ||x||_v = max_i |x_i|/v_i for v > 0."""
    return Norm("weighted_sup", np.asarray(v, dtype=float))


def norm_from_name(name: str) -> Norm:
    """Resolve a norm given its config-file name ('sup' or 'one')."""
    if name == "sup":
        return SUP_NORM
    if name == "one":
        return ONE_NORM
    raise ValueError(f"unknown norm name {name!r} (expected 'sup' or 'one')")
