"""Interference mapping families and sampled property checkers.

The mapping set is closed on purpose: affine, concave composite
(Ax + diag(w) sqrt(x) + b), load coupling, and positive scalings of these.
A closed set lets the asymptotic and spectral machinery exploit analytic
structure instead of treating every map as a black box.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import textio, wireless


@dataclass(frozen=True)
class AffineMapping:
    """T(x) = A x + b with A >= 0 (entrywise) and b > 0."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        b = np.array(self.offset, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        if b.shape != (A.shape[0],):
            raise ValueError("offset dimension must match matrix")
        if np.any(A < 0):
            raise ValueError("matrix must be entrywise nonnegative")
        if np.any(b <= 0):
            raise ValueError("offset must be strictly positive")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)


@dataclass(frozen=True)
class ConcaveCompositeMapping:
    """T(x) = A x + diag(w) sqrt(x) + b, elementwise sqrt, A >= 0, w >= 0, b > 0."""

    matrix: np.ndarray
    offset: np.ndarray
    sqrt_weights: np.ndarray

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        b = np.array(self.offset, dtype=float)
        w = np.array(self.sqrt_weights, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        if b.shape != (A.shape[0],) or w.shape != (A.shape[0],):
            raise ValueError("offset/sqrt_weights dimensions must match matrix")
        if np.any(A < 0):
            raise ValueError("matrix must be entrywise nonnegative")
        if np.any(b <= 0):
            raise ValueError("offset must be strictly positive")
        if np.any(w < 0):
            raise ValueError("sqrt_weights must be nonnegative")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)
        object.__setattr__(self, "sqrt_weights", w)


@dataclass(frozen=True)
class LoadCouplingMapping:
    """The network load mapping of a snapshot (concave, standard)."""

    snapshot: wireless.NetworkSnapshot


@dataclass(frozen=True)
class ScaledMapping:
    """T'(x) = beta * T(x) for beta > 0."""

    inner: "Mapping"
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")


Mapping = Union[AffineMapping, ConcaveCompositeMapping, LoadCouplingMapping, ScaledMapping]


def dim(mapping: Mapping) -> int:
    if isinstance(mapping, (AffineMapping, ConcaveCompositeMapping)):
        return mapping.matrix.shape[0]
    if isinstance(mapping, LoadCouplingMapping):
        return mapping.snapshot.n_stations
    return dim(mapping.inner)


def apply_mapping(mapping: Mapping, x) -> np.ndarray:
    """Evaluate T(x).  Output is strictly positive for every valid variant."""
    x = np.asarray(x, dtype=float)
    if x.shape != (dim(mapping),):
        raise ValueError(f"expected dim {dim(mapping)}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input has non-finite entries")
    if np.any(x < 0):
        raise ValueError("input must be nonnegative")
    if isinstance(mapping, AffineMapping):
        return mapping.matrix @ x + mapping.offset
    if isinstance(mapping, ConcaveCompositeMapping):
        return mapping.matrix @ x + mapping.sqrt_weights * np.sqrt(x) + mapping.offset
    if isinstance(mapping, LoadCouplingMapping):
        return wireless.load_apply(mapping.snapshot, x)
    return mapping.beta * apply_mapping(mapping.inner, x)


def scale_mapping(mapping: Mapping, beta: float) -> ScaledMapping:
    if not beta > 0:
        raise ValueError("beta must be positive")
    return ScaledMapping(inner=mapping, beta=beta)


def is_convex(mapping: Mapping) -> bool:
    """True for the shipped variants whose coordinates are convex (affine)."""
    if isinstance(mapping, AffineMapping):
        return True
    if isinstance(mapping, ScaledMapping):
        return is_convex(mapping.inner)
    return False


def is_concave(mapping: Mapping) -> bool:
    """All shipped variants are concave; affine maps are both."""
    return True


# ---------------------------------------------------------------------------
# property reports and sampling

@dataclass(frozen=True)
class PropertyReport:
    property_name: str
    samples_tested: int
    violations: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return len(self.violations) == 0


def sample_domain_points(n_dim: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Sample points of the nonnegative orthant for property checking.

    The first points are the origin and the unit axis vectors; the rest
    have entries drawn log-uniform on [1e-3, 1e3].  Interference functions
    vary over decades, so uniform sampling would miss the small-x regime.
    """
    fixed = np.vstack([np.zeros(n_dim), np.eye(n_dim)])[:n_samples]
    n_rand = n_samples - fixed.shape[0]
    if n_rand <= 0:
        return fixed
    rand = 10.0 ** rng.uniform(-3.0, 3.0, size=(n_rand, n_dim))
    return np.vstack([fixed, rand])


def check_monotonicity(mapping: Mapping, n_samples: int = 100, seed: int = 0) -> PropertyReport:
    """Sampled check of x >= y => T(x) >= T(y)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    n = dim(mapping)
    ys = sample_domain_points(n, n_samples, rng)
    violations = []
    for y in ys:
        x = y + 10.0 ** rng.uniform(-3.0, 3.0, size=n) * rng.integers(0, 2, size=n)
        diff = apply_mapping(mapping, x) - apply_mapping(mapping, y)
        if np.any(diff < -1e-12):
            violations.append((x.copy(), y.copy(), diff.copy()))
    return PropertyReport("monotonicity", n_samples, tuple(violations))


def check_scalability(mapping: Mapping, n_samples: int = 100, seed: int = 0) -> PropertyReport:
    """Sampled check of alpha T(x) > T(alpha x) for alpha > 1 (strict, zero slack)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    n = dim(mapping)
    xs = sample_domain_points(n, n_samples, rng)
    violations = []
    for x in xs:
        alpha = rng.uniform(1.0, 10.0)
        if alpha == 1.0:  # open interval ]1, 10]
            alpha = 10.0
        lhs = alpha * apply_mapping(mapping, x)
        rhs = apply_mapping(mapping, alpha * x)
        # a floating-point tie counts as a violation: the definition is strict
        if not np.all(lhs > rhs):
            violations.append((x.copy(), alpha, lhs - rhs))
    return PropertyReport("scalability", n_samples, tuple(violations))


def check_contractivity(mapping: Mapping, v, c: float,
                        n_samples: int = 100, seed: int = 0) -> PropertyReport:
    """Sampled check of T(x + eps v) <= T(x) + c eps v for the given (v, c)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("direction v must be strictly positive")
    if not 0.0 <= c < 1.0:
        raise ValueError("modulus c must lie in [0, 1[")
    rng = np.random.default_rng(seed)
    n = dim(mapping)
    xs = sample_domain_points(n, n_samples, rng)
    violations = []
    for x in xs:
        eps = rng.uniform(0.0, 100.0)
        if eps == 0.0:
            eps = 100.0
        tx = apply_mapping(mapping, x)
        lhs = apply_mapping(mapping, x + eps * v)
        rhs = tx + c * eps * v
        tol = 1e-10 * (1.0 + float(np.max(np.abs(tx))))
        if np.any(lhs > rhs + tol):
            violations.append((x.copy(), eps, lhs - rhs))
    return PropertyReport("contractivity", n_samples, tuple(violations))


# ---------------------------------------------------------------------------
# serialization (docs/schemas/mapping.schema)

_VARIANT_NAMES = {
    AffineMapping: "affine",
    ConcaveCompositeMapping: "concave_composite",
    LoadCouplingMapping: "load_coupling",
    ScaledMapping: "scaled",
}


def _mapping_lines(mapping: Mapping, prefix: str, snapshot_path: str | None) -> list[str]:
    lines = []
    if prefix:
        lines.append(f"[{prefix}]")
    lines.append(f"variant = {_VARIANT_NAMES[type(mapping)]}")
    if isinstance(mapping, (AffineMapping, ConcaveCompositeMapping)):
        lines.append(f"matrix = {textio.fmt_matrix(mapping.matrix)}")
        lines.append(f"offset = {textio.fmt_vec(mapping.offset)}")
        if isinstance(mapping, ConcaveCompositeMapping):
            lines.append(f"sqrt_weights = {textio.fmt_vec(mapping.sqrt_weights)}")
    elif isinstance(mapping, LoadCouplingMapping):
        if snapshot_path is None:
            raise ValueError("saving a load_coupling mapping needs snapshot_path")
        lines.append(f"snapshot_path = {snapshot_path}")
    else:
        lines.append(f"beta = {textio.fmt(mapping.beta)}")
        child = f"{prefix}.inner" if prefix else "inner"
        lines += _mapping_lines(mapping.inner, child, snapshot_path)
    return lines


def save_mapping(mapping: Mapping, path, snapshot_path: str | None = None) -> None:
    """Write a mapping file.  A LoadCoupling snapshot is saved alongside it
    (at snapshot_path, relative to the mapping file) and referenced by path."""
    inner = mapping
    while isinstance(inner, ScaledMapping):
        inner = inner.inner
    if isinstance(inner, LoadCouplingMapping) and snapshot_path is not None:
        wireless.save_snapshot(inner.snapshot,
                               os.path.join(os.path.dirname(str(path)) or ".", snapshot_path))
    with open(path, "w") as fh:
        fh.write("\n".join(_mapping_lines(mapping, "", snapshot_path)) + "\n")


def _mapping_from_kv(kv: dict[str, str], sections: dict[str, list[str]],
                     prefix: str, base_dir: str) -> Mapping:
    variant = kv.get("variant")
    if variant == "affine":
        return AffineMapping(np.array(textio.parse_matrix(kv["matrix"])),
                             np.array(textio.parse_floats(kv["offset"])))
    if variant == "concave_composite":
        return ConcaveCompositeMapping(np.array(textio.parse_matrix(kv["matrix"])),
                                       np.array(textio.parse_floats(kv["offset"])),
                                       np.array(textio.parse_floats(kv["sqrt_weights"])))
    if variant == "load_coupling":
        snap = wireless.load_snapshot(os.path.join(base_dir, kv["snapshot_path"]))
        return LoadCouplingMapping(snap)
    if variant == "scaled":
        child = f"{prefix}.inner" if prefix else "inner"
        if child not in sections:
            raise ValueError(f"scaled mapping missing [{child}] section")
        inner = _mapping_from_kv(textio.parse_kv(sections[child]), sections, child, base_dir)
        return ScaledMapping(inner, float(kv["beta"]))
    raise ValueError(f"unknown mapping variant {variant!r}")


def load_mapping(path) -> Mapping:
    with open(path) as fh:
        sections = textio.read_sections(fh.read())
    base_dir = os.path.dirname(str(path)) or "."
    return _mapping_from_kv(textio.parse_kv(sections[""]), sections, "", base_dir)
