"""Command-line front end.

Subcommands:
  ifp solve    --config CFG [--out DIR] [--seed N]   fixed-point run + trace.csv
  ifp spectral --config CFG [--out DIR] [--seed N]   spectral radius + spectral.csv
  ifp fig1     --config CFG [--out DIR] [--seed N]   load-coupling rate experiment

Config files use the same structured text format as the mapping/snapshot
schemas (key = value lines).  IFP_LOG in {error, info, debug} controls
verbosity.  Exit codes: 0 ok, 2 config error, 3 divergence, 4 solver
non-convergence, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import textio, wireless
from .asymptotic import build_asymptotic
from .mappings import load_mapping, scale_mapping, LoadCouplingMapping
from .norms import norm_from_name, SUP_NORM
from .solver import (StopRule, concave_lower_bound, fit_geometric_rate,
                     fixed_point_iterate, max_epsilon, trace_to_csv)
from .spectral import SpectralIterationError, solve_eigenpair, solve_spectral

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_NOCONV = 4
EXIT_IO = 5

log = logging.getLogger("ifp")


class ConfigError(ValueError):
    pass


def _read_config(path) -> dict[str, str]:
    try:
        with open(path) as fh:
            return textio.parse_kv(textio.read_sections(fh.read())[""])
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc


def _get(cfg: dict[str, str], key: str, default=None, cast=str):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing config key {key!r}")
        return default
    try:
        return cast(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {cfg[key]!r}") from exc


def _load_cfg_mapping(cfg: dict[str, str], cfg_path: str):
    rel = _get(cfg, "mapping_path")
    path = os.path.join(os.path.dirname(cfg_path) or ".", rel)
    try:
        return load_mapping(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load mapping {path}: {exc}") from exc


def cmd_solve(cfg_path: str, out_dir: str, seed: int) -> int:
    cfg = _read_config(cfg_path)
    mapping = _load_cfg_mapping(cfg, cfg_path)
    norm = norm_from_name(_get(cfg, "norm", "sup"))
    stop = StopRule(tol=_get(cfg, "tol", 1e-10, float),
                    max_iter=_get(cfg, "max_iter", 100_000, int))
    from .mappings import dim as mdim
    n = mdim(mapping)
    x1 = np.array(_get(cfg, "x1", [0.0] * n, textio.parse_floats))
    if x1.shape != (n,):
        raise ConfigError("x1 dimension does not match the mapping")

    # reference fixed point from a tighter oracle run, for the error column
    oracle = fixed_point_iterate(mapping, x1, StopRule(tol=1e-13, max_iter=stop.max_iter * 10),
                                 norm=norm)
    if oracle.diverged:
        log.error("fixed-point iteration diverged (asymptotic spectral radius >= 1?)")
        return EXIT_DIVERGED
    x_star = oracle.iterates[-1]
    trace = fixed_point_iterate(mapping, x1, stop, norm=norm, x_star=x_star)
    if trace.diverged:
        log.error("fixed-point iteration diverged")
        return EXIT_DIVERGED
    if not trace.converged:
        log.error("no convergence within max_iter=%d", stop.max_iter)
        return EXIT_NOCONV

    trace_to_csv(trace, os.path.join(out_dir, "trace.csv"))
    lines = [f"x_star = {textio.fmt_vec(x_star)}",
             f"iterations = {len(trace.iterates) - 1}",
             f"converged = {str(trace.converged).lower()}"]
    try:
        fit = fit_geometric_rate(trace)
        lines += [f"fitted_rate = {textio.fmt(fit.c_hat)}",
                  f"fit_r_squared = {textio.fmt(fit.r_squared)}"]
    except ValueError:
        lines.append("fitted_rate = ")  # trace too short or at rounding floor
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    log.info("solve: %d iterations, x* written to summary.txt", len(trace.iterates) - 1)
    return EXIT_OK


def cmd_spectral(cfg_path: str, out_dir: str, seed: int) -> int:
    cfg = _read_config(cfg_path)
    mapping = _load_cfg_mapping(cfg, cfg_path)
    norm = norm_from_name(_get(cfg, "norm", "sup"))
    tol = _get(cfg, "tol", 1e-12, float)
    try:
        result = solve_spectral(build_asymptotic(mapping), norm=norm, tol=tol)
    except SpectralIterationError as exc:
        log.error("spectral solve failed: %s", exc)
        with open(os.path.join(out_dir, "spectral.csv"), "w") as fh:
            fh.write("key,value\nerror,non-convergence\n")
        return EXIT_NOCONV
    rows = ["key,value"]
    for line in result.to_kv_lines():
        key, _, value = line.partition("=")
        rows.append(f"{key.strip()},{value.strip()}")
    with open(os.path.join(out_dir, "spectral.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")
    log.info("spectral: rho = %.12g via %s", result.rho, result.method)
    return EXIT_OK


def _fig1_leg(mapping, rho: float, v, norm, tol_error: float, max_iter: int):
    """One target-rho leg: oracle x*, eps selection, FPI from 0, error rows."""
    n = len(v)
    oracle = fixed_point_iterate(mapping, np.zeros(n),
                                 StopRule(tol=1e-13, max_iter=max_iter), norm=norm)
    if not oracle.converged:
        raise SpectralIterationError("oracle run did not converge")
    x_star = oracle.iterates[-1]
    eps = max_epsilon(x_star, v)
    bound = concave_lower_bound(rho, eps, v, norm, n_max=max_iter)
    errors = []
    x = np.zeros(n)
    from .mappings import apply_mapping
    for k in range(1, max_iter + 1):
        x = apply_mapping(mapping, x)
        err = float(np.linalg.norm(x - x_star))
        errors.append(err)
        if err <= tol_error:
            break
    else:
        raise SpectralIterationError("fig1 leg did not reach the target error")
    return x_star, eps, errors, bound.values[:len(errors)]


def cmd_fig1(cfg_path: str, out_dir: str, seed: int) -> int:
    cfg = _read_config(cfg_path)
    snap_cfg = wireless.SnapshotConfig(
        n_stations=_get(cfg, "n_stations", 9, int),
        users_per_station=_get(cfg, "users_per_station", 8, int),
        demand_bps=_get(cfg, "demand_bps", 300e3, float),
        area_m=_get(cfg, "area_m", 1500.0, float),
        pathloss_exponent=_get(cfg, "pathloss_exponent", 3.7, float),
        k_blocks=_get(cfg, "k_blocks", 100, int),
        block_bandwidth_hz=_get(cfg, "block_bandwidth_hz", 180e3, float),
        power_w=_get(cfg, "power_w", 1.0, float),
        noise_w=_get(cfg, "noise_w", 1e-12, float),
    )
    targets = _get(cfg, "target_rho", [0.5, 0.99], textio.parse_floats)
    if any(not 0.0 < t < 1.0 for t in targets):
        raise ConfigError("every target_rho must lie in ]0, 1[ (>= 1 is infeasible)")
    tol_error = _get(cfg, "tol_error", 1e-6, float)
    max_iter = _get(cfg, "max_iter", 200_000, int)
    seed = _get(cfg, "seed", seed, int)

    snapshot = wireless.generate_snapshot(snap_cfg, seed)
    base = LoadCouplingMapping(snapshot)
    am = wireless.asymptotic_load(snapshot)
    rho_base, v = solve_eigenpair(am, SUP_NORM)
    log.info("fig1: snapshot rho = %.6g", rho_base)

    combined = ["rho,n,error_l2,lower_bound"]
    for target in targets:
        beta = target / rho_base
        mapping = scale_mapping(base, beta)
        x_star, eps, errors, bound = _fig1_leg(mapping, target, v, SUP_NORM,
                                               tol_error, max_iter)
        # machine check of the lower bound before anything is reported
        for err, lb in zip(errors, bound):
            if lb > err + 1e-12 * (1.0 + err):
                log.error("lower bound exceeds error at target rho %g", target)
                return EXIT_NOCONV
        label = repr(float(target))  # shortest round-trip decimal
        name = f"fig1_rho_{label}.csv"
        rows = ["n,error_l2,lower_bound"]
        for k, (err, lb) in enumerate(zip(errors, bound), start=1):
            rows.append(f"{k},{textio.fmt(err)},{textio.fmt(lb)}")
            combined.append(f"{label},{k},{textio.fmt(err)},{textio.fmt(lb)}")
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write("\n".join(rows) + "\n")
        log.info("fig1: target rho %g -> %d iterations (beta = %.6g)",
                 target, len(errors), beta)
    with open(os.path.join(out_dir, "fig1_curves.csv"), "w") as fh:
        fh.write("\n".join(combined) + "\n")
    _write_plot_script(out_dir)
    return EXIT_OK


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
# Render the fig1 curves (estimation error + lower bound per target rho).
import csv, collections
import matplotlib.pyplot as plt

curves = collections.defaultdict(lambda: ([], [], []))
with open("fig1_curves.csv") as fh:
    for row in csv.DictReader(fh):
        n, err, lb = curves[row["rho"]]
        n.append(int(row["n"]))
        err.append(float(row["error_l2"]))
        lb.append(float(row["lower_bound"]))
for rho, (n, err, lb) in curves.items():
    plt.semilogy(n, err, label=f"FPI error, rho={rho}")
    plt.semilogy(n, lb, "--", label=f"lower bound, rho={rho}")
plt.xlabel("iteration n")
plt.ylabel("||x_n - x*||_2")
plt.legend()
plt.grid(True, which="both", alpha=0.3)
plt.tight_layout()
plt.savefig("fig1.png", dpi=150)
print("wrote fig1.png")
"""


def _write_plot_script(out_dir: str) -> None:
    with open(os.path.join(out_dir, "plot_fig1.py"), "w") as fh:
        fh.write(_PLOT_SCRIPT)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ifp", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "spectral", "fig1"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("IFP_LOG", "error"), logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    handler = {"solve": cmd_solve, "spectral": cmd_spectral, "fig1": cmd_fig1}[args.command]
    try:
        os.makedirs(args.out, exist_ok=True)
        return handler(args.config, args.out, args.seed)
    except ConfigError as exc:
        print(f"ifp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpectralIterationError as exc:
        print(f"ifp: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except OSError as exc:
        print(f"ifp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
