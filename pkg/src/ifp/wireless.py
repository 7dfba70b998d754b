"""Load coupling in cellular networks.

Each base station's resource-block utilization depends on every other
station's utilization through interference.  The load mapping here is
concave and standard, its asymptotic behaviour is linear, and its spectral
radius decides whether a finite network load exists at all.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import textio

LN2 = math.log(2.0)


@dataclass(frozen=True)
class NetworkSnapshot:
    """One static snapshot of a downlink network.

    gains[i, j] is the linear pathloss gain from station i to user j.
    serving[j] is the index of the station serving user j; every station
    must serve at least one user.  powers are per resource block (W),
    demands in bits/s, block_bandwidth_hz in Hz.
    """

    station_xy: np.ndarray      # (N, 2) metres
    user_xy: np.ndarray         # (J, 2) metres
    demands_bps: np.ndarray     # (J,)
    gains: np.ndarray           # (N, J)
    serving: np.ndarray         # (J,) int
    powers_w: np.ndarray        # (N,)
    noise_w: float
    k_blocks: int
    block_bandwidth_hz: float

    def __post_init__(self):
        object.__setattr__(self, "station_xy", np.asarray(self.station_xy, float))
        object.__setattr__(self, "user_xy", np.asarray(self.user_xy, float))
        object.__setattr__(self, "demands_bps", np.asarray(self.demands_bps, float))
        object.__setattr__(self, "gains", np.asarray(self.gains, float))
        object.__setattr__(self, "serving", np.asarray(self.serving, int))
        object.__setattr__(self, "powers_w", np.asarray(self.powers_w, float))
        n, j = self.n_stations, self.n_users
        if self.gains.shape != (n, j):
            raise ValueError(f"gains must be (n_stations, n_users), got {self.gains.shape}")
        if self.serving.shape != (j,) or self.demands_bps.shape != (j,):
            raise ValueError("per-user arrays must have one entry per user")
        if np.any(self.gains <= 0) or np.any(self.powers_w <= 0) or np.any(self.demands_bps <= 0):
            raise ValueError("gains, powers and demands must be strictly positive")
        if self.noise_w <= 0 or self.block_bandwidth_hz <= 0 or self.k_blocks < 1:
            raise ValueError("noise, bandwidth must be positive and k_blocks >= 1")
        if np.any(self.serving < 0) or np.any(self.serving >= n):
            raise ValueError("serving indices out of range")
        served = np.bincount(self.serving, minlength=n)
        if np.any(served == 0):
            raise ValueError("every station must serve at least one user")

    @property
    def n_stations(self) -> int:
        return self.station_xy.shape[0]

    @property
    def n_users(self) -> int:
        return self.user_xy.shape[0]


def load_apply(snapshot: NetworkSnapshot, x) -> np.ndarray:
    """Evaluate the load mapping at occupancy vector x >= 0.

    Per station i: sum over its users of d_j / (K B log2(1 + SINR_j)),
    where the interference seen by user j aggregates x_k p_k g_{k,j} over
    all stations k other than the serving one, plus noise.
    """
    x = np.asarray(x, dtype=float)
    s = snapshot
    n = s.n_stations
    if x.shape != (n,):
        raise ValueError(f"load vector must have dim {n}, got {x.shape}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("load vector must be finite and nonnegative")
    xp = x * s.powers_w
    # interference per user: total minus the serving station's own term
    total = xp @ s.gains                       # (J,)
    own = xp[s.serving] * s.gains[s.serving, np.arange(s.n_users)]
    interference = total - own + s.noise_w
    sinr = s.powers_w[s.serving] * s.gains[s.serving, np.arange(s.n_users)] / interference
    rate_per_block = np.log1p(sinr) / LN2      # log2(1 + SINR), stable for tiny SINR
    per_user = s.demands_bps / (s.k_blocks * s.block_bandwidth_hz * rate_per_block)
    return np.bincount(s.serving, weights=per_user, minlength=n)


def build_M(snapshot: NetworkSnapshot) -> np.ndarray:
    """Coupling matrix governing the load mapping at large occupancy.

    M[i, k] = sum over users j of station i of ln(2) d_j g_{k,j} / (K B g_{i,j}),
    with zero diagonal.
    """
    s = snapshot
    n = s.n_stations
    j_idx = np.arange(s.n_users)
    own_gain = s.gains[s.serving, j_idx]       # g_{i,j} for the serving i
    coef = LN2 * s.demands_bps / (s.k_blocks * s.block_bandwidth_hz * own_gain)  # (J,)
    M = np.zeros((n, n))
    np.add.at(M, s.serving, (coef[:, None] * s.gains.T))  # row i accumulates over N_i
    np.fill_diagonal(M, 0.0)
    return M


def asymptotic_matrix(snapshot: NetworkSnapshot) -> np.ndarray:
    """diag(p)^-1 M diag(p): the linear map the load mapping tends to."""
    M = build_M(snapshot)
    p = snapshot.powers_w
    return (M * p[None, :]) / p[:, None]


def asymptotic_load(snapshot: NetworkSnapshot):
    """Asymptotic mapping of the load mapping (always analytic-linear)."""
    from .asymptotic import AnalyticLinear

    return AnalyticLinear(asymptotic_matrix(snapshot))


def calibrate_beta(snapshot: NetworkSnapshot, target_rho: float) -> float:
    """Scale factor beta so that the beta-scaled load map has spectral radius target_rho."""
    from .norms import SUP_NORM
    from .spectral import solve_eigenpair

    if not 0.0 < target_rho < 1.0:
        raise ValueError("target_rho must lie in ]0, 1[")
    rho, _ = solve_eigenpair(asymptotic_load(snapshot), SUP_NORM)
    if rho <= 0.0:
        raise ValueError("degenerate snapshot: asymptotic spectral radius is zero")
    return target_rho / rho


@dataclass(frozen=True)
class SnapshotConfig:
    """Parameters of the synthetic snapshot generator."""

    n_stations: int = 9
    users_per_station: int = 8
    demand_bps: float = 300e3
    area_m: float = 1500.0
    pathloss_exponent: float = 3.7
    k_blocks: int = 100
    block_bandwidth_hz: float = 180e3
    power_w: float = 1.0
    noise_w: float = 1e-12

    def __post_init__(self):
        for name in ("n_stations", "users_per_station", "demand_bps", "area_m",
                     "pathloss_exponent", "k_blocks", "block_bandwidth_hz",
                     "power_w", "noise_w"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def _station_grid(n: int, area: float) -> np.ndarray:
    """First n points of a uniform ceil(sqrt(n))^2 grid over the square."""
    side = math.ceil(math.sqrt(n))
    ticks = (np.arange(side) + 0.5) * area / side
    xx, yy = np.meshgrid(ticks, ticks)
    return np.column_stack([xx.ravel(), yy.ravel()])[:n]


def generate_snapshot(cfg: SnapshotConfig, seed: int, max_retries: int = 64) -> NetworkSnapshot:
    """Synthetic snapshot: grid stations, uniform users, log-distance pathloss.

    Users attach to their highest-gain station.  If that leaves a station
    with no users, user positions are redrawn (bounded retries).
    Deterministic for a given (cfg, seed).
    """
    rng = np.random.default_rng(seed)
    stations = _station_grid(cfg.n_stations, cfg.area_m)
    n_users = cfg.n_stations * cfg.users_per_station
    for _ in range(max_retries):
        users = rng.uniform(0.0, cfg.area_m, size=(n_users, 2))
        dist = np.linalg.norm(stations[:, None, :] - users[None, :, :], axis=2)
        gains = np.maximum(dist, 1.0) ** (-cfg.pathloss_exponent)
        serving = np.argmax(gains, axis=0)
        if np.all(np.bincount(serving, minlength=cfg.n_stations) > 0):
            return NetworkSnapshot(
                station_xy=stations,
                user_xy=users,
                demands_bps=np.full(n_users, cfg.demand_bps),
                gains=gains,
                serving=serving,
                powers_w=np.full(cfg.n_stations, cfg.power_w),
                noise_w=cfg.noise_w,
                k_blocks=cfg.k_blocks,
                block_bandwidth_hz=cfg.block_bandwidth_hz,
            )
    raise RuntimeError(f"could not populate every station after {max_retries} retries")


# ---------------------------------------------------------------------------
# serialization (docs/schemas/snapshot.schema)

def save_snapshot(snapshot: NetworkSnapshot, path) -> None:
    s = snapshot
    lines = ["[stations]", "# id x_m y_m power_w"]
    for i in range(s.n_stations):
        lines.append(f"{i} {textio.fmt(s.station_xy[i, 0])} {textio.fmt(s.station_xy[i, 1])} "
                     f"{textio.fmt(s.powers_w[i])}")
    lines += ["[users]", "# id x_m y_m demand_bps serving_station"]
    for j in range(s.n_users):
        lines.append(f"{j} {textio.fmt(s.user_xy[j, 0])} {textio.fmt(s.user_xy[j, 1])} "
                     f"{textio.fmt(s.demands_bps[j])} {s.serving[j]}")
    lines += ["[radio]",
              f"k_blocks = {s.k_blocks}",
              f"block_bandwidth_hz = {textio.fmt(s.block_bandwidth_hz)}",
              f"noise_w = {textio.fmt(s.noise_w)}",
              "[gains]", "# one row per station, one column per user"]
    for i in range(s.n_stations):
        lines.append(textio.fmt_vec(s.gains[i]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_snapshot(path) -> NetworkSnapshot:
    with open(path) as fh:
        sections = textio.read_sections(fh.read())
    for name in ("stations", "users", "radio", "gains"):
        if name not in sections:
            raise ValueError(f"snapshot file missing [{name}] section")
    st = np.array([textio.parse_floats(line) for line in sections["stations"]])
    us_rows = [line.split() for line in sections["users"]]
    radio = textio.parse_kv(sections["radio"])
    gains = np.array([textio.parse_floats(line) for line in sections["gains"]])
    return NetworkSnapshot(
        station_xy=st[:, 1:3],
        user_xy=np.array([[float(r[1]), float(r[2])] for r in us_rows]),
        demands_bps=np.array([float(r[3]) for r in us_rows]),
        gains=gains,
        serving=np.array([int(r[4]) for r in us_rows]),
        powers_w=st[:, 3],
        noise_w=float(radio["noise_w"]),
        k_blocks=int(radio["k_blocks"]),
        block_bandwidth_hz=float(radio["block_bandwidth_hz"]),
    )
