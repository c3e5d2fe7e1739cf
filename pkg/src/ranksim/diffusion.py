"""Reflected diffusion limit of the scaled gap process.

The limit solves Z(t) = Z(0) + rho t + A B(t) + R L(t) with Z >= 0, L
nondecreasing and growing only on {Z_i = 0}; (Z, L) is the image of the
free path under the constrained map of the reflection matrix R. Long
horizons are handled in windows: the map restarts from the terminal state
of the previous window, so a whole-path evaluation is never materialized.

Gaussian increments come from counter-based generators keyed on
(seed, step-chunk) with a fixed chunk length, so a path is a pure function
of (config, seed): solver window sizes can change without touching the
noise, and ensembles can slice the same streams as single-path runs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .ctmc import GapPath
from .skorokhod import (
    ModelMatrices,
    _solve_grid,
    build_matrices,
    check_m_class,
    default_iteration_budget,
)
from .stats import slope_estimate

__all__ = [
    "DiffusionConfig",
    "LocalTimePath",
    "simulate_reflected",
    "simulate_reflected_from_increments",
    "simulate_atlas_ordered",
    "gap_ensemble",
    "unstable_escape_slope",
    "config_to_json",
    "config_from_json",
]

BLOCK_STEPS = 100_000
NOISE_CHUNK = 2048


@dataclass(frozen=True)
class DiffusionConfig:
    K: int
    rho: tuple[float, ...]
    dt: float
    T: float
    seed: int
    Z0: tuple[float, ...] | None = None
    noise_scale: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.K, int) and self.K >= 1):
            raise ValueError(f"K must be a positive integer, got {self.K!r}")
        rho = tuple(float(v) for v in self.rho)
        if len(rho) != self.K:
            raise ValueError(f"rho has length {len(rho)}, expected {self.K}")
        object.__setattr__(self, "rho", rho)
        if self.Z0 is not None:
            z0 = tuple(float(v) for v in self.Z0)
            if len(z0) != self.K or any(v < 0.0 for v in z0):
                raise ValueError("Z0 must be K nonnegative entries")
            object.__setattr__(self, "Z0", z0)
        if not (self.dt > 0.0 and self.T > 0.0 and self.T >= self.dt):
            raise ValueError("need 0 < dt <= T")
        if not self.noise_scale >= 0.0:
            raise ValueError("noise_scale must be nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def z0_array(self) -> np.ndarray:
        return np.zeros(self.K) if self.Z0 is None else np.asarray(self.Z0)


@dataclass
class LocalTimePath:
    """Cumulative boundary pushes, one nondecreasing coordinate per gap."""

    t: np.ndarray
    L: np.ndarray


def _chunk_gen(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, chunk], dtype=np.uint64))
    )


def _noise_slice(seed: int, lo: int, hi: int, K: int) -> np.ndarray:
    """Standard normals for steps lo..hi of the stream keyed (seed, chunk).

    Chunks have a fixed length, so the slice is independent of how callers
    window the horizon.
    """
    out = np.empty((hi - lo, K))
    pos = lo
    while pos < hi:
        c = pos // NOISE_CHUNK
        g = _chunk_gen(seed, c).standard_normal((NOISE_CHUNK, K))
        stop = min(NOISE_CHUNK, hi - c * NOISE_CHUNK)
        start = pos - c * NOISE_CHUNK
        out[pos - lo : pos - lo + (stop - start)] = g[start:stop]
        pos += stop - start
    return out


def _reflect_blocks(c: DiffusionConfig, m: ModelMatrices, increments, block: int):
    """Run the constrained map window by window.

    increments(lo, hi) returns the free-path increments for steps lo..hi
    (exclusive). Yields (y_block, eta_block) per window, each of shape
    (hi - lo, K), excluding the window's starting point.
    """
    Q = (np.eye(c.K) - m.R).T
    budget = default_iteration_budget(c.K, check_m_class(m.R).certified_bound)
    z = c.z0_array().copy()
    n_steps = c.n_steps
    lo = 0
    while lo < n_steps:
        hi = min(lo + block, n_steps)
        inc = increments(lo, hi)
        x = np.empty((hi - lo + 1, c.K))
        x[0] = z
        np.cumsum(inc, axis=0, out=x[1:])
        x[1:] += z
        eta, _, _ = _solve_grid(x, Q, 1e-12, budget)
        y = x + eta @ m.R.T
        yield y[1:], eta[1:]
        z = y[-1]
        lo = hi


def _assemble(c: DiffusionConfig, blocks) -> tuple[GapPath, LocalTimePath]:
    n_steps = c.n_steps
    t = np.arange(n_steps + 1) * c.dt
    Z = np.empty((n_steps + 1, c.K))
    L = np.empty((n_steps + 1, c.K))
    Z[0] = c.z0_array()
    L[0] = 0.0
    pos = 1
    l_off = np.zeros(c.K)
    for y_blk, eta_blk in blocks:
        m = y_blk.shape[0]
        Z[pos : pos + m] = y_blk
        L[pos : pos + m] = l_off + eta_blk
        l_off = L[pos + m - 1].copy()
        pos += m
    return GapPath(t=t, Z=Z, n=None), LocalTimePath(t=t.copy(), L=L)


def simulate_reflected(
    c: DiffusionConfig, block: int = BLOCK_STEPS
) -> tuple[GapPath, LocalTimePath]:
    m = build_matrices(c.K)
    rho = np.asarray(c.rho)
    scale = c.noise_scale * math.sqrt(c.dt)

    def increments(lo, hi):
        g = _noise_slice(c.seed, lo, hi, c.K)
        return rho * c.dt + scale * (g @ m.A.T)

    return _assemble(c, _reflect_blocks(c, m, increments, block))


def simulate_reflected_from_increments(
    c: DiffusionConfig, dW: np.ndarray, block: int = BLOCK_STEPS
) -> tuple[GapPath, LocalTimePath]:
    """Same map, driven by externally supplied Brownian increments.

    dW has shape (n_steps, K) and is used as-is (already sqrt(dt)-scaled),
    which supports common-random-number comparisons across grids.
    """
    dW = np.asarray(dW, dtype=float)
    if dW.shape != (c.n_steps, c.K):
        raise ValueError(f"dW must have shape {(c.n_steps, c.K)}, got {dW.shape}")
    m = build_matrices(c.K)
    rho = np.asarray(c.rho)

    def increments(lo, hi):
        return rho * c.dt + c.noise_scale * (dW[lo:hi] @ m.A.T)

    return _assemble(c, _reflect_blocks(c, m, increments, block))


def simulate_atlas_ordered(c: DiffusionConfig, a: float, b: float) -> GapPath:
    """Ordered-particle form: K one-dimensional particles on the half line,
    each reflected at 0 on its own, the currently lowest one (ties to the
    lower index) getting drift b - a and all others -a. Returns the ranked
    gap path, whose law matches the reflected gap diffusion for the skew
    (a - b, a, ..., a)."""
    expected = np.zeros(c.K)
    expected[0] = b - a
    if c.K >= 2:
        expected[1] = -b
    if not np.array_equal(np.asarray(c.rho), expected):
        raise ValueError(
            f"config drift {c.rho} does not match the (a, b) form {tuple(expected)}"
        )
    traj = _atlas_paths(c, a, b, reps=1, record_every=1)
    return GapPath(t=np.arange(c.n_steps + 1) * c.dt, Z=traj[:, 0, :], n=None)


def _atlas_paths(
    c: DiffusionConfig, a: float, b: float, reps: int, record_every: int = 1,
    record_steps=None,
) -> np.ndarray:
    """Euler walk of the particle positions; per-coordinate projection onto
    the half line plays the role of the one-dimensional constraint map.

    Path r draws from the streams of seed c.seed + r. Returns ranked gaps
    with shape (n_records, reps, K).
    """
    n_steps = c.n_steps
    if record_steps is None:
        record_steps = np.arange(0, n_steps + 1, record_every)
    record_steps = np.asarray(record_steps, dtype=np.int64)
    y = np.tile(np.cumsum(c.z0_array()), (reps, 1))
    out = np.empty((record_steps.size, reps, c.K))
    rec = 0
    if record_steps.size and record_steps[0] == 0:
        out[0] = _ranked_gaps(y)
        rec += 1
    root = math.sqrt(2.0) * c.noise_scale * math.sqrt(c.dt)
    base = -a * c.dt
    bump = b * c.dt
    rows = np.arange(reps)
    step = 0
    while step < n_steps:
        take = min(8192, n_steps - step)
        g = np.empty((take, reps, c.K))
        for r in range(reps):
            g[:, r, :] = _noise_slice(c.seed + r, step, step + take, c.K)
        for k in range(take):
            low = np.argmin(y, axis=1)
            y += base
            y[rows, low] += bump
            y += root * g[k]
            np.maximum(y, 0.0, out=y)
            step += 1
            if rec < record_steps.size and record_steps[rec] == step:
                out[rec] = _ranked_gaps(y)
                rec += 1
    return out


def _ranked_gaps(y: np.ndarray) -> np.ndarray:
    s = np.sort(y, axis=1)
    z = np.empty_like(s)
    z[:, 0] = s[:, 0]
    z[:, 1:] = np.diff(s, axis=1)
    return z


def gap_ensemble(
    c: DiffusionConfig,
    replications: int,
    sample_times,
    method: str = "reflected",
    a: float | None = None,
    b: float | None = None,
    block: int = 2000,
) -> np.ndarray:
    """Ranked gaps of many independent paths at the given times.

    Returns shape (len(sample_times), replications, K). Replication r
    draws from the noise streams of seed c.seed + r, so the ensemble is
    reproducible and each path coincides with simulate_* run at seed + r.
    """
    sample_times = np.asarray(sample_times, dtype=float)
    steps = np.rint(sample_times / c.dt).astype(np.int64)
    if np.any(np.abs(steps * c.dt - sample_times) > 1e-9) or np.any(steps > c.n_steps):
        raise ValueError("sample times must sit on the dt grid within the horizon")
    if method == "atlas":
        if a is None or b is None:
            raise ValueError("atlas method needs a and b")
        return _atlas_paths(c, a, b, reps=replications, record_steps=steps)
    if method != "reflected":
        raise ValueError(f"unknown method {method!r}")
    m = build_matrices(c.K)
    Q = (np.eye(c.K) - m.R).T
    budget = default_iteration_budget(c.K, check_m_class(m.R).certified_bound)
    rho = np.asarray(c.rho)
    scale = c.noise_scale * math.sqrt(c.dt)
    z = np.tile(c.z0_array(), (replications, 1))
    out = np.empty((steps.size, replications, c.K))
    rec = 0
    if rec < steps.size and steps[rec] == 0:
        out[0] = z
        rec += 1
    lo = 0
    n_steps = int(steps.max())
    while lo < n_steps:
        hi = min(lo + block, n_steps)
        nb = hi - lo
        g = np.empty((replications, nb, c.K))
        for r in range(replications):
            g[r] = _noise_slice(c.seed + r, lo, hi, c.K)
        x = np.empty((replications, nb + 1, c.K))
        x[:, 0, :] = z
        np.cumsum(rho * c.dt + scale * (g @ m.A.T), axis=1, out=x[:, 1:, :])
        x[:, 1:, :] += z[:, None, :]
        eta, _, _ = _solve_grid(x, Q, 1e-12, budget)
        y = x + eta @ m.R.T
        while rec < steps.size and lo < steps[rec] <= hi:
            out[rec] = y[:, steps[rec] - lo, :]
            rec += 1
        z = y[:, -1, :]
        lo = hi
    return out


def unstable_escape_slope(src, window_fraction: float = 0.5) -> tuple[float, float]:
    """Least-squares slope of the lowest coordinate over the trailing
    window; src is a GapPath or a DiffusionConfig to simulate first."""
    if isinstance(src, DiffusionConfig):
        src, _ = simulate_reflected(src)
    span = float(src.t[-1] - src.t[0])
    if span < 100.0:
        raise ValueError(f"horizon {span} too short for an escape-slope fit (need >= 100)")
    return slope_estimate(src.t, src.Z[:, 0], window_fraction=window_fraction)


def config_to_json(c: DiffusionConfig) -> str:
    return json.dumps(
        {
            "K": c.K,
            "rho": list(c.rho),
            "dt": c.dt,
            "T": c.T,
            "seed": c.seed,
            "Z0": list(c.z0_array()),
            "noise_scale": c.noise_scale,
        }
    )


def config_from_json(src) -> DiffusionConfig:
    doc = json.loads(src) if isinstance(src, (str, bytes)) else src
    missing = {"K", "rho", "dt", "T", "seed"} - set(doc)
    if missing:
        raise ValueError(f"diffusion config missing keys {sorted(missing)}")
    return DiffusionConfig(
        K=int(doc["K"]),
        rho=tuple(doc["rho"]),
        dt=float(doc["dt"]),
        T=float(doc["T"]),
        seed=int(doc["seed"]),
        Z0=tuple(doc["Z0"]) if doc.get("Z0") is not None else None,
        noise_scale=float(doc.get("noise_scale", 1.0)),
    )
