"""Event-driven simulation of the labeled queue-length chain.

One aggregated exponential clock runs at rate (nK - upsilon*sqrt(n)) +
n * (number of nonempty queues). An arrival picks a rank by the routing
distribution and joins the queue currently holding that rank (ties broken
by label); a departure leaves a uniformly chosen nonempty queue. Between
events the sojourn integrals for idleness and pairwise ties accumulate
exactly. States are recorded on a fixed sampling grid, so trajectories of
any length keep a bounded footprint.

The driving noise is a splitmix64 counter stream seeded per run, which
makes every trajectory bit-reproducible and lets replications be assigned
independent streams keyed on (seed, replication) regardless of how a worker
pool schedules them.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .model import SystemParams, require_valid
from .stationary import stability_check
from .stats import SampleSet

__all__ = [
    "Trajectory",
    "GapPath",
    "EmpiricalStationary",
    "simulate",
    "diffusion_scale",
    "idle_time",
    "tie_time",
    "empirical_stationary",
    "replication_seed",
    "thread_count",
    "write_gap_csv",
    "read_gap_csv",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
U64 = np.uint64


def _py_mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def replication_seed(seed: int, r: int) -> int:
    """Counter-based derivation: stream r of root seed, scheduling-free."""
    return _py_mix64((seed + (r + 1) * _GOLDEN) & _MASK)


def thread_count() -> int:
    env = os.environ.get("RANK_SIM_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


@njit(cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def _u01(state):
    # splitmix64: a counter advanced by the golden-ratio increment, mixed
    s = state + U64(0x9E3779B97F4A7C15)
    z = _mix64(s)
    return (z >> U64(11)) * 1.1102230246251565e-16, s


@njit(cache=True, nogil=True)
def _ctmc_core(K, n, a_tilde, T, seed, q0, sample_dt, n_samples, audit):
    Q = q0.copy()
    sqn = math.sqrt(n)
    lam_tot = n * K - a_tilde.sum() * sqn
    denom = K - a_tilde.sum() / sqn
    cum = np.empty(K)
    acc = 0.0
    for j in range(K):
        acc += (1.0 - a_tilde[j] / sqn) / denom
        cum[j] = acc
    samples = np.zeros((n_samples, K), dtype=np.int64)
    idle = np.zeros(K)
    tie = np.zeros((K, K))
    state = seed
    m = 0
    for i in range(K):
        if Q[i] > 0:
            m += 1
    t = 0.0
    s_idx = 0
    arrivals = 0
    departures = 0
    ok = True
    while True:
        if audit:
            m_scan = 0
            for i in range(K):
                if Q[i] > 0:
                    m_scan += 1
            if m_scan != m:
                ok = False
                break
        R = lam_tot + n * m
        u, state = _u01(state)
        t_new = t + (-math.log(1.0 - u) / R)
        seg = min(t_new, T) - t
        if seg > 0.0:
            for i in range(K):
                if Q[i] == 0:
                    idle[i] += seg
                for j in range(i + 1, K):
                    if Q[i] == Q[j]:
                        tie[i, j] += seg
        while s_idx < n_samples and s_idx * sample_dt < t_new:
            samples[s_idx] = Q
            s_idx += 1
        if t_new > T:
            break
        t = t_new
        u, state = _u01(state)
        if u * R < lam_tot:
            u, state = _u01(state)
            j = 0
            while cum[j] < u and j < K - 1:
                j += 1
            # label holding rank j, ties to the lower label
            lab = -1
            for i in range(K):
                r = 0
                for l in range(K):
                    if Q[l] < Q[i] or (Q[l] == Q[i] and l < i):
                        r += 1
                if r == j:
                    lab = i
                    break
            if Q[lab] == 0:
                m += 1
            Q[lab] += 1
            arrivals += 1
        else:
            u, state = _u01(state)
            k = int(u * m)
            if k >= m:
                k = m - 1
            lab = -1
            c = -1
            for i in range(K):
                if Q[i] > 0:
                    c += 1
                    if c == k:
                        lab = i
                        break
            Q[lab] -= 1
            if Q[lab] == 0:
                m -= 1
            departures += 1
    while s_idx < n_samples:
        samples[s_idx] = Q
        s_idx += 1
    return samples, idle, tie, arrivals, departures, Q, ok


@dataclass
class Trajectory:
    """Sampled states plus exact sojourn integrals of one run."""

    params: SystemParams
    t: np.ndarray
    states: np.ndarray        # (len(t), K) queue lengths
    idle_seconds: np.ndarray  # plain-time integral of {Q_i = 0}
    tie_seconds: np.ndarray   # (K, K) upper-triangular integral of {Q_i = Q_j}
    arrivals: int
    departures: int
    initial: np.ndarray
    seed: int
    sample_dt: float


def simulate(
    p: SystemParams,
    T: float,
    seed: int,
    q0=None,
    sample_dt: float = 1.0,
    audit: bool = False,
) -> Trajectory:
    require_valid(p)
    if not T > 0.0 or not sample_dt > 0.0:
        raise ValueError("T and sample_dt must be positive")
    if q0 is None:
        q0 = np.zeros(p.K, dtype=np.int64)
    else:
        q0 = np.asarray(q0, dtype=np.int64)
        if q0.shape != (p.K,) or np.any(q0 < 0):
            raise ValueError(f"q0 must be {p.K} nonnegative integers")
    n_samples = int(math.floor(T / sample_dt + 1e-9)) + 1
    a = np.asarray(p.a_tilde, dtype=float)
    samples, idle, tie, arr, dep, q_final, ok = _ctmc_core(
        p.K, p.n, a, float(T), U64(_py_mix64(seed)), q0,
        float(sample_dt), n_samples, audit,
    )
    if not ok:
        raise AssertionError("rate audit failed: nonempty count diverged from state")
    if arr - dep != int(q_final.sum() - q0.sum()):
        raise AssertionError("conservation violated: arrivals - departures != net growth")
    return Trajectory(
        params=p,
        t=np.arange(n_samples) * sample_dt,
        states=samples,
        idle_seconds=idle,
        tie_seconds=tie,
        arrivals=int(arr),
        departures=int(dep),
        initial=q0,
        seed=seed,
        sample_dt=sample_dt,
    )


@dataclass
class GapPath:
    """Scaled ranked gaps: z1 is the shortest queue over sqrt(n), z_i the
    spacing between ranks i-1 and i. n is None for diffusion-native paths."""

    t: np.ndarray
    Z: np.ndarray
    n: int | None = None


def diffusion_scale(tr: Trajectory) -> GapPath:
    ranked = np.sort(tr.states, axis=1) / math.sqrt(tr.params.n)
    Z = np.empty_like(ranked)
    Z[:, 0] = ranked[:, 0]
    Z[:, 1:] = np.diff(ranked, axis=1)
    return GapPath(t=tr.t.copy(), Z=Z, n=tr.params.n)


def idle_time(tr: Trajectory, i: int) -> float:
    """Scaled cumulative idleness sqrt(n) * int_0^T 1{Q_i = 0} ds."""
    return math.sqrt(tr.params.n) * float(tr.idle_seconds[i])


def tie_time(tr: Trajectory, i: int, j: int) -> float:
    """Raw sojourn integral int_0^T 1{Q_i = Q_j} ds for labels i != j."""
    if i == j:
        raise ValueError("tie time needs two distinct labels")
    lo, hi = min(i, j), max(i, j)
    return float(tr.tie_seconds[lo, hi])


@dataclass
class EmpiricalStationary:
    params: SystemParams
    sample_sets: list        # one SampleSet per gap coordinate
    means: np.ndarray
    counts: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "means": [float(v) for v in self.means],
            "counts": [int(c) for c in self.counts],
            "params": {"K": self.params.K, "a_tilde": list(self.params.a_tilde),
                       "n": self.params.n},
        }


def empirical_stationary(
    p: SystemParams,
    T: float,
    burn_in: float,
    replications: int,
    seed: int,
    sample_dt: float = 1.0,
    thinning: float = 1.0,
) -> EmpiricalStationary:
    """Pool post-burn-in scaled gap samples across replications.

    Replication r runs on stream (seed, r); pooling is by replication index,
    so the result does not depend on worker scheduling. Refuses parameter
    sets without a stationary law.
    """
    require_valid(p)
    rep = stability_check(p.a_tilde)
    if not rep.stable:
        raise ValueError(
            "empirical stationary law needs stable parameters (every tail sum "
            f"of a_tilde positive); margins {rep.margins.tolist()}"
        )
    if not 0.0 <= burn_in < T:
        raise ValueError("need 0 <= burn_in < T")
    if replications < 1:
        raise ValueError("need at least one replication")

    def one(r: int) -> np.ndarray:
        tr = simulate(p, T=T, seed=replication_seed(seed, r), sample_dt=sample_dt)
        z = diffusion_scale(tr)
        return z.Z[z.t > burn_in]

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        chunks = list(pool.map(one, range(replications)))
    pooled = np.concatenate(chunks, axis=0)
    sets = [
        SampleSet(values=pooled[:, i], label=f"z{i + 1}", thinning=thinning)
        for i in range(p.K)
    ]
    return EmpiricalStationary(
        params=p,
        sample_sets=sets,
        means=pooled.mean(axis=0),
        counts=np.full(p.K, pooled.shape[0], dtype=np.int64),
    )


def write_gap_csv(z: GapPath, dest) -> None:
    dest = Path(dest)
    with dest.open("w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"z{i + 1}" for i in range(z.Z.shape[1])])
        for tk, row in zip(z.t, z.Z):
            w.writerow([repr(float(tk))] + [repr(float(v)) for v in row])


def read_gap_csv(src) -> GapPath:
    with Path(src).open(newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return GapPath(t=data[:, 0], Z=data[:, 1:])
