import math

import numpy as np
import pytest

from ranksim.ctmc import (
    GapPath,
    Trajectory,
    diffusion_scale,
    empirical_stationary,
    idle_time,
    simulate,
    tie_time,
    write_gap_csv,
    read_gap_csv,
)
from ranksim.model import SystemParams


def mm1_params(n, a=1.0):
    return SystemParams(K=1, a_tilde=(a,), n=n)


def test_mm1_time_average_matches_birth_death_mean():
    # K=1 is an M/M/1 queue with arrival n - sqrt(n), service n:
    # load 0.9 at n=100, so E Q = 9 and the scaled mean is 0.9
    means = []
    for seed in (1, 2, 3, 4):
        tr = simulate(mm1_params(100), T=2000.0, seed=seed)
        z = diffusion_scale(tr)
        means.append(z.Z[z.t >= 200.0, 0].mean())
    assert np.mean(means) == pytest.approx(0.9, rel=0.05)


def test_simulate_deterministic_in_seed():
    p = SystemParams(K=3, a_tilde=(-1.0, 1.0, 1.0), n=400)
    a = simulate(p, T=20.0, seed=7)
    b = simulate(p, T=20.0, seed=7)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.idle_seconds, b.idle_seconds)
    assert a.arrivals == b.arrivals and a.departures == b.departures
    c = simulate(p, T=20.0, seed=8)
    assert not np.array_equal(a.states, c.states)


def test_conservation_and_sample_grid():
    p = SystemParams(K=2, a_tilde=(0.5, -0.5), n=900)
    q0 = np.array([5, 11], dtype=np.int64)
    tr = simulate(p, T=10.0, seed=1, q0=q0, sample_dt=0.5)
    assert tr.t.tolist() == [0.5 * k for k in range(21)]
    assert np.array_equal(tr.states[0], q0)
    assert tr.arrivals - tr.departures == tr.states[-1].sum() - q0.sum()
    assert tr.arrivals > 0 and tr.departures > 0


def test_audit_mode_agrees():
    p = SystemParams(K=3, a_tilde=(0.0, 0.2, -0.2), n=250)
    tr = simulate(p, T=5.0, seed=3, audit=True)
    assert tr.states.shape == (6, 3)


def test_symmetric_scheme_is_label_exchangeable():
    # with a flat skew there is no restoring force on the labeled gap, but
    # the two labels are exchangeable: the sign of Q1 - Q2 at a fixed time
    # is a fair coin across replications
    p = SystemParams(K=2, a_tilde=(0.0, 0.0), n=400)
    signs = []
    for s in range(200):
        tr = simulate(p, T=5.0, seed=s, sample_dt=5.0)
        d = int(tr.states[-1, 0]) - int(tr.states[-1, 1])
        if d != 0:
            signs.append(d > 0)
    frac = np.mean(signs)
    assert abs(frac - 0.5) < 0.15


def test_diffusion_scale_frozen():
    tr = Trajectory(
        params=SystemParams(K=3, a_tilde=(0.0, 0.0, 0.0), n=4),
        t=np.array([0.0]),
        states=np.array([[3, 1, 2]], dtype=np.int64),
        idle_seconds=np.zeros(3),
        tie_seconds=np.zeros((3, 3)),
        arrivals=0,
        departures=0,
        initial=np.array([3, 1, 2], dtype=np.int64),
        seed=0,
        sample_dt=1.0,
    )
    z = diffusion_scale(tr)
    assert z.Z.tolist() == [[0.5, 0.5, 0.5]]
    assert z.n == 4
    # ranked reconstruction is nondecreasing by construction
    assert np.all(np.diff(np.cumsum(z.Z, axis=1), axis=1) >= 0.0)


def test_idle_time_scaling_mm1():
    # fraction of time empty is 1 - load = 0.1; the scaled idle term
    # multiplies the plain integral by sqrt(n)
    tr = simulate(mm1_params(100), T=2000.0, seed=5)
    assert idle_time(tr, 0) == pytest.approx(math.sqrt(100) * tr.idle_seconds[0])
    assert tr.idle_seconds[0] / 2000.0 == pytest.approx(0.1, rel=0.15)


def test_tie_time_basics():
    p = SystemParams(K=2, a_tilde=(0.0, 0.0), n=400)
    tr = simulate(p, T=50.0, seed=2)
    v = tie_time(tr, 0, 1)
    assert v > 0.0
    assert v == tie_time(tr, 1, 0)
    assert v < 50.0
    with pytest.raises(ValueError):
        tie_time(tr, 1, 1)


def test_tie_time_shrinks_with_n():
    p_small = SystemParams(K=2, a_tilde=(0.0, 0.0), n=100)
    p_big = SystemParams(K=2, a_tilde=(0.0, 0.0), n=6400)
    small = np.mean([tie_time(simulate(p_small, 50.0, seed=s), 0, 1) for s in range(8)])
    big = np.mean([tie_time(simulate(p_big, 50.0, seed=s), 0, 1) for s in range(8)])
    assert big < small


def test_empirical_stationary_mm1_prelimit_mean():
    # n=2500: load 0.98, E Q = 49, scaled mean 0.98
    est = empirical_stationary(
        mm1_params(2500), T=600.0, burn_in=60.0, replications=3, seed=11
    )
    assert est.means[0] == pytest.approx(0.98, rel=0.05)
    assert est.counts[0] == 3 * 540
    assert est.sample_sets[0].values.size == est.counts[0]


def test_empirical_stationary_refuses_unstable():
    p = SystemParams(K=2, a_tilde=(-1.0, 0.0), n=10_000)
    with pytest.raises(ValueError, match="stab"):
        empirical_stationary(p, T=100.0, burn_in=10.0, replications=2, seed=0)


def test_empirical_stationary_replication_order_free(monkeypatch):
    p = SystemParams(K=2, a_tilde=(0.5, 0.5), n=400)
    kw = dict(T=80.0, burn_in=8.0, replications=4, seed=21)
    monkeypatch.setenv("RANK_SIM_THREADS", "1")
    a = empirical_stationary(p, **kw)
    monkeypatch.setenv("RANK_SIM_THREADS", "4")
    b = empirical_stationary(p, **kw)
    assert np.array_equal(a.sample_sets[0].values, b.sample_sets[0].values)
    assert np.array_equal(a.sample_sets[1].values, b.sample_sets[1].values)


def test_gap_csv_roundtrip(tmp_path):
    t = np.array([0.0, 1.0, 2.0])
    Z = np.array([[0.1, 0.2], [0.3, 0.0], [1.5, 2.5]])
    f = tmp_path / "gaps.csv"
    write_gap_csv(GapPath(t=t, Z=Z, n=100), f)
    assert f.read_text().splitlines()[0] == "t,z1,z2"
    back = read_gap_csv(f)
    assert np.array_equal(back.t, t)
    assert np.array_equal(back.Z, Z)
