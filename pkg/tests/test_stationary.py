import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranksim.model import SchemeSpec, drift_vector
from ranksim.skorokhod import build_matrices, r_inverse_apply
from ranksim.stationary import (
    ProductExpLaw,
    eta_vector,
    metrics,
    stability_check,
    stationary_law,
    unstable_gap_law,
)


def test_eta_frozen_mjsq_k3():
    # a=1, b=2: eta_1 = -(aK - b) = -1, eta_i = -(K+1-i)a
    eta = eta_vector((-1.0, 1.0, 1.0))
    assert eta.tolist() == [-1.0, -2.0, -1.0]


def test_eta_frozen_d2_scheme():
    sch = SchemeSpec.d_scheme(a=1.0, b=2.0, d=2, K=3)
    assert eta_vector(sch.expand()).tolist() == [-1.0, -1.0, -1.0]


def test_stability_frozen():
    assert stability_check((-1.0, 1.0, 1.0)).stable
    assert not stability_check((1.0, -1.0, 1.0)).stable  # a zero tail sum
    assert not stability_check((0.0, 0.0)).stable
    assert not stability_check((-1.0, 0.0)).stable
    rep = stability_check((-1.0, 1.0, 1.0))
    assert rep.margins.tolist() == [1.0, 2.0, 1.0]


def test_stability_iff_eta_negative():
    rng = np.random.default_rng(0)
    for _ in range(200):
        K = rng.integers(1, 8)
        a = rng.standard_normal(K)
        assert stability_check(a).stable == bool(np.all(eta_vector(a) < 0.0))


@settings(max_examples=200)
@given(
    st.lists(
        st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, width=32),
        min_size=1,
        max_size=9,
    )
)
def test_eta_agrees_with_matrix_route(a_tilde):
    # tail-sum route vs 2 Lam^-1 R^-1 rho
    a = np.asarray(a_tilde, dtype=float)
    K = len(a)
    m = build_matrices(K)
    via_matrix = 2.0 * r_inverse_apply(m, drift_vector(a)) / np.diag(m.Lam)
    assert np.max(np.abs(eta_vector(a) - via_matrix)) <= 1e-12 * max(1.0, np.abs(a).sum())


def test_stationary_law_means():
    law = stationary_law((-1.0, 1.0, 1.0))
    assert law.rates == (1.0, 2.0, 1.0)
    assert law.means().tolist() == [1.0, 0.5, 1.0]


def test_stationary_law_refuses_unstable():
    with pytest.raises(ValueError, match="stab"):
        stationary_law((1.0, -1.0, 1.0))


def test_law_density_and_cdf():
    law = ProductExpLaw(rates=(1.0, 2.0))
    assert law.density(np.zeros(2)) == pytest.approx(2.0)
    assert law.density(np.array([1.0, 1.0])) == pytest.approx(2.0 * np.exp(-3.0))
    assert law.density(np.array([-0.1, 1.0])) == 0.0
    cdf = law.marginal_cdf(1)
    assert cdf(0.0) == 0.0
    assert cdf(np.log(2.0) / 2.0) == pytest.approx(0.5)


def test_law_sampler_deterministic_and_calibrated():
    law = ProductExpLaw(rates=(1.0, 2.0, 4.0))
    s1 = law.sample(50_000, seed=123)
    s2 = law.sample(50_000, seed=123)
    assert np.array_equal(s1, s2)
    s3 = law.sample(50_000, seed=124)
    assert not np.array_equal(s1, s3)
    assert np.allclose(s1.mean(axis=0), [1.0, 0.5, 0.25], rtol=0.03)
    assert s1.min() > 0.0


def test_unstable_gap_law_frozen():
    # K=2, a=0, b=1: single gap, rate b(K-1)/K = 1/2, mean 2
    law = unstable_gap_law(SchemeSpec.d_scheme(a=0.0, b=1.0, d=1, K=2))
    assert law.rates == (0.5,)
    assert law.means().tolist() == [2.0]
    # K=3, a=0, b=3: rates (2, 1)
    law3 = unstable_gap_law(SchemeSpec.d_scheme(a=0.0, b=3.0, d=1, K=3))
    assert law3.rates == (2.0, 1.0)


def test_unstable_gap_law_general_vector_form():
    law = unstable_gap_law((-1.0, 0.0))
    assert law.rates == (0.5,)


def test_unstable_gap_law_rejections():
    # critical boundary b = aK is not covered
    with pytest.raises(ValueError, match="b = aK"):
        unstable_gap_law(SchemeSpec.d_scheme(a=1.0, b=2.0, d=1, K=2))
    # stable parameters are the wrong regime
    with pytest.raises(ValueError):
        unstable_gap_law(SchemeSpec.d_scheme(a=1.0, b=1.0, d=1, K=2))
    # shape must be join-the-shortest-queue-like (equal tail skews)
    with pytest.raises(ValueError):
        unstable_gap_law((-1.0, 1.0, 2.0))
    # negative tail skew is outside the covered family
    with pytest.raises(ValueError):
        unstable_gap_law((-1.0, -1.0))
    with pytest.raises(ValueError):
        unstable_gap_law((-1.0,))  # K=1 has no gaps


def test_metrics_frozen_k3():
    # K=3, a=1, upsilon=1 (so b = aK - upsilon = 2)
    r1 = metrics(SchemeSpec.d_scheme(a=1.0, b=2.0, d=1, K=3))
    rK = metrics(SchemeSpec.d_scheme(a=1.0, b=2.0, d=3, K=3))
    r2 = metrics(SchemeSpec.d_scheme(a=1.0, b=2.0, d=2, K=3))
    assert rK.W_mean == pytest.approx(9.0, abs=1e-12)
    assert r1.W_mean == pytest.approx(5.0, abs=1e-12)
    assert r2.W_mean == pytest.approx(6.0, abs=1e-12)
    assert rK.D_mean == pytest.approx(4.5, abs=1e-12)
    assert r1.D_mean == pytest.approx(1.5, abs=1e-12)
    assert r1.R_W == pytest.approx(1.8, abs=1e-12)
    assert r1.R_D == pytest.approx(3.0, abs=1e-12)
    assert r1.D_stab == pytest.approx(1.5, abs=1e-12)
    assert r1.D_unst is None
    # ratio fields agree across d (they only depend on K, a, upsilon)
    assert rK.R_W == r1.R_W and r2.R_D == r1.R_D


def test_metrics_unstable_frozen():
    rep = metrics(SchemeSpec.d_scheme(a=0.0, b=1.0, d=1, K=2))
    assert rep.D_unst == pytest.approx(2.0, abs=1e-12)
    assert rep.W_mean is None and rep.R_W is None
    doc = rep.to_json_dict()
    assert set(doc) == {"D_unst"}


def test_metrics_regime_rejections():
    with pytest.raises(ValueError, match="b = aK"):
        metrics(SchemeSpec.d_scheme(a=1.0, b=3.0, d=1, K=3))
    with pytest.raises(ValueError):
        metrics(SchemeSpec.d_scheme(a=1.0, b=4.0, d=2, K=3))  # unstable, d > 1
    with pytest.raises(ValueError):
        metrics(SchemeSpec.general((-1.0, 1.0)))  # no d to report on


def test_metrics_json_keys_stable():
    doc = metrics(SchemeSpec.d_scheme(a=1.0, b=2.0, d=1, K=3)).to_json_dict()
    assert set(doc) == {"W_mean", "D_mean", "R_W", "R_D", "D_stab"}


def test_metrics_cross_check_against_gap_means():
    # E W^d = sum_j (K-j+1) E Z_j and E D^d = sum_{j>=2} E Z_j
    rng = np.random.default_rng(17)
    for _ in range(50):
        K = int(rng.integers(1, 9))
        a = float(rng.uniform(0.2, 3.0))
        b = float(rng.uniform(-2.0, a * K - 0.05))
        d = int(rng.integers(1, K + 1))
        sch = SchemeSpec.d_scheme(a=a, b=b, d=d, K=K)
        rep = metrics(sch)
        means = stationary_law(sch.expand()).means()
        weights = np.arange(K, 0, -1, dtype=float)
        assert rep.W_mean == pytest.approx(float(weights @ means), rel=1e-10)
        assert rep.D_mean == pytest.approx(float(means[1:].sum()), rel=1e-10, abs=1e-12)


def test_metrics_monotone_in_d():
    # every stationary rate is nonincreasing in d, so both means grow with d
    for (K, a, ups) in [(3, 1.0, 1.0), (5, 0.7, 2.0), (8, 2.0, 0.3)]:
        b = a * K - ups
        W = [metrics(SchemeSpec.d_scheme(a=a, b=b, d=d, K=K)).W_mean for d in range(1, K + 1)]
        D = [metrics(SchemeSpec.d_scheme(a=a, b=b, d=d, K=K)).D_mean for d in range(1, K + 1)]
        assert all(x <= y + 1e-12 for x, y in zip(W, W[1:]))
        assert all(x <= y + 1e-12 for x, y in zip(D, D[1:]))


def test_d_unst_shrinks_with_overload():
    vals = [
        metrics(SchemeSpec.d_scheme(a=0.0, b=b, d=1, K=4)).D_unst for b in (1.0, 2.0, 4.0)
    ]
    assert vals[0] > vals[1] > vals[2]
