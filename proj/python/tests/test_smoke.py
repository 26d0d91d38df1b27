import math

import numpy as np
import pytest

import divest


def study_pair(d):
    f1 = divest.GaussianSpec([0.7] * d, 0.1, lower=[0.0], upper=[1.0])
    f2 = divest.GaussianSpec([0.3] * d, 0.3, lower=[0.0], upper=[1.0])
    return f1, f2


def test_sample_shape_and_support():
    f1, _ = study_pair(3)
    x = f1.sample(500, seed=4)
    assert x.shape == (500, 3)
    assert x.min() >= 0.0 and x.max() <= 1.0
    np.testing.assert_array_equal(x, f1.sample(500, seed=4))


def test_kth_distance_matches_brute_force():
    rng = np.random.default_rng(0)
    pts = rng.random((300, 4))
    q = rng.random((50, 4))
    a = divest.kth_distance(pts, q, 7)
    b = divest.kth_distance(pts, q, 7, brute_force=True)
    assert a == b
    direct = np.sort(np.linalg.norm(pts[None, :, :] - q[:, None, :], axis=2), axis=1)[:, 6]
    np.testing.assert_allclose(a, direct, rtol=1e-12)


def test_exact_weights_hand_solved():
    w = divest.solve_exact_weights([1.0, 4.0], 2)
    np.testing.assert_allclose(w["weights"], [2.0, -1.0], atol=1e-12)


def test_relaxed_weights_respect_eta():
    l = np.linspace(1, 3, 30)
    w = divest.solve_relaxed_weights(l, 5, 3000, 2.0)
    assert abs(sum(w["weights"]) - 1) < 1e-12
    assert w["norm"] <= 2.0 * (1 + 1e-8)


def test_identity_functional_is_one():
    f1, f2 = study_pair(2)
    for est in ["knn_plugin", "kernel_plugin", "ensemble_relaxed"]:
        out = divest.estimate(f1.sample(400, 1), f2.sample(400, 2), estimator=est, g="custom:one")
        assert out["functional"] == 1.0


def test_closed_form_cross_check():
    f1 = divest.GaussianSpec([0.7, 0.7], 0.1)
    f2 = divest.GaussianSpec([0.3, 0.3], 0.3)
    r = divest.true_divergence(f1, f2, budget=200000)
    assert r["closed_form"] is not None
    assert abs(r["value"] - r["closed_form"]) < 4 * r["std_error"]


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        divest.estimate(np.zeros((10, 2)), np.zeros((10, 3)))


def test_small_experiment_counts():
    cfg = {"T_grid": [100], "d_grid": [1], "trials": 2, "oracle_budget": 100000}
    records, summary = divest.run_experiment(cfg)
    lines = records.strip().splitlines()
    assert lines[0].startswith("T,d,trial,estimator")
    assert len(lines) - 1 == 8
    assert summary.splitlines()[0] == "T,d,estimator,n,mse,bias,variance,mean,std"


def test_reference_curve():
    assert divest.reference_curve([100, 1000], 100.0) == [(100, 1.0), (1000, 0.1)]
    assert math.isclose(divest.unit_ball_volume(2), math.pi)


@pytest.mark.parametrize("d,T,eta", [(3, 400, 2.0), (5, 3000, 2.0), (6, 1000, 3.0)])
def test_relaxed_epsilon_matches_conic_solver(d, T, eta):
    cp = pytest.importorskip("cvxpy")
    l = np.linspace(1, 3, 30)
    w = cp.Variable(30)
    e = cp.Variable()
    cons = [cp.sum(w) == 1, cp.norm(w, 2) <= eta]
    for i in range(1, d):
        cons.append(cp.abs((l ** (i / d)) @ w) * T ** ((d - i) / (2 * d)) <= e)
    cp.Problem(cp.Minimize(e), cons).solve()
    ours = divest.solve_relaxed_weights(l, d, T, eta)
    assert ours["epsilon"] <= e.value * (1 + 1e-5) + 1e-7
