"""Composite smoothing, certificates, and the accelerated minimizer."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conesmooth.composite_solver import (
    LOGSUMEXP,
    OPTIMAL_GENERAL,
    OPTIMAL_INNER,
    OPTIMAL_OUTER,
    SURROGATES,
    BenchRecord,
    CompositeSmoothing,
    SmoothMap,
    accelerated_minimize,
    composite_value_grad,
    make_planted_minimax,
    power_operator_norm,
    run_minimax_bench,
    smoothability_certificate,
)
from conesmooth.function_smoothing import compute_core
from conesmooth.sublinear_catalog import coordinate_max, euclidean_norm, one_norm

from .oracles import central_diff


# ---------------------------------------------------------- operator norm


def test_power_operator_norm_matches_svd():
    rng = np.random.default_rng(0)
    for shape in [(3, 3), (5, 2), (2, 6)]:
        a = rng.normal(size=shape)
        assert_allclose(power_operator_norm(a), np.linalg.norm(a, 2),
                        rtol=1e-10)


def test_power_operator_norm_rank_one():
    a = np.outer([3.0, 4.0], [1.0, 0.0])
    assert_allclose(power_operator_norm(a), 5.0, rtol=1e-12)


# ------------------------------------------------------------- smooth maps


def test_affine_map_fields():
    a = np.array([[1.0, 2.0], [0.0, 1.0], [1.0, -1.0]])
    b = np.array([0.5, -0.5, 0.0])
    g = SmoothMap.affine(a, b)
    x = np.array([1.0, 1.0])
    assert_allclose(g.fun(x), a @ x + b)
    assert_allclose(g.jac(x), a)
    assert_allclose(g.M, np.linalg.norm(a, 2), rtol=1e-10)
    assert g.L == 0.0


def test_affine_map_validation():
    with pytest.raises(ValueError):
        SmoothMap.affine(np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        SmoothMap.affine(np.ones((2, 2)), np.ones(3))
    with pytest.raises(ValueError):
        SmoothMap(lambda x: x, lambda x: 1.0, -1.0, 0.0)


# ------------------------------------------------------------- composites


def make_instance(surrogate, beta=8.0):
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=4) * 0.3
    return CompositeSmoothing(coordinate_max(4), SmoothMap.affine(a, b),
                              beta, surrogate), a, b


def test_composite_certificates():
    for surrogate, factor in [(OPTIMAL_INNER, 1.0), (OPTIMAL_GENERAL, 0.5),
                              (OPTIMAL_OUTER, 1.0)]:
        c, a, _ = make_instance(surrogate)
        lam, delta = smoothability_certificate(c)
        m2 = np.linalg.norm(a, 2) ** 2
        w = compute_core(coordinate_max(4)).width
        assert_allclose(lam, m2 * w * factor, rtol=1e-9)
        assert delta == 0.0


def test_logsumexp_certificate():
    c, a, _ = make_instance(LOGSUMEXP)
    lam, delta = smoothability_certificate(c)
    assert_allclose(lam, np.linalg.norm(a, 2) ** 2 * np.log(4.0), rtol=1e-9)
    assert delta == 0.0


def test_composite_value_bounds():
    """The surrogate brackets sigma(G(x)) by its certificate."""
    for surrogate in SURROGATES:
        c, a, b = make_instance(surrogate)
        lam, delta = smoothability_certificate(c)
        bound = lam / (c.beta_target - delta)
        rng = np.random.default_rng(2)
        for _ in range(30):
            x = rng.normal(size=3) * 2.0
            val, _ = composite_value_grad(c, x)
            exact = np.max(a @ x + b)
            assert val >= exact - bound - 1e-9
            assert val <= exact + bound + 1e-9
            if surrogate in (OPTIMAL_INNER, LOGSUMEXP):
                # both upper surrogates dominate the true function
                assert val >= exact - 1e-9


def test_composite_gradient_matches_central_differences():
    for surrogate in (OPTIMAL_GENERAL, LOGSUMEXP):
        c, _, _ = make_instance(surrogate)
        rng = np.random.default_rng(3)
        for _ in range(8):
            x = rng.normal(size=3)
            _, g = composite_value_grad(c, x)
            fd = central_diff(lambda q: composite_value_grad(c, q)[0], x)
            assert_allclose(g, fd, rtol=2e-5, atol=2e-7)


def test_composite_matches_plain_smoothing_for_identity_map():
    # G = I reduces the composite to the image-space smoothing itself
    from conesmooth.function_smoothing import MIN_GENERAL, eval_smoothing, make_smoothing

    sig = one_norm(2)
    c = CompositeSmoothing(sig, SmoothMap.affine(np.eye(2), np.zeros(2)),
                           3.0, OPTIMAL_GENERAL)
    spec = make_smoothing(compute_core(sig), MIN_GENERAL, beta=3.0)
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = rng.normal(size=2) * 2.0
        val, _ = composite_value_grad(c, x)
        assert_allclose(val, eval_smoothing(spec, x), atol=1e-12)


def test_composite_validation():
    sig = coordinate_max(3)
    g = SmoothMap.affine(np.eye(3), np.zeros(3))
    with pytest.raises(ValueError):
        CompositeSmoothing(sig, g, 1.0, "nesterov")
    # curvature floor: with L > 0 the target must exceed L_sigma * L
    curved = SmoothMap(lambda x: x, lambda x: np.eye(3), 1.0, 2.0)
    with pytest.raises(ValueError):
        CompositeSmoothing(sig, curved, 1.0, OPTIMAL_INNER)
    with pytest.raises(ValueError):
        CompositeSmoothing(euclidean_norm(3), g, 2.0, LOGSUMEXP)


def test_composite_descriptor():
    c, _, _ = make_instance(OPTIMAL_INNER, beta=6.0)
    d = c.descriptor()
    assert d["surrogate"] == OPTIMAL_INNER
    assert d["beta_target"] == 6.0
    assert d["delta"] == 0.0
    assert d["family"] == "max"
    assert_allclose(d["inner_beta"], 6.0 / c.smap.M ** 2)


# ------------------------------------------------------------- minimizer


def test_accelerated_minimize_quadratic():
    # (1/2)|x - 1|^2: well inside the beta = 1 regime
    target = np.array([1.0, -2.0, 0.5])

    def vg(x):
        d = np.asarray(x) - target
        return 0.5 * float(d @ d), d

    x, info = accelerated_minimize(vg, np.zeros(3), beta=1.0, eps=1e-10,
                                   opt_value=0.0)
    assert info["converged"]
    assert_allclose(x, target, atol=1e-4)
    assert info["final_gap"] <= 1e-10


def test_accelerated_minimize_zero_iterations_at_optimum():
    vg = lambda x: (0.5 * float(np.sum(np.asarray(x) ** 2)), np.asarray(x, float))
    x, info = accelerated_minimize(vg, np.zeros(2), beta=1.0, eps=1e-8,
                                   opt_value=0.0)
    assert info["iterations"] == 0


def test_accelerated_minimize_gradient_stopping():
    # without opt_value the gradient norm is the stopping criterion
    vg = lambda x: (0.5 * float(np.sum(np.asarray(x) ** 2)), np.asarray(x, float))
    x, info = accelerated_minimize(vg, np.ones(3), beta=1.0, eps=1e-6)
    assert info["converged"]
    assert np.linalg.norm(x) <= 1e-5


def test_accelerated_minimize_rejects_nonconvex():
    vg = lambda x: (-0.5 * float(np.sum(np.asarray(x) ** 2)),
                    -np.asarray(x, float))
    with pytest.raises(RuntimeError):
        accelerated_minimize(vg, np.ones(2), beta=1.0, eps=1e-6)


def test_accelerated_minimize_iteration_cap():
    # ill-conditioned quadratic cannot hit 1e-12 accuracy in three steps
    scale = np.array([1.0, 1e-4])

    def vg(x):
        x = np.asarray(x, float)
        return 0.5 * float(scale @ (x * x)), scale * x

    with pytest.raises(RuntimeError):
        accelerated_minimize(vg, 100.0 * np.ones(2), beta=1.0, eps=1e-12,
                             opt_value=0.0, max_iter=3)


# ------------------------------------------------------------- benchmark


def test_make_planted_minimax_properties():
    a, b, xstar, opt = make_planted_minimax(16, 5, seed=3)
    assert a.shape == (16, 5) and b.shape == (16,)
    assert_allclose(xstar, np.zeros(5))
    assert opt == 0.0
    # the planted optimum attains the max on several active rows
    vals = a @ xstar + b
    assert np.sum(np.abs(vals) < 1e-12) >= 2
    assert np.max(vals) == pytest.approx(0.0, abs=1e-12)
    # zero is a subgradient: sampled points never go below the optimum
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.normal(size=5) * 2.0
        assert np.max(a @ x + b) >= -1e-12


def test_planted_minimax_seeds_differ():
    a1, _, _, _ = make_planted_minimax(8, 3, seed=0)
    a2, _, _, _ = make_planted_minimax(8, 3, seed=1)
    assert np.max(np.abs(a1 - a2)) > 1e-3


def test_bench_record_serialization():
    r = BenchRecord("optimal", 8, 3, 1e-2, 5.0, 17, 1e-3, 0.01)
    d = r.to_dict()
    assert d["method"] == "optimal"
    assert d["iterations"] == 17
    assert d["final_gap"] == 1e-3


def test_run_minimax_bench_small():
    out = run_minimax_bench(n=16, d=4, eps=5e-2, seed=1)
    recs = out["records"]
    assert [r.method for r in recs] == ["optimal", "log-sum-exp"]
    for r in recs:
        assert r.final_gap <= 5e-2
        assert r.iterations >= 1
    assert out["iteration_ratio"] == pytest.approx(
        recs[1].iterations / recs[0].iterations)
    assert out["predicted_ratio"] == pytest.approx(
        np.sqrt(np.log(16.0) / compute_core(coordinate_max(16)).width))


def test_run_minimax_bench_single_method():
    out = run_minimax_bench(n=8, d=3, eps=1e-1, seed=2, methods=("optimal",))
    assert len(out["records"]) == 1
    assert "iteration_ratio" not in out
