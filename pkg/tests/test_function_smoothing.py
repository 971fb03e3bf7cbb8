"""Cores, optimal smoothings, and distance estimates for catalog functions.

Expected values come from three independent sources: hand-derived closed
forms (smallest enclosing balls of the support sets), dense-grid infimal
convolutions, and exhaustive active-set enumeration of the small QPs.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conesmooth.function_smoothing import (
    MAX_GENERAL,
    MAX_INNER,
    MAX_OUTER,
    MIN_GENERAL,
    MIN_INNER,
    MIN_OUTER,
    VARIANTS,
    compute_core,
    estimate_distance,
    eval_smoothing,
    grad_smoothing,
    make_smoothing,
    moreau_of_price,
    moreau_sublinear,
    price,
    scale_function,
)
from conesmooth.sublinear_catalog import (
    coordinate_max,
    euclidean_norm,
    eval_sublinear,
    max_eigen,
    one_norm,
    polytope_support,
    relu,
    weighted_inf_norm,
)
from conesmooth.verify import ball_points

from .oracles import (
    central_diff,
    enumerate_simplex_max,
    grid_inf_convolution,
    weighted_max_outer_large,
    weighted_max_outer_small,
)

TRIANGLE = [[1.0, 0.2], [-0.5, 0.8], [-0.4, -1.1]]


def sample_points(f, count, seed, radius=3.0):
    pts = ball_points(count, f.shape, radius=radius, seed=seed)
    return [f.point(p) for p in pts]


# ------------------------------------------------------------------ cores


def test_relu_core():
    """Support set [0, 1]: ball center 1/2, so x = -1/2, w = 1/8."""
    c = compute_core(relu())
    assert_allclose(c.center, [-0.5])
    assert_allclose(c.center_height, 0.0)
    assert_allclose(c.width, 0.125)
    assert c.unique is True


def test_euclidean_core():
    c = compute_core(euclidean_norm(4))
    assert_allclose(c.center, np.zeros(4))
    assert_allclose(c.center_height, 0.5)
    assert_allclose(c.width, 0.5)
    assert c.unique is True


def test_one_norm_core():
    # enclosing ball of the cube [-1, 1]^d has radius sqrt(d)
    for d in (2, 3, 5):
        c = compute_core(one_norm(d))
        assert_allclose(c.center, np.zeros(d))
        assert_allclose(c.width, 0.5 * d)
        assert_allclose(c.center_height, 0.5 * d)
        assert c.unique is True


def test_weighted_inf_core():
    c = compute_core(weighted_inf_norm((1.0, 2.0)))
    assert_allclose(c.center, np.zeros(2))
    assert_allclose(c.width, 2.0)
    assert_allclose(c.center_height, 2.0)
    assert c.unique is False


def test_weighted_inf_core_unique_only_in_one_dim():
    assert compute_core(weighted_inf_norm((1.7,))).unique is True


def test_coordinate_max_core():
    """Enclosing ball of the simplex is centered at e/d with w = (1-1/d)/2."""
    for d in (2, 5, 50):
        c = compute_core(coordinate_max(d))
        assert_allclose(c.center, -np.ones(d) / d)
        assert_allclose(c.width, 0.5 * (1.0 - 1.0 / d))
        assert_allclose(c.center_height, 0.5 - 1.0 / d)
        assert c.unique is True


def test_max_eigen_core():
    d = 3
    c = compute_core(max_eigen(d))
    assert_allclose(c.center, -np.eye(d) / d)
    assert_allclose(c.width, 0.5 * (1.0 - 1.0 / d))
    assert_allclose(c.center_height, 0.5 - 1.0 / d)
    assert c.unique is True


def test_triangle_core():
    """Acute triangle: enclosing ball is the circumball.

    The circumcenter solves the two perpendicular-bisector equations
    2 (v_i - v_0) . z = |v_i|^2 - |v_0|^2; the core center is its negation
    and the width is half the squared circumradius.
    """
    verts = np.asarray(TRIANGLE)
    lhs = 2.0 * (verts[1:] - verts[0])
    rhs = np.sum(verts[1:] ** 2, axis=1) - np.sum(verts[0] ** 2)
    cc = np.linalg.solve(lhs, rhs)
    radii = np.linalg.norm(verts - cc, axis=1)
    assert_allclose(radii, radii[0])
    # all angles acute, so the circumball is the smallest enclosing ball
    for i in range(3):
        a, b = verts[(i + 1) % 3] - verts[i], verts[(i + 2) % 3] - verts[i]
        assert a @ b > 0
    c = compute_core(polytope_support(TRIANGLE))
    assert_allclose(c.center, -cc, atol=1e-9)
    assert_allclose(c.width, 0.5 * radii[0] ** 2, atol=1e-9)
    assert c.unique is True


def test_singleton_polytope_core():
    # a single vertex v: price is linear, center -v, height -|v|^2/2, w = 0
    c = compute_core(polytope_support([[0.6, -0.8]]))
    assert_allclose(c.center, [-0.6, 0.8])
    assert_allclose(c.center_height, -0.5)
    assert_allclose(c.width, 0.0, atol=1e-12)
    assert c.unique is True


def test_width_is_height_plus_half_center_norm():
    for f in [relu(), one_norm(3), weighted_inf_norm((1.0, 2.0)),
              coordinate_max(4), polytope_support(TRIANGLE)]:
        c = compute_core(f)
        w = c.center_height + 0.5 * float(np.sum(np.asarray(c.center) ** 2))
        assert_allclose(c.width, w, atol=1e-9)


# ------------------------------------------------------------------ price


def test_price_closed_forms():
    assert_allclose(price(compute_core(relu()), [0.3]), 0.8)
    assert_allclose(price(compute_core(relu()), [-2.0]), 0.0)
    c = compute_core(euclidean_norm(2))
    assert_allclose(price(c, [3.0, 4.0]), 5.5)
    c = compute_core(one_norm(2))
    assert_allclose(price(c, [1.0, -2.0]), 4.0)
    c = compute_core(weighted_inf_norm((1.0, 2.0)))
    assert_allclose(price(c, [2.0, 0.0]), max(2.5, 2.0))
    assert_allclose(price(c, [0.0, 1.0]), max(0.5, 4.0))
    c = compute_core(max_eigen(2))
    assert_allclose(price(c, np.eye(2)), 1.5)


def test_price_dominates_function():
    rng = np.random.default_rng(21)
    for f in [relu(), euclidean_norm(3), coordinate_max(3),
              weighted_inf_norm((1.0, 2.0))]:
        c = compute_core(f)
        for p in sample_points(f, 25, 1):
            assert price(c, p) >= eval_sublinear(f, p) - 1e-12


def test_price_vertex_form_matches_support_shift():
    # price(x) = max_i <v_i, x> + |v_i|^2 / 2 for vertex families
    f = polytope_support(TRIANGLE)
    c = compute_core(f)
    verts = np.asarray(TRIANGLE)
    for p in sample_points(f, 10, 2):
        want = np.max(verts @ p + 0.5 * np.sum(verts**2, axis=1))
        assert_allclose(price(c, p), want)


# ------------------------------------------------- infimal convolutions


def test_moreau_sublinear_matches_grid():
    cases = [
        (relu(), lambda U: np.maximum(0.0, U[:, 0])),
        (euclidean_norm(2), lambda U: np.linalg.norm(U, axis=1)),
        (coordinate_max(2), lambda U: np.max(U, axis=1)),
        (weighted_inf_norm((1.0, 2.0)),
         lambda U: np.maximum(np.abs(U[:, 0]), 2.0 * np.abs(U[:, 1]))),
    ]
    for f, batch in cases:
        for p in sample_points(f, 6, 3, radius=2.0):
            got = moreau_sublinear(f, p)
            want = grid_inf_convolution(batch, p, 3.5)
            assert_allclose(got, want, atol=2e-7)


def test_moreau_of_price_matches_enumeration():
    rng = np.random.default_rng(22)
    for f in [relu(), weighted_inf_norm((1.0, 2.0)), coordinate_max(4),
              polytope_support(TRIANGLE)]:
        c = compute_core(f)
        verts = f.support.vertices
        for _ in range(15):
            p = rng.normal(size=f.ambient_dim) * 2.0
            val, zbar = moreau_of_price(c, p)
            want, _ = enumerate_simplex_max(verts, p)
            assert_allclose(val, want, atol=1e-8)
            # the maximizer certifies its own value
            cvec = 0.5 * np.sum(np.asarray(verts) ** 2, axis=1)
            attained = zbar @ p - 0.5 * zbar @ zbar
            lam_val = val - attained
            assert lam_val <= np.max(cvec) + 1e-8


def test_moreau_of_price_spectral_closed_form():
    # unique spectral core falls back to the translated Moreau path
    f = max_eigen(2)
    c = compute_core(f)
    a = np.array([[1.0, 0.3], [0.3, -0.5]])
    val, zbar = moreau_of_price(c, a)
    shifted = f.point(a) - c.center
    want = c.center_height + moreau_sublinear(f, shifted) + float(
        np.sum(c.center * a))
    # direct identity: M_pi(x) = r + M_sigma(x - c) + <c, x> + |c|^2/2
    want += 0.5 * float(np.sum(np.asarray(c.center) ** 2))
    assert_allclose(val, want, atol=1e-9)
    assert zbar.shape == (2, 2)


# ------------------------------------------------- smoothing evaluations


def test_variant_set():
    assert VARIANTS == (MIN_INNER, MAX_INNER, MIN_GENERAL, MAX_GENERAL,
                        MIN_OUTER, MAX_OUTER)


def test_relu_general_value_at_zero():
    s = make_smoothing(compute_core(relu()), MIN_GENERAL, beta=1.0)
    assert_allclose(eval_smoothing(s, [0.0]), 0.0625, atol=1e-12)


def test_euclidean_general_value_at_zero():
    s = make_smoothing(compute_core(euclidean_norm(3)), MIN_GENERAL, beta=1.0)
    assert_allclose(eval_smoothing(s, np.zeros(3)), 0.25, atol=1e-12)


def test_offset_identities():
    """f_in - f_gen = w/(2 beta) and f_in - f_out = w/beta pointwise."""
    for f in [relu(), euclidean_norm(2), coordinate_max(3),
              weighted_inf_norm((1.0, 2.0))]:
        c = compute_core(f)
        for beta in (0.5, 1.0, 4.0):
            s_in = make_smoothing(c, MIN_INNER, beta)
            s_gen = make_smoothing(c, MIN_GENERAL, beta)
            s_out = make_smoothing(c, MIN_OUTER, beta)
            for p in sample_points(f, 10, 4):
                vi = eval_smoothing(s_in, p)
                vg = eval_smoothing(s_gen, p)
                vo = eval_smoothing(s_out, p)
                assert_allclose(vi - vg, 0.5 * c.width / beta, atol=1e-10)
                assert_allclose(vi - vo, c.width / beta, atol=1e-10)


def test_min_max_agree_for_unique_cores():
    for f in [relu(), euclidean_norm(2), coordinate_max(3), max_eigen(2),
              polytope_support(TRIANGLE)]:
        c = compute_core(f)
        assert c.unique
        for lo, hi in [(MIN_INNER, MAX_INNER), (MIN_GENERAL, MAX_GENERAL),
                       (MIN_OUTER, MAX_OUTER)]:
            s_lo = make_smoothing(c, lo)
            s_hi = make_smoothing(c, hi)
            for p in sample_points(f, 8, 5):
                assert_allclose(eval_smoothing(s_lo, p),
                                eval_smoothing(s_hi, p), atol=1e-8)


def test_min_dominates_max():
    # lowercase family is pointwise largest among optimal smoothings
    f = weighted_inf_norm((1.0, 2.0))
    c = compute_core(f)
    assert not c.unique
    for variant_lo, variant_hi in [(MIN_INNER, MAX_INNER),
                                   (MIN_GENERAL, MAX_GENERAL),
                                   (MIN_OUTER, MAX_OUTER)]:
        s_lo = make_smoothing(c, variant_lo)
        s_hi = make_smoothing(c, variant_hi)
        gap = 0.0
        for p in sample_points(f, 40, 6):
            lo = eval_smoothing(s_lo, p)
            hi = eval_smoothing(s_hi, p)
            assert lo >= hi - 1e-10
            gap = max(gap, lo - hi)
    assert gap > 1e-3


def test_weighted_inf_outer_closed_forms():
    """Both outer 1-smoothings match the hand-derived piecewise formulas."""
    c = compute_core(weighted_inf_norm((1.0, 2.0)))
    s_large = make_smoothing(c, MIN_OUTER)
    s_small = make_smoothing(c, MAX_OUTER)
    for p in ball_points(100, (2,), radius=4.0, seed=7):
        assert_allclose(eval_smoothing(s_large, p),
                        weighted_max_outer_large(p), atol=1e-10)
        assert_allclose(eval_smoothing(s_small, p),
                        weighted_max_outer_small(p), atol=1e-10)
    assert_allclose(eval_smoothing(s_large, [2.0, 0.0]), 1.5)
    assert_allclose(eval_smoothing(s_small, [2.0, 0.0]), 0.125)


def test_max_general_matches_grid_formula():
    """General smoothing of the max equals conv(1/2 + max) - (1 - 1/d)/4."""
    d = 2
    s = make_smoothing(compute_core(coordinate_max(d)), MIN_GENERAL)
    for p in ball_points(8, (d,), radius=2.5, seed=8):
        want = grid_inf_convolution(
            lambda U: 0.5 + np.max(U, axis=1), p, 3.5) - 0.25 * (1 - 1 / d)
        assert_allclose(eval_smoothing(s, p), want, atol=1e-6)


def test_sandwich_inner_and_outer():
    for f in [relu(), euclidean_norm(2), one_norm(2), coordinate_max(3),
              weighted_inf_norm((1.0, 2.0))]:
        c = compute_core(f)
        for beta in (0.5, 1.0, 4.0):
            s_in = make_smoothing(c, MIN_INNER, beta)
            s_out = make_smoothing(c, MAX_OUTER, beta)
            for p in sample_points(f, 25, 9):
                v = eval_sublinear(f, p)
                assert eval_smoothing(s_in, p) >= v - 1e-10
                assert eval_smoothing(s_out, p) <= v + 1e-10


def test_beta_validation():
    c = compute_core(relu())
    with pytest.raises(ValueError):
        make_smoothing(c, MIN_INNER, beta=0.0)
    with pytest.raises(ValueError):
        make_smoothing(c, "inner", beta=1.0)


def test_spec_descriptor_serializes_lambda():
    s = make_smoothing(compute_core(relu()), MIN_OUTER, beta=2.0)
    d = s.descriptor()
    assert d["variant"] == MIN_OUTER
    assert d["beta"] == 2.0
    assert_allclose(d["lambda"], 0.125)
    assert s.delta == 0.0


def test_lambda_values():
    c = compute_core(coordinate_max(5))
    w = c.width
    assert_allclose(make_smoothing(c, MIN_INNER, 2.0).lam, w)
    assert_allclose(make_smoothing(c, MIN_GENERAL, 2.0).lam, 0.5 * w)
    assert_allclose(make_smoothing(c, MAX_OUTER, 2.0).lam, w)


# -------------------------------------------------------------- gradients


def test_gradients_match_central_differences():
    rng = np.random.default_rng(23)
    for f in [relu(), euclidean_norm(2), one_norm(2),
              weighted_inf_norm((1.0, 2.0)), coordinate_max(3),
              polytope_support(TRIANGLE)]:
        c = compute_core(f)
        for variant in (MIN_INNER, MIN_GENERAL, MAX_OUTER):
            s = make_smoothing(c, variant, beta=1.5)
            for _ in range(5):
                p = rng.normal(size=f.shape) * 2.0
                g = grad_smoothing(s, p)
                fd = central_diff(lambda q: eval_smoothing(s, q), p)
                assert_allclose(np.ravel(g), np.ravel(fd),
                                rtol=2e-5, atol=2e-7)


def test_matrix_gradient_matches_directional_differences():
    # coordinate differences break symmetry, so probe along symmetric rays
    f = max_eigen(2)
    s = make_smoothing(compute_core(f), MIN_GENERAL, beta=1.5)
    rng = np.random.default_rng(25)
    h = 1e-6
    for _ in range(10):
        a = rng.normal(size=(2, 2))
        x = 0.5 * (a + a.T)
        d = rng.normal(size=(2, 2))
        d = 0.5 * (d + d.T)
        d /= np.linalg.norm(d)
        g = grad_smoothing(s, x)
        fd = (eval_smoothing(s, x + h * d) - eval_smoothing(s, x - h * d)) / (2 * h)
        assert_allclose(float(np.sum(g * d)), fd, rtol=2e-5, atol=2e-7)


def test_gradient_lies_in_support_set():
    # optimal smoothing gradients are support points of the base function
    for f in [relu(), weighted_inf_norm((1.0, 2.0)), coordinate_max(3)]:
        c = compute_core(f)
        for variant in (MIN_GENERAL, MAX_GENERAL):
            s = make_smoothing(c, variant, beta=2.0)
            for p in sample_points(f, 15, 10):
                g = np.asarray(grad_smoothing(s, p))
                assert_allclose(f.project_support(g), g, atol=1e-6)


def test_gradient_lipschitz_bound():
    rng = np.random.default_rng(24)
    for beta in (0.5, 1.0, 4.0):
        s = make_smoothing(compute_core(one_norm(3)), MIN_GENERAL, beta)
        worst = 0.0
        for _ in range(200):
            a = rng.normal(size=3) * 2.0
            b = a + rng.normal(size=3) * 1e-3
            ga = np.asarray(grad_smoothing(s, a))
            gb = np.asarray(grad_smoothing(s, b))
            denom = np.linalg.norm(a - b)
            worst = max(worst, np.linalg.norm(ga - gb) / denom)
        assert worst <= beta * (1.0 + 1e-6)


# --------------------------------------------------------------- scaling


def test_scale_function_identity():
    """Scaling by eta gives eta f(x / eta) with lambda unchanged."""
    c = compute_core(coordinate_max(2))
    s = make_smoothing(c, MIN_GENERAL, beta=2.0)
    t = scale_function(s, 4.0)
    assert_allclose(t.beta, 0.5)
    assert_allclose(t.lam, s.lam)
    for p in ball_points(10, (2,), radius=2.0, seed=11):
        assert_allclose(eval_smoothing(t, p),
                        4.0 * eval_smoothing(s, np.asarray(p) / 4.0),
                        atol=1e-10)


def test_scale_function_validation():
    s = make_smoothing(compute_core(relu()), MIN_INNER)
    with pytest.raises(ValueError):
        scale_function(s, 0.0)


def test_beta_rescaling_consistency():
    # evaluating at beta equals scaling the beta=1 smoothing by 1/beta
    c = compute_core(euclidean_norm(2))
    base = make_smoothing(c, MIN_OUTER, beta=1.0)
    direct = make_smoothing(c, MIN_OUTER, beta=4.0)
    scaled = scale_function(base, 0.25)
    for p in ball_points(10, (2,), radius=2.0, seed=12):
        assert_allclose(eval_smoothing(direct, p), eval_smoothing(scaled, p),
                        atol=1e-12)


# ------------------------------------------------------------- distances


def test_estimate_distance_relu():
    s = make_smoothing(compute_core(relu()), MIN_GENERAL)
    assert_allclose(estimate_distance(s), 0.0625, atol=1e-9)


def test_estimate_distance_max_family():
    for d in (2, 5):
        c = compute_core(coordinate_max(d))
        for beta in (0.5, 1.0, 4.0):
            s = make_smoothing(c, MIN_GENERAL, beta)
            want = 0.25 * (1.0 - 1.0 / d) / beta
            assert_allclose(estimate_distance(s), want, atol=1e-9)


def test_estimate_distance_one_norm_outer():
    s = make_smoothing(compute_core(one_norm(3)), MIN_OUTER)
    assert_allclose(estimate_distance(s), 1.5, atol=1e-9)


def test_estimate_distance_never_exceeds_bound():
    """Measured sup gaps stay within the certified lambda / beta."""
    for f in [relu(), euclidean_norm(2), one_norm(2), coordinate_max(3),
              weighted_inf_norm((1.0, 2.0))]:
        c = compute_core(f)
        for variant in VARIANTS:
            for beta in (0.5, 2.0):
                s = make_smoothing(c, variant, beta)
                d = estimate_distance(s, samples=300, seed=13)
                assert d <= s.lam / beta + 1e-9


def test_estimate_distance_validation():
    s = make_smoothing(compute_core(relu()), MIN_INNER)
    with pytest.raises(ValueError):
        estimate_distance(s, samples=0)
