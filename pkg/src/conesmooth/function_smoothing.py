"""Functional cores and the six extremal smoothings of a sublinear function.

The core of sigma is the epigraph of the price function

    pi(x) = max{<zeta, x> + ||zeta||^2 / 2 : zeta in dsigma(0)},

whose minimizer of r + ||x||^2 / 2 yields the center (x_c, r_c) and width
w = r_c + ||x_c||^2 / 2.  Six smoothings are derived from these data, a
minimal and a maximal one for each of the inner/general/outer regimes; all
closed forms are stored at beta = 1 and rescaled through a single code path
via T_{1/beta} f = (1/beta) f(beta .).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sublinear_catalog import (
    EUCLIDEAN_NORM, MAX, MAX_EIGEN, ONE_NORM, POLYTOPE, RELU, SIGNED_BOX,
    SPECTRAL_SIMPLEX, UNIT_BALL, WEIGHTED_INF_NORM, SublinearFn,
)
from .verify import ball_points, sphere_points

MIN_INNER = "min-inner"
MAX_INNER = "max-inner"
MIN_GENERAL = "min-general"
MAX_GENERAL = "max-general"
MIN_OUTER = "min-outer"
MAX_OUTER = "max-outer"

VARIANTS = (MIN_INNER, MAX_INNER, MIN_GENERAL, MAX_GENERAL, MIN_OUTER,
            MAX_OUTER)

# subtracted multiple of the width, and certified distance multiple, at beta=1
_OFFSET_FACTOR = {
    MIN_INNER: 0.0, MAX_INNER: 0.0,
    MIN_GENERAL: 0.5, MAX_GENERAL: 0.5,
    MIN_OUTER: 1.0, MAX_OUTER: 1.0,
}
_LAMBDA_FACTOR = {
    MIN_INNER: 1.0, MAX_INNER: 1.0,
    MIN_GENERAL: 0.5, MAX_GENERAL: 0.5,
    MIN_OUTER: 1.0, MAX_OUTER: 1.0,
}

_QP_VERTEX_LIMIT = 64


@dataclass(eq=False)
class FunctionalCore:
    """Center, height and width of the functional core of a sublinear fn."""

    base: SublinearFn
    center: np.ndarray
    center_height: float
    width: float
    unique: bool

    def descriptor(self):
        d = self.base.descriptor()
        d.update({
            "center": [float(v) for v in np.ravel(self.center)],
            "center_height": float(self.center_height),
            "width": float(self.width),
            "unique": bool(self.unique),
        })
        return d


@dataclass(eq=False)
class SmoothingSpec:
    """One of the six extremal smoothings at a smoothness level beta.

    ``lam`` is the certified distance constant: dist to sigma is at most
    lam / beta, with lam = w for the inner and outer variants and w / 2 for
    the general ones.  ``delta`` is always 0 for sublinear targets.
    """

    core: FunctionalCore
    variant: str
    beta: float
    lam: float
    delta: float = field(default=0.0)

    def descriptor(self):
        return {
            "family": self.core.base.family,
            "variant": self.variant,
            "beta": float(self.beta),
            "lambda": float(self.lam),
        }


def _inner(a, b):
    return float(np.vdot(np.ravel(a), np.ravel(b)))


def _sqnorm(a):
    return float(np.vdot(np.ravel(a), np.ravel(a)))


def price(core, x):
    """pi(x) = max over dsigma(0) of <zeta, x> + ||zeta||^2 / 2.

    Exact vertex maximization for polytopal support sets; closed-form
    maximizers for the ball, box and spectral families.
    """
    f = core.base
    x = f.point(x)
    verts = f.support.vertices
    if verts is not None:
        return float(np.max(verts @ x + 0.5 * np.sum(verts * verts, axis=1)))
    kind = f.support.kind
    if kind == UNIT_BALL:
        return float(np.linalg.norm(x)) + 0.5
    if kind == SIGNED_BOX:
        return f.value(x) + 0.5 * f.dim
    if kind == SPECTRAL_SIMPLEX:
        return f.value(x) + 0.5
    raise ValueError(f"no price rule for support kind {kind!r}")


def moreau_sublinear(f, x):
    """Moreau envelope (sigma box ||.||^2/2)(x) through the support projection.

    Equals ||x||^2/2 - dist(x, dsigma(0))^2/2, written in the expanded
    cancellation-free form <P(x), x> - ||P(x)||^2 / 2.
    """
    p = f.project_support(x)
    return _inner(p, f.point(x)) - 0.5 * _sqnorm(p)


def _simplex_qp(verts, x, tol=1e-10, max_iter=200000):
    # concave dual of the Moreau envelope of the price function:
    # maximize q(lam) = <zbar, x> + sum lam_i c_i - ||zbar||^2/2 over the
    # simplex, zbar = sum lam_i zeta_i, by projected gradient with step
    # 1/||Z||^2 and a gradient-mapping stop
    from .sublinear_catalog import project_simplex

    verts = np.asarray(verts, float)
    m = verts.shape[0]
    c = 0.5 * np.sum(verts * verts, axis=1)
    zx = verts @ x
    if m == 1:
        return float(zx[0]), verts[0].copy()
    lip = float(np.linalg.norm(verts, 2) ** 2)
    if lip == 0.0:
        return 0.0, np.zeros(verts.shape[1])
    lam = np.full(m, 1.0 / m)
    scale = 1.0 + float(np.linalg.norm(x))
    for _ in range(max_iter):
        zbar = verts.T @ lam
        grad = zx + c - verts @ zbar
        nxt = project_simplex(lam + grad / lip)
        move = lip * float(np.linalg.norm(nxt - lam))
        lam = nxt
        if move <= tol * scale:
            break
    else:
        raise RuntimeError("dual simplex QP did not reach tolerance")
    zbar = verts.T @ lam
    value = float(lam @ (zx + c)) - 0.5 * _sqnorm(zbar)
    return value, zbar


def moreau_of_price(core, x):
    """(pi box ||.||^2/2)(x) with its maximizer zbar.

    Runs the simplex-constrained dual QP when dsigma(0) is a polytope with
    at most 64 vertices; otherwise falls back to the closed form available
    exactly when the core is unique (then the envelope of pi coincides with
    the translated envelope of sigma).
    """
    f = core.base
    x = f.point(x)
    verts = f.support.vertices
    if verts is not None and verts.shape[0] <= _QP_VERTEX_LIMIT:
        value, zbar = _simplex_qp(verts, np.ravel(x))
        return value, zbar.reshape(f.shape)
    if core.unique:
        shifted = x - core.center
        value = core.center_height + moreau_sublinear(f, shifted)
        return value, f.project_support(shifted)
    raise ValueError(
        "support set is neither a small polytope nor a closed-form family")


def compute_core(f):
    """Center (x_c, r_c), width and uniqueness flag of the core of sigma.

    Closed forms for the named families; for a generic polytope the center
    solves min pi(x) + ||x||^2/2, obtained from the dual QP at x = 0 (the
    maximizer zbar gives x_c = -zbar, and the value is the width).
    """
    fam = f.family
    d = f.dim
    if fam == RELU:
        return FunctionalCore(f, np.array([-0.5]), 0.0, 0.125, True)
    if fam == EUCLIDEAN_NORM:
        return FunctionalCore(f, np.zeros(d), 0.5, 0.5, True)
    if fam == ONE_NORM:
        return FunctionalCore(f, np.zeros(d), 0.5 * d, 0.5 * d, True)
    if fam == WEIGHTED_INF_NORM:
        w = 0.5 * float(np.max(f.weights) ** 2)
        return FunctionalCore(f, np.zeros(d), w, w, d == 1)
    if fam == MAX:
        center = -np.full(d, 1.0 / d)
        return FunctionalCore(f, center, 0.5 - 1.0 / d, 0.5 * (1.0 - 1.0 / d),
                              True)
    if fam == MAX_EIGEN:
        center = -np.eye(d) / d
        return FunctionalCore(f, center, 0.5 - 1.0 / d, 0.5 * (1.0 - 1.0 / d),
                              True)
    if fam == POLYTOPE:
        value, zbar = _simplex_qp(f.support.vertices, np.zeros(d))
        center = -zbar
        height = value - 0.5 * _sqnorm(center)
        core = FunctionalCore(f, center, height, value, True)
        core.unique = _polytope_unique(core)
        return core
    raise ValueError(f"unknown family {fam!r}")


def _polytope_unique(core):
    # sampled test of pi = r_c + sigma(. - x_c): equality characterizes the
    # translated-epigraph case, which is what uniqueness of the smoothings
    # means for a polytopal support set
    f = core.base
    radius = 2.0 * (1.0 + f.support.max_norm() + np.linalg.norm(core.center))
    pts = ball_points(1000, f.shape, radius, seed=0)
    tol = 1e-8 * (1.0 + radius)
    for p in pts:
        lhs = price(core, p)
        rhs = core.center_height + f.value(p - core.center)
        if abs(lhs - rhs) > tol:
            return False
    return True


def make_smoothing(core, variant, beta=1.0):
    """Build the SmoothingSpec for one of the six variants at level beta."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be positive")
    lam = _LAMBDA_FACTOR[variant] * core.width
    return SmoothingSpec(core, variant, beta, lam)


def _is_minimal(variant):
    return variant.startswith("min")


def eval_smoothing(s, x):
    """Evaluate the smoothing at x.

    Minimal variants (and every variant of a unique family) go through the
    translated Moreau envelope of sigma; maximal variants of non-unique
    families run the dual QP on the price function.  The beta-rescaling and
    the width offsets share this single path.
    """
    core = s.core
    f = core.base
    x = f.point(x)
    xb = s.beta * x
    if _is_minimal(s.variant) or core.unique:
        base_val = core.center_height + moreau_sublinear(f, xb - core.center)
    else:
        base_val, _ = moreau_of_price(core, xb)
    return (base_val - _OFFSET_FACTOR[s.variant] * core.width) / s.beta


def grad_smoothing(s, x):
    """Gradient of the smoothing at x.

    For the minimal variants this is the support projection of the rescaled
    translated argument, P_{dsigma(0)}(beta x - x_c); for maximal variants
    it is the dual QP maximizer (Danskin).  The offsets do not shift
    gradients and the two beta factors cancel.
    """
    core = s.core
    f = core.base
    x = f.point(x)
    xb = s.beta * x
    if _is_minimal(s.variant) or core.unique:
        return f.project_support(xb - core.center)
    _, zbar = moreau_of_price(core, xb)
    return zbar


def scale_function(s, eta):
    """Spec of T_eta f: x -> eta f(x/eta); beta -> beta/eta.

    The certified sup-distance lam/beta picks up the factor eta
    automatically; lam itself is scale invariant.
    """
    eta = float(eta)
    if not eta > 0:
        raise ValueError("eta must be positive")
    return SmoothingSpec(s.core, s.variant, s.beta / eta, s.lam, s.delta)


def estimate_distance(s, radius=None, samples=2000, seed=0):
    """Sampled lower bound on sup |f - sigma|.

    Evaluates the gap on a deterministic low-discrepancy ball sample plus
    the structured points {0, +-x_c, x_c/beta, rescaled support vertices,
    radial shells}, where the catalog families attain their sup.  Monotone
    in ``samples`` (prefix-stable sampling); pairs with the theoretical
    upper bound lam/beta.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    core = s.core
    f = core.base
    center = np.asarray(core.center, float)
    if radius is None:
        radius = 4.0 * (1.0 + f.support.max_norm()
                        + float(np.linalg.norm(np.ravel(center))))
    radius = float(radius)
    if not radius > 0:
        raise ValueError("radius must be positive")

    pts = [np.zeros(f.shape), center.reshape(f.shape),
           -center.reshape(f.shape), center.reshape(f.shape) / s.beta]
    verts = f.support.vertices
    if verts is not None:
        for v in verts:
            vv = v.reshape(f.shape)
            for c in (1.0, -1.0, 2.0, -2.0):
                pts.append(c * vv / s.beta)
    for r in (1.0 / s.beta, 2.0 / s.beta, radius):
        for u in sphere_points(16, f.shape, seed + 1):
            pts.append(r * u)
    pts.extend(ball_points(samples, f.shape, radius, seed))

    best = 0.0
    for p in pts:
        gap = abs(eval_smoothing(s, p) - f.value(p))
        if gap > best:
            best = gap
    return best
