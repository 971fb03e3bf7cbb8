"""Smoothings of convex cones by their conic cores.

A closed convex cone K with nonempty-interior core C_K = {x : x + B(0,1)
within K} admits a family of smoothed sets V whose recession behaviour
approximates K while keeping a uniformly curved boundary: with center
x_K = P_{C_K}(0) and width w_K = ||x_K|| - 1, each variant scales a base
set (the shifted cone x_K + K for the minimal rows, the full core C_K for
the maximal rows) by 1/(1 + r) and fattens it by a unit ball.  The scale
r in {0, w/2, w} selects inner, optimally centered, or outer placement,
with one-sided Hausdorff error w, w/(2+w), w/(1+w) at beta = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numeric_core
from .verify import ball_points, sphere_points, gaussian_points, halton, \
    bisect_boundary

ORTHANT = "orthant"
SECOND_ORDER = "second-order"
PSD = "psd"
EXPONENTIAL = "exponential"
LIFTED = "lifted"

MIN_INNER = "min-inner"
MAX_INNER = "max-inner"
MIN_GENERAL = "min-general"
MAX_GENERAL = "max-general"
MIN_OUTER = "min-outer"
MAX_OUTER = "max-outer"
VARIANTS = (MIN_INNER, MAX_INNER, MIN_GENERAL, MAX_GENERAL,
            MIN_OUTER, MAX_OUTER)

_SCALE_FACTOR = {"inner": 0.0, "general": 0.5, "outer": 1.0}

_EXP_CORE_SAMPLES = 20000
_EXP_PROJ_SAMPLES = 4000


def _regime(variant):
    if variant not in VARIANTS:
        raise ValueError("unknown variant %r" % (variant,))
    return variant.split("-", 1)[1]


class ConeModel:
    """Base class for catalog cones: membership, projection, sampling."""

    kind = None
    tol = 1e-9
    approximate_projection = False

    def __init__(self, shape):
        self.shape = tuple(shape)
        self.ambient_dim = int(np.prod(self.shape))

    def point(self, x):
        x = np.asarray(x, float)
        if x.shape != self.shape:
            x = x.reshape(self.shape)
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite point")
        return x

    def membership(self, x, tol=None):
        raise NotImplementedError

    def project(self, x):
        raise NotImplementedError

    def interior_point(self):
        raise NotImplementedError

    def sample_members(self, n, seed=0):
        raise NotImplementedError

    def normal_sampler(self, seed, n):
        return numeric_core.sample_normal_fan(self, n, seed)

    def descriptor(self):
        return {"kind": self.kind, "shape": list(self.shape)}


class Orthant(ConeModel):
    """Nonnegative orthant in R^d."""

    kind = ORTHANT

    def __init__(self, dim):
        if int(dim) < 1:
            raise ValueError("dim must be >= 1")
        super().__init__((int(dim),))
        self.dim = int(dim)

    def membership(self, x, tol=None):
        x = self.point(x)
        tol = self.tol if tol is None else tol
        scale = 1.0 + float(np.abs(x).max(initial=0.0))
        return float(x.min()) >= -tol * scale

    def project(self, x):
        return np.maximum(self.point(x), 0.0)

    def interior_point(self):
        return np.ones(self.dim)

    def sample_members(self, n, seed=0):
        g = gaussian_points(n, self.dim + 1, seed)
        return np.abs(g[:, :self.dim]) * np.exp(0.5 * g[:, self.dim:])


class SecondOrder(ConeModel):
    """Second-order cone {(u, s) in R^d x R : ||u|| <= s}."""

    kind = SECOND_ORDER

    def __init__(self, dim):
        if int(dim) < 1:
            raise ValueError("dim must be >= 1")
        super().__init__((int(dim) + 1,))
        self.dim = int(dim)

    def membership(self, x, tol=None):
        x = self.point(x)
        tol = self.tol if tol is None else tol
        scale = 1.0 + float(np.linalg.norm(x))
        return float(np.linalg.norm(x[:-1])) <= float(x[-1]) + tol * scale

    def project(self, x):
        x = self.point(x)
        u, s = x[:-1], float(x[-1])
        nu = float(np.linalg.norm(u))
        if nu <= s:
            return x.copy()
        if nu <= -s:
            return np.zeros_like(x)
        alpha = 0.5 * (1.0 + s / nu)
        out = np.empty_like(x)
        out[:-1] = alpha * u
        out[-1] = alpha * nu
        return out

    def interior_point(self):
        out = np.zeros(self.dim + 1)
        out[-1] = 1.0
        return out

    def sample_members(self, n, seed=0):
        g = gaussian_points(n, self.dim + 2, seed)
        u = g[:, :self.dim]
        out = np.empty((n, self.dim + 1))
        out[:, :-1] = u
        out[:, -1] = np.linalg.norm(u, axis=1) + np.abs(g[:, self.dim])
        return out * np.exp(0.5 * g[:, self.dim + 1:])

    def polar_boundary(self, n, seed=0):
        u = sphere_points(n, (self.dim,), seed)
        rows = np.empty((n, self.dim + 1))
        rows[:, :-1] = u
        rows[:, -1] = -1.0
        return rows / np.sqrt(2.0)


class PSDCone(ConeModel):
    """Cone of symmetric positive semidefinite d x d matrices."""

    kind = PSD

    def __init__(self, dim):
        if int(dim) < 1:
            raise ValueError("dim must be >= 1")
        super().__init__((int(dim), int(dim)))
        self.dim = int(dim)

    def point(self, x):
        x = super().point(x)
        nrm = float(np.linalg.norm(x))
        if float(np.linalg.norm(x - x.T)) > 1e-8 * (1.0 + nrm):
            raise ValueError("psd cone expects a symmetric matrix")
        return 0.5 * (x + x.T)

    def membership(self, x, tol=None):
        from .sublinear_catalog import jacobi_eigh
        x = self.point(x)
        tol = self.tol if tol is None else tol
        w, _ = jacobi_eigh(x)
        scale = 1.0 + float(np.linalg.norm(x))
        return float(w[0]) >= -tol * scale

    def project(self, x):
        from .sublinear_catalog import jacobi_eigh
        x = self.point(x)
        w, v = jacobi_eigh(x)
        wp = np.maximum(w, 0.0)
        return (v * wp) @ v.T

    def interior_point(self):
        return np.eye(self.dim)

    def sample_members(self, n, seed=0):
        d = self.dim
        g = gaussian_points(n, d * d, seed).reshape(n, d, d)
        return np.einsum("nij,nik->njk", g, g) / d

    def polar_boundary(self, n, seed=0):
        u = sphere_points(n, (self.dim,), seed)
        return -np.einsum("ni,nj->nij", u, u)


class ExponentialCone(ConeModel):
    """Exponential cone cl{(x, y, z) : y > 0, z >= y exp(x / y)}.

    Membership is closed-form; projection falls back to a cached
    polyhedral outer model built from sampled polar normals, so projected
    points carry a discretization error and the model is flagged
    approximate.
    """

    kind = EXPONENTIAL
    tol = 1e-6
    approximate_projection = True
    _RAY_EDGE = 1e-12

    def __init__(self):
        super().__init__((3,))
        self._proj_normals = None

    def membership(self, x, tol=None):
        x = self.point(x)
        tol = self.tol if tol is None else tol
        scale = 1.0 + float(np.linalg.norm(x))
        a, y, z = float(x[0]), float(x[1]), float(x[2])
        if y > self._RAY_EDGE:
            ratio = a / y
            if ratio > 700.0:  # y * exp(ratio) overflows any float z
                return False
            return y * np.exp(ratio) - z <= tol * scale
        if y >= -max(self._RAY_EDGE, tol * scale):
            # boundary ray: closure adds {x <= 0, y = 0, z >= 0}
            return a <= tol * scale and z >= -tol * scale
        return False

    def _normals(self):
        if self._proj_normals is None:
            self._proj_normals = numeric_core.sample_normal_fan(
                self, _EXP_PROJ_SAMPLES, seed=0)
        return self._proj_normals

    def project(self, x):
        x = self.point(x)
        if self.membership(x):
            return x.copy()
        rows = self._normals()
        return numeric_core.project_halfspaces(rows, 0.0, x).reshape(3)

    def interior_point(self):
        return np.array([-1.0, 1.0, 2.0])

    def sample_members(self, n, seed=0):
        g = gaussian_points(n, 4, seed)
        out = np.empty((n, 3))
        for i in range(n):
            if i % 5 == 4:
                out[i] = (-abs(g[i, 0]), 0.0, abs(g[i, 2]))
            else:
                y = np.exp(0.7 * g[i, 1])
                ratio = 1.5 * g[i, 0]
                out[i] = (ratio * y, y,
                          y * np.exp(ratio) * (1.0 + abs(g[i, 2])))
        return out

    def polar_boundary(self, n, seed=0):
        """Unit polar normals: the curve (1, t, -e^(t-1)) plus limit rays.

        The two limiting directions (0,-1,0) and (0,0,-1) lead the
        stream so every prefix contains them; curve parameters follow a
        low-discrepancy sequence, keeping prefixes nested across n.
        """
        n = int(n)
        rows = [np.array([0.0, -1.0, 0.0]), np.array([0.0, 0.0, -1.0])]
        m = max(n - 2, 0)
        if m:
            t = -19.0 + 39.0 * halton(m, 1, seed)[:, 0]
            curve = np.stack(
                [np.ones(m), t, -np.exp(t - 1.0)], axis=1)
            rows.extend(curve)
        rows = np.array(rows[:n])
        return rows / np.linalg.norm(rows, axis=1, keepdims=True)


class LiftedCone(ConeModel):
    """Cone over a scaled copy of a bounded convex set C.

    K = cl cone({(x - x0, 1) : x in C}) for an interior point x0 whose
    inscribed ball B(x0, R) lies inside C; membership only needs the set
    oracle.  The core then contains the point (0, sqrt(1 + R^2)), whose
    normalized height bounds the smoothing quality of every set
    sandwiched through this lift.
    """

    kind = LIFTED
    tol = 1e-9
    _RECESSION_SCALE = 1e6

    def __init__(self, set_membership, x0, radius):
        x0 = np.asarray(x0, float).ravel()
        super().__init__((x0.size + 1,))
        self.set_membership = set_membership
        self.x0 = x0
        self.radius = float(radius)

    def membership(self, x, tol=None):
        x = self.point(x)
        tol = self.tol if tol is None else tol
        v, r = x[:-1], float(x[-1])
        scale = 1.0 + float(np.linalg.norm(x))
        if r > tol * scale:
            return bool(self.set_membership(self.x0 + v / r))
        if r >= -tol * scale:
            # recession direction: for convex C one far probe decides
            return bool(self.set_membership(
                self.x0 + self._RECESSION_SCALE * v))
        return False

    def project(self, x):
        raise NotImplementedError("lifted cones carry no projection oracle")

    def interior_point(self):
        out = np.zeros(self.ambient_dim)
        out[-1] = 1.0
        return out

    def sample_members(self, n, seed=0):
        d = self.x0.size
        pts = ball_points(n, (d,), radius=self.radius, seed=seed)
        kept = []
        for p in pts:
            if self.set_membership(self.x0 + p):
                kept.append(p)
        if not kept:
            kept = [np.zeros(d)]
        kept = np.array(kept)
        r = np.exp(0.5 * gaussian_points(len(kept), 1, seed + 3)[:, 0])
        out = np.empty((len(kept), d + 1))
        out[:, :-1] = kept * r[:, None]
        out[:, -1] = r
        return out

    def core_point(self):
        """The certified core member (0, sqrt(1 + R^2))."""
        out = np.zeros(self.ambient_dim)
        out[-1] = np.sqrt(1.0 + self.radius ** 2)
        return out

    def width_bound(self):
        """Lower bound on achievable relative accuracy: 1 - R/sqrt(1+R^2)."""
        r = self.radius
        return 1.0 - r / np.sqrt(1.0 + r * r)


def conic_lift(set_membership, x0, radius, check_samples=100):
    """Lift a bounded convex set to its homogenizing cone.

    ``set_membership`` is a boolean oracle for C, ``x0`` an interior
    point, ``radius`` an enclosing-ball radius around x0.  Spot-checks
    that sampled points of B(x0, radius) classify consistently before
    returning the LiftedCone.
    """
    k = LiftedCone(set_membership, x0, radius)
    if not set_membership(np.asarray(x0, float).ravel()):
        raise ValueError("x0 is not a member of the set")
    hits = 0
    for p in ball_points(check_samples, (k.x0.size,), radius=radius, seed=2):
        if set_membership(k.x0 + p):
            hits += 1
    if hits == 0:
        raise ValueError("no sampled point of the enclosing ball lies in "
                         "the set; x0 or radius looks wrong")
    return k


@dataclass(eq=False)
class ConicCore:
    """Core data of a cone: center x_K, width w_K, uniqueness flag."""

    cone: ConeModel
    center: np.ndarray
    width: float
    unique: bool
    provenance: str  # "closed-form" or "numeric"
    estimate: object = None

    def descriptor(self):
        return {
            "kind": self.cone.kind,
            "center": np.asarray(self.center).tolist(),
            "width": float(self.width),
            "unique": bool(self.unique),
            "provenance": self.provenance,
        }


def cone_core(k, n_samples=_EXP_CORE_SAMPLES, seed=0):
    """Core center and width of a catalog cone.

    Orthant, second-order, and psd cones have closed forms (ones vector,
    (0, sqrt 2), identity; widths sqrt(d) - 1, sqrt(2) - 1, sqrt(d) - 1).
    The exponential cone is estimated from sampled normals.
    """
    if isinstance(k, Orthant):
        d = k.dim
        return ConicCore(k, np.ones(d), np.sqrt(d) - 1.0, True, "closed-form")
    if isinstance(k, SecondOrder):
        c = np.zeros(k.dim + 1)
        c[-1] = np.sqrt(2.0)
        return ConicCore(k, c, np.sqrt(2.0) - 1.0, True, "closed-form")
    if isinstance(k, PSDCone):
        d = k.dim
        return ConicCore(k, np.eye(d), np.sqrt(d) - 1.0, True, "closed-form")
    if isinstance(k, ExponentialCone):
        est = numeric_core.estimate_core(k, n_samples, seed)
        unique = numeric_core.uniqueness_probe(est, seed=seed)
        return ConicCore(k, est.center_estimate, est.width_estimate,
                         unique, "numeric", estimate=est)
    raise ValueError("no core recipe for cone kind %r" % (k.kind,))


def core_membership(c, x, ball_samples=0, seed=0):
    """Test x in C_K.

    Accepts a ConicCore (shifted-cone or sampled-halfspace test, plus an
    optional ball check) or a bare ConeModel, for which only the
    definitional ball test x + B(0,1) within K is available and
    ball_samples must be positive.
    """
    if isinstance(c, ConeModel):
        k, core = c, None
    else:
        k, core = c.cone, c
    x = k.point(x)

    if core is not None:
        if core.provenance == "closed-form" and core.unique:
            base_ok = k.membership(x - core.center)
        else:
            rows = core.estimate.normals
            v = rows @ np.ravel(x)
            base_ok = float(v.max()) <= -1.0 + 1e-8 * (
                1.0 + float(np.linalg.norm(x)))
        if not base_ok:
            return False
        if ball_samples <= 0:
            return True
    elif ball_samples <= 0:
        raise ValueError("normal sampler unavailable for a bare cone; "
                         "pass ball_samples >= 1")

    for u in ball_points(ball_samples, k.shape, radius=1.0 - 1e-12,
                         seed=seed):
        if not k.membership(x + u):
            return False
    return True


class SmoothedSet:
    """One smoothing V of a cone K at parameter beta.

    V = (1/(c*beta)) * (BASE + B(0, c)) with c = 1 + r, where BASE is
    x_K + K for minimal variants and C_K for maximal ones, and
    r in {0, w/2, w} by regime.  Membership, projection, and normals all
    reduce to BASE through the exact dilation z = c*beta*y.
    """

    def __init__(self, core, variant, beta=1.0):
        regime = _regime(variant)
        beta = float(beta)
        if not beta > 0.0:
            raise ValueError("beta must be positive")
        self.core = core
        self.variant = variant
        self.beta = beta
        w = float(core.width)
        self.scale_r = _SCALE_FACTOR[regime] * w
        self.c = 1.0 + self.scale_r
        self.lam = {"inner": w, "general": w / (2.0 + w),
                    "outer": w / (1.0 + w)}[regime] / beta
        self.minimal = variant.startswith("min-")
        self.shape = core.cone.shape
        self.approximate = bool(
            getattr(core.cone, "approximate_projection", False)
            or core.provenance == "numeric")

    def descriptor(self):
        return {
            "variant": self.variant,
            "beta": self.beta,
            "kind": self.core.cone.kind,
            "lambda": self.lam,
            "approximate": self.approximate,
        }

    def anchor(self):
        """An interior point: the scaled core center."""
        return np.asarray(self.core.center, float) / (self.c * self.beta)

    def _project_base(self, z):
        core = self.core
        k = core.cone
        xk = np.ravel(np.asarray(core.center, float))
        zf = np.ravel(z)
        use_halfspaces = core.provenance == "numeric" or getattr(
            k, "approximate_projection", False)
        if self.minimal or (core.unique and not use_halfspaces):
            if use_halfspaces:
                rows = core.estimate.normals if core.estimate is not None \
                    else k._normals()
                return numeric_core.project_halfspaces(rows, rows @ xk, zf)
            p = k.project((zf - xk).reshape(self.shape))
            return xk + np.ravel(p)
        rows = core.estimate.normals
        return numeric_core.project_halfspaces(rows, -1.0, zf)

    def membership_residual(self, y):
        """Signed distance from y to the set (negative inside)."""
        y = np.asarray(y, float)
        z = self.c * self.beta * np.ravel(y)
        b = self._project_base(z)
        return (float(np.linalg.norm(z - b)) - self.c) / (self.c * self.beta)

    def membership(self, y, tol=None):
        tol = self.core.cone.tol if tol is None else tol
        y = np.asarray(y, float)
        scale = 1.0 + float(np.linalg.norm(y))
        return self.membership_residual(y) <= tol * scale

    def project(self, y):
        y = np.asarray(y, float).reshape(self.shape)
        z = self.c * self.beta * np.ravel(y)
        b = self._project_base(z)
        u = z - b
        nu = float(np.linalg.norm(u))
        if nu <= self.c:
            return y.copy()
        p = b + u * (self.c / nu)
        return (p / (self.c * self.beta)).reshape(self.shape)

    def boundary_normal(self, y):
        """Outward unit normal at (or beyond) the boundary; None inside."""
        y = np.asarray(y, float)
        z = self.c * self.beta * np.ravel(y)
        b = self._project_base(z)
        u = z - b
        nu = float(np.linalg.norm(u))
        if nu < self.c * (1.0 - 1e-9):
            return None
        return (u / nu).reshape(self.shape)

    def sample_points(self, n, seed=0):
        """n members, spread over base points plus ball offsets."""
        k = self.core.cone
        dim = int(np.prod(self.shape))
        members = np.asarray(k.sample_members(n, seed), float).reshape(n, dim)
        mnorm = 1.0 + np.linalg.norm(members, axis=1)
        members = 3.0 * members / mnorm[:, None]
        xk = np.ravel(np.asarray(self.core.center, float))
        balls = ball_points(n, self.shape, radius=self.c * (1.0 - 1e-9),
                            seed=seed + 17).reshape(n, dim)
        pts = (xk[None, :] + members + balls) / (self.c * self.beta)
        return pts.reshape((n,) + self.shape)


def make_smoothed_set(core, variant, beta=1.0):
    """Build the smoothing of a cone for one of the six variants."""
    return SmoothedSet(core, variant, beta)


def scale_set(s, eta):
    """Re-target a smoothing to accuracy eta: beta -> beta / eta."""
    if not float(eta) > 0.0:
        raise ValueError("eta must be positive")
    return SmoothedSet(s.core, s.variant, s.beta / float(eta))


def project_smoothed(s, y):
    """Euclidean projection onto the smoothed set."""
    return s.project(y)


def hausdorff_estimate(s, radius=None, samples=500, seed=0, details=False):
    """Sampled one-sided Hausdorff gap between K and the smoothing.

    Inner variants measure sup over K of dist(., V) within a radius,
    outer variants sup over V of dist(., K), general variants the larger
    of both.  Rays from interior anchors are bisected to the respective
    boundaries; the origin is appended on the K side, where inner gaps
    are attained.  Returns the largest gap, plus per-direction records
    when details is set.
    """
    core = s.core
    k = core.cone
    regime = _regime(s.variant)
    xk = np.ravel(np.asarray(core.center, float))
    nk = float(np.linalg.norm(xk))
    if radius is None:
        radius = 4.0 * (1.0 + nk) * max(1.0, 1.0 / s.beta)

    dirs = list(sphere_points(samples, s.shape, seed))
    rows = []
    worst = 0.0

    need_k_side = regime in ("inner", "general")
    need_s_side = regime in ("outer", "general")

    if need_k_side:
        anchor = xk.reshape(s.shape)
        k_member = lambda p: k.membership(p)
        pts = []
        for u in dirs:
            p = bisect_boundary(k_member, anchor, u, 2.0 * radius)
            if p is not None:
                pts.append(p)
        pts.append(np.zeros(s.shape))
        for p in pts:
            if s.membership(p):
                gap = 0.0
            else:
                gap = float(np.linalg.norm(
                    np.ravel(p) - np.ravel(s.project(p))))
            worst = max(worst, gap)
            rows.append(("cone", np.ravel(p), gap))

    if need_s_side:
        anchor = s.anchor().reshape(s.shape)
        s_member = lambda p: s.membership(p)
        for u in dirs:
            p = bisect_boundary(s_member, anchor, u, 2.0 * radius)
            if p is None:
                continue
            if k.membership(p):
                gap = 0.0
            else:
                gap = float(np.linalg.norm(
                    np.ravel(p) - np.ravel(k.project(p))))
            worst = max(worst, gap)
            rows.append(("smoothing", np.ravel(p), gap))

    if details:
        return worst, rows
    return worst
