"""Seeded low-discrepancy sampling and the reusable property checks.

All sampling is Halton-based rather than i.i.d.: reports are reproducible
bit for bit given a seed, sample prefixes are stable (growing ``n`` only
appends points), and the deterministic spread gives better worst-case
coverage than uniform draws at the same count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _primes(k):
    out = []
    cand = 2
    while len(out) < k:
        if all(cand % p for p in out):
            out.append(cand)
        cand += 1
    return out


_PRIMES = _primes(120)


def halton(n, dim, seed=0):
    """n Halton points in (0,1)^dim; the seed offsets the index stream.

    Rows are prefix-stable: halton(n, dim, seed) is the first n rows of
    halton(m, dim, seed) for any m >= n.
    """
    n = int(n)
    dim = int(dim)
    if dim > len(_PRIMES):
        raise ValueError(f"halton supports at most {len(_PRIMES)} dimensions")
    offset = 1000 * int(seed) + 1
    idx = offset + np.arange(n, dtype=np.int64)
    out = np.empty((n, dim))
    for j in range(dim):
        p = _PRIMES[j]
        i = idx.copy()
        r = np.zeros(n)
        f = 1.0 / p
        while np.any(i > 0):
            r += (i % p) * f
            i //= p
            f /= p
        out[:, j] = r
    return out


def gaussian_points(n, dim, seed=0):
    """Standard normal points from Halton pairs via Box-Muller."""
    k = (int(dim) + 1) // 2
    u = halton(n, 2 * k, seed)
    z = np.empty((n, 2 * k))
    for j in range(k):
        r = np.sqrt(-2.0 * np.log(u[:, 2 * j]))
        ang = 2.0 * np.pi * u[:, 2 * j + 1]
        z[:, 2 * j] = r * np.cos(ang)
        z[:, 2 * j + 1] = r * np.sin(ang)
    return z[:, :dim]


def _shape_points(g, shape):
    pts = g.reshape((-1,) + tuple(shape))
    if len(shape) == 2:
        pts = 0.5 * (pts + np.swapaxes(pts, -1, -2))
    return pts


def sphere_points(n, shape, seed=0):
    """Unit-norm directions of the given shape (symmetrized for matrices)."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    dim = int(np.prod(shape))
    pts = _shape_points(gaussian_points(n, dim, seed), shape)
    flat = pts.reshape(n, -1)
    norms = np.maximum(np.linalg.norm(flat, axis=1), 1e-300)
    return (flat / norms[:, None]).reshape((n,) + shape)


def ball_points(n, shape, radius=1.0, seed=0):
    """Points of the ball of the given radius, low-discrepancy in volume."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    dim = int(np.prod(shape))
    k = (dim + 1) // 2
    u = halton(n, 2 * k + 1, seed)
    z = np.empty((n, 2 * k))
    for j in range(k):
        r = np.sqrt(-2.0 * np.log(u[:, 2 * j]))
        ang = 2.0 * np.pi * u[:, 2 * j + 1]
        z[:, 2 * j] = r * np.cos(ang)
        z[:, 2 * j + 1] = r * np.sin(ang)
    pts = _shape_points(z[:, :dim], shape)
    flat = pts.reshape(n, -1)
    norms = np.maximum(np.linalg.norm(flat, axis=1), 1e-300)
    radii = radius * u[:, 2 * k] ** (1.0 / dim)
    return (flat * (radii / norms)[:, None]).reshape((n,) + shape)


def bisect_boundary(member, anchor, direction, t_hi, iters=80):
    """Boundary point along anchor + t * direction, or None.

    Requires the anchor to be a member.  Returns None when the ray is still
    inside at t_hi (a recession direction at this radius).
    """
    anchor = np.asarray(anchor, float)
    direction = np.asarray(direction, float)
    if not member(anchor):
        raise ValueError("bisection anchor is not a member")
    if member(anchor + t_hi * direction):
        return None
    lo, hi = 0.0, float(t_hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if member(anchor + mid * direction):
            lo = mid
        else:
            hi = mid
    return anchor + 0.5 * (lo + hi) * direction


@dataclass
class CheckReport:
    """Outcome of one sampled property check."""

    name: str
    n_samples: int
    worst_violation: float
    tolerance: float
    passed: bool
    seed: int

    def to_dict(self):
        return {
            "name": self.name,
            "n_samples": int(self.n_samples),
            "worst_violation": float(self.worst_violation),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "seed": int(self.seed),
        }


def _report(name, n_samples, worst, tolerance, seed):
    worst = float(worst)
    return CheckReport(name, int(n_samples), worst, float(tolerance),
                       worst <= tolerance, int(seed))


def lipschitz_grad_estimate(grad, radius, pairs, seed, shape, center=None):
    """Sampled lower bound on the Lipschitz modulus of a gradient field."""
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    pts = ball_points(2 * pairs, shape, radius, seed)
    if center is not None:
        pts = pts + np.asarray(center, float)
    worst = 0.0
    for a, b in zip(pts[:pairs], pts[pairs:]):
        gap = float(np.linalg.norm(np.ravel(a) - np.ravel(b)))
        if gap <= 1e-12:
            continue
        diff = np.ravel(grad(a)) - np.ravel(grad(b))
        ratio = float(np.linalg.norm(diff)) / gap
        worst = max(worst, ratio)
    return worst


def quadratic_upper_check(fn, grad, beta, samples, seed, radius, shape,
                          name="quadratic-upper", tolerance=1e-9,
                          center=None):
    """Worst violation of f(y) <= f(x) + <grad f(x), y-x> + beta/2 |y-x|^2."""
    pts = ball_points(2 * samples, shape, radius, seed)
    if center is not None:
        pts = pts + np.asarray(center, float)
    worst = -np.inf
    for x, y in zip(pts[:samples], pts[samples:]):
        step = np.ravel(y) - np.ravel(x)
        lin = float(np.vdot(np.ravel(grad(x)), step))
        viol = fn(y) - fn(x) - lin - 0.5 * beta * float(step @ step)
        worst = max(worst, viol)
    return _report(name, samples, worst, tolerance, seed)


def sandwich_check(lo, hi, samples, seed, radius, shape,
                   name="sandwich", tolerance=1e-9, center=None):
    """Worst violation of lo(x) <= hi(x) over a ball sample."""
    pts = ball_points(samples, shape, radius, seed)
    if center is not None:
        pts = pts + np.asarray(center, float)
    worst = -np.inf
    for x in pts:
        worst = max(worst, lo(x) - hi(x))
    return _report(name, samples, worst, tolerance, seed)


def set_smoothness_check(s, beta, boundary_samples, seed, ball_samples=48,
                         tolerance=1e-6, radius=None,
                         name="set-smoothness"):
    """Inscribed-ball test of beta-smoothness of a set.

    At sampled boundary points x with outward unit normal zeta, every point
    of B(x - zeta/beta, 1/beta) must belong to the set; the worst outside
    distance over those sampled ball points is reported.  ``s`` provides
    ``shape``, ``anchor()``, ``membership``, ``project`` and
    ``boundary_normal``.
    """
    anchor = np.asarray(s.anchor(), float)
    if radius is None:
        radius = 6.0 * (1.0 + float(np.linalg.norm(np.ravel(anchor))))
    dirs = sphere_points(boundary_samples, s.shape, seed)
    cloud = ball_points(ball_samples, s.shape, (1.0 - 1e-9) / beta, seed + 7)
    worst = 0.0
    used = 0
    for u in dirs:
        p = bisect_boundary(s.membership, anchor, u, radius)
        if p is None:
            continue
        zeta = s.boundary_normal(p)
        if zeta is None:
            continue
        used += 1
        ball_center = p - zeta / beta
        for q in cloud:
            q = ball_center + q
            if s.membership(q):
                continue
            res = float(np.linalg.norm(np.ravel(q) - np.ravel(s.project(q))))
            worst = max(worst, res)
    if used == 0:
        raise RuntimeError("no boundary points found for smoothness check")
    return _report(name, used * ball_samples, worst, tolerance, seed)


def _function_suite(seed):
    from . import function_smoothing as fs
    from . import sublinear_catalog as cat

    instances = [
        cat.relu(), cat.euclidean_norm(3), cat.one_norm(3),
        cat.weighted_inf_norm((1.0, 2.0)), cat.coordinate_max(4),
        cat.max_eigen(3),
        cat.polytope_support([[1.0, 0.0], [-0.5, 1.0], [0.0, -1.0]]),
    ]
    reports = []
    for f in instances:
        core = fs.compute_core(f)
        radius = 2.0 + f.support.max_norm()
        mins = {v: fs.make_smoothing(core, v) for v in
                (fs.MIN_INNER, fs.MIN_GENERAL, fs.MIN_OUTER)}
        maxg = fs.make_smoothing(core, fs.MAX_GENERAL)
        reports.append(sandwich_check(
            lambda x: fs.eval_smoothing(maxg, x),
            lambda x: fs.eval_smoothing(mins[fs.MIN_GENERAL], x),
            200, seed, radius, f.shape,
            name=f"{f.family}:max-below-min", tolerance=1e-9))
        reports.append(sandwich_check(
            f.value, lambda x: fs.eval_smoothing(mins[fs.MIN_INNER], x),
            200, seed, radius, f.shape,
            name=f"{f.family}:inner-dominates", tolerance=1e-9))
        reports.append(sandwich_check(
            lambda x: fs.eval_smoothing(mins[fs.MIN_OUTER], x), f.value,
            200, seed, radius, f.shape,
            name=f"{f.family}:outer-dominated", tolerance=1e-9))
        spec = mins[fs.MIN_GENERAL]
        reports.append(quadratic_upper_check(
            lambda x: fs.eval_smoothing(spec, x),
            lambda x: fs.grad_smoothing(spec, x),
            spec.beta, 200, seed, radius, f.shape,
            name=f"{f.family}:quadratic-upper", tolerance=1e-9))
    return reports


def _cone_suite(seed):
    from . import cone_smoothing as cs

    cones = [cs.Orthant(3), cs.SecondOrder(2), cs.PSDCone(2),
             cs.ExponentialCone()]
    reports = []
    for k in cones:
        core = cs.cone_core(k)
        tol = 5e-3 if k.kind == cs.EXPONENTIAL else 1e-6
        inner = cs.make_smoothed_set(core, cs.MIN_INNER)
        outer = cs.make_smoothed_set(core, cs.MIN_OUTER)
        worst_in = 0.0
        for p in inner.sample_points(150, seed):
            if not k.membership(p):
                q = k.project(p)
                worst_in = max(worst_in, float(
                    np.linalg.norm(np.ravel(p) - np.ravel(q))))
        reports.append(_report(f"{k.kind}:inner-subset", 150, worst_in, tol,
                               seed))
        worst_out = 0.0
        for p in k.sample_members(150, seed):
            p = p / (1.0 + float(np.linalg.norm(np.ravel(p))))
            worst_out = max(worst_out, outer.membership_residual(p))
        reports.append(_report(f"{k.kind}:outer-superset", 150, worst_out,
                               tol, seed))
    orthant_in = cs.make_smoothed_set(cs.cone_core(cs.Orthant(3)),
                                      cs.MIN_INNER)
    reports.append(set_smoothness_check(
        orthant_in, 1.0, 40, seed, tolerance=1e-6,
        name="orthant:s-in-smooth"))
    return reports


def _composite_suite(seed):
    from . import composite_solver as comp
    from . import sublinear_catalog as cat

    rng = np.random.default_rng(1234)
    a = rng.standard_normal((6, 4))
    b = rng.standard_normal(6)
    smap = comp.SmoothMap.affine(a, b)
    sigma = cat.coordinate_max(6)
    beta_target = 8.0
    c = comp.CompositeSmoothing(sigma, smap, beta_target,
                                comp.OPTIMAL_GENERAL)
    lam, delta = comp.smoothability_certificate(c)
    bound = lam / (beta_target - delta)

    est = lipschitz_grad_estimate(
        lambda x: comp.composite_value_grad(c, x)[1], 2.0, 300, seed, (4,))
    rep1 = _report("composite:grad-lipschitz", 300,
                   est - beta_target, 1e-4 * beta_target, seed)
    worst = 0.0
    for x in ball_points(300, (4,), 2.0, seed):
        val, _ = comp.composite_value_grad(c, x)
        worst = max(worst, abs(val - sigma.value(smap.fun(x))) - bound)
    rep2 = _report("composite:value-gap", 300, worst, 1e-6, seed)
    return [rep1, rep2]


_SUITES = {
    "functions": _function_suite,
    "cones": _cone_suite,
    "composite": _composite_suite,
}


def run_suite(suite, seed=0):
    """Run a named check suite; 'all' concatenates every suite."""
    if suite == "all":
        out = []
        for name in ("functions", "cones", "composite"):
            out.extend(_SUITES[name](seed))
        return out
    if suite not in _SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return _SUITES[suite](seed)
