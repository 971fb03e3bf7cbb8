"""Smoothing compositions sigma(G(x)) and an accelerated first-order solver.

For a sublinear sigma and a smooth map G with Jacobian bound M and
Jacobian Lipschitz modulus L, replacing sigma by a beta'-smooth surrogate
f gives h = f(G(.)) with gradient Lipschitz modulus at most
M^2 beta' + L_sigma L.  Inverting that budget, a target smoothness beta
of the composite fixes beta' = (beta - L_sigma L) / M^2, and the value
error inherits the surrogate's width over beta'.  The optimal surrogates
scale the error with the support-set width w_sigma; log-sum-exp scales it
with log(#vertices), which is what the minimax benchmark measures.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import function_smoothing as fs
from . import sublinear_catalog as cat
from .verify import gaussian_points

OPTIMAL_INNER = "optimal-inner"
OPTIMAL_GENERAL = "optimal-general"
OPTIMAL_OUTER = "optimal-outer"
LOGSUMEXP = "log-sum-exp"
SURROGATES = (OPTIMAL_INNER, OPTIMAL_GENERAL, OPTIMAL_OUTER, LOGSUMEXP)

_VARIANT_OF = {OPTIMAL_INNER: fs.MIN_INNER, OPTIMAL_GENERAL: fs.MIN_GENERAL,
               OPTIMAL_OUTER: fs.MIN_OUTER}
_GAP_FACTOR = {OPTIMAL_INNER: 1.0, OPTIMAL_GENERAL: 0.5, OPTIMAL_OUTER: 1.0}


def power_operator_norm(a, iters=500, tol=1e-13, seed=0):
    """Spectral norm of a matrix by power iteration on a^T a."""
    a = np.asarray(a, float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    n = a.shape[1]
    v = gaussian_points(1, n, seed)[0]
    v /= max(np.linalg.norm(v), 1e-300)
    last = 0.0
    for _ in range(iters):
        u = a @ v
        w = a.T @ u
        lam = float(np.linalg.norm(w))
        if lam <= 1e-300:
            return 0.0
        v = w / lam
        if abs(lam - last) <= tol * max(lam, 1.0):
            break
        last = lam
    return float(np.sqrt(lam))


class SmoothMap:
    """Differentiable map with Jacobian bound M and Jacobian Lipschitz L."""

    def __init__(self, fun, jac, jac_bound, jac_lipschitz):
        self.fun = fun
        self.jac = jac
        self.M = float(jac_bound)
        self.L = float(jac_lipschitz)
        if self.M < 0 or self.L < 0:
            raise ValueError("bounds must be nonnegative")

    @classmethod
    def affine(cls, a, b):
        """G(x) = a x + b; exact bounds M = ||a||_2, L = 0."""
        a = np.asarray(a, float)
        b = np.asarray(b, float).ravel()
        if a.ndim != 2 or b.shape != (a.shape[0],):
            raise ValueError("need a (m, n) matrix and length-m offset")
        return cls(lambda x: a @ np.ravel(x) + b, lambda x: a,
                   power_operator_norm(a), 0.0)


class CompositeSmoothing:
    """A smoothed composite h(x) ~ sigma(G(x)) at target smoothness beta.

    The surrogate acts in the image space at the induced parameter
    beta' = (beta - L_sigma L) / M^2, so grad h is beta-Lipschitz.
    """

    def __init__(self, sigma, smap, beta_target, surrogate):
        if surrogate not in SURROGATES:
            raise ValueError("unknown surrogate %r" % (surrogate,))
        beta_target = float(beta_target)
        self.sigma = sigma
        self.smap = smap
        self.beta_target = beta_target
        self.surrogate = surrogate
        self.sigma_lip = float(sigma.support.max_norm())
        self.delta = self.sigma_lip * smap.L
        m2 = max(smap.M ** 2, 1e-300)
        inner = (beta_target - self.delta) / m2
        if inner <= 0.0:
            raise ValueError("beta_target must exceed the curvature floor "
                             "L_sigma * L of the map")
        self.inner_beta = inner
        if surrogate == LOGSUMEXP:
            verts = sigma.support.vertices
            if verts is None:
                raise ValueError("log-sum-exp needs an explicit vertex list")
            self.vertices = np.asarray(verts, float)
            self.spec = None
        else:
            core = fs.compute_core(sigma)
            self.spec = fs.make_smoothing(core, _VARIANT_OF[surrogate],
                                          beta=inner)
            self.vertices = None

    def descriptor(self):
        return {
            "surrogate": self.surrogate,
            "beta_target": self.beta_target,
            "inner_beta": self.inner_beta,
            "delta": self.delta,
            "family": self.sigma.family,
        }


def smoothability_certificate(c):
    """(lam, delta) with |h(x) - sigma(G(x))| <= lam / (beta - delta).

    lam is M^2 w_sigma (inner and outer), M^2 w_sigma / 2 (general), or
    M^2 log(#vertices) for log-sum-exp; delta = L_sigma L is the additive
    smoothness floor contributed by the map's curvature.
    """
    m2 = c.smap.M ** 2
    if c.surrogate == LOGSUMEXP:
        lam = m2 * float(np.log(c.vertices.shape[0]))
    else:
        lam = m2 * float(c.spec.core.width) * _GAP_FACTOR[c.surrogate]
    return float(lam), float(c.delta)


def composite_value_grad(c, x):
    """Value and gradient of the smoothed composite at x."""
    x = np.asarray(x, float).ravel()
    g = np.asarray(c.smap.fun(x), float)
    jac = np.asarray(c.smap.jac(x), float)
    if c.surrogate == LOGSUMEXP:
        beta = c.inner_beta
        z = beta * (c.vertices @ np.ravel(g))
        zmax = float(z.max())
        e = np.exp(z - zmax)
        total = float(e.sum())
        val = (zmax + np.log(total)) / beta
        weights = e / total
        gy = c.vertices.T @ weights
    else:
        val = fs.eval_smoothing(c.spec, g)
        gy = np.ravel(fs.grad_smoothing(c.spec, g))
    return float(val), jac.T @ gy


def accelerated_minimize(value_grad, x0, beta, eps, opt_value=None,
                         max_iter=500000, convexity_tol=1e-7):
    """Accelerated gradient descent with constant step 1/beta.

    Momentum follows Nesterov's 1983 t-sequence.  Stops when the value
    gap to ``opt_value`` drops below eps (or, with no reference value,
    when the gradient norm does).  A per-step convexity monitor rejects
    objectives that violate the supporting-hyperplane inequality along
    the trajectory.  Returns (x, info dict).
    """
    beta = float(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = np.asarray(x0, float).ravel().copy()
    fx, gx = value_grad(x)

    def done(f, g):
        if opt_value is not None:
            return f - opt_value <= eps
        return float(np.linalg.norm(g)) <= eps

    if done(fx, gx):
        return x, {"iterations": 0, "final_value": float(fx),
                   "final_gap": None if opt_value is None
                   else float(fx - opt_value), "converged": True}

    y = x.copy()
    t = 1.0
    for k in range(1, max_iter + 1):
        fy, gy = value_grad(y)
        xn = y - gy / beta
        fxn, gxn = value_grad(xn)
        lin = fy + float(gy @ (xn - y))
        if fxn < lin - convexity_tol * (1.0 + abs(fy)):
            raise RuntimeError("objective failed the convexity monitor")
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = xn + ((t - 1.0) / tn) * (xn - x)
        x, t = xn, tn
        if done(fxn, gxn):
            return x, {"iterations": k, "final_value": float(fxn),
                       "final_gap": None if opt_value is None
                       else float(fxn - opt_value), "converged": True}
    raise RuntimeError("accelerated_minimize: iteration budget exhausted")


@dataclass
class BenchRecord:
    """One solver run of the minimax benchmark."""

    method: str
    n: int
    d: int
    eps: float
    beta: float
    iterations: int
    final_gap: float
    runtime_s: float

    def to_dict(self):
        return {
            "method": self.method,
            "n": int(self.n),
            "d": int(self.d),
            "eps": float(self.eps),
            "beta": float(self.beta),
            "iterations": int(self.iterations),
            "final_gap": float(self.final_gap),
            "runtime_s": float(self.runtime_s),
        }


def make_planted_minimax(n, d, seed=0):
    """Random minimax instance max_i <a_i, x> + b_i with known optimum.

    A handful of active rows average to zero under Dirichlet weights, so
    0 lies in the convex hull of their gradients and x* = 0 is optimal
    with value 0; inactive rows are pushed strictly below.  Returns
    (a, b, x_star, opt_value).
    """
    n, d = int(n), int(d)
    if n < 2 or d < 1:
        raise ValueError("need n >= 2, d >= 1")
    rng = np.random.default_rng(seed)
    k = max(2, min(d, n - 1, 5))
    u = rng.standard_normal((k, d))
    mu = rng.dirichlet(np.ones(k))
    active = u - mu @ u
    a = np.empty((n, d))
    b = np.empty(n)
    a[:k] = active
    b[:k] = 0.0
    a[k:] = rng.standard_normal((n - k, d))
    b[k:] = -(0.1 + np.abs(rng.standard_normal(n - k)))
    order = rng.permutation(n)
    return a[order], b[order], np.zeros(d), 0.0


def run_minimax_bench(n=64, d=10, eps=1e-2, seed=0, methods=None):
    """Piecewise-linear minimax solved with two smoothings of the max.

    Both surrogates overestimate the true max, so stopping when the
    smoothed value reaches opt + eps certifies a true eps-solution.  The
    smoothing budgets give eps/2 of value error each: beta' = 2 w / eps
    for the width-optimal inner surrogate, 2 log(n) / eps for
    log-sum-exp.  Reports per-method records plus the iteration ratio
    and its sqrt(log(n) / w) prediction.  ``methods`` restricts the runs
    to a subset of {"optimal", "log-sum-exp"}.
    """
    a, b, x_star, opt = make_planted_minimax(n, d, seed)
    sigma = cat.coordinate_max(n)
    smap = SmoothMap.affine(a, b)
    rng = np.random.default_rng(seed + 1)
    x0 = x_star + 0.3 * rng.standard_normal(d)
    m2 = smap.M ** 2
    w = 0.5 * (1.0 - 1.0 / n)

    runs = [
        ("optimal", OPTIMAL_INNER, m2 * 2.0 * w / eps),
        ("log-sum-exp", LOGSUMEXP, m2 * 2.0 * np.log(n) / eps),
    ]
    if methods is not None:
        runs = [r for r in runs if r[0] in methods]
        if not runs:
            raise ValueError("no recognized method in %r" % (methods,))
    records = []
    for method, surrogate, beta in runs:
        c = CompositeSmoothing(sigma, smap, beta, surrogate)
        t0 = time.perf_counter()
        x, info = accelerated_minimize(
            lambda z: composite_value_grad(c, z), x0, beta, eps,
            opt_value=opt)
        elapsed = time.perf_counter() - t0
        true_gap = float(np.max(a @ x + b) - opt)
        records.append(BenchRecord(method, n, d, eps, float(beta),
                                   info["iterations"], true_gap, elapsed))
    out = {"records": records,
           "predicted_ratio": float(np.sqrt(np.log(n) / w))}
    if len(records) == 2:
        out["iteration_ratio"] = records[1].iterations / max(
            records[0].iterations, 1)
    return out
