"""Numeric estimation of conic cores from sampled normal fans.

The core of a cone K is the polyhedron-like set {x : <zeta, x> <= -1 for
every unit normal zeta of K at the origin}.  Sampling the normal fan turns
its min-norm point into a quadratic program over finitely many halfspaces,
solved here by Hildreth-style dual coordinate ascent with a greedy working
set.  Sample streams are prefix-stable, so estimates refine monotonically
as n grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .verify import sphere_points, gaussian_points, halton

_DEDUP_RESOLUTION = 1e-4
_MEMBER_CHECK_COUNT = 500
_MEMBER_CHECK_TOL = 1e-8


@dataclass(eq=False)
class CoreEstimate:
    """Sampled normal fan with the induced core center and width."""

    cone: object
    normals: np.ndarray  # (m, ambient_dim), unit rows
    center_estimate: np.ndarray  # in the cone's native shape
    width_estimate: float
    n_samples: int
    seed: int


def _dedup(rows):
    keys = np.round(rows / _DEDUP_RESOLUTION).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return rows[np.sort(first)]


def sample_normal_fan(k, n, seed=0):
    """n unit vectors of N_K(0), deduplicated at angular resolution 1e-4.

    Uses the cone's closed-form polar description when it has one,
    otherwise the projection-residual fallback normalize(x - P_K(x)) on
    points sampled around the cone.  Every candidate is checked against
    500 sampled members of K before acceptance.

    Returns a (m, ambient_dim) array of flattened unit rows, m <= n.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = int(np.prod(k.shape))
    if hasattr(k, "polar_boundary"):
        rows = np.asarray(k.polar_boundary(n, seed), float).reshape(-1, dim)
    else:
        if not hasattr(k, "project"):
            raise ValueError("cone offers neither a polar description nor "
                             "a projection oracle")
        cand = gaussian_points(4 * n, dim, seed) * 2.0
        rows = []
        for y in cand:
            p = np.ravel(k.project(y.reshape(k.shape)))
            u = y - p
            nu = float(np.linalg.norm(u))
            if nu > 1e-9:
                rows.append(u / nu)
            if len(rows) == n:
                break
        if not rows:
            raise RuntimeError("degenerate sampling: all projections interior")
        rows = np.array(rows)
    norms = np.linalg.norm(rows, axis=1)
    rows = rows[norms > 1e-12] / norms[norms > 1e-12, None]

    members = np.asarray(k.sample_members(_MEMBER_CHECK_COUNT, seed + 991),
                         float).reshape(-1, dim)
    mnorm = np.maximum(np.linalg.norm(members, axis=1), 1e-300)
    members = members / mnorm[:, None]
    worst = (rows @ members.T).max(axis=1)
    rows = rows[worst <= _MEMBER_CHECK_TOL]
    if rows.shape[0] == 0:
        raise RuntimeError("degenerate sampling: no valid normals survived")
    return _dedup(rows)


def project_halfspaces(normals, offsets, y, tol=1e-8, max_iter=500):
    """Euclidean projection of y onto {x : normals @ x <= offsets}.

    Dual active-set iteration in the style of Lawson-Hanson: the most
    violated halfspace joins the active set, whose equality-restricted
    projection is solved exactly through its (tiny, ridge-stabilized)
    normal equations; negative multipliers are removed by line search.
    Near-parallel rows, as arise from densely sampled smooth normal
    fans, only affect the small dense solve.  Stops when the worst
    violation falls below ``tol * (1 + |offsets| + |y|)``; multipliers
    of active rows keep complementarity exact by construction.
    """
    a = np.asarray(normals, float)
    y = np.asarray(y, float).ravel()
    m = a.shape[0]
    b = np.broadcast_to(np.asarray(offsets, float), (m,)).astype(float)
    scale = 1.0 + float(np.abs(b).max()) + float(np.linalg.norm(y))
    stop = tol * scale

    x = y.copy()
    active = []       # constraint indices with mu > 0
    mu = np.zeros(0)
    for _ in range(max_iter):
        v = a @ x - b
        jmax = int(np.argmax(v))
        if float(v[jmax]) <= stop:
            return x
        if jmax not in active:
            active.append(jmax)
            mu = np.append(mu, 0.0)
        for _ in range(4 * len(active) + 16):
            rows = a[active]
            gram = rows @ rows.T
            gram[np.diag_indices_from(gram)] += 1e-12
            rhs = rows @ y - b[active]
            try:
                sol = np.linalg.solve(gram, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(gram, rhs, rcond=None)[0]
            if sol.min(initial=0.0) >= -1e-12:
                mu = np.maximum(sol, 0.0)
                break
            neg = sol < -1e-12
            steps = mu[neg] / (mu[neg] - sol[neg])
            alpha = float(np.min(steps))
            mu = mu + alpha * (sol - mu)
            keep = mu > 1e-12
            if not np.any(~keep[neg]):
                keep[np.flatnonzero(neg)[int(np.argmin(steps))]] = False
            active = [j for j, k in zip(active, keep) if k]
            mu = mu[keep]
            if not active:
                mu = np.zeros(0)
                break
        x = y - a[active].T @ mu if active else y.copy()
    raise RuntimeError("halfspace projection did not reach tolerance")


def estimate_core(k, n, seed=0):
    """Estimate the core center and width of a cone from n sampled normals.

    Solves min ||x|| subject to <zeta_j, x> <= -1 over the sampled fan;
    the width estimate is ||x|| - 1.  With prefix-stable samplers the
    width is monotone nondecreasing in n (each added halfspace can only
    push the min-norm point outward).
    """
    rows = sample_normal_fan(k, n, seed)
    x = project_halfspaces(rows, -1.0, np.zeros(rows.shape[1]))
    width = float(np.linalg.norm(x)) - 1.0
    return CoreEstimate(k, rows, x.reshape(k.shape), width, int(n), int(seed))


def estimate_residuals(e):
    """Convergence diagnostics of a core estimate, for serialization."""
    x = np.ravel(e.center_estimate)
    v = e.normals @ x + 1.0
    return {
        "max_halfspace_violation": float(max(np.max(v), 0.0)),
        "worst_normal_unit_defect": float(
            np.abs(np.linalg.norm(e.normals, axis=1) - 1.0).max()),
        "n_constraints": int(e.normals.shape[0]),
    }


# discretization-aware excess threshold for the boundary side of the probe;
# any finite normal sample over-approximates the core by O(radius * theta^2),
# which dwarfs machine-level tolerances for matrix cones at usable n
_PROBE_EXCESS = 0.02


def uniqueness_probe(e, samples=500, seed=0):
    """Test whether the core looks like the shifted cone x_K + K.

    Returns False when some sampled point of x_K + K violates the sampled
    halfspaces beyond 1e-4, or when some sampled boundary point of the
    estimated core sits outside x_K + K by an excess beyond the sampling
    resolution.  True otherwise, at sampling resolution.
    """
    k = e.cone
    dim = e.normals.shape[1]
    x = np.ravel(e.center_estimate)

    members = np.asarray(k.sample_members(samples, seed + 5),
                         float).reshape(-1, dim)
    mnorm = 1.0 + np.linalg.norm(members, axis=1)
    members = 2.0 * members / mnorm[:, None]
    pts = x[None, :] + members
    if float((e.normals @ pts.T + 1.0).max()) > 1e-4:
        return False

    # rays leave from 1.05 x, strictly interior to every sampled halfspace
    anchor = 1.05 * x
    slack = np.maximum(-1.0 - e.normals @ anchor, 0.0)
    cap = 3.0 * (1.0 + float(np.linalg.norm(x)))
    for u in sphere_points(samples, k.shape, seed + 11):
        u = np.ravel(u)
        denom = e.normals @ u
        pos = denom > 1e-12
        t = cap if not np.any(pos) else min(
            cap, float(np.min(slack[pos] / denom[pos])))
        if t <= 0.0:
            continue
        p = anchor + t * u
        z = (p - x).reshape(k.shape)  # displacement from the center
        q = np.ravel(k.project(z))
        excess = float(np.linalg.norm(np.ravel(z) - q))
        if excess > _PROBE_EXCESS * (1.0 + float(np.linalg.norm(p))):
            return False
    return True
