"""Catalog of sublinear functions with exact support-set projections.

Every entry couples the evaluation of a sublinear function sigma with the
Euclidean projection onto its subdifferential at the origin.  That projection
is the one primitive the smoothing layer consumes: Moreau envelopes of
sublinear functions reduce to it through the classical prox decomposition
prox_sigma(x) = x - P_{dsigma(0)}(x).

Families: relu, euclidean-norm, one-norm, weighted-inf-norm, max, max-eigen,
polytope.  Symmetric matrices are stored as full (d, d) arrays under the
trace inner product; no packed storage.
"""

from __future__ import annotations

import itertools

import numpy as np

RELU = "relu"
EUCLIDEAN_NORM = "euclidean-norm"
ONE_NORM = "one-norm"
WEIGHTED_INF_NORM = "weighted-inf-norm"
MAX = "max"
MAX_EIGEN = "max-eigen"
POLYTOPE = "polytope"

FAMILIES = (RELU, EUCLIDEAN_NORM, ONE_NORM, WEIGHTED_INF_NORM, MAX,
            MAX_EIGEN, POLYTOPE)

SIMPLEX = "simplex"
UNIT_BALL = "unit-ball"
SIGNED_BOX = "signed-box"
WEIGHTED_CROSS_POLYTOPE = "weighted-cross-polytope"
SPECTRAL_SIMPLEX = "spectral-simplex"
POLYTOPE_SET = "polytope"

# vertex enumeration of the one-norm box blows up as 2^d; beyond this order
# the closed-form clip projection is the only representation kept
_BOX_VERTEX_LIMIT = 6

_JACOBI_MAX_ORDER = 64


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Parameters
    ----------
    a : (d, d) array_like, symmetric
    tol : float
        Stop once the off-diagonal Frobenius mass falls below
        ``tol * max(1, ||a||_F)``.
    max_sweeps : int
        Cap on full cyclic sweeps.

    Returns
    -------
    w : (d,) ndarray
        Eigenvalues in ascending order.
    v : (d, d) ndarray
        Orthonormal eigenvectors as columns, ``a ~= v @ diag(w) @ v.T``.

    Two-sided rotations in the classical form of Golub and Van Loan
    (Matrix Computations, sect. 8.5).  Adequate and dependency-free at the
    small orders (d <= 64) the catalog targets.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh expects a square matrix")
    d = a.shape[0]
    if d > _JACOBI_MAX_ORDER:
        raise ValueError(f"jacobi_eigh is limited to order {_JACOBI_MAX_ORDER}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite matrix entries")
    if not np.allclose(a, a.T, atol=1e-8 * (1.0 + np.abs(a).max())):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(d)
    if d == 1:
        return a.ravel().copy(), v
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = np.sign(theta) if theta != 0 else 1.0
                t = t / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("jacobi_eigh did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def project_simplex(x):
    """Project onto the probability simplex by the sort and threshold rule.

    The O(d log d) rule of Held, Wolfe and Crowder as written up by Duchi,
    Shalev-Shwartz, Singer and Chandra (ICML 2008).  The stable descending
    sort keeps ties in index order, so the output is deterministic; the
    threshold itself is tie-free.
    """
    x = np.asarray(x, dtype=float).ravel()
    u = -np.sort(-x, kind="stable")
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, x.size + 1)
    hit = u - css / ks > 0.0
    k = int(ks[hit][-1])
    tau = css[k - 1] / k
    return np.maximum(x - tau, 0.0)


def project_ball(x, radius=1.0):
    """Project onto the Euclidean ball of the given radius (radial shrink)."""
    x = np.asarray(x, dtype=float)
    n = float(np.linalg.norm(x.ravel()))
    if n <= radius:
        return x.copy()
    return x * (radius / n)


def _project_weighted_cross(x, weights):
    # exact projection onto conv{+-w_i e_i} = {z : sum_i |z_i|/w_i <= 1},
    # by soft-threshold with the breakpoint-sorted exact theta
    inv = 1.0 / weights
    a = np.abs(x)
    if float(np.sum(a * inv)) <= 1.0:
        return x.copy()
    bp = a * weights  # theta at which coordinate i leaves the active set
    order = np.argsort(bp, kind="stable")
    big_a = float(np.sum(a * inv))
    big_b = float(np.sum(inv * inv))
    theta = 0.0
    for idx in order:
        cand = (big_a - 1.0) / big_b
        if cand <= bp[idx]:
            theta = cand
            break
        big_a -= a[idx] * inv[idx]
        big_b -= inv[idx] * inv[idx]
    else:  # pragma: no cover - g decreases to 0, a segment always brackets 1
        theta = (big_a - 1.0) / big_b
    return np.sign(x) * np.maximum(a - theta * inv, 0.0)


def _project_convex_hull(vertices, x, tol=1e-10, max_iter=200000):
    # projected gradient on the barycentric weights, constant step 1/L;
    # generic fallback for user polytopes with no special structure
    m = vertices.shape[0]
    lam = np.full(m, 1.0 / m)
    lip = float(np.linalg.norm(vertices, 2) ** 2)
    if lip <= 0.0:
        return np.zeros(vertices.shape[1])
    step = 1.0 / lip
    for _ in range(max_iter):
        z = vertices.T @ lam
        grad = vertices @ (z - x)
        nxt = project_simplex(lam - step * grad)
        gap = lip * float(np.linalg.norm(nxt - lam))
        lam = nxt
        if gap <= tol * (1.0 + float(np.linalg.norm(x))):
            break
    else:
        raise RuntimeError("polytope projection did not reach tolerance")
    return vertices.T @ lam


class SupportSet:
    """The subdifferential of a catalog function at the origin.

    Wraps the exact Euclidean projection onto the set and, for polytopal
    sets, the vertex list the dual routines need.  ``sample`` draws points
    of the set for variational-inequality style checks.
    """

    def __init__(self, kind, shape, project, vertices=None, sampler=None):
        self.kind = kind
        self.shape = tuple(shape)
        self.dim = int(np.prod(self.shape))
        self._project = project
        self.vertices = None if vertices is None else np.asarray(vertices, float)
        self._sampler = sampler

    def project(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {z.shape}")
        return self._project(z)

    def sample(self, n, rng):
        """Draw n points of the set (exact members, randomized coverage)."""
        return self._sampler(int(n), rng)

    def max_norm(self):
        """max{||zeta|| : zeta in the set}, the Lipschitz constant of sigma."""
        raise NotImplementedError


def _polytopal_sampler(vertices):
    def sample(n, rng):
        lam = rng.dirichlet(np.ones(vertices.shape[0]), size=n)
        return lam @ vertices
    return sample


def _sym(a):
    return 0.5 * (a + a.T)


class SublinearFn:
    """A catalog sublinear function together with its support-set geometry.

    Attributes
    ----------
    family : str
        One of ``FAMILIES``.
    dim : int
        Matrix order for max-eigen, vector dimension otherwise.
    shape : tuple
        Shape of arguments: ``(d,)`` or ``(d, d)``.
    lipschitz : float
        ``M = max{||zeta|| : zeta in dsigma(0)}``.
    support : SupportSet
    """

    def __init__(self, family, dim, shape, value, support, lipschitz,
                 subgrad, weights=None):
        self.family = family
        self.dim = int(dim)
        self.shape = tuple(shape)
        self.ambient_dim = int(np.prod(self.shape))
        self._value = value
        self.support = support
        self.lipschitz = float(lipschitz)
        self._subgrad = subgrad
        self.weights = None if weights is None else np.asarray(weights, float)

    def point(self, x):
        """Canonicalize an argument to this function's shape."""
        x = np.asarray(x, dtype=float)
        if x.shape != self.shape:
            if x.size == self.ambient_dim:
                x = x.reshape(self.shape)
            else:
                raise ValueError(
                    f"{self.family}: expected shape {self.shape}, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError(f"{self.family}: non-finite input components")
        if len(self.shape) == 2:
            if not np.allclose(x, x.T, atol=1e-8 * (1.0 + np.abs(x).max())):
                raise ValueError("max-eigen expects a symmetric matrix")
            x = _sym(x)
        return x

    def value(self, x):
        """Evaluate sigma(x)."""
        return float(self._value(self.point(x)))

    def project_support(self, x):
        """Euclidean projection of x onto dsigma(0)."""
        return self.support.project(self.point(x))

    def subgradient(self, x):
        """Some element of dsigma(x); deterministic tie-breaking."""
        return self._subgrad(self.point(x))

    def descriptor(self):
        """JSON-ready descriptor; ``from_descriptor`` round-trips it."""
        out = {"family": self.family, "dim": self.dim}
        if self.weights is not None:
            out["weights"] = [float(w) for w in self.weights]
        if self.family == POLYTOPE:
            out["vertices"] = [[float(v) for v in row]
                               for row in self.support.vertices]
        return out


def _vertex_argmax(vertices, x):
    # lowest index wins ties, matching the documented subgradient rule
    scores = vertices @ x
    return int(np.argmax(scores))


def relu():
    """sigma(x) = max(0, x) on the line; dsigma(0) = [0, 1]."""
    verts = np.array([[0.0], [1.0]])
    support = SupportSet(
        POLYTOPE_SET, (1,), lambda z: np.clip(z, 0.0, 1.0),
        vertices=verts, sampler=_polytopal_sampler(verts))
    support.max_norm = lambda: 1.0

    def subgrad(x):
        return verts[_vertex_argmax(verts, x)].copy()

    return SublinearFn(RELU, 1, (1,), lambda x: max(0.0, float(x[0])),
                       support, 1.0, subgrad)


def euclidean_norm(dim):
    """sigma = ||.||_2; dsigma(0) is the unit ball."""
    d = int(dim)
    if d < 1:
        raise ValueError("dim must be positive")

    def sample(n, rng):
        g = rng.standard_normal((n, d))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        r = rng.random(n) ** (1.0 / d)
        return g * r[:, None]

    support = SupportSet(UNIT_BALL, (d,), project_ball, sampler=sample)
    support.max_norm = lambda: 1.0

    def subgrad(x):
        n = float(np.linalg.norm(x))
        return x / n if n > 0 else np.zeros(d)

    return SublinearFn(EUCLIDEAN_NORM, d, (d,),
                       lambda x: float(np.linalg.norm(x)),
                       support, 1.0, subgrad)


def one_norm(dim):
    """sigma = ||.||_1; dsigma(0) = [-1, 1]^d."""
    d = int(dim)
    if d < 1:
        raise ValueError("dim must be positive")
    verts = None
    if d <= _BOX_VERTEX_LIMIT:
        verts = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))

    def sample(n, rng):
        return rng.uniform(-1.0, 1.0, size=(n, d))

    support = SupportSet(SIGNED_BOX, (d,), lambda z: np.clip(z, -1.0, 1.0),
                         vertices=verts, sampler=sample)
    support.max_norm = lambda: float(np.sqrt(d))

    return SublinearFn(ONE_NORM, d, (d,),
                       lambda x: float(np.sum(np.abs(x))),
                       support, np.sqrt(d), lambda x: np.sign(x))


def weighted_inf_norm(weights=(1.0, 2.0)):
    """sigma(x) = max_i w_i |x_i|; dsigma(0) = conv{+-w_i e_i}.

    The support set is the cross-polytope with axis lengths w_i, the polar
    scaling of the weighted sup norm.  Smoothings of this family are not
    unique in dimension >= 2.
    """
    w = np.asarray(weights, dtype=float).ravel()
    if w.size < 1 or np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be positive finite reals")
    d = w.size
    verts = np.zeros((2 * d, d))
    for i in range(d):
        verts[2 * i, i] = w[i]
        verts[2 * i + 1, i] = -w[i]
    support = SupportSet(
        WEIGHTED_CROSS_POLYTOPE, (d,), lambda z: _project_weighted_cross(z, w),
        vertices=verts, sampler=_polytopal_sampler(verts))
    support.max_norm = lambda: float(np.max(w))

    def subgrad(x):
        return verts[_vertex_argmax(verts, x)].copy()

    return SublinearFn(WEIGHTED_INF_NORM, d, (d,),
                       lambda x: float(np.max(w * np.abs(x))),
                       support, float(np.max(w)), subgrad, weights=w)


def coordinate_max(dim):
    """sigma(x) = max_i x_i; dsigma(0) is the probability simplex."""
    d = int(dim)
    if d < 1:
        raise ValueError("dim must be positive")
    verts = np.eye(d)
    support = SupportSet(SIMPLEX, (d,), project_simplex,
                         vertices=verts, sampler=_polytopal_sampler(verts))
    support.max_norm = lambda: 1.0

    def subgrad(x):
        e = np.zeros(d)
        e[int(np.argmax(x))] = 1.0
        return e

    return SublinearFn(MAX, d, (d,), lambda x: float(np.max(x)),
                       support, 1.0, subgrad)


def max_eigen(dim):
    """sigma(A) = lambda_max(A) on symmetric matrices.

    dsigma(0) is the spectral simplex {S >= 0, tr S = 1}; projection is the
    eigenvalue-space simplex projection under the trace inner product.
    """
    d = int(dim)
    if d < 1:
        raise ValueError("dim must be positive")
    if d > _JACOBI_MAX_ORDER:
        raise ValueError(f"max-eigen is limited to order {_JACOBI_MAX_ORDER}")

    def project(z):
        w, v = jacobi_eigh(z)
        lam = project_simplex(w)
        return _sym(v @ np.diag(lam) @ v.T)

    def sample(n, rng):
        out = np.empty((n, d, d))
        for i in range(n):
            q, _ = np.linalg.qr(rng.standard_normal((d, d)))
            lam = rng.dirichlet(np.ones(d))
            out[i] = _sym(q @ np.diag(lam) @ q.T)
        return out

    support = SupportSet(SPECTRAL_SIMPLEX, (d, d), project, sampler=sample)
    support.max_norm = lambda: 1.0

    def value(x):
        w, _ = jacobi_eigh(x)
        return float(w[-1])

    def subgrad(x):
        w, v = jacobi_eigh(x)
        u = v[:, -1]
        return np.outer(u, u)

    return SublinearFn(MAX_EIGEN, d, (d, d), value, support, 1.0, subgrad)


def polytope_support(vertices):
    """Support function of conv(vertices): sigma(x) = max_i <v_i, x>."""
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[0] < 1:
        raise ValueError("vertices must be a nonempty 2-D array")
    if not np.all(np.isfinite(verts)):
        raise ValueError("non-finite vertex components")
    d = verts.shape[1]
    support = SupportSet(
        POLYTOPE_SET, (d,), lambda z: _project_convex_hull(verts, z),
        vertices=verts, sampler=_polytopal_sampler(verts))
    norms = np.linalg.norm(verts, axis=1)
    support.max_norm = lambda: float(np.max(norms))

    def subgrad(x):
        return verts[_vertex_argmax(verts, x)].copy()

    return SublinearFn(POLYTOPE, d, (d,),
                       lambda x: float(np.max(verts @ x)),
                       support, float(np.max(norms)), subgrad)


_CONSTRUCTORS = {
    RELU: lambda desc: relu(),
    EUCLIDEAN_NORM: lambda desc: euclidean_norm(desc.get("dim", 2)),
    ONE_NORM: lambda desc: one_norm(desc.get("dim", 2)),
    WEIGHTED_INF_NORM: lambda desc: weighted_inf_norm(
        desc.get("weights", (1.0, 2.0))),
    MAX: lambda desc: coordinate_max(desc.get("dim", 2)),
    MAX_EIGEN: lambda desc: max_eigen(desc.get("dim", 2)),
    POLYTOPE: lambda desc: polytope_support(desc["vertices"]),
}


def from_descriptor(desc):
    """Build a catalog function from a JSON-style descriptor dict."""
    family = str(desc.get("family", "")).replace("_", "-").lower()
    if family not in _CONSTRUCTORS:
        raise ValueError(f"unknown family {desc.get('family')!r}")
    return _CONSTRUCTORS[family](desc)


def eval_sublinear(f, x):
    """sigma(x) for a catalog function."""
    return f.value(x)


def project_support(f, x):
    """P_{dsigma(0)}(x) for a catalog function."""
    return f.project_support(x)


def subgradient_at(f, x):
    """An element of dsigma(x) with deterministic tie-breaking."""
    return f.subgradient(x)
