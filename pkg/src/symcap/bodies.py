"""
Convex bodies and the geometric operations used by the capacity bounds.

Three representations are supported:

* ``VPolytope``: convex hull of a finite vertex list,
* ``HPolytope``: intersection of halfspaces ``<a_i, x> <= b_i``,
* ``Ellipsoid``: ``{x : <A (x - c), x - c> <= 1}``.

Vertex representations are the working format; Minkowski sums and
difference bodies are computed as convex hulls of pairwise vertex sums
(via Qhull), except for ellipsoid pairs with proportional shape matrices
whose sum is again an ellipsoid.
"""

from dataclasses import dataclass
from functools import cached_property
import logging
import math

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError
from scipy.special import ndtri
from scipy.stats import qmc

from .exceptions import DimensionError, DomainError, NumericalError
from .symplectic import complex_structure, half_dim

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-12
SYM_TOL = 1e-8
FACET_DIM_LIMIT = 6
APPROX_EPS = 0.05
INRADIUS_DIRECTIONS = 10_000
BLOCK_BUDGET = 4_000_000


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _canonical_points(points):
    """Merge points closer than MERGE_TOL and sort lexicographically."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return pts
    keys = np.round(pts / MERGE_TOL).astype(np.int64) if np.abs(pts).max() < 1e6 \
        else np.round(pts, 12)
    _, idx = np.unique(keys, axis=0, return_index=True)
    pts = pts[np.sort(idx)]
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def _hull(points):
    try:
        return ConvexHull(points)
    except (QhullError, ValueError) as exc:
        raise DomainError(f"points do not span a full-dimensional body: {exc}") from None


class _Body:
    @property
    def dim(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class VPolytope(_Body):
    """Convex hull of ``vertices`` (an (m, d) array)."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.ndim != 2:
            raise DimensionError("vertices must be a 2-d array")
        m, d = V.shape
        if m < d + 1 or np.linalg.matrix_rank(V[1:] - V[0], tol=1e-10) < d:
            raise DomainError("vertex set does not have non-empty interior")
        object.__setattr__(self, "vertices", _readonly(V))

    @property
    def dim(self):
        return self.vertices.shape[1]

    @cached_property
    def hull(self):
        if self.dim == 1:
            raise DimensionError("Qhull needs dimension >= 2")
        return _hull(self.vertices)

    @cached_property
    def facets(self):
        """Unique facet hyperplanes as (unit normals, offsets)."""
        if self.dim == 1:
            lo, hi = self.vertices.min(), self.vertices.max()
            return np.array([[-1.0], [1.0]]), np.array([-lo, hi])
        eq = self.hull.equations
        keys = np.round(eq / 1e-9).astype(np.int64)
        _, idx = np.unique(keys, axis=0, return_index=True)
        eq = eq[np.sort(idx)]
        return eq[:, :-1], -eq[:, -1]

    def reduced(self):
        """Same body with only the extreme points kept."""
        if self.dim == 1:
            return VPolytope([[self.vertices.min()], [self.vertices.max()]])
        hull = self.hull
        if len(hull.vertices) == len(self.vertices):
            return self
        R = VPolytope(_canonical_points(hull.points[hull.vertices]))
        # same point set up to order; the parent's hull stays valid since
        # consumers only read hull.points, simplices and equations
        R.__dict__["hull"] = hull
        return R


@dataclass(frozen=True, eq=False)
class HPolytope(_Body):
    """``{x : normals @ x <= offsets}``; must be bounded."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).ravel()
        if a.shape[0] != b.shape[0]:
            raise DimensionError("normals and offsets disagree in length")
        object.__setattr__(self, "normals", _readonly(a))
        object.__setattr__(self, "offsets", _readonly(b))

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def centered(self):
        return bool(np.all(self.offsets > 0))

    @cached_property
    def interior_point(self):
        """Chebyshev center, raising if the polytope is empty or unbounded."""
        a, b = self.normals, self.offsets
        norms = np.linalg.norm(a, axis=1)
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=np.hstack([a, norms[:, None]]), b_ub=b,
                      bounds=[(None, None)] * self.dim + [(0, None)],
                      method="highs")
        if res.status == 3:
            raise DomainError("halfspace system is unbounded")
        if res.status != 0 or res.x[-1] <= 1e-12:
            raise DomainError("halfspace system has empty interior")
        return res.x[:-1]

    def to_vpolytope(self):
        hs = HalfspaceIntersection(
            np.hstack([self.normals, -self.offsets[:, None]]), self.interior_point)
        pts = hs.intersections
        if not np.all(np.isfinite(pts)):
            raise DomainError("halfspace system is unbounded")
        return VPolytope(pts).reduced()


@dataclass(frozen=True, eq=False)
class Ellipsoid(_Body):
    """``{x : (x - center)^T shape (x - center) <= 1}``."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.shape, dtype=float))
        c = np.asarray(self.center, dtype=float).ravel()
        if A.shape != (c.size, c.size):
            raise DimensionError("shape matrix and center disagree")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A)[0] <= 0:
            raise DomainError("ellipsoid shape matrix must be positive definite")
        object.__setattr__(self, "shape", _readonly(A))
        object.__setattr__(self, "center", _readonly(c))

    @classmethod
    def ball(cls, d, radius=1.0, center=None):
        c = np.zeros(d) if center is None else center
        return cls(c, np.eye(d) / radius**2)

    @classmethod
    def from_map(cls, Q, center=None):
        """The image ``center + Q B^d`` of the unit ball."""
        Q = np.asarray(Q, dtype=float)
        Qi = np.linalg.inv(Q)
        c = np.zeros(Q.shape[0]) if center is None else center
        return cls(c, Qi.T @ Qi)

    @property
    def dim(self):
        return self.center.size

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.shape)

    @property
    def sqrt_map(self):
        """Symmetric Q with ``E = center + Q B``."""
        w, U = self._eig
        return (U / np.sqrt(w)) @ U.T


ConvexBody = VPolytope | HPolytope | Ellipsoid


@dataclass(frozen=True)
class ContactCertificate:
    """Contact point data for the square projection argument.

    ``point`` lies on the boundary of K at distance ``radius`` from the
    origin; K lies between the hyperplanes orthogonal to ``point`` and to
    ``J @ point`` at distance ``radius``.  ``residual`` is the largest
    excess of a support value over ``radius``.
    """

    point: np.ndarray
    radius: float
    rotated_point: np.ndarray
    residual: float


@dataclass(frozen=True)
class InradiusResult:
    radius: float
    direction: np.ndarray
    approximate: bool = False


# -- conversions ---------------------------------------------------------

def sphere_directions(d, count, seed=0):
    """Deterministic low-discrepancy unit vectors (scrambled Halton)."""
    u = qmc.Halton(d, scramble=True, seed=seed).random(count)
    z = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def grid_size(d, eps=APPROX_EPS):
    return 2 * d * math.ceil((1.0 / eps) ** ((d - 1) / 2))


def ellipsoid_to_polytope(E, eps=APPROX_EPS, outer=True, seed=0, count=None):
    """Polytope approximation of an ellipsoid from a boundary grid.

    With ``outer=True`` the grid polytope is dilated by the reciprocal of
    its inradius, so the result contains E.
    """
    d = E.dim
    count = grid_size(d, eps) if count is None else count
    G = sphere_directions(d, (count + 1) // 2, seed)
    U = np.vstack([np.eye(d), -np.eye(d), G, -G])
    if outer:
        unit = VPolytope(U)
        rho = float(np.min(unit.facets[1]))
        U = U / rho
    return VPolytope(E.center + U @ E.sqrt_map).reduced()


def as_vpolytope(K, eps=APPROX_EPS):
    if isinstance(K, VPolytope):
        return K
    if isinstance(K, HPolytope):
        return K.to_vpolytope()
    if isinstance(K, Ellipsoid):
        return ellipsoid_to_polytope(K, eps)
    raise TypeError(f"not a convex body: {type(K).__name__}")


def as_hpolytope(K):
    if isinstance(K, HPolytope):
        return K
    if isinstance(K, VPolytope):
        a, b = K.facets
        return HPolytope(a, b)
    raise TypeError(f"no exact halfspace form for {type(K).__name__}")


# -- linear maps and sums --------------------------------------------------

def _as_point(x, d=None):
    if isinstance(x, _Body):
        return None
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and (d is None or x.size == d):
        return x
    return None


def translate(K, t):
    t = np.asarray(t, dtype=float)
    if isinstance(K, VPolytope):
        return VPolytope(K.vertices + t)
    if isinstance(K, HPolytope):
        return HPolytope(K.normals, K.offsets + K.normals @ t)
    return Ellipsoid(K.center + t, K.shape)


def linear_image(K, M):
    """Image of K under the invertible matrix M."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (K.dim, K.dim):
        raise DimensionError(f"matrix shape {M.shape} does not act on R^{K.dim}")
    if abs(np.linalg.det(M)) < 1e-300 or np.linalg.cond(M) > 1e14:
        raise DomainError("linear map is singular")
    if isinstance(K, VPolytope):
        return VPolytope(K.vertices @ M.T)
    Mi = np.linalg.inv(M)
    if isinstance(K, HPolytope):
        return HPolytope(K.normals @ Mi, K.offsets)
    return Ellipsoid(M @ K.center, Mi.T @ K.shape @ Mi)


def scale(K, s):
    if isinstance(K, Ellipsoid):
        return Ellipsoid(s * K.center, K.shape / s**2)
    if isinstance(K, HPolytope):
        return HPolytope(K.normals, s * K.offsets)
    return VPolytope(s * K.vertices)


def negate(K):
    if isinstance(K, Ellipsoid):
        return Ellipsoid(-K.center, K.shape)
    if isinstance(K, HPolytope):
        return HPolytope(-K.normals, K.offsets)
    return VPolytope(-K.vertices)


def proportional_factor(A1, A2, tol=1e-9):
    """t with A2 = t^2 A1 (so E1 = t E2 up to centers), or None."""
    t2 = np.trace(A2) / np.trace(A1)
    if np.linalg.norm(t2 * A1 - A2) <= tol * np.linalg.norm(A2):
        return math.sqrt(t2)
    return None


def minkowski_sum(P, Q, symmetric=None):
    """Minkowski sum ``P + Q``.

    Either argument may be a single point (1-d array), in which case the
    result is a translate.  Ellipsoids with proportional shape matrices sum
    to an ellipsoid; every other combination goes through vertex sums.
    ``symmetric`` asserts the sum is origin-symmetric; by default it is
    inferred from the summands.
    """
    d = P.dim if isinstance(P, _Body) else (Q.dim if isinstance(Q, _Body) else None)
    p, q = _as_point(P, d), _as_point(Q, d)
    if p is not None and q is not None:
        raise DomainError("at least one summand must be a body")
    if p is not None:
        return translate(Q, p)
    if q is not None:
        return translate(P, q)
    if P.dim != Q.dim:
        raise DimensionError(f"cannot add bodies in R^{P.dim} and R^{Q.dim}")
    if isinstance(P, Ellipsoid) and isinstance(Q, Ellipsoid):
        t = proportional_factor(P.shape, Q.shape)
        if t is not None:
            return Ellipsoid(P.center + Q.center, Q.shape / (1.0 + t) ** 2)
    VP, VQ = as_vpolytope(P), as_vpolytope(Q)
    if symmetric is None:
        symmetric = is_centrally_symmetric(VP) and is_centrally_symmetric(VQ)
    pts = (VP.vertices[:, None, :] + VQ.vertices[None, :, :]).reshape(-1, P.dim)
    R = VPolytope(_canonical_points(pts)).reduced()
    if symmetric:
        # Qhull merging in high dimension can drop near-coplanar vertices
        # unevenly; restore the central symmetry the sum is known to have
        S = _canonical_points(np.vstack([R.vertices, -R.vertices]))
        return R if len(S) == len(R.vertices) else VPolytope(S)
    return R


def symmetry_center(K, tol=SYM_TOL):
    """Center c with K = 2c - K, or None if K is not centrally symmetric."""
    if isinstance(K, Ellipsoid):
        return K.center.copy()
    V = as_vpolytope(K).reduced().vertices
    c = V.mean(axis=0)
    W = 2 * c - V
    dist = np.min(np.linalg.norm(W[:, None, :] - V[None, :, :], axis=2), axis=1)
    scale_ = max(1.0, float(np.abs(V).max()))
    return c if dist.max() <= tol * scale_ else None


def is_centrally_symmetric(K, tol=SYM_TOL):
    """True when K = -K."""
    c = symmetry_center(K, tol)
    if c is None:
        return False
    scale_ = 1.0 if isinstance(K, Ellipsoid) else max(
        1.0, float(np.abs(as_vpolytope(K).vertices).max()))
    return float(np.linalg.norm(c)) <= tol * scale_


def difference_body(K):
    """``K - K``; for a body symmetric about c this is ``2 (K - c)``."""
    if isinstance(K, Ellipsoid):
        return Ellipsoid(np.zeros(K.dim), K.shape / 4.0)
    V = as_vpolytope(K).reduced()
    c = symmetry_center(V)
    if c is not None:
        return VPolytope(2.0 * (V.vertices - c))
    return minkowski_sum(V, negate(V), symmetric=True)


# -- support, gauge, radii -----------------------------------------------

def support(K, u):
    """Support function ``max_{x in K} <u, x>``; u may be a (k, d) batch."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    U = np.atleast_2d(u)
    if isinstance(K, Ellipsoid):
        Ai = np.linalg.inv(K.shape)
        h = U @ K.center + np.sqrt(np.einsum("ij,jk,ik->i", U, Ai, U))
    else:
        V = as_vpolytope(K).vertices
        h = (U @ V.T).max(axis=1)
    return float(h[0]) if single else h


def _check_origin_interior(K):
    if isinstance(K, Ellipsoid):
        g = float((K.center) @ K.shape @ K.center)
        ok = g < 1.0
    else:
        H = as_hpolytope(K)
        ok = bool(np.all(H.offsets > 0))
    if not ok:
        raise DomainError("origin is not an interior point")


def gauge(K, x):
    """Minkowski functional ``min {t > 0 : x in tK}``.

    Vertex polytopes use a linear program over convex combinations
    (``x = sum l_i v_i``, ``sum l_i = t``, ``l >= 0``).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(K, Ellipsoid):
        if np.any(K.center):
            _check_origin_interior(K)
            return _gauge_ellipsoid_offcenter(K, x)
        return float(np.sqrt(max(x @ K.shape @ x, 0.0)))
    if isinstance(K, HPolytope):
        if not np.all(K.offsets > 0):
            raise DomainError("origin is not an interior point")
        return float(max(0.0, np.max(K.normals @ x / K.offsets)))
    V = K.vertices
    m = V.shape[0]
    if not np.all(K.facets[1] > 0):
        raise DomainError("origin is not an interior point")
    res = linprog(np.ones(m), A_eq=V.T, b_eq=x, bounds=[(0, None)] * m,
                  method="highs")
    if res.status != 0:
        raise NumericalError(f"gauge LP failed: {res.message}")
    return float(res.fun)


def _gauge_ellipsoid_offcenter(K, x):
    # solve <A(x/t - c), x/t - c> = 1 for t > 0
    A, c = K.shape, K.center
    a = c @ A @ c - 1.0
    b = -2.0 * (x @ A @ c)
    q = x @ A @ x
    if q == 0:
        return 0.0
    # a s^2 + b s + q = 0 in s = 1/t, a < 0
    s = (-b - math.sqrt(b * b - 4 * a * q)) / (2 * a)
    return 1.0 / s


def membership_oracle(K):
    """Vectorized gauge for a batch of points (origin must be interior)."""
    if isinstance(K, Ellipsoid):
        A, c = K.shape, K.center
        if np.any(c):
            return lambda X: np.array([_gauge_ellipsoid_offcenter(K, x) for x in X])
        return lambda X: np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, A, X), 0.0))
    H = as_hpolytope(K)
    if not np.all(H.offsets > 0):
        raise DomainError("origin is not an interior point")
    G = H.normals / H.offsets[:, None]
    return lambda X: np.maximum(blockwise_max(X, G), 0.0)


def blockwise_max(X, G, offsets=0.0, budget=BLOCK_BUDGET):
    """``(X @ G.T - offsets).max(axis=1)`` without materializing more than
    ``budget`` products at once (bodies with thousands of facets)."""
    rows = max(1, budget // max(1, len(G)))
    return np.concatenate([(X[i:i + rows] @ G.T - offsets).max(axis=1)
                           for i in range(0, len(X), rows)])


def inradius_details(K, seed=0):
    """Largest r with ``r B`` inside the origin-symmetric body K."""
    if not is_centrally_symmetric(K):
        raise DomainError("inradius requires a body symmetric about the origin")
    if isinstance(K, Ellipsoid):
        w, U = K._eig
        return InradiusResult(1.0 / math.sqrt(w[-1]), U[:, -1] / math.sqrt(w[-1]))
    if isinstance(K, HPolytope) or K.dim <= FACET_DIM_LIMIT:
        a, b = as_hpolytope(K).normals, as_hpolytope(K).offsets
        dist = b / np.linalg.norm(a, axis=1)
        i = int(np.argmin(dist))
        return InradiusResult(float(dist[i]), dist[i] * a[i] / np.linalg.norm(a[i]))
    return _inradius_sampled(K, seed)


def _inradius_sampled(K, seed):
    # min of the support function over the sphere; sampling overestimates,
    # refinement pushes the estimate down
    V = K.vertices
    U = sphere_directions(K.dim, INRADIUS_DIRECTIONS, seed)
    h = (U @ V.T).max(axis=1)
    best = np.argsort(h)[:10]
    rng = np.random.default_rng(seed)
    r_best, u_best = h[best[0]], U[best[0]]
    for i in best:
        u, hu, step = U[i], h[i], 0.1
        while step > 1e-9:
            cand = u + step * rng.standard_normal((32, K.dim))
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
            hc = (cand @ V.T).max(axis=1)
            j = int(np.argmin(hc))
            if hc[j] < hu:
                u, hu = cand[j], hc[j]
            else:
                step *= 0.5
        if hu < r_best:
            r_best, u_best = hu, u
    return InradiusResult(float(r_best), r_best * u_best, approximate=True)


def inradius(K):
    return inradius_details(K).radius


def centered_inball_radius(K):
    """Radius of the largest origin-centred ball inside K (no symmetry needed)."""
    if isinstance(K, Ellipsoid):
        if np.any(K.center):
            H_dirs = sphere_directions(K.dim, 2000)
            return float(max(0.0, np.min(support(K, H_dirs))))
        return 1.0 / math.sqrt(K._eig[0][-1])
    H = as_hpolytope(K)
    return float(max(0.0, np.min(H.offsets / np.linalg.norm(H.normals, axis=1))))


def is_i_invariant(K, tol=SYM_TOL, directions=200, seed=0):
    """True when ``J K = K`` (checked on support values)."""
    n = half_dim(K.dim)
    J = complex_structure(n)
    if isinstance(K, Ellipsoid):
        A = K.shape
        return bool(np.linalg.norm(J.T @ A @ J - A) <= tol * np.linalg.norm(A)
                    and np.linalg.norm(J @ K.center - K.center) <= tol)
    U = np.vstack([np.eye(K.dim), -np.eye(K.dim), sphere_directions(K.dim, directions, seed)])
    h = support(K, U)
    hJ = support(K, U @ J)  # h_{JK}(u) = h_K(J^T u)
    return bool(np.max(np.abs(h - hJ)) <= tol * max(1.0, float(np.max(np.abs(h)))))


def contact_certificate(K, r=None):
    """Contact point x with ``|x| = r`` and the four bounding hyperplanes.

    Certifies ``|<x/r, v>| <= r`` and ``|<Jx/r, v>| <= r`` on K, so the
    projection of K to span{x, Jx} fits in a square of edge 2r.
    """
    if not is_i_invariant(K):
        raise DomainError("body is not invariant under multiplication by i")
    info = inradius_details(K)
    if r is None:
        r = info.radius
    x = info.direction
    if abs(np.linalg.norm(x) - r) > 1e-6 * max(1.0, r):
        raise NumericalError("no contact point at the given radius")
    J = complex_structure(K.dim // 2)
    ix = J @ x
    dirs = np.vstack([x, -x, ix, -ix]) / r
    residual = float(np.max(support(K, dirs)) - r)
    return ContactCertificate(point=x, radius=float(r), rotated_point=ix,
                              residual=residual)


# -- barycenter and triangulation -----------------------------------------

def pyramid_decomposition(P):
    """Simplices (apex, facet simplex) covering the hull of P.

    Returns (volumes, centroids) of the ``d``-simplices formed by an
    interior apex and each triangulated boundary facet, in Qhull order.
    """
    P = P.reduced() if isinstance(P, VPolytope) else as_vpolytope(P)
    d = P.dim
    V = P.vertices
    if d == 1:
        return np.array([V.max() - V.min()]), np.array([[0.5 * (V.max() + V.min())]])
    hull = P.hull
    apex = V.mean(axis=0)
    S = hull.points[hull.simplices]  # (f, d, d)
    dets = np.abs(np.linalg.det(S - apex))
    vols = dets / math.factorial(d)
    cents = (S.sum(axis=1) + apex) / (d + 1)
    return vols, cents


def barycenter(K):
    if isinstance(K, Ellipsoid):
        return K.center.copy()
    vols, cents = pyramid_decomposition(as_vpolytope(K))
    return (vols[:, None] * cents).sum(axis=0) / vols.sum()


def centered(K):
    """Translate K so its barycenter is the origin."""
    c = barycenter(K)
    return translate(K, -c) if np.any(c) else K
