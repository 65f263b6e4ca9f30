"""
Ellipsoid positions of convex bodies.

``loewner_ellipsoid`` computes the minimum-volume enclosing ellipsoid of a
vertex set by Khachiyan's barycentric coordinate ascent with Wolfe-Atwood
away steps.  ``m_proxy`` turns it into a stand-in for an M-ellipsoid: the
Loewner ellipsoid of the symmetrized, barycenter-centred body rescaled to
the body's volume, together with the measured constants

    Vol(K + E)^{1/d} / Vol(K)^{1/d}   and   Vol(K & E)^{1/d} / Vol(K)^{1/d}.

No universal constant is assumed; the measured ratios are reported.
"""

from dataclasses import dataclass
import math

import numpy as np

from .bodies import (Ellipsoid, VPolytope, as_vpolytope, barycenter,
                     difference_body, membership_oracle, proportional_factor,
                     translate)
from .exceptions import DomainError, NumericalError
from .volume import ellipsoid_volume, mc_acceptance, sum_volume, volume

DEFAULT_EPS = 1e-4
MAX_ITER = 100_000
QUALITY_SAMPLES = 200_000


def _khachiyan(X, eps, centered, max_iter):
    m, d = X.shape
    Q = X.T if centered else np.vstack([X.T, np.ones(m)])
    D = Q.shape[0]
    u = np.full(m, 1.0 / m)
    for it in range(max_iter):
        M = (Q * u) @ Q.T
        try:
            Minv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            raise DomainError("points are affinely degenerate") from None
        g = np.einsum("ij,ik,kj->j", Q, Minv, Q)
        j = int(np.argmax(g))
        active = u > 0
        k = int(np.flatnonzero(active)[np.argmin(g[active])])
        up, down = g[j] - D, D - g[k]
        if up <= eps * D and down <= eps * D:
            return u, it
        if up >= down:
            i, step = j, up / (D * (g[j] - 1.0))
        else:
            i, step = k, -down / (D * (g[k] - 1.0))
            step = max(step, -u[k] / (1.0 - u[k]))
        u *= 1.0 - step
        u[i] += step
        u = np.maximum(u, 0.0)
    raise NumericalError(
        f"Khachiyan iteration did not converge: residual {max(up, down) / D:.3g}")


def loewner_ellipsoid(P, eps=DEFAULT_EPS, centered=None, max_iter=MAX_ITER):
    """Minimum-volume ellipsoid containing the vertices of P.

    Parameters
    ----------
    P : VPolytope or array_like
        Body or (m, d) point set with non-empty interior.
    eps : float
        Relative optimality tolerance, in (0, 0.1].
    centered : bool, optional
        Force the center to the origin (valid for origin-symmetric sets).
        By default this is chosen when the point set is origin-symmetric.

    Returns
    -------
    Ellipsoid
        Scaled so that every vertex has gauge at most 1.
    """
    if not 0 < eps <= 0.1:
        raise DomainError("eps must lie in (0, 0.1]")
    if not isinstance(P, VPolytope):
        P = VPolytope(P)
    X = P.reduced().vertices if P.dim > 1 else P.vertices
    if centered is None:
        centered = _origin_symmetric(X)
    u, _ = _khachiyan(X, eps, centered, max_iter)
    d = X.shape[1]
    if centered:
        c = np.zeros(d)
        S = (X.T * u) @ X
    else:
        c = u @ X
        S = (X.T * u) @ X - np.outer(c, c)
    A = np.linalg.inv(S) / d
    A = 0.5 * (A + A.T)
    Y = X - c
    worst = float(np.max(np.einsum("ij,jk,ik->i", Y, A, Y)))
    return Ellipsoid(c, A / worst)


def _origin_symmetric(X, tol=1e-9):
    dist = np.min(np.linalg.norm(-X[:, None, :] - X[None, :, :], axis=2), axis=1)
    return bool(dist.max() <= tol * max(1.0, float(np.abs(X).max())))


def is_hyperoctahedral(K, tol=1e-9):
    """True when the vertex set (about its barycenter) is invariant under all
    coordinate permutations and sign changes, e.g. cubes and cross-polytopes."""
    if not isinstance(K, VPolytope):
        return False
    X = K.reduced().vertices
    X = X - X.mean(axis=0)
    d = X.shape[1]
    gens = [np.diag([-1.0] + [1.0] * (d - 1))]
    for i in range(d - 1):
        p = np.eye(d)
        p[[i, i + 1]] = p[[i + 1, i]]
        gens.append(p)
    scale_ = max(1.0, float(np.abs(X).max()))
    for g in gens:
        Y = X @ g.T
        dist = np.min(np.linalg.norm(Y[:, None, :] - X[None, :, :], axis=2), axis=1)
        if dist.max() > tol * scale_:
            return False
    return True


@dataclass(frozen=True)
class MProxy:
    """Volume-normalized ellipsoid standing in for an M-ellipsoid of a body.

    ``quality_sum`` and ``quality_intersection`` are the measured volume-radius
    ratios of ``K + E`` and ``K & E`` against K; ``constant`` is the smallest
    C for which the ellipsoid satisfies both M-ellipsoid inequalities.
    """

    ellipsoid: Ellipsoid
    source: str
    quality_sum: float = math.nan
    quality_intersection: float = math.nan

    @property
    def constant(self):
        return max(self.quality_sum, 1.0 / self.quality_intersection)


def _volume_matched(E, vol):
    d = E.dim
    s = (vol / ellipsoid_volume(E)) ** (1.0 / d)
    return Ellipsoid(E.center, E.shape / s**2)


def intersection_volume(K, E, samples=QUALITY_SAMPLES, seed=0):
    """Vol(K & E), sampling uniformly from E."""
    if isinstance(K, Ellipsoid):
        if proportional_factor(K.shape, E.shape) is not None and np.allclose(
                K.center, E.center):
            return min(ellipsoid_volume(K), ellipsoid_volume(E))
        g = membership_oracle(translate(K, -K.center))
        inside = lambda X: g(X - K.center) <= 1.0
    else:
        V = as_vpolytope(K)
        c = V.vertices.mean(axis=0)
        g = membership_oracle(translate(V, -c))
        inside = lambda X: g(X - c) <= 1.0
    hits = mc_acceptance(inside, E, samples, seed)
    return ellipsoid_volume(E) * hits / samples


def proxy_quality(K, E, samples=QUALITY_SAMPLES, seed=0):
    d = K.dim
    vk = volume(K, samples, seed).value
    vs = sum_volume(K, E, samples, seed).value
    vi = intersection_volume(K, E, samples, seed + 1)
    return (vs / vk) ** (1.0 / d), (vi / vk) ** (1.0 / d)


def m_proxy(K, eps=DEFAULT_EPS, quality=True, samples=QUALITY_SAMPLES, seed=0):
    """M-ellipsoid proxy of K, centred at its barycenter.

    Ellipsoids are their own proxy and bodies with hyperoctahedral symmetry
    (cubes, cross-polytopes) get the ball of equal volume ("known-exact").
    Anything else gets the volume-matched Loewner ellipsoid of
    ``(K - K) / 2`` ("loewner-scaled").
    """
    vol = volume(K, samples, seed).value
    if isinstance(K, Ellipsoid):
        E, source = K, "known-exact"
    else:
        c = barycenter(K)
        if is_hyperoctahedral(as_vpolytope(K)):
            E, source = Ellipsoid.ball(K.dim, center=c), "known-exact"
        else:
            sym = difference_body(translate(K, -c))
            L = loewner_ellipsoid(as_vpolytope(sym), eps, centered=True)
            E, source = Ellipsoid(c, L.shape), "loewner-scaled"
    E = _volume_matched(E, vol)
    qs = qi = math.nan
    if quality:
        qs, qi = proxy_quality(K, E, samples, seed)
    return MProxy(E, source, qs, qi)


def m_position_map(K, proxy=None):
    """Volume-preserving T sending the proxy ellipsoid to a ball.

    With the proxy written as ``Q B`` (Q symmetric), ``T = det(Q)^{1/d} Q^{-1}``.
    """
    if proxy is None:
        proxy = m_proxy(K, quality=False)
    Q = proxy.ellipsoid.sqrt_map
    d = Q.shape[0]
    _, logdet = np.linalg.slogdet(Q)
    T = math.exp(logdet / d) * np.linalg.inv(Q)
    return T


def verify_rbm(K1, K2, samples=QUALITY_SAMPLES, seed=0):
    """``Vol(K1+K2)^{1/d} / (Vol(K1)^{1/d} + Vol(K2)^{1/d})``."""
    d = K1.dim
    v1 = volume(K1, samples, seed).value
    v2 = volume(K2, samples, seed).value
    vs = sum_volume(K1, K2, samples, seed).value
    return vs ** (1 / d) / (v1 ** (1 / d) + v2 ** (1 / d))


def verify_withP(P, K, proxy=None, samples=QUALITY_SAMPLES, seed=0):
    """Ratio pair comparing ``P + E_K`` with ``P + K``.

    P may be a single point, in which case both ratios are
    ``(Vol(E_K) / Vol(K))^{1/d} = 1``.
    """
    if proxy is None:
        proxy = m_proxy(K, quality=False)
    E = proxy.ellipsoid
    d = K.dim
    if isinstance(P, (VPolytope, Ellipsoid)) or hasattr(P, "dim"):
        a = sum_volume(P, E, samples, seed).value
        b = sum_volume(P, K, samples, seed).value
    else:
        a = ellipsoid_volume(E)
        b = volume(K, samples, seed).value
    r = (a / b) ** (1.0 / d)
    return r, 1.0 / r
