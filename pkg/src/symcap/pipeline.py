"""
Upper bounds on the linearized cylindrical capacity ``c^Z_lin``.

The bound follows a fixed chain of bodies::

    K1 = K - K                 (centrally symmetric)
    K2 = S K1                  (S symplectic, the WDS factor of the
                                M-position map of K1)
    K3 = K2 + i K2             (symmetric and i-invariant)
    r  = inradius(K3)

and ``c^Z_lin(K) <= c^Z_lin(K3) <= 2 pi r^2`` because K3 projects onto the
complex line spanned by a contact point x and ix inside a square of edge
2r.  Every intermediate body is kept in a ``PipelineTrace``.

The module also hosts the volume-ratio checks that accompany the bound:
Rogers-Shephard ``Vol(K - K) / Vol(K)`` and the generalized ratio
``(Vol(A + B) / Vol(A - B))^{1/d}``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .bodies import (ContactCertificate, Ellipsoid, barycenter, centered,
                     centered_inball_radius, contact_certificate, difference_body,
                     inradius_details, is_centrally_symmetric, is_i_invariant,
                     linear_image, minkowski_sum, negate, scale)
from .exceptions import DomainError
from .positions import m_position_map, m_proxy
from .symplectic import (complex_structure, ellipsoid_capacity, half_dim,
                         rotate, wds_decompose, williamson)
from .volume import (DEFAULT_SAMPLES, sum_volume, volume,
                     viterbo_volume_term)

THETA_GRID = tuple(k * math.pi / 8 for k in range(16))


@dataclass(frozen=True)
class SIKResult:
    """Symplectic normalization of a symmetric body.

    ``ratios[k]`` is ``(Vol(K' + e^{i theta_k} K') / Vol(K))^{1/2n}`` over
    ``thetas``; ``a2`` is their maximum.
    """

    S: np.ndarray
    body: object
    thetas: tuple = ()
    ratios: tuple = ()

    @property
    def a2(self):
        return max(self.ratios) if self.ratios else math.nan

    def __iter__(self):
        return iter((self.S, self.body))


@dataclass(frozen=True)
class PipelineTrace:
    K1: object
    S: np.ndarray
    K2: object
    K3: object
    r: float
    thetas: tuple = ()
    theta_ratios: tuple = ()
    r_approximate: bool = False
    shift: np.ndarray | None = None

    @property
    def a2(self):
        return max(self.theta_ratios) if self.theta_ratios else math.nan


@dataclass(frozen=True)
class CapacityBound:
    upper: float
    lower: float
    method: str
    trace: PipelineTrace | None = None
    certificate: ContactCertificate | None = None


@dataclass(frozen=True)
class ViterboReport:
    gamma: float
    volume_term: float
    bound: CapacityBound
    body_id: str = ""
    dimension: int = 0


def _sum_ratio(K, Kp, theta, vol_k, samples, seed):
    n = K.dim // 2
    R = rotate(theta, n)
    v = sum_volume(Kp, linear_image(Kp, R), samples, seed).value
    return (v / vol_k) ** (1.0 / (2 * n))


def sik_normalize(K, thetas=THETA_GRID, samples=DEFAULT_SAMPLES, seed=0):
    """Symplectic image ``K' = S K`` with ``K' + e^{i theta} K'`` controlled.

    T is the M-position map of K, ``T = W D S`` its WDS factorization and
    ``K' = S K``.  Since D commutes with i and W is orthogonal, the sums
    ``K' + e^{i theta} K'`` have the volumes of the M-position sums.  Pass
    ``thetas=()`` to skip the volume ratios.
    """
    half_dim(K.dim)
    if not is_centrally_symmetric(K):
        raise DomainError("expected a body symmetric about the origin")
    T = m_position_map(K, m_proxy(K, quality=False, samples=samples, seed=seed))
    S = wds_decompose(T).S
    Kp = linear_image(K, S)
    ratios = ()
    if thetas:
        vol_k = volume(K, samples, seed).value
        cache = {}
        vals = []
        for t in thetas:
            # e^{i(t + pi)} K' = -e^{it} K' = e^{it} K' for symmetric K'
            key = round((t % math.pi) / math.pi, 12) % 1.0
            if key not in cache:
                cache[key] = 2.0 if key == 0.0 else _sum_ratio(
                    K, Kp, t, vol_k, samples, seed)
            vals.append(cache[key])
        ratios = tuple(vals)
    return SIKResult(S, Kp, tuple(thetas), ratios)


def lemma_ai_bound(K):
    """``c^Z_lin(K) <= 2 pi r^2`` for symmetric, i-invariant K."""
    half_dim(K.dim)
    if not is_i_invariant(K):
        raise DomainError("body is not invariant under multiplication by i")
    info = inradius_details(K)
    cert = contact_certificate(K)
    r = info.radius
    return CapacityBound(2 * math.pi * r * r, math.pi * r * r, "lemma-ai",
                         certificate=cert)


def tmt_upper_bound(K, thetas=THETA_GRID, samples=DEFAULT_SAMPLES, seed=0):
    """Upper bound on ``c^Z_lin(K)`` with the full body trace.

    K is first translated to its barycenter.  ``lower`` is ``pi rho^2`` with
    rho the radius of the largest ball about the barycenter inside K.
    """
    half_dim(K.dim)
    if isinstance(K, Ellipsoid):
        shift = -K.center
    else:
        shift = -barycenter(K)
    K0 = centered(K)
    K1 = difference_body(K0)
    sik = sik_normalize(K1, thetas, samples, seed)
    K2 = sik.body
    J = complex_structure(K.dim // 2)
    K3 = minkowski_sum(K2, linear_image(K2, J))
    info = inradius_details(K3)
    r = info.radius
    trace = PipelineTrace(K1, sik.S, K2, K3, r, sik.thetas, sik.ratios,
                          info.approximate, shift)
    rho = centered_inball_radius(K0)
    return CapacityBound(2 * math.pi * r * r, math.pi * rho * rho, "tmt", trace)


def viterbo_ratio(K, body_id="", bound=None, samples=DEFAULT_SAMPLES, seed=0):
    """``gamma = (upper / pi) / (Vol(K) / Vol(B^{2n}))^{1/n}``."""
    if bound is None:
        bound = tmt_upper_bound(K, samples=samples, seed=seed)
    vt = viterbo_volume_term(K, samples, seed)
    return ViterboReport(bound.upper / math.pi / vt, vt, bound, body_id, K.dim)


def rogers_shephard_ratio(K, samples=DEFAULT_SAMPLES, seed=0):
    """``Vol(K - K) / Vol(K)``, at most ``C(2d, d) <= 4^d``."""
    vk = volume(K, samples, seed).value
    vd = volume(difference_body(K), samples, seed).value
    return vd / vk


def grs_ratio(A, B, samples=DEFAULT_SAMPLES, seed=0):
    """``(Vol(A + B) / Vol(A - B))^{1/d}``."""
    if A.dim != B.dim:
        raise DomainError("bodies live in different dimensions")
    vs = sum_volume(A, B, samples, seed).value
    vd = sum_volume(A, negate(B), samples, seed).value
    return (vs / vd) ** (1.0 / A.dim)


def conformal_map(alpha, S):
    """``sqrt(|alpha|) S`` composed with a reflection when alpha < 0, so that
    ``psi^T J psi = alpha J``."""
    n = S.shape[0] // 2
    psi = math.sqrt(abs(alpha)) * S
    if alpha < 0:
        # (x, y) -> (x, -y) on every complex line reverses omega
        psi = np.kron(np.eye(n), np.diag([1.0, -1.0])) @ psi
    return psi


def random_symplectic(n, rng):
    """Random symplectic matrix from a random positive definite matrix."""
    X = rng.standard_normal((2 * n, 2 * n))
    return williamson(X @ X.T + 0.5 * np.eye(2 * n)).S


@dataclass
class AxiomReport:
    entries: list = field(default_factory=list)

    def add(self, axiom, passed, detail):
        self.entries.append({"axiom": axiom, "passed": bool(passed), "detail": detail})

    @property
    def passed(self):
        return all(e["passed"] for e in self.entries)


def capacity_axioms_suite(family, seed=0, alphas=(0.5, 2.0, -3.0), rtol=1e-8):
    """Check monotonicity, conformality and normalization of
    ``ellipsoid_capacity`` on a family of centred ellipsoids."""
    rng = np.random.default_rng(seed)
    report = AxiomReport()
    for idx, E in enumerate(family):
        n = half_dim(E.dim)
        c = ellipsoid_capacity(E)
        for s in (0.5, 0.9):
            inner = scale(E, s)
            ci = ellipsoid_capacity(inner)
            report.add("P1", ci <= c + 1e-9,
                       f"body {idx}: c({s}E) = {ci:.6g} <= c(E) = {c:.6g}")
        S = random_symplectic(n, rng)
        for a in alphas:
            psi = conformal_map(a, S)
            cp = ellipsoid_capacity(linear_image(E, psi))
            report.add("P2", abs(cp - abs(a) * c) <= rtol * abs(a) * c,
                       f"body {idx}: alpha = {a}: {cp:.12g} vs {abs(a) * c:.12g}")
        r = float(rng.uniform(0.5, 2.0))
        cb = ellipsoid_capacity(Ellipsoid.ball(E.dim, r))
        report.add("P3", abs(cb - math.pi * r * r) <= rtol * math.pi * r * r,
                   f"ball radius {r:.6g}: {cb:.12g}")
    return report
