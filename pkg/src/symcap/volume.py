"""
Volumes: closed forms for balls and ellipsoids, exact pyramid
decomposition for polytopes up to dimension 6, and seeded Monte Carlo
rejection sampling from an enclosing ellipsoid elsewhere.

Monte Carlo draws are split into fixed chunks; chunk ``k`` uses a Philox
stream keyed by the seed and jumped ``k`` times, and accepted counts are
reduced in chunk order.  The estimate for a given ``(seed, samples)`` is
therefore independent of the number of worker threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln

from .bodies import (Ellipsoid, VPolytope, as_vpolytope, blockwise_max, grid_size,
                     membership_oracle, minkowski_sum, proportional_factor,
                     pyramid_decomposition, sphere_directions, support, translate)
from .exceptions import DimensionError, DomainError, NumericalError
from .symplectic import half_dim

EXACT_DIM_LIMIT = 6
DEFAULT_SAMPLES = 1_000_000
MIN_SAMPLES = 10_000
MIN_ACCEPTANCE = 1e-4
CHUNK = 1 << 16


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    method: str
    stderr: float = 0.0
    samples: int = 0
    seed: int | None = None

    def __float__(self):
        return self.value


def ball_volume(d):
    """Volume of the Euclidean unit ball in R^d."""
    if d < 1:
        raise DimensionError("dimension must be at least 1")
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1))


def ellipsoid_volume(E):
    sign, logdet = np.linalg.slogdet(E.shape)
    return ball_volume(E.dim) * math.exp(-0.5 * logdet)


def volume_exact(P):
    """Exact polytope volume by pyramids over the triangulated boundary."""
    if isinstance(P, Ellipsoid):
        return VolumeEstimate(ellipsoid_volume(P), "exact")
    if P.dim > EXACT_DIM_LIMIT:
        raise DimensionError(
            f"exact volume is limited to d <= {EXACT_DIM_LIMIT}; use volume_mc")
    vols, _ = pyramid_decomposition(as_vpolytope(P))
    value = float(vols.sum())
    if not value > 0:
        raise DomainError("degenerate polytope")
    return VolumeEstimate(value, "exact")


def uniform_in_ellipsoid(E, count, rng):
    d = E.dim
    z = rng.standard_normal((count, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = rng.random(count) ** (1.0 / d)
    return E.center + (z * r[:, None]) @ E.sqrt_map


def _stream(seed, chunk):
    return np.random.Generator(np.random.Philox(key=seed).jumped(chunk))


def mc_acceptance(inside, proposal, samples, seed, workers=1):
    """Count proposal draws accepted by ``inside`` (a batch predicate)."""
    counts = [min(CHUNK, samples - k) for k in range(0, samples, CHUNK)]

    def run(k):
        X = uniform_in_ellipsoid(proposal, counts[k], _stream(seed, k))
        return int(np.count_nonzero(inside(X)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(run, range(len(counts))))
    else:
        hits = [run(k) for k in range(len(counts))]
    return sum(hits)


def volume_mc_oracle(inside, proposal, samples=DEFAULT_SAMPLES, seed=0, workers=1):
    """Monte Carlo volume of ``{x : inside(x)}``, a subset of ``proposal``."""
    if samples < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples")
    hits = mc_acceptance(inside, proposal, samples, seed, workers)
    p = hits / samples
    if p < MIN_ACCEPTANCE:
        raise NumericalError(
            f"acceptance rate {p:.2e} below {MIN_ACCEPTANCE}; use the exact method "
            "or position the body first")
    vol_e = ellipsoid_volume(proposal)
    return VolumeEstimate(vol_e * p, "monte-carlo",
                          vol_e * math.sqrt(p * (1 - p) / samples), samples, seed)


def enclosing_ellipsoid(K):
    from .positions import loewner_ellipsoid
    if isinstance(K, Ellipsoid):
        return K
    return loewner_ellipsoid(as_vpolytope(K))


def volume_mc(K, samples=DEFAULT_SAMPLES, seed=0, workers=1, proposal=None):
    """Rejection sampling inside the Loewner ellipsoid of K.

    ``proposal`` overrides the Loewner ellipsoid; it must contain K after K
    is translated to put its vertex centroid (or center) at the origin.
    """
    if isinstance(K, Ellipsoid):
        K0 = translate(K, -K.center)
    else:
        V = as_vpolytope(K)
        K0 = translate(V, -V.vertices.mean(axis=0))
    g = membership_oracle(K0)
    if proposal is None:
        proposal = enclosing_ellipsoid(K0)
    return volume_mc_oracle(lambda X: g(X) <= 1.0, proposal, samples, seed, workers)


def volume(K, samples=DEFAULT_SAMPLES, seed=0, workers=1):
    """Exact volume where available, otherwise a Monte Carlo estimate."""
    if isinstance(K, Ellipsoid) or K.dim <= EXACT_DIM_LIMIT:
        return volume_exact(K)
    return volume_mc(K, samples, seed, workers)


def _ellipsoid_sum_cover(E1, E2):
    # E1 + E2 lies in the ellipsoid with covariance (1 + 1/p) S1 + (1 + p) S2
    S1 = np.linalg.inv(E1.shape)
    S2 = np.linalg.inv(E2.shape)
    p = math.sqrt(np.trace(S1) / np.trace(S2))
    S = (1 + 1 / p) * S1 + (1 + p) * S2
    return Ellipsoid(E1.center + E2.center, np.linalg.inv(S))


def sum_volume(P, Q, samples=DEFAULT_SAMPLES, seed=0, workers=1):
    """Volume of ``P + Q``.

    Polytope pairs and proportional ellipsoid pairs are summed exactly.  A
    polytope plus a (non-proportional) ellipsoid is estimated by Monte
    Carlo against the outer polyhedral approximation
    ``{x : <u, x> <= h_P(u) + h_Q(u)}`` over the facet normals of the
    polytope and a direction grid.
    """
    ell_p, ell_q = isinstance(P, Ellipsoid), isinstance(Q, Ellipsoid)
    if not (ell_p or ell_q) or (
            ell_p and ell_q and proportional_factor(P.shape, Q.shape) is not None):
        return volume(minkowski_sum(P, Q), samples, seed, workers)
    P = P if ell_p else as_vpolytope(P)
    Q = Q if ell_q else as_vpolytope(Q)
    d = P.dim
    G = sphere_directions(d, min(grid_size(d), 4096), seed)
    U = [np.eye(d), -np.eye(d), G, -G]
    U += [K.facets[0] for K in (P, Q) if isinstance(K, VPolytope)]
    U = np.vstack(U)
    h = support(P, U) + support(Q, U)
    cover = _ellipsoid_sum_cover(enclosing_ellipsoid(P), enclosing_ellipsoid(Q))
    return volume_mc_oracle(lambda X: blockwise_max(X, U, h) <= 0.0, cover,
                            samples, seed, workers)


def viterbo_volume_term(K, samples=DEFAULT_SAMPLES, seed=0):
    """``(Vol(K) / Vol(B^{2n}))^{1/n}``."""
    n = half_dim(K.dim)
    return (volume(K, samples, seed).value / ball_volume(2 * n)) ** (1.0 / n)
