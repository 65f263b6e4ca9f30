"""
The capacity bound, stage by stage.

For the square [-1, 1]^2 every stage is explicit: K - K is the square of
half-width 2, the M-position map is the identity, and K3 = K2 + i K2 is the
square of half-width 4, so the bound is 2 pi 4^2 = 32 pi.
A random polytope in R^4 follows for comparison.
"""

import math

import numpy as np

from symcap import VPolytope
from symcap.bodies import contact_certificate
from symcap.pipeline import tmt_upper_bound, viterbo_ratio
from symcap.volume import volume

square = VPolytope([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def show(name, K, samples=200_000):
    b = tmt_upper_bound(K, samples=samples)
    tr = b.trace
    print(f"--- {name} (d = {K.dim})")
    for stage in ("K1", "K2", "K3"):
        body = getattr(tr, stage)
        print(f"{stage}: {len(body.vertices):4d} vertices, volume "
              f"{volume(body, samples).value:.6g}")
    print(f"inradius of K3:     {tr.r:.6f}")
    print(f"upper bound:        {b.upper:.6f}  ({b.upper / math.pi:.4f} pi)")
    print(f"lower (centred ball): {b.lower:.6f}")
    print(f"A2 estimate on the theta grid: {tr.a2:.4f}")
    cert = contact_certificate(tr.K3, tr.r)
    print(f"contact point {np.round(cert.point, 4)}, residual {cert.residual:.1e}")
    print(f"gamma:              {viterbo_ratio(K, bound=b, samples=samples).gamma:.4f}\n")


show("square", square)

rng = np.random.default_rng(3)
show("random polytope", VPolytope(rng.standard_normal((10, 4))).reduced())
