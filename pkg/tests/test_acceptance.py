"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines are repeated in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from symcap import Ellipsoid, VPolytope
from symcap.bodies import (difference_body, is_i_invariant, linear_image,
                           minkowski_sum)
from symcap.experiments import BodySpec, body_row, run_experiment
from symcap.pipeline import (grs_ratio, lemma_ai_bound, rogers_shephard_ratio,
                             tmt_upper_bound, viterbo_ratio)
from symcap.symplectic import (complex_structure, ellipsoid_capacity,
                               symplectic_defect, wds_decompose, williamson)
from symcap.volume import volume_exact, volume_mc

from conftest import ACCEPTANCE_LINES, random_pd, random_polytope, random_unimodular, triangle

SAMPLES = 200_000


def report(number, ok, text):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def cube(d):
    return VPolytope(np.array(np.meshgrid(*[[-1.0, 1.0]] * d)).reshape(d, -1).T)


def battery_specs(d):
    rng = np.random.default_rng(100 + d)
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    shape = Q @ np.diag(np.linspace(0.5, 3.0, d)) @ Q.T
    specs = [
        dict(kind="ball"),
        dict(kind="ellipsoid", shape=shape.tolist()),
        dict(kind="cube"),
        dict(kind="cross-polytope"),
        dict(kind="simplex"),
        dict(kind="random-polytope", count=d + 2, seed=11),
        dict(kind="lp-ball", p=3, count=24 if d == 6 else None),
    ]
    return [BodySpec(id=f"{s['kind']}-{d}", dimension=d,
                     **{k: v for k, v in s.items() if v is not None}) for s in specs]


@pytest.fixture(scope="module")
def battery_rows():
    return [body_row(spec, SAMPLES, 0)[0] for d in (2, 4, 6) for spec in battery_specs(d)]


def test_williamson_reconstruction():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_rec = worst_sym = 0.0
    for d in (2, 4, 6, 8):
        for _ in range(100):
            A = random_pd(rng, d)
            wf = williamson(A)
            worst_rec = max(worst_rec, np.linalg.norm(wf.reconstruct() - A) / np.linalg.norm(A))
            worst_sym = max(worst_sym, symplectic_defect(wf.S))
    elapsed = time.perf_counter() - t0
    report(1, worst_rec <= 1e-9 and worst_sym <= 1e-9 and elapsed < 10,
           f"Williamson on 400 matrices: max rel. residual {worst_rec:.2e}, "
           f"max symplectic defect {worst_sym:.2e}, {elapsed:.2f} s")


def test_wds_factorization():
    rng = np.random.default_rng(2)
    worst_rec = worst_orth = worst_sym = 0.0
    for d in (2, 4, 6, 8):
        for _ in range(100):
            T = random_unimodular(rng, d)
            f = wds_decompose(T)
            worst_rec = max(worst_rec, np.linalg.norm(f.reconstruct() - T) / np.linalg.norm(T))
            worst_orth = max(worst_orth, np.linalg.norm(f.W.T @ f.W - np.eye(d)))
            worst_sym = max(worst_sym, symplectic_defect(f.S))
    report(2, worst_rec <= 1e-9 and worst_orth <= 1e-8 and worst_sym <= 1e-8,
           f"WDS on 400 matrices: max rel. residual {worst_rec:.2e}, "
           f"orthogonality {worst_orth:.2e}, symplectic defect {worst_sym:.2e}")


def test_ball_pipeline():
    errs = []
    for d in (2, 4, 6):
        B = Ellipsoid.ball(d)
        b = tmt_upper_bound(B, samples=SAMPLES)
        g = viterbo_ratio(B, bound=b, samples=SAMPLES).gamma
        errs.append((abs(b.upper - 32 * math.pi), abs(g - 32.0), b.trace.r))
    ok = all(e1 <= 1e-6 and e2 <= 1e-6 for e1, e2, _ in errs)
    report(3, ok, "ball upper = 32 pi, gamma = 32 for 2n = 2, 4, 6; max errors "
           f"{max(e[0] for e in errs):.1e}, {max(e[1] for e in errs):.1e}; "
           f"r = {[e[2] for e in errs]}")


def test_square_pipeline():
    sq = cube(2)
    b = tmt_upper_bound(sq, samples=SAMPLES)
    g = viterbo_ratio(sq, bound=b, samples=SAMPLES).gamma
    area = volume_exact(sq).value
    ok = (abs(b.upper - 32 * math.pi) <= 1e-6 and abs(g - 8 * math.pi) <= 1e-5
          and b.upper >= area)
    report(4, ok, f"square upper {b.upper:.10f} (32 pi), gamma {g:.10f} (8 pi), "
           f"true capacity {area:g} <= upper")


def test_ellipsoid_soundness():
    rng = np.random.default_rng(5)
    worst_gap = math.inf
    worst_area = 0.0
    for n in (1, 2, 3):
        for _ in range(50):
            X = rng.standard_normal((2 * n, 2 * n))
            E = Ellipsoid(np.zeros(2 * n), X @ X.T + 0.1 * np.eye(2 * n))
            cap = ellipsoid_capacity(E)
            up = tmt_upper_bound(E, thetas=()).upper
            worst_gap = min(worst_gap, up - cap)
            if n == 1:
                a, b = 1.0 / np.sqrt(np.linalg.eigvalsh(E.shape))
                worst_area = max(worst_area, abs(cap - math.pi * a * b) / (math.pi * a * b))
    report(5, worst_gap >= -1e-8 and worst_area <= 1e-8,
           f"150 ellipsoids: min(upper - capacity) = {worst_gap:.3e}, "
           f"n = 1 capacity vs pi ab max rel. error {worst_area:.1e}")


def test_lemma_ai():
    rng = np.random.default_rng(6)
    bodies = [cube(2), cube(4), difference_body(triangle())]
    for d in (2, 4):
        for _ in range(3):
            bodies.append(tmt_upper_bound(random_polytope(rng, d), thetas=()).trace.K3)
    bodies = [K for K in bodies if is_i_invariant(K)]
    worst = -math.inf
    ordered = True
    for K in bodies:
        b = lemma_ai_bound(K)
        c = b.certificate
        V = K.vertices
        for w in (c.point, c.rotated_point):
            worst = max(worst, float(np.max(np.abs(V @ w)) / c.radius - c.radius))
        ordered &= b.lower <= b.upper
    cube_bound = lemma_ai_bound(cube(4)).upper
    ok = worst <= 1e-9 and ordered and abs(cube_bound - 2 * math.pi) <= 1e-12
    report(6, ok, f"{len(bodies)} i-invariant bodies: max certificate violation "
           f"{worst:.1e}; cube [-1,1]^4 bound {cube_bound:.15f} (2 pi)")


def test_rogers_shephard(battery_rows):
    tri = rogers_shephard_ratio(triangle())
    simplex3 = rogers_shephard_ratio(VPolytope(np.vstack([np.zeros(3), np.eye(3)])))
    rs_ok = all(r["rs_ratio"] <= 4.0 ** r["dimension"] for r in battery_rows)
    rng = np.random.default_rng(7)
    worst = math.inf
    for k in range(100):
        d = 2 + k % 3
        A, B = random_polytope(rng, d), random_polytope(rng, d)
        va, vb = volume_exact(A).value, volume_exact(B).value
        vs = volume_exact(minkowski_sum(A, B)).value
        worst = min(worst, vs ** (1 / d) - va ** (1 / d) - vb ** (1 / d))
    ok = abs(tri - 6) <= 1e-9 and abs(simplex3 - 20) <= 1e-7 and rs_ok and worst >= -1e-7
    report(7, ok, f"triangle {tri:.12f}, 3-simplex {simplex3:.10f}, battery within 4^d: "
           f"{rs_ok}, Brunn-Minkowski min slack on 100 pairs {worst:.3e}")


def test_generalized_rogers_shephard():
    rng = np.random.default_rng(8)
    worst_sym = 0.0
    for d in (2, 3, 4):
        for _ in range(5):
            A = random_polytope(rng, d)
            B = difference_body(random_polytope(rng, d))
            worst_sym = max(worst_sym, abs(grs_ratio(A, B) - 1.0))
    tri = grs_ratio(triangle(), triangle())
    ratios = [grs_ratio(random_polytope(rng, 4), random_polytope(rng, 4)) for _ in range(100)]
    top = max(ratios)
    ok = worst_sym <= 1e-9 and abs(tri - math.sqrt(2 / 3)) <= 1e-9 and math.isfinite(top)
    report(8, ok, f"symmetric B max |ratio - 1| {worst_sym:.1e}; triangle {tri:.12f} "
           f"(sqrt(2/3)); max over 100 pairs in R^4 {top:.6f}")


def test_dimension_independence(battery_rows):
    errors = [r["body_id"] for r in battery_rows if r["error"]]
    gammas = {r["body_id"]: r["gamma"] for r in battery_rows if not r["error"]}
    a2 = max(r["a2"] for r in battery_rows if not r["error"])
    balls = [gammas[f"ball-{d}"] for d in (2, 4, 6)]
    ok = (not errors and max(gammas.values()) <= 64 and a2 <= 2.5
          and all(abs(g - 32) <= 1e-6 for g in balls))
    worst = max(gammas, key=gammas.get)
    report(9, ok, f"{len(battery_rows)} bodies in 2n = 2, 4, 6: max gamma "
           f"{gammas[worst]:.4f} ({worst}), ball gamma {balls}, max A2 {a2:.4f}"
           + (f", errors in {errors}" if errors else ""))


def test_volume_engine(tmp_path):
    target = math.pi**2 / 2
    B4 = Ellipsoid.ball(4)
    own = volume_mc(B4, 1_000_000, seed=0)
    wide = volume_mc(B4, 1_000_000, seed=0, proposal=Ellipsoid.ball(4, 1.2))
    ball_ok = all(abs(e.value - target) <= 3 * e.stderr for e in (own, wide))

    rng = np.random.default_rng(10)
    agree = 0
    for _ in range(20):
        P = random_polytope(rng, 4, 12)
        est = volume_mc(P, 1_000_000, seed=1)
        agree += abs(est.value - volume_exact(P).value) <= 4 * est.stderr

    P = random_polytope(rng, 4, 12)
    values = {volume_mc(P, 500_000, seed=3, workers=w).value for w in (1, 2, 4)}
    cfg = {"bodies": [{"id": "sq", "kind": "cube"},
                      {"id": "rp", "kind": "random-polytope", "count": 7}],
           "dimensions": [2, 4], "samples": 50_000, "seed": 12}
    csvs = set()
    for w in (1, 4):
        out = tmp_path / f"w{w}.csv"
        run_experiment(dict(cfg, output=str(out)), workers=w)
        csvs.add(out.read_bytes())
    ok = ball_ok and agree >= 19 and len(values) == 1 and len(csvs) == 1
    report(10, ok, f"Vol(B^4): {own.value:.6f} +- {own.stderr:.1e} (Loewner proposal), "
           f"{wide.value:.6f} +- {wide.stderr:.1e} (radius-1.2 proposal) vs {target:.6f}; "
           f"exact/MC agree on {agree}/20; identical across workers: "
           f"volume {len(values) == 1}, CSV {len(csvs) == 1}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
