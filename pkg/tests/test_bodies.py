import math

import numpy as np
import pytest

from symcap import Ellipsoid, HPolytope, VPolytope
from symcap.bodies import (as_hpolytope, as_vpolytope, barycenter, centered,
                           contact_certificate, difference_body, ellipsoid_to_polytope,
                           gauge, inradius, inradius_details, is_centrally_symmetric,
                           is_i_invariant, linear_image, membership_oracle,
                           minkowski_sum, negate, scale, sphere_directions, support,
                           symmetry_center, translate)
from symcap.exceptions import DimensionError, DomainError
from symcap.volume import volume_exact

from conftest import random_polytope, triangle

SQUARE = VPolytope([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def test_degenerate_vertex_set_rejected():
    with pytest.raises(DomainError):
        VPolytope([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])


def test_reduced_drops_interior_points():
    P = VPolytope([[0, 0], [1, 0], [0, 1], [0.2, 0.2]])
    assert len(P.reduced().vertices) == 3


def test_vertices_are_read_only():
    with pytest.raises(ValueError):
        SQUARE.vertices[0, 0] = 5.0


def test_facets_of_square():
    normals, offsets = SQUARE.facets
    assert len(normals) == 4
    assert np.allclose(offsets, 1.0)


def test_h_to_v_roundtrip():
    H = as_hpolytope(SQUARE)
    V = H.to_vpolytope()
    assert volume_exact(V).value == pytest.approx(4.0)


def test_hpolytope_interior_point():
    H = HPolytope([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]], [3.0, -1.0, 1.0, 1.0])
    assert np.allclose(H.interior_point, [2.0, 0.0], atol=1e-9)


def test_ellipsoid_validation():
    with pytest.raises(DomainError):
        Ellipsoid(np.zeros(2), np.diag([1.0, -1.0]))
    E = Ellipsoid.ball(3, 2.0)
    assert np.allclose(E.sqrt_map, 2.0 * np.eye(3))


def test_outer_polytope_contains_ellipsoid():
    E = Ellipsoid(np.zeros(3), np.diag([1.0, 4.0, 9.0]))
    P = ellipsoid_to_polytope(E, outer=True)
    U = sphere_directions(3, 500, seed=5)
    assert np.all(support(P, U) >= support(E, U) - 1e-12)


def test_support_of_ball_and_square():
    U = np.array([[1.0, 0.0], [math.sqrt(0.5), math.sqrt(0.5)]])
    assert np.allclose(support(Ellipsoid.ball(2, 3.0), U), 3.0)
    assert np.allclose(support(SQUARE, U), [1.0, math.sqrt(2.0)])


def test_support_is_additive_under_minkowski_sum():
    rng = np.random.default_rng(7)
    for d in (2, 3, 4):
        P, Q = random_polytope(rng, d), random_polytope(rng, d)
        U = sphere_directions(d, 200, seed=d)
        assert np.allclose(support(minkowski_sum(P, Q), U),
                           support(P, U) + support(Q, U), atol=1e-10)


def test_sum_of_proportional_ellipsoids_is_ellipsoid():
    E = Ellipsoid(np.zeros(2), np.diag([1.0, 4.0]))
    S = minkowski_sum(E, scale(E, 2.0))
    assert isinstance(S, Ellipsoid)
    U = sphere_directions(2, 50)
    assert np.allclose(support(S, U), 3.0 * support(E, U))


def test_sum_with_a_point_translates():
    S = minkowski_sum(SQUARE, np.array([1.0, 2.0]))
    assert np.allclose(barycenter(S), [1.0, 2.0])


def test_sum_dimension_mismatch():
    with pytest.raises(DimensionError):
        minkowski_sum(SQUARE, Ellipsoid.ball(3))


def test_difference_body_of_triangle_is_hexagon_of_area_3():
    H = difference_body(triangle())
    assert len(H.vertices) == 6
    assert volume_exact(H).value == pytest.approx(3.0, abs=1e-12)
    assert is_centrally_symmetric(H)


def test_difference_body_of_ball():
    D = difference_body(Ellipsoid.ball(4, 1.5, center=np.ones(4)))
    assert isinstance(D, Ellipsoid)
    assert np.allclose(support(D, np.eye(4)), 3.0)


def test_symmetry_center():
    assert np.allclose(symmetry_center(translate(SQUARE, [2.0, 1.0])), [2.0, 1.0])
    assert symmetry_center(triangle()) is None


def test_gauge_matches_membership():
    rng = np.random.default_rng(2)
    P = centered(random_polytope(rng, 3, 10))
    X = rng.standard_normal((50, 3))
    g = membership_oracle(P)(X)
    assert np.allclose(g, [gauge(P, x) for x in X], rtol=1e-7)
    assert gauge(SQUARE, [0.5, -2.0]) == pytest.approx(2.0)


def test_gauge_of_ellipsoid():
    E = Ellipsoid(np.zeros(2), np.diag([1.0, 0.25]))
    assert gauge(E, [0.0, 4.0]) == pytest.approx(2.0)


def test_inradius_scales_linearly():
    rng = np.random.default_rng(4)
    P = difference_body(random_polytope(rng, 4))
    r = inradius(P)
    assert inradius(scale(P, 2.5)) == pytest.approx(2.5 * r, rel=1e-10)
    assert inradius(SQUARE) == pytest.approx(1.0)


def test_inradius_needs_symmetric_body():
    with pytest.raises(DomainError):
        inradius(triangle())


def test_inradius_is_exact_for_low_dimension():
    info = inradius_details(Ellipsoid(np.zeros(2), np.diag([1.0, 4.0])))
    assert info.radius == pytest.approx(0.5)
    assert not info.approximate


def test_i_invariance():
    cube = VPolytope(np.array(np.meshgrid(*[[-1.0, 1.0]] * 4)).reshape(4, -1).T)
    assert is_i_invariant(cube)
    assert not is_i_invariant(linear_image(cube, np.diag([1.0, 2.0, 1.0, 1.0])))
    assert is_i_invariant(Ellipsoid.ball(4))


def test_contact_certificate_on_square():
    cert = contact_certificate(SQUARE)
    assert cert.radius == pytest.approx(1.0)
    assert cert.residual <= 1e-9
    V = SQUARE.vertices
    for w in (cert.point, cert.rotated_point):
        assert np.all(np.abs(V @ w) / cert.radius <= cert.radius + 1e-9)


def test_barycenter_of_triangle_and_translate():
    assert np.allclose(barycenter(triangle()), [1 / 3, 1 / 3])
    P = translate(triangle(), [1.0, -1.0])
    assert np.allclose(barycenter(P), [4 / 3, -2 / 3])


def test_barycenter_is_affine_equivariant():
    rng = np.random.default_rng(9)
    P = random_polytope(rng, 3, 12)
    A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    assert np.allclose(barycenter(linear_image(P, A)), A @ barycenter(P), atol=1e-10)


def test_negate_and_as_vpolytope():
    assert np.allclose(barycenter(negate(triangle())), [-1 / 3, -1 / 3])
    V = as_vpolytope(Ellipsoid.ball(2))
    assert isinstance(V, VPolytope)
