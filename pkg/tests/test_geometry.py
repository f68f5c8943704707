from fractions import Fraction

import numpy as np
import pytest

from berrybundle.errors import BadPresetParams, DegenerateLoop, InputError
from berrybundle.geometry import (
    PlanarLoop,
    SphericalLoop,
    circle_path,
    geodesic_polygon_path,
    make_path,
    planar_winding,
    random_cap,
    random_geodesic_polygon,
    solid_angle,
    spherical_cap_path,
    triangle_solid_angle,
)
from berrybundle.models import make_spin_dipole
from berrybundle.reproduce import fitted_order, phase_error
from berrybundle.transport import holonomy


def test_equator_is_two_pi():
    assert solid_angle(spherical_cap_path(np.pi / 2, 64)) == pytest.approx(2 * np.pi, abs=1e-12)
    assert solid_angle(spherical_cap_path(np.pi / 2, 64).nodes[:-1], axis=(0, 0, 1)) == pytest.approx(2 * np.pi)


def test_octant_is_half_pi():
    assert triangle_solid_angle(*np.eye(3)) == pytest.approx(np.pi / 2)
    assert solid_angle(np.eye(3), axis=(1, 1, 1)) == pytest.approx(np.pi / 2)
    assert solid_angle(geodesic_polygon_path(np.eye(3), 16)) == pytest.approx(np.pi / 2, abs=1e-12)


@pytest.mark.parametrize("theta", [0.3, np.pi / 3, 2.5])
def test_cap_area(theta):
    expected = 2 * np.pi * (1 - np.cos(theta))
    if expected > 2 * np.pi:
        expected -= 4 * np.pi
    assert solid_angle(spherical_cap_path(theta, 64)) == pytest.approx(expected, abs=1e-10)


def test_reversal_negates(rng):
    for _ in range(10):
        loop = SphericalLoop.from_path(random_geodesic_polygon(rng, 8))
        assert solid_angle(loop.reversed()) == pytest.approx(-solid_angle(loop), abs=1e-12)


def test_degenerate_centroid():
    nodes = np.array([spherical_cap_path(np.pi / 2, 16).nodes[i] for i in range(16)])
    with pytest.raises(DegenerateLoop):
        solid_angle(SphericalLoop(nodes))


def test_loop_through_antipode():
    with pytest.raises(DegenerateLoop):
        solid_angle(spherical_cap_path(np.pi / 3, 64), axis=(np.sin(np.pi / 3) * -1, 0, -np.cos(np.pi / 3)))


def test_spherical_loop_validation():
    with pytest.raises(InputError):
        SphericalLoop(np.array([[2.0, 0, 0], [0, 1, 0], [0, 0, 1]]))
    with pytest.raises(InputError):
        SphericalLoop(np.eye(3)[:2])


def test_polygon_refinement_is_second_order():
    # inscribed polygons of a cap converge to the cap area as O(h^2)
    theta = np.pi / 3
    exact = np.pi
    ns = [16, 32, 64, 128]
    errs = []
    for n in ns:
        nodes = spherical_cap_path(theta, n).nodes[:-1]
        errs.append(abs(solid_angle(nodes, axis=(0, 0, 1)) - exact))
    assert fitted_order(ns, errs) == pytest.approx(2.0, abs=0.1)


def test_winding_numbers():
    assert planar_winding(circle_path(1.0, 64)) == 1
    assert planar_winding(circle_path(1.0, 64, turns=2)) == 2
    ellipse = circle_path(1.0, 64, radii=(2.0, 0.5))
    assert planar_winding(PlanarLoop(ellipse.nodes[::-1])) == -1
    assert planar_winding(circle_path(0.5, 64, center=(2.0, 0.0))) == 0
    with pytest.raises(InputError):
        PlanarLoop(np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_bad_presets():
    with pytest.raises(BadPresetParams):
        make_path("circle", {"nodes": 4})
    with pytest.raises(BadPresetParams):
        make_path("spherical_cap", {"theta": 4.0})
    with pytest.raises(BadPresetParams):
        make_path("spiral", {})
    with pytest.raises(BadPresetParams):
        make_path("circle", {"wobble": 1})


def test_presets_are_closed_and_sized():
    cap = make_path("spherical_cap", {"theta": 1.0, "nodes": 32})
    assert cap.closed and len(cap.nodes) == 33 and cap.dim == 3
    mer = make_path("meridian", {"theta_start": 0.1, "theta_end": 1.0})
    assert not mer.closed


def test_solid_angle_matches_holonomy(rng):
    model = make_spin_dipole(Fraction(1, 2))
    worst = 0.0
    for i in range(20):
        loop = random_cap(rng, 64) if i % 2 else random_geodesic_polygon(rng, 64)
        omega = solid_angle(loop)
        hol = holonomy(model, loop, "1/2", "ode", 512)
        worst = max(worst, phase_error(hol.abelian_phase, -0.5 * omega))
    assert worst <= 1e-5
