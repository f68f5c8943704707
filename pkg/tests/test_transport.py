from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berrybundle.eigenbundle import branch_sample
from berrybundle.errors import GapCollapse, NonConvergent, PatchBoundary, PathNotClosed
from berrybundle.gauge import LocalSection, planar_section, pole_section
from berrybundle.geometry import (
    circle_path,
    fourier_path,
    geodesic_polygon_path,
    meridian_path,
    random_fourier_loop,
    solid_angle,
    spherical_cap_path,
)
from berrybundle.linalg import dagger, max_norm, random_unitary
from berrybundle.models import BranchDescriptor, HamiltonianFamily, make_lambda_system, make_planar_spin, make_spin_dipole
from berrybundle.paths import from_nodes
from berrybundle.reproduce import fitted_order, phase_error
from berrybundle.transport import (
    connection_at,
    curvature_plaquette,
    holonomy,
    is_flat,
    section_holonomy,
    transport_ode,
    wilson_line_oracle,
)

seeds = st.integers(0, 2**32 - 1)
HALF = make_spin_dipole(Fraction(1, 2))
LAMBDA = make_lambda_system()


def _constant_model():
    h = np.diag([0.0, 1.0, 2.0]).astype(complex)
    return HamiltonianFamily(
        name="constant",
        param_dim=2,
        hilbert_dim=3,
        evaluate=lambda b: h,
        in_domain=lambda b: True,
        branches=tuple(BranchDescriptor(str(i), 1, i) for i in range(3)),
        jacobian=lambda b: np.zeros((2, 3, 3), complex),
    )


# -- connection ----------------------------------------------------------------


@pytest.mark.parametrize("s,J", [(0.5, 1), (1, 1), (0.5, 2), (1.5, 2)])
def test_planar_connection_is_iJs(s, J, rng):
    model = make_planar_spin(s, J)
    for br in model.branches:
        sec = planar_section(model, br.label)
        for _ in range(4):
            b = rng.normal(size=2)
            a_phi = connection_at(sec, b).along((-b[1], b[0]))[0, 0]
            assert abs(a_phi - 1j * J * s) <= 1e-6


def test_constant_frame_has_zero_connection():
    model = _constant_model()
    frame = branch_sample(model, (0, 0), "1").frame
    sec = LocalSection("all", lambda b: True, lambda b: type("F", (), {"matrix": frame})(), model, "1")
    sec = LocalSection("all", lambda b: True, None, model, "1", frames_at=lambda pts: np.repeat(frame[None], len(pts), 0))
    assert max_norm(connection_at(sec, (0.3, 0.4)).components) == 0


def test_spin_section_connection_closed_form(rng):
    # "+" rotate-to-pole section: A_phi = i m (1 - cos theta), A_theta = 0
    for m in ("1/2", "-1/2"):
        sec = pole_section(HALF, m, "+")
        mm = float(Fraction(m))
        for _ in range(10):
            theta, phi = rng.uniform(0.2, 2.8), rng.uniform(0, 2 * np.pi)
            r = rng.uniform(0.5, 3)
            b = r * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
            sample = connection_at(sec, b)
            e_phi = r * np.sin(theta) * np.array([-np.sin(phi), np.cos(phi), 0.0])
            e_theta = r * np.array([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)])
            assert abs(sample.along(e_phi)[0, 0] - 1j * mm * (1 - np.cos(theta))) <= 1e-6
            assert abs(sample.along(e_theta)[0, 0]) <= 1e-6
            assert sample.hermitian_discard <= 1e-6


def test_patch_boundary():
    sec = pole_section(HALF, "1/2", "+")
    with pytest.raises(PatchBoundary):
        connection_at(sec, (0, 0, -1), h=1e-3)


# -- transport -----------------------------------------------------------------


def test_constant_path_is_identity():
    path = from_nodes([[0.1, 0.2, 1.0]] * 3)
    assert max_norm(transport_ode(LAMBDA, path, "dark", 16).unitary - np.eye(2)) <= 1e-12
    assert max_norm(wilson_line_oracle(LAMBDA, path, "dark", 16).unitary - np.eye(2)) <= 1e-12


def test_equator_phase_minus_one():
    hol = holonomy(HALF, spherical_cap_path(np.pi / 2, 256), "1/2", "ode", 1024)
    assert abs(hol.unitary[0, 0] + 1) <= 1e-6
    assert hol.diagnostics["unitarity_residual"] <= 1e-8
    assert set(hol.diagnostics) >= {"unitarity_residual", "min_gap", "steps", "richardson_error_estimate"}


def test_planar_phases():
    circle = circle_path(1.0, 256)
    for s, J, expected in ((0.5, 1, -1), (0.5, 2, 1), (1, 1, 1)):
        hol = holonomy(make_planar_spin(s, J), circle, str(Fraction(s)), "ode", 512)
        assert abs(hol.unitary[0, 0] - expected) <= 1e-6


def test_octant_phase():
    octant = geodesic_polygon_path(np.eye(3), 128)
    omega = solid_angle(octant)
    assert omega == pytest.approx(np.pi / 2, abs=1e-12)
    for s in (Fraction(1, 2), Fraction(3, 2)):
        model = make_spin_dipole(s)
        for br in model.branches:
            hol = holonomy(model, octant, br.label, "ode", 1024)
            assert phase_error(hol.abelian_phase, -float(Fraction(br.label)) * omega) <= 1e-6


def test_not_closed():
    with pytest.raises(PathNotClosed):
        holonomy(HALF, meridian_path(0.1, 1.0, 0.0, 16), "1/2")


def test_gap_collapse_propagates():
    with pytest.raises(GapCollapse):
        transport_ode(make_planar_spin(0.5), from_nodes([[-1.0, 0.0], [1.0, 0.0]]), "1/2", 64)


def test_richardson_refines_and_fails_loudly():
    cap = spherical_cap_path(np.pi / 3, 64)
    res = transport_ode(HALF, cap, "1/2", 8, tol=1e-9, max_refinements=6)
    assert res.diagnostics["richardson_error_estimate"] <= 1e-9
    assert res.diagnostics["steps"] > 8
    with pytest.raises(NonConvergent):
        transport_ode(HALF, cap, "1/2", 4, tol=1e-14, max_refinements=1)


def test_rk4_order_on_cap():
    cap = spherical_cap_path(np.pi / 3, 64)
    ns = [16, 32, 64, 128]
    errs = [phase_error(transport_ode(HALF, cap, "1/2", n).abelian_phase, -np.pi / 2) for n in ns]
    assert fitted_order(ns, errs) >= 3.5


def test_equator_is_exact_for_both_methods():
    # a great circle is a geodesic: both discretizations are exact there
    eq = spherical_cap_path(np.pi / 2, 64)
    for n in (16, 64):
        assert abs(transport_ode(HALF, eq, "1/2", n).unitary[0, 0] + 1) <= 1e-13
        assert abs(wilson_line_oracle(HALF, eq, "1/2", n).unitary[0, 0] + 1) <= 1e-13


def test_wilson_equator_agreement():
    eq = spherical_cap_path(np.pi / 2, 256)
    ode = transport_ode(HALF, eq, "1/2", 1024).unitary
    assert max_norm(wilson_line_oracle(HALF, eq, "1/2", 4096).unitary - ode) <= 5e-3
    assert max_norm(wilson_line_oracle(HALF, eq, "1/2", 16384).unitary - ode) <= 1.3e-3


def test_wilson_is_second_order_on_cap():
    cap = spherical_cap_path(np.pi / 3, 64)
    ns = [64, 128, 256, 512]
    errs = [phase_error(wilson_line_oracle(HALF, cap, "1/2", n).abelian_phase, -np.pi / 2) for n in ns]
    assert fitted_order(ns, errs) == pytest.approx(2.0, abs=0.1)


def test_lambda_oracle_single_loop(rng):
    loop = random_fourier_loop(rng)
    ode = transport_ode(LAMBDA, loop, "dark", 1024)
    wil = wilson_line_oracle(LAMBDA, loop, "dark", 16384)
    assert max_norm(ode.unitary - wil.unitary) <= 1e-4
    assert ode.diagnostics["unitarity_residual"] <= 1e-8
    assert wil.diagnostics["unitarity_residual"] <= 1e-8
    assert ode.abelian_phase is None and ode.K == 2


ZOO = [
    (make_spin_dipole(0.5), "1/2"),
    (make_spin_dipole(1), "0"),
    (make_spin_dipole(1.5), "-3/2"),
    (LAMBDA, "dark"),
    (LAMBDA, "plus"),
    (make_planar_spin(1, 2), "1"),
]


def _zoo_loop(i, rng):
    model, br = ZOO[i % len(ZOO)]
    return model, br, random_fourier_loop(rng, dim=model.param_dim, modes=2, amplitude=0.4, nodes=64)


def test_oracle_equivalence_across_zoo():
    rng = np.random.default_rng(77)
    worst = 0.0
    for i in range(50):
        model, br, loop = _zoo_loop(i, rng)
        ode = transport_ode(model, loop, br, 512, richardson=False).unitary
        wil = wilson_line_oracle(model, loop, br, 16384).unitary
        worst = max(worst, max_norm(ode - wil))
    assert worst <= 1e-3


@given(seeds)
@settings(max_examples=20)
def test_gauge_covariance_reversal_composition(seed):
    rng = np.random.default_rng(seed)
    model, br, l1 = _zoo_loop(seed, rng)
    d = model.param_dim
    base = l1.start
    off = 0.3 * rng.normal(size=d)
    l2 = fourier_path(base - off, [off, np.zeros(d)], [0.3 * rng.normal(size=d), np.zeros(d)], 64)
    h1 = transport_ode(model, l1, br, 256, richardson=False).unitary
    h2 = transport_ode(model, l2, br, 256, richardson=False).unitary
    h12 = transport_ode(model, l1.then(l2), br, 512, richardson=False).unitary
    assert max_norm(h12 - h2 @ h1) <= 1e-7
    back = transport_ode(model, l1.reversed(), br, 256, richardson=False).unitary
    assert max_norm(back @ h1 - np.eye(len(h1))) <= 1e-8
    g = random_unitary(len(h1), rng)
    first = branch_sample(model, base, br).frame @ g
    moved = transport_ode(model, l1, br, 256, initial_frame=first, richardson=False).unitary
    assert max_norm(moved - dagger(g) @ h1 @ g) <= 1e-8
    assert abs(np.trace(moved) - np.trace(h1)) <= 1e-8
    assert np.allclose(np.sort(np.angle(np.linalg.eigvals(moved))), np.sort(np.angle(np.linalg.eigvals(h1))), atol=1e-8)


def test_abelian_consistency_with_section(rng):
    for theta in (0.4, 1.2, 2.0):
        cap = spherical_cap_path(theta, 64)
        sec = pole_section(HALF, "1/2", "+")
        from_section = section_holonomy(sec, cap, 256)[0, 0]
        assert abs(from_section - transport_ode(HALF, cap, "1/2", 1024).unitary[0, 0]) <= 1e-7


def test_homotopy_invariance_planar():
    model = make_planar_spin(1.5, 1)
    a = holonomy(model, circle_path(1.0, 256), "1/2", "ode", 512)
    b = holonomy(model, fourier_path([0.2, 0.1], [[2.0, 0.0], [0.3, 0.0]], [[0.0, 0.7], [0.0, 0.2]], 256), "1/2", "ode", 512)
    assert phase_error(a.abelian_phase, b.abelian_phase) <= 1e-7


def test_open_path_transport_is_unitary():
    res = transport_ode(LAMBDA, meridian_path(0.2, 1.4, 0.7, 32), "dark", 128)
    assert res.diagnostics["unitarity_residual"] <= 1e-12


# -- curvature ---------------------------------------------------------------


def test_planar_flat():
    flat, samples = is_flat(make_planar_spin(0.5, 2), "1/2", (0.5, -0.7))
    assert flat and all(s.norm <= 1e-6 for s in samples)


@pytest.mark.parametrize("r", [1.0, 2.0])
def test_spin_curvature(r):
    f = curvature_plaquette(HALF, "1/2", (0, 0, r), (0, 1), 0.05 * r)
    assert f.norm == pytest.approx(0.5 / r**2, rel=0.1)
    assert max_norm(f.matrix + dagger(f.matrix)) <= 1e-10


def test_constant_model_zero_curvature():
    assert curvature_plaquette(_constant_model(), "1", (0.0, 0.0)).norm <= 1e-12


def test_holonomy_json_shape():
    d = holonomy(HALF, spherical_cap_path(1.0, 64), "1/2", "ode", 128).to_dict()
    assert d["K"] == 1 and len(d["unitary"]) == 1 and len(d["unitary"][0][0]) == 2
    assert -np.pi < d["abelian_phase"] <= np.pi
