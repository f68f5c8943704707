import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from berrybundle.eigenbundle import (
    Frame,
    branch_sample,
    continue_frame,
    fix_gauge,
    reference_frame,
    spectra,
    track_branch,
)
from berrybundle.errors import (
    DegeneracyViolation,
    GapCollapse,
    OutOfDomain,
    SingularInput,
    SubspaceJump,
)
from berrybundle.geometry import meridian_path
from berrybundle.linalg import dagger, max_norm, random_unitary
from berrybundle.models import BranchDescriptor, HamiltonianFamily, make_lambda_system, make_planar_spin, make_spin_dipole
from berrybundle.paths import from_nodes

seeds = st.integers(0, 2**32 - 1)


def test_spin_sample():
    s = branch_sample(make_spin_dipole(0.5), (0, 0, 1), "1/2")
    assert s.energy == pytest.approx(0.5)
    assert np.allclose(s.projector, np.diag([1, 0]))
    assert s.gap == pytest.approx(1.0)


def test_dark_sample():
    s = branch_sample(make_lambda_system(), (0, 0, 1), "dark")
    assert abs(s.energy) < 1e-14
    assert np.trace(s.projector).real == pytest.approx(2.0)
    assert s.gap == pytest.approx(1.0)


def test_out_of_domain():
    with pytest.raises(OutOfDomain):
        branch_sample(make_spin_dipole(0.5), (0, 0, 0), "1/2")


def test_declared_degeneracy_violated():
    bad = HamiltonianFamily(
        name="split",
        param_dim=1,
        hilbert_dim=3,
        evaluate=lambda b: np.diag([0.0, b[0], 2.0]).astype(complex),
        in_domain=lambda b: True,
        branches=(BranchDescriptor("pair", 2, 0), BranchDescriptor("top", 1, 2)),
    )
    with pytest.raises(DegeneracyViolation):
        branch_sample(bad, (0.5,), "pair")


def test_fix_gauge_rule():
    v = np.array([[0.6j], [-0.8j]])
    out = fix_gauge(v)
    assert out[1, 0].real > 0 and abs(out[1, 0].imag) < 1e-15
    tie = np.array([[1j], [1j]]) / np.sqrt(2)
    assert fix_gauge(tie)[0, 0].real > 0


def test_reference_frame_is_basis_independent(rng):
    s = branch_sample(make_lambda_system(), rng.normal(size=3), "dark")
    g = random_unitary(2, rng)
    assert max_norm(reference_frame(s.frame @ g) - reference_frame(s.frame)) <= 1e-12
    v = s.frame[:, :1]
    assert max_norm(reference_frame(v) - fix_gauge(v)) == 0


def test_constant_path():
    model = make_spin_dipole(1)
    path = from_nodes([[0.2, 0.3, 1.0]] * 5)
    track = track_branch(model, path, "0")
    assert all(max_norm(f - track.frames_array[0]) <= 1e-14 for f in track.frames_array)


def test_meridian_track():
    model = make_spin_dipole(0.5)
    track = track_branch(model, meridian_path(0.0, np.pi / 2, 0.0, 100, radius=2.0), "1/2")
    assert track.min_gap == pytest.approx(2.0)
    end = track.frames_array[-1][:, 0]
    analytic = np.array([1.0, 1.0]) / np.sqrt(2)  # S.x "up"
    assert abs(abs(np.vdot(analytic, end)) - 1) <= 1e-12
    steps = [abs(np.vdot(a[:, 0], b[:, 0])) for a, b in zip(track.frames_array[:-1], track.frames_array[1:])]
    assert min(steps) > 0.999


def test_gap_collapse_through_origin():
    with pytest.raises(GapCollapse) as info:
        track_branch(make_planar_spin(0.5), from_nodes([[-1, 0], [0, 0], [1, 0]]), "1/2")
    assert info.value.node == 1


def test_subspace_jump():
    # spin flips to the antipode in one step: eigenspaces orthogonal
    with pytest.raises(SubspaceJump):
        track_branch(make_spin_dipole(0.5), from_nodes([[0, 0, 1], [0, 0, -1]]), "1/2")


def test_continue_same_sample_is_identity():
    s = branch_sample(make_lambda_system(), (1, 2, 3), "dark")
    f = Frame(s.point, s.frame)
    assert max_norm(continue_frame(f, s).matrix - f.matrix) <= 1e-12


def test_continue_orthogonal_raises():
    model = make_spin_dipole(0.5)
    up = branch_sample(model, (0, 0, 1), "1/2")
    down = branch_sample(model, (0, 0, -1), "1/2")
    with pytest.raises(SingularInput):
        continue_frame(Frame(up.point, up.frame), down)


def test_continue_is_parallel_to_second_order():
    model = make_spin_dipole(0.5)
    prev = branch_sample(model, (0.3, 0.1, 1.0), "1/2")
    errs = []
    for d in (1e-2, 5e-3):
        nxt = branch_sample(model, (0.3 + d, 0.1 + d, 1.0), "1/2")
        new = continue_frame(Frame(prev.point, prev.frame), nxt)
        errs.append(abs(np.vdot(prev.frame[:, 0], new.matrix[:, 0]) - 1))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


@given(seeds, st.sampled_from(["spin", "lambda"]))
def test_continuation_equivariance(seed, which):
    rng = np.random.default_rng(seed)
    model, br = (make_spin_dipole(1), "1") if which == "spin" else (make_lambda_system(), "dark")
    b = rng.normal(size=3)
    s0 = branch_sample(model, b, br)
    s1 = branch_sample(model, b + 0.1 * rng.normal(size=3), br)
    g = random_unitary(s0.frame.shape[1], rng)
    f = Frame(s0.point, s0.frame)
    assert max_norm(continue_frame(f @ g, s1).matrix - continue_frame(f, s1).matrix @ g) <= 1e-10


@given(seeds)
def test_projector_residuals(seed):
    rng = np.random.default_rng(seed)
    model = [make_spin_dipole(1.5), make_lambda_system(), make_planar_spin(1, 2)][seed % 3]
    br = model.branches[seed % len(model.branches)]
    b = rng.normal(size=model.param_dim)
    s = branch_sample(model, b, br.label)
    p = s.projector
    h = model(b)
    assert max_norm(p @ p - p) <= 1e-10
    assert max_norm(p - dagger(p)) <= 1e-10
    assert max_norm(h @ p - s.energy * p) <= 1e-8 * max_norm(h)
    assert abs(np.trace(p).real - br.degeneracy) <= 1e-8
    assert max_norm(p @ s.frame - s.frame) <= 1e-8


@given(seeds)
def test_dark_trace_two(seed):
    omega = np.random.default_rng(seed).normal(size=3)
    assert abs(np.trace(branch_sample(make_lambda_system(), omega, "dark").projector) - 2) <= 1e-10


def _final_frame(path_factory, n):
    return track_branch(make_spin_dipole(0.5), path_factory(n), "1/2").frames_array[-1]


def test_track_refinement_meridian_is_exact():
    # the meridian is a geodesic, along which discrete transport is exact, so
    # node doubling leaves the end frame unchanged (trivially O(h^2))
    ends = [_final_frame(lambda n: meridian_path(0.0, np.pi / 2, 0.3, n), n) for n in (25, 50, 100, 200)]
    assert max(max_norm(a - b) for a, b in zip(ends[:-1], ends[1:])) <= 1e-12


def test_track_refinement_order_on_latitude_arc():
    from berrybundle.reproduce import _latitude_arc, fitted_order

    ends = [_final_frame(lambda n: _latitude_arc(np.pi / 3, n), n) for n in (32, 64, 128, 256)]
    diffs = [max_norm(a - b) for a, b in zip(ends[:-1], ends[1:])]
    assert fitted_order([64, 128, 256], diffs) >= 1.9


def _two_level(delta):
    return HamiltonianFamily(
        name="avoided",
        param_dim=1,
        hilbert_dim=2,
        evaluate=lambda b: np.array([[b[0], delta], [delta, -b[0]]], complex),
        in_domain=lambda b: True,
        branches=(BranchDescriptor("low", 1, 0), BranchDescriptor("high", 1, 1)),
    )


def test_spectra_follow_eigenvector_through_sharp_avoided_crossing():
    sp = spectra(_two_level(0.05), [[-1.0], [-0.5], [0.5], [1.0]], "low")
    assert list(sp.selected[:, 0]) == [0, 0, 1, 1]
    assert np.allclose(sp.energies[[0, 3]], [-np.hypot(1, 0.05), np.hypot(1, 0.05)])


def test_exact_crossing_step_is_a_jump():
    with pytest.raises(SubspaceJump):
        spectra(_two_level(0.0), [[-1.0], [-0.5], [0.5], [1.0]], "low")
