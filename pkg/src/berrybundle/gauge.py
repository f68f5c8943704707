"""Local sections, transition functions and topological classification.

Sections are smooth frame fields over a patch of the allowed parameter
space. Two sections on overlapping patches are glued by the transition
function ``psi_ab(b)``, the unitary overlap of their frames. For a base
homotopic to a 2-sphere the class of a U(K) bundle is the winding of
``det psi_+-`` around the equator; over a circle every such bundle is
trivializable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .eigenbundle import Frame, branch_sample
from .errors import (
    AliasedSampling,
    AtAntipode,
    InputError,
    OutOfPatch,
    WindingResidual,
    ZeroSample,
)
from .linalg import dagger, exp_antihermitian, jacobi_eigh, overlap, unitarity_residual
from .models import HamiltonianFamily, spin_matrices

ANTIPODE_TOL = 1e-9
WINDING_RESIDUAL_MAX = 0.01
MIN_WINDING_SAMPLES = 8
DEFAULT_EQUATOR_SAMPLES = 256


@dataclass(frozen=True)
class LocalSection:
    patch: str
    domain: Callable[[np.ndarray], bool]
    frame_at: Callable[[np.ndarray], Frame]
    model: HamiltonianFamily | None = None
    branch: str | None = None
    frames_at: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, b) -> Frame:
        b = np.asarray(b, dtype=float)
        if not self.domain(b):
            raise OutOfPatch(f"point {b.tolist()} is outside patch {self.patch!r}", point=b)
        return self.frame_at(b)

    def matrices(self, points) -> np.ndarray:
        """``(m, n, K)`` frame matrices at several points (no patch check)."""
        points = np.asarray(points, dtype=float)
        if self.frames_at is not None:
            return self.frames_at(points)
        return np.stack([self.frame_at(p).matrix for p in points])


@dataclass(frozen=True)
class TransitionSample:
    point: np.ndarray
    matrix: np.ndarray

    @property
    def unitarity_residual(self) -> float:
        return unitarity_residual(self.matrix)


@dataclass(frozen=True)
class TopologyReport:
    branch: str
    det_winding: int
    trivializable: bool
    rationale: str
    samples_used: int = 0
    rounding_residual: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "det_winding": int(self.det_winding),
            "trivializable": bool(self.trivializable),
            "rationale": self.rationale,
            "samples_used": int(self.samples_used),
            "rounding_residual": float(self.rounding_residual),
        }


def _pole(patch: str) -> np.ndarray:
    if patch not in ("+", "-"):
        raise InputError(f"patch must be '+' or '-', got {patch!r}")
    return np.array([0.0, 0.0, 1.0 if patch == "+" else -1.0])


def _rotation_vector(pole: np.ndarray, bhat: np.ndarray) -> np.ndarray:
    """``theta * axis`` of the geodesic rotation taking ``pole`` to ``bhat``.

    Written as ``(pole x bhat) * theta / sin(theta)`` so it stays smooth
    through ``theta = 0``.
    """
    cross = np.cross(pole, bhat)
    sin_t = np.linalg.norm(cross)
    theta = np.arctan2(sin_t, float(pole @ bhat))
    scale = 1.0 + theta**2 / 6.0 if sin_t < 1e-8 else theta / sin_t
    return cross * scale


def pole_frame(model: HamiltonianFamily, branch, patch: str) -> np.ndarray:
    branch = model.branch(branch)
    sign = 1 if patch == "+" else -1
    try:
        return np.asarray(model.pole_frames[(branch.label, sign)], complex)
    except KeyError:
        return branch_sample(model, _pole(patch), branch).frame


def rotate_to_pole_section(model: HamiltonianFamily, patch: str, b, branch=None) -> Frame:
    """Frame at ``b`` obtained by rotating the pole eigenframe.

    The rotation is the geodesic one about ``pole x b_hat``; the model must
    provide rotation generators (spin-like models). The frame depends on the
    direction of ``b`` only.
    """
    if model.generators is None:
        raise InputError(f"model {model.name!r} has no rotation generators")
    pole = _pole(patch)
    b = model.point(b)
    norm = np.linalg.norm(b)
    if norm == 0.0:
        raise AtAntipode("rotation undefined at b = 0", point=b)
    bhat = b / norm
    if np.linalg.norm(bhat + pole) < ANTIPODE_TOL:
        raise AtAntipode(f"b is at the excluded pole of patch {patch!r}", point=b)
    if branch is None:
        branch = model.branches[0]
    omega = _rotation_vector(pole, bhat)
    gen = sum(w * g for w, g in zip(omega, model.generators))
    rot = exp_antihermitian(-1j * gen)
    return Frame(b, rot @ pole_frame(model, branch, patch))


def rotate_to_pole_frames(model: HamiltonianFamily, patch: str, points, branch) -> np.ndarray:
    """Vectorized :func:`rotate_to_pole_section` over ``(m, 3)`` points;
    returns the ``(m, n, K)`` frame matrices."""
    pole = _pole(patch)
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms == 0.0):
        raise AtAntipode("rotation undefined at b = 0")
    bhat = pts / norms[:, None]
    if np.any(np.linalg.norm(bhat + pole, axis=1) < ANTIPODE_TOL):
        raise AtAntipode(f"a point is at the excluded pole of patch {patch!r}")
    omegas = np.array([_rotation_vector(pole, v) for v in bhat])
    gens = np.einsum("mk,kij->mij", omegas, np.stack(model.generators))
    values, vectors = jacobi_eigh(0.5 * (gens + dagger(gens)))
    rots = (vectors * np.exp(-1j * values)[:, None, :]) @ dagger(vectors)
    return rots @ pole_frame(model, branch, patch)


def pole_section(model: HamiltonianFamily, branch, patch: str) -> LocalSection:
    """Rotate-to-pole section on the patch that excludes the opposite pole."""
    pole = _pole(patch)
    branch = model.branch(branch)

    def domain(b):
        n = np.linalg.norm(b)
        return bool(n > 0 and np.linalg.norm(b / n + pole) >= ANTIPODE_TOL)

    return LocalSection(
        patch=patch,
        domain=domain,
        frame_at=lambda b: rotate_to_pole_section(model, patch, b, branch),
        model=model,
        branch=branch.label,
        frames_at=lambda pts: rotate_to_pole_frames(model, patch, pts, branch),
    )


def planar_section(model: HamiltonianFamily, branch) -> LocalSection:
    """Global section of a planar-spin branch: the eigenvector at
    ``phi = 0`` rotated by ``exp(-i J phi Sz)`` and rephased by
    ``exp(i J s phi)``, which makes it single valued around the origin."""
    branch = model.branch(branch)
    s = float(model.params["s"])
    J = int(model.params["J"])
    w0 = branch_sample(model, (1.0, 0.0), branch).frame
    sz = np.real(np.diag(spin_matrices(s)[2]))
    shift = s - sz  # integers

    def frames_at(pts):
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        return np.exp(1j * J * phi[:, None] * shift)[:, :, None] * w0

    return LocalSection(
        patch="plane",
        domain=lambda b: bool(np.hypot(b[0], b[1]) > 0),
        frame_at=lambda b: Frame(np.asarray(b, float), frames_at(np.asarray(b, float)[None])[0]),
        model=model,
        branch=branch.label,
        frames_at=frames_at,
    )


def default_section(model: HamiltonianFamily, branch, patch: str = "+") -> LocalSection:
    if model.name == "planar_spin":
        return planar_section(model, branch)
    return pole_section(model, branch, patch)


def transition_function(sec_a: LocalSection, sec_b: LocalSection, b) -> TransitionSample:
    """``psi_ab(b)`` with entry ``(j, i) = <w_b^j(b) | w_a^i(b)>``."""
    b = np.asarray(b, dtype=float)
    for sec in (sec_a, sec_b):
        if not sec.domain(b):
            raise OutOfPatch(f"point {b.tolist()} is outside patch {sec.patch!r}", point=b)
    return TransitionSample(b, overlap(sec_a.frame_at(b), sec_b.frame_at(b)))


def winding_with_residual(samples) -> tuple[int, float]:
    """Winding number of a closed loop of nonzero complex numbers and the
    distance of the raw phase sum (in turns) from that integer."""
    z = np.asarray(samples, dtype=complex).ravel()
    if z.size >= 2 and abs(z[-1] - z[0]) <= 1e-12 * max(abs(z[0]), 1e-300):
        z = z[:-1]  # explicit closing sample
    if z.size < MIN_WINDING_SAMPLES:
        raise InputError(f"need at least {MIN_WINDING_SAMPLES} samples, got {z.size}")
    mag = np.abs(z)
    if np.any(mag <= 1e-300) or not np.all(np.isfinite(z)):
        raise ZeroSample("loop passes through zero (or is not finite)")
    steps = np.angle(np.roll(z, -1) / z)
    worst = float(np.max(np.abs(steps)))
    if worst >= np.pi * (1 - 1e-12):
        raise AliasedSampling(f"phase step {worst:.4f} >= pi; sample the loop more finely")
    turns = float(np.sum(steps)) / (2 * np.pi)
    n = int(np.rint(turns))
    return n, abs(turns - n)


def winding_number_u1(samples) -> int:
    """Winding number of a closed loop of nonzero complex numbers."""
    n, residual = winding_with_residual(samples)
    if residual >= WINDING_RESIDUAL_MAX:
        raise WindingResidual(f"rounding residual {residual:.3g} >= {WINDING_RESIDUAL_MAX}")
    return n


def equator_points(samples: int = DEFAULT_EQUATOR_SAMPLES, radius: float = 1.0) -> np.ndarray:
    phi = 2 * np.pi * np.arange(samples) / samples
    return radius * np.column_stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)])


def equator_transitions(
    model: HamiltonianFamily, branch, samples: int = DEFAULT_EQUATOR_SAMPLES, radius: float = 1.0
) -> list[TransitionSample]:
    """``psi_+-`` of the rotate-to-pole sections around the equator."""
    pts = equator_points(samples, radius)
    plus = rotate_to_pole_frames(model, "+", pts, branch)
    minus = rotate_to_pole_frames(model, "-", pts, branch)
    mats = dagger(minus) @ plus
    return [TransitionSample(p, m) for p, m in zip(pts, mats)]


def classify_bundle(
    model: HamiltonianFamily,
    branch,
    equator_sampler: int = DEFAULT_EQUATOR_SAMPLES,
    *,
    radius: float = 1.0,
) -> TopologyReport:
    """Topological class of the branch's Berry bundle.

    Over a circle-like base the bundle is always trivializable. Over a
    sphere-like base the determinant of ``psi_+-`` is sampled around the
    equator; its winding is the first Chern number, and the bundle is
    trivializable exactly when it vanishes.
    """
    branch = model.branch(branch)
    topo = model.base_topology
    if topo == "S1":
        return TopologyReport(
            branch.label, 0, True, "(II): every U(K) bundle over a circle-like base is trivial"
        )
    if topo != "S2":
        raise InputError(f"model {model.name!r} does not declare a sphere- or circle-like base")
    psis = equator_transitions(model, branch, equator_sampler, radius)
    dets = [np.linalg.det(t.matrix) for t in psis]
    n, residual = winding_with_residual(dets)
    if residual >= WINDING_RESIDUAL_MAX:
        raise WindingResidual(f"rounding residual {residual:.3g} >= {WINDING_RESIDUAL_MAX}")
    if branch.degeneracy == 1:
        rationale = "abelian winding of the transition function"
    elif n == 0:
        rationale = "(I): det-winding 0, so the vector bundle is orientable and the U(K) bundle trivial"
    else:
        rationale = "det-winding nonzero: first Chern class obstructs triviality"
    return TopologyReport(
        branch.label,
        n,
        n == 0,
        rationale,
        samples_used=equator_sampler,
        rounding_residual=residual,
        extra={"max_unitarity_residual": max(t.unitarity_residual for t in psis)},
    )
