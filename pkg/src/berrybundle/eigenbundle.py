"""Eigenspaces of an energy branch and their continuation along paths.

For a branch ``m`` the fiber over ``b`` is the eigenspace ``F_b`` of
``H(b)`` with energy ``eps_m(b)``. It is represented by its orthogonal
projector and, where a basis is needed, by an orthonormal frame. The kernel
of ``H(b) - eps_m(b)`` is never formed explicitly; it is read off the
spectral decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneracyViolation, GapCollapse, OutOfDomain, SingularInput, SubspaceJump
from .linalg import dagger, eig_hermitian
from .models import BranchDescriptor, HamiltonianFamily
from .paths import ParameterPath

DEGENERACY_RTOL = 1e-8
GAP_RTOL = 1e-8
JUMP_TOL = 1e-6
CONTINUE_TOL = 1e-6


@dataclass(frozen=True)
class Frame:
    """Orthonormal basis (as columns) of a fiber at ``point``."""

    point: np.ndarray
    matrix: np.ndarray

    @property
    def rank(self) -> int:
        return self.matrix.shape[1]

    def __matmul__(self, g) -> "Frame":
        # right action of U(K)
        return Frame(self.point, self.matrix @ np.asarray(g))


@dataclass(frozen=True)
class EigenspaceSample:
    point: np.ndarray
    branch: BranchDescriptor
    energy: float
    projector: np.ndarray
    gap: float
    frame: np.ndarray
    values: np.ndarray
    vectors: np.ndarray
    selected: np.ndarray

    @property
    def degeneracy(self) -> int:
        return self.branch.degeneracy


def fix_gauge(frame: np.ndarray, *, tie_rtol: float = 1e-12) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive.

    Entries within ``tie_rtol`` of the column maximum count as ties, and the
    lowest row index wins.
    """
    frame = np.array(frame, dtype=complex, copy=True)
    for i in range(frame.shape[1]):
        col = frame[:, i]
        mag = np.abs(col)
        row = int(np.flatnonzero(mag >= mag.max() * (1 - tie_rtol))[0])
        frame[:, i] = col * (np.conj(col[row]) / mag[row])
    return frame


def reference_frame(vectors: np.ndarray, *, tie_rtol: float = 1e-12) -> np.ndarray:
    """Gauge-fixed frame determined by the eigenspace alone.

    For ``K = 1`` this is :func:`fix_gauge`. For ``K > 1`` the eigensolver's
    basis of a degenerate space is arbitrary, so the frame is instead the
    polar factor of ``K`` columns ``P e_i`` of the projector, picked greedily
    by largest residual norm (ties to the lowest index). For ``K = 1`` both
    rules coincide.
    """
    vectors = np.asarray(vectors, dtype=complex)
    k = vectors.shape[1]
    if k == 1:
        return fix_gauge(vectors, tie_rtol=tie_rtol)
    proj = vectors @ dagger(vectors)
    residual = proj.copy()
    chosen = []
    for _ in range(k):
        norms = np.linalg.norm(residual, axis=0)
        norms[chosen] = -1.0
        i = int(np.flatnonzero(norms >= norms.max() * (1 - tie_rtol))[0])
        chosen.append(i)
        q = residual[:, i] / norms[i]
        residual = residual - np.outer(q, q.conj() @ residual)
    cols = proj[:, sorted(chosen)]
    w, _, vh = np.linalg.svd(cols, full_matrices=False)
    return w @ vh


@dataclass(frozen=True)
class Spectra:
    """Batched spectral data for one branch over a sequence of points."""

    points: np.ndarray
    values: np.ndarray  # (N, n)
    vectors: np.ndarray  # (N, n, n)
    selected: np.ndarray  # (N, K) eigen-indices belonging to the branch
    energies: np.ndarray
    gaps: np.ndarray
    scales: np.ndarray  # max-norm of H at each point

    @property
    def branch_vectors(self) -> np.ndarray:
        return np.take_along_axis(self.vectors, self.selected[:, None, :], axis=2)

    @property
    def projectors(self) -> np.ndarray:
        v = self.branch_vectors
        return v @ dagger(v)

    def reduced_resolvents(self) -> np.ndarray:
        """``sum_{n not in branch} |n><n| / (eps_m - eps_n)``."""
        n = self.values.shape[1]
        mask = np.ones(self.values.shape, bool)
        np.put_along_axis(mask, self.selected, False, axis=1)
        denom = self.energies[:, None] - self.values
        weights = np.where(mask, 1.0 / np.where(mask, denom, 1.0), 0.0)
        return (self.vectors * weights[:, None, :]) @ dagger(self.vectors)


def _select_by_continuity(vectors, start_idx, k):
    n_points, n, _ = vectors.shape
    selected = np.empty((n_points, k), int)
    selected[0] = start_idx
    prev = vectors[0][:, start_idx]
    for i in range(1, n_points):
        weights = np.sum(np.abs(dagger(prev) @ vectors[i]) ** 2, axis=0)
        idx = np.sort(np.argsort(-weights, kind="stable")[:k])
        selected[i] = idx
        prev = vectors[i][:, idx]
    return selected


def spectra(
    model: HamiltonianFamily,
    points,
    branch,
    *,
    gap_tol: float | None = None,
    check_domain: bool = True,
) -> Spectra:
    """Diagonalize ``H`` along ``points`` and follow ``branch`` by projector
    continuity.

    The branch is identified by its index range at the first point; later
    points take the ``K`` eigenvectors with the largest weight in the
    previous eigenspace. ``gap_tol`` is relative to ``max|H|`` (default
    1e-8).
    """
    branch = model.branch(branch)
    pts = np.asarray(points, dtype=float).reshape(-1, model.param_dim)
    hams = model.hamiltonians(pts)
    values, vectors = eig_hermitian(hams)
    scales = np.max(np.abs(hams), axis=(1, 2))
    k = branch.degeneracy
    start_idx = np.array(list(branch.indices))

    guess = np.broadcast_to(start_idx, (len(pts), k))
    v_sel = np.take_along_axis(vectors, guess[:, None, :], axis=2)
    weights = np.sum(np.abs(dagger(v_sel[:-1]) @ vectors[1:]) ** 2, axis=1)
    top = np.sort(np.argsort(-weights, axis=1, kind="stable")[:, :k], axis=1)
    if np.all(top == start_idx):
        selected = np.array(guess)
    else:
        # a swap is only trusted if the declared index range itself moved
        # continuously; otherwise the step is too coarse to tell branches apart
        check_jumps(v_sel, pts)
        selected = _select_by_continuity(vectors, start_idx, k)

    sel_vals = np.take_along_axis(values, selected, axis=1)
    energies = sel_vals.mean(axis=1)
    mask = np.ones(values.shape, bool)
    np.put_along_axis(mask, selected, False, axis=1)
    if np.any(mask):
        dist = np.abs(values - energies[:, None])
        gaps = np.min(np.where(mask, dist, np.inf), axis=1)
    else:
        gaps = np.full(len(pts), np.inf)

    tol = GAP_RTOL if gap_tol is None else gap_tol
    collapsed = np.flatnonzero(gaps <= tol * scales)
    if collapsed.size:
        i = int(collapsed[0])
        raise GapCollapse(
            f"spectral gap {gaps[i]:.3e} collapsed at node {i}", node=i, point=pts[i]
        )
    spread = sel_vals.max(axis=1) - sel_vals.min(axis=1)
    split = np.flatnonzero(spread > DEGENERACY_RTOL * scales)
    if split.size:
        i = int(split[0])
        raise DegeneracyViolation(
            f"branch {branch.label!r} split by {spread[i]:.3e} at node {i}; "
            f"declared degeneracy {k} does not hold",
            node=i,
            point=pts[i],
        )
    if check_domain:
        for i, p in enumerate(pts):
            if not model.in_domain(p):
                raise OutOfDomain(f"node {i} lies outside the allowed space", node=i, point=p)
    return Spectra(pts, values, vectors, selected, energies, gaps, scales)


def branch_sample(
    model: HamiltonianFamily, b, branch, *, gap_tol: float | None = None
) -> EigenspaceSample:
    """Eigenspace of ``branch`` at the single point ``b``."""
    b = model.point(b)
    if not model.in_domain(b):
        raise OutOfDomain(f"{model.name}: point {b.tolist()} is outside the allowed space", point=b)
    branch = model.branch(branch)
    sp = spectra(model, b[None, :], branch, gap_tol=gap_tol, check_domain=False)
    return _sample_from(sp, 0, branch)


def _sample_from(sp: Spectra, i: int, branch: BranchDescriptor) -> EigenspaceSample:
    vecs = sp.vectors[i][:, sp.selected[i]]
    return EigenspaceSample(
        point=sp.points[i],
        branch=branch,
        energy=float(sp.energies[i]),
        projector=vecs @ dagger(vecs),
        gap=float(sp.gaps[i]),
        frame=reference_frame(vecs),
        values=sp.values[i],
        vectors=sp.vectors[i],
        selected=sp.selected[i],
    )


def _continue(prev: np.ndarray, projector: np.ndarray, tol: float = CONTINUE_TOL) -> np.ndarray:
    m = projector @ prev
    if m.shape[1] == 1:
        norm = np.linalg.norm(m)
        if norm <= tol:
            raise SingularInput(f"eigenspace overlap {norm:.3e} <= {tol:g}; step too coarse")
        return m / norm
    w, sigma, vh = np.linalg.svd(m, full_matrices=False)
    if sigma[-1] <= tol:
        raise SingularInput(
            f"smallest eigenspace overlap {sigma[-1]:.3e} <= {tol:g}; step too coarse"
        )
    return w @ vh


def continue_frame(prev: Frame, next_sample: EigenspaceSample) -> Frame:
    """One discrete parallel-transport step: the frame in the next fiber
    closest to ``prev`` (polar factor of ``P_next @ prev``)."""
    return Frame(next_sample.point, _continue(prev.matrix, next_sample.projector))


def subspace_distances(branch_vectors: np.ndarray) -> np.ndarray:
    """Spectral-norm distances ``||P_{k+1} - P_k||`` between consecutive
    eigenspaces (``sqrt(1 - sigma_min^2)`` of the frame overlap)."""
    ov = dagger(branch_vectors[:-1]) @ branch_vectors[1:]
    smin = np.linalg.svd(ov, compute_uv=False)[:, -1]
    return np.sqrt(np.clip(1.0 - smin**2, 0.0, None))


def transport_frames(
    branch_vectors: np.ndarray, initial: np.ndarray, *, tol: float = CONTINUE_TOL
) -> np.ndarray:
    """Continue ``initial`` through the eigenspaces spanned by
    ``branch_vectors[1:]`` (shape ``(N, n, K)``)."""
    frames = np.empty(branch_vectors.shape, complex)
    frames[0] = initial
    cur = initial
    for i in range(1, len(branch_vectors)):
        v = branch_vectors[i]
        cur = _continue(cur, v @ (dagger(v)), tol)
        frames[i] = cur
    return frames


@dataclass(frozen=True)
class BranchTrack:
    path: ParameterPath
    branch: BranchDescriptor
    spectra: Spectra
    frames_array: np.ndarray  # (N, n, K)
    min_gap: float

    @property
    def energies(self) -> np.ndarray:
        return self.spectra.energies

    @property
    def gaps(self) -> np.ndarray:
        return self.spectra.gaps

    @property
    def samples(self) -> list[EigenspaceSample]:
        return [_sample_from(self.spectra, i, self.branch) for i in range(len(self.spectra.points))]

    @property
    def frames(self) -> list[Frame]:
        return [Frame(p, f) for p, f in zip(self.spectra.points, self.frames_array)]

    def rows(self) -> list[tuple]:
        """``(node, *coords, energy, gap)`` rows for CSV export."""
        return [
            (i, *map(float, p), float(e), float(g))
            for i, (p, e, g) in enumerate(zip(self.spectra.points, self.energies, self.gaps))
        ]


def check_jumps(branch_vectors: np.ndarray, points) -> None:
    dist = subspace_distances(branch_vectors)
    bad = np.flatnonzero(dist >= 1.0 - JUMP_TOL)
    if bad.size:
        i = int(bad[0]) + 1
        raise SubspaceJump(
            f"eigenspace jumps between nodes {i - 1} and {i} "
            f"(||dP|| = {dist[i - 1]:.6f}); refine the path",
            node=i,
            point=np.asarray(points)[i],
        )


def track_branch(
    model: HamiltonianFamily,
    path: ParameterPath,
    branch,
    *,
    gap_tol: float | None = None,
    initial_frame: np.ndarray | None = None,
) -> BranchTrack:
    """Follow ``branch`` along the nodes of ``path``.

    The first frame is :func:`reference_frame` at the start (or
    ``initial_frame``); every later frame is obtained by
    :func:`continue_frame`, i.e. discrete parallel transport.
    """
    branch = model.branch(branch)
    sp = spectra(model, path.nodes, branch, gap_tol=gap_tol)
    vecs = sp.branch_vectors
    check_jumps(vecs, sp.points)
    first = reference_frame(vecs[0]) if initial_frame is None else np.asarray(initial_frame, complex)
    frames = transport_frames(vecs, first)
    return BranchTrack(path, branch, sp, frames, float(np.min(sp.gaps)))


def frames_span_check(frames: Sequence[Frame], projectors) -> float:
    """Largest ``|P F - F|`` over a list of frames (diagnostic)."""
    return max(
        float(np.max(np.abs(p @ f.matrix - f.matrix))) for f, p in zip(frames, projectors)
    )
