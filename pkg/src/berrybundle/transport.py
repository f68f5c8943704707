"""Berry connection, parallel transport and holonomy.

The geometric factor ``U(t)`` obeys ``dU/dt = -A_t U`` with ``A_t`` the
pull-back of the connection ``<w^j | d w^i>`` along a reference frame
``W(t)``, so that ``W(t) U(t)`` is horizontal. :func:`transport_ode`
integrates this with classical RK4. Within each step the reference frame is
the polar projection of the frame tracked at the step start onto the moving
eigenspace, and the connection is evaluated from the exact projector
derivative given by first-order perturbation theory.

:func:`wilson_line_oracle` is an independent discretization: the ordered
product of eigenspace projectors, re-orthonormalized step by step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigenbundle import Spectra, check_jumps, reference_frame, spectra, transport_frames
from .errors import DomainError, NonConvergent, OutOfDomain, PatchBoundary, PathNotClosed, StepTooLarge
from .gauge import LocalSection
from .linalg import dagger, jacobi_eigh, logm_unitary, max_norm, unitarity_residual
from .models import HamiltonianFamily
from .paths import ParameterPath, from_nodes

RICHARDSON_TOL = 1e-6
FD_TOL = 1e-6
RK4_ORDER = 4


@dataclass(frozen=True)
class ConnectionSample:
    point: np.ndarray
    components: np.ndarray  # (d, K, K), one anti-Hermitian matrix per coordinate
    hermitian_discard: float

    def along(self, velocity) -> np.ndarray:
        """Contraction ``sum_k A_k v_k``."""
        return np.tensordot(np.asarray(velocity, float), self.components, axes=1)


@dataclass(frozen=True)
class HolonomyResult:
    unitary: np.ndarray
    branch: str
    method: str
    abelian_phase: float | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.unitary.shape[0]

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "K": self.K,
            "method": self.method,
            "unitary": [[[float(z.real), float(z.imag)] for z in row] for row in self.unitary],
            "abelian_phase": self.abelian_phase,
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }


@dataclass(frozen=True)
class CurvatureSample:
    point: np.ndarray
    plane: tuple[int, int]
    matrix: np.ndarray
    delta: float

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def principal_phase(z: complex) -> float:
    """``arg z`` in ``(-pi, pi]``."""
    phase = float(np.angle(z))
    return np.pi if phase <= -np.pi else phase


# -- connection -------------------------------------------------------------


def connection_at(section: LocalSection, b, h: float | None = None) -> ConnectionSample:
    """Connection components ``A_k = <w^j | d_k w^i>`` of a local section.

    Central differences with step ``h`` (default ``1e-5 (1 + |b|)``); the
    Hermitian part left by the differencing is removed and reported.
    """
    b = np.asarray(b, dtype=float)
    d = b.size
    if h is None:
        h = 1e-5 * (1.0 + np.linalg.norm(b))
    shifts = np.vstack([np.zeros(d), h * np.eye(d), -h * np.eye(d)])
    pts = b + shifts
    for p in pts:
        if not section.domain(p):
            raise PatchBoundary(
                f"stencil point {p.tolist()} leaves patch {section.patch!r}", point=b
            )
    frames = section.matrices(pts)
    f0 = frames[0]
    deriv = (frames[1 : d + 1] - frames[d + 1 :]) / (2 * h)
    raw = dagger(f0)[None] @ deriv
    anti = 0.5 * (raw - dagger(raw))
    discard = max_norm(0.5 * (raw + dagger(raw)))
    if discard > max(0.1 * max_norm(anti), FD_TOL):
        raise StepTooLarge(f"Hermitian residue {discard:.3e} of the difference quotient; reduce h")
    return ConnectionSample(b, anti, discard)


def connection_rows(section: LocalSection, points, h: float | None = None) -> list[list[float]]:
    """CSV rows ``coords..., k, Re A_k (row-major), Im A_k (row-major)``."""
    rows = []
    for p in np.asarray(points, dtype=float):
        sample = connection_at(section, p, h)
        for k, a in enumerate(sample.components):
            rows.append(
                [*map(float, p), k, *map(float, a.real.ravel()), *map(float, a.imag.ravel())]
            )
    return rows


def section_holonomy(section: LocalSection, path: ParameterPath, steps: int = 256) -> np.ndarray:
    """``exp(-oint A)`` for a rank-one section: composite Simpson quadrature
    of the connection along ``path``, valid when one patch holds the loop."""
    points, vel, h = path.stages(steps)
    total = 0.0j
    for k in range(len(h)):
        a = [connection_at(section, points[2 * k + j]).along(vel[k, j])[0, 0] for j in range(3)]
        total += h[k] / 6.0 * (a[0] + 4 * a[1] + a[2])
    return np.array([[np.exp(-total)]])


# -- transport along a path ------------------------------------------------


def _projector_derivatives(model: HamiltonianFamily, sp: Spectra, velocities) -> np.ndarray:
    """``dP/dt = R Hdot P + P Hdot R`` at the RK stages.

    ``velocities`` has shape ``(steps, 3, d)``; stage ``j`` of step ``k``
    sits at grid index ``2k + j``.
    """
    steps = velocities.shape[0]
    grad = model.derivatives_many(sp.points)  # (2M+1, d, n, n)
    idx = 2 * np.arange(steps)[:, None] + np.arange(3)[None, :]  # (M, 3)
    hdot = np.einsum("mjd,mjdab->mjab", velocities, grad[idx])
    proj = sp.projectors[idx]
    res = sp.reduced_resolvents()[idx]
    first = res @ hdot @ proj
    return first + dagger(first)


def _polar_connection(m: np.ndarray, mdot: np.ndarray) -> np.ndarray:
    """``W^dagger dW/dt`` for the polar factor ``W`` of ``M(t)`` (batched).

    With ``M = W H``: ``W^dagger Mdot = Omega H + Hdot``, so the
    anti-Hermitian ``Omega`` solves ``Omega H + H Omega = X - X^dagger``.
    """
    s = dagger(m) @ m
    lam, q = jacobi_eigh(s)
    root = np.sqrt(lam)
    w = m @ (q * (1.0 / root)[..., None, :]) @ dagger(q)
    x = dagger(w) @ mdot
    y = dagger(q) @ (x - dagger(x)) @ q
    omega = y / (root[..., :, None] + root[..., None, :])
    return q @ omega @ dagger(q)


def _polar(u: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def _grid_spectra(model, points, branch, gap_tol) -> Spectra:
    try:
        return spectra(model, points, branch, gap_tol=gap_tol)
    except DomainError as exc:
        raise type(exc)(
            f"{exc} of the {len(points)}-point integration grid", node=exc.node, point=exc.point
        ) from None


def _integrate(model, path, branch, steps, gap_tol, initial_frame):
    points, vel, h = path.stages(steps)
    sp = _grid_spectra(model, points, branch, gap_tol)
    vecs = sp.branch_vectors
    check_jumps(vecs, points)
    first = reference_frame(vecs[0]) if initial_frame is None else np.asarray(initial_frame, complex)
    frames = transport_frames(vecs[::2], first)  # one per step boundary
    pdot = _projector_derivatives(model, sp, vel)  # (M, 3, n, n)
    n_steps = len(h)
    idx = 2 * np.arange(n_steps)[:, None] + np.arange(3)[None, :]
    proj = sp.projectors[idx]  # (M, 3, n, n)
    ref = frames[:-1][:, None]  # (M, 1, n, K)
    conn = _polar_connection(proj @ ref, pdot @ ref)  # (M, 3, K, K)

    k = first.shape[1]
    eye = np.eye(k)
    hh = h[:, None, None]
    a0, am, a1 = conn[:, 0], conn[:, 1], conn[:, 2]
    k1 = -a0
    k2 = -am @ (eye + 0.5 * hh * k1)
    k3 = -am @ (eye + 0.5 * hh * k2)
    k4 = -a1 @ (eye + hh * k3)
    props = eye + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    g = eye.astype(complex)
    for step in props:
        g = _polar(step @ g)

    end_frame = first if path.closed else reference_frame(vecs[-1])
    unitary = _polar(dagger(end_frame) @ frames[-1] @ g)
    return unitary, float(np.min(sp.gaps)), n_steps


def _result(unitary, branch, method, diagnostics) -> HolonomyResult:
    phase = principal_phase(unitary[0, 0]) if unitary.shape == (1, 1) else None
    diagnostics = {"unitarity_residual": unitarity_residual(unitary), **diagnostics}
    return HolonomyResult(unitary, branch, method, phase, diagnostics)


def transport_ode(
    model: HamiltonianFamily,
    path: ParameterPath,
    branch,
    steps: int = 1024,
    *,
    gap_tol: float | None = None,
    initial_frame=None,
    richardson: bool = True,
    tol: float | None = None,
    max_refinements: int = 2,
) -> HolonomyResult:
    """Geometric transport of ``branch`` along ``path`` (RK4).

    The result is expressed in the initial frame: for closed paths it is the
    holonomy; for open ones it is the transported frame measured against
    the gauge-fixed eigenframe at the end point.

    With ``richardson`` a half-resolution run gives the error estimate
    ``|U_N - U_{N/2}| / (2**4 - 1)``. When ``tol`` is set and the estimate
    exceeds it, ``steps`` is doubled up to ``max_refinements`` times before
    :class:`~berrybundle.errors.NonConvergent` is raised.
    """
    branch = model.branch(branch)
    if steps < 2:
        raise ValueError("steps must be >= 2")
    for attempt in range(max_refinements + 1):
        unitary, min_gap, used = _integrate(model, path, branch, steps, gap_tol, initial_frame)
        estimate = None
        if richardson and steps // 2 >= len(path.pieces):
            coarse, _, _ = _integrate(model, path, branch, steps // 2, gap_tol, initial_frame)
            estimate = max_norm(unitary - coarse) / (2**RK4_ORDER - 1)
        if tol is None or estimate is None or estimate <= tol:
            break
        if attempt == max_refinements:
            raise NonConvergent(
                f"Richardson error estimate {estimate:.3e} > {tol:g} at {used} steps"
            )
        steps *= 2
    return _result(
        unitary,
        branch.label,
        "ode",
        {"min_gap": min_gap, "steps": used, "richardson_error_estimate": estimate},
    )


def wilson_line_oracle(
    model: HamiltonianFamily,
    path: ParameterPath,
    branch,
    N: int = 4096,
    *,
    gap_tol: float | None = None,
    initial_frame=None,
) -> HolonomyResult:
    """Discrete transport by projector products on ``N`` steps."""
    branch = model.branch(branch)
    points = path.grid(N)
    sp = _grid_spectra(model, points, branch, gap_tol)
    vecs = sp.branch_vectors
    check_jumps(vecs, points)
    first = reference_frame(vecs[0]) if initial_frame is None else np.asarray(initial_frame, complex)
    frames = transport_frames(vecs, first)
    end_frame = first if path.closed else reference_frame(vecs[-1])
    unitary = _polar(dagger(end_frame) @ frames[-1])
    return _result(
        unitary,
        branch.label,
        "wilson",
        {"min_gap": float(np.min(sp.gaps)), "steps": len(points) - 1, "richardson_error_estimate": None},
    )


def holonomy(
    model: HamiltonianFamily,
    path: ParameterPath,
    branch,
    method: str = "ode",
    steps: int = 1024,
    **kwargs,
) -> HolonomyResult:
    """Holonomy of a closed path by ``method`` in ``{"ode", "wilson"}``."""
    if not path.closed:
        raise PathNotClosed("holonomy needs a closed path (first node == last node)")
    if method == "ode":
        return transport_ode(model, path, branch, steps, **kwargs)
    if method == "wilson":
        return wilson_line_oracle(model, path, branch, steps, **kwargs)
    raise ValueError(f"unknown method {method!r}; use 'ode' or 'wilson'")


# -- curvature ------------------------------------------------------------------


def plaquette(b, plane: tuple[int, int], delta: float) -> ParameterPath:
    """Counter-clockwise square of side ``delta`` centred on ``b`` in the
    coordinate plane ``(k, l)``, starting at its lower-left corner."""
    b = np.asarray(b, dtype=float)
    k, l = plane
    ek = np.zeros_like(b)
    el = np.zeros_like(b)
    ek[k] = el[l] = 0.5 * delta
    corners = [b - ek - el, b + ek - el, b + ek + el, b - ek + el, b - ek - el]
    return from_nodes(corners)


def curvature_plaquette(
    model: HamiltonianFamily,
    branch,
    b,
    plane: tuple[int, int] = (0, 1),
    delta: float = 0.05,
    *,
    steps: int = 256,
) -> CurvatureSample:
    """``F = -log(Hol(square)) / delta**2`` for a small square around ``b``."""
    b = model.point(b)
    loop = plaquette(b, plane, delta)
    for p in loop.grid(steps):
        if not model.in_domain(p):
            raise OutOfDomain(f"plaquette leaves the allowed space at {p.tolist()}", point=p)
    hol = transport_ode(model, loop, branch, steps, richardson=False).unitary
    f = -logm_unitary(hol) / delta**2
    return CurvatureSample(b, tuple(plane), f, float(delta))


def is_flat(
    model: HamiltonianFamily,
    branch,
    b,
    plane: tuple[int, int] = (0, 1),
    deltas=(0.1, 0.05),
    tol: float = 1e-6,
) -> tuple[bool, list[CurvatureSample]]:
    """Flatness test: plaquette curvature below ``tol`` at every size."""
    samples = [curvature_plaquette(model, branch, b, plane, d) for d in deltas]
    return all(s.norm <= tol for s in samples), samples
