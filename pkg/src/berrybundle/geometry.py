"""Loop geometry and path presets.

``solid_angle`` sums signed areas of the spherical triangles
``(axis, p_k, p_{k+1})``: exactly for node polygons, and in the continuum
limit for smooth paths. The enclosed side is the one containing the
reference axis.
``planar_winding`` counts turns of a planar loop about the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadPresetParams, DegenerateLoop, InputError
from .gauge import winding_number_u1
from .paths import ParameterPath, PathPiece, from_nodes, line_piece

MIN_NODES = 8
UNIT_TOL = 1e-12
CENTROID_TOL = 1e-9


@dataclass(frozen=True)
class SphericalLoop:
    """Closed loop of unit vectors (the closing node is not repeated)."""

    nodes: np.ndarray
    axis: np.ndarray | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 3 or len(nodes) < 3:
            raise InputError(f"a spherical loop needs >= 3 nodes in R^3, got {nodes.shape}")
        if np.allclose(nodes[0], nodes[-1], rtol=0, atol=1e-12):
            nodes = nodes[:-1]
        if np.max(np.abs(np.linalg.norm(nodes, axis=1) - 1.0)) > UNIT_TOL:
            raise InputError("spherical loop nodes must be unit vectors")
        steps = np.einsum("ij,ij->i", nodes, np.roll(nodes, -1, axis=0))
        if np.any(steps < -UNIT_TOL):
            raise InputError("consecutive nodes must be at most pi/2 apart")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def from_path(cls, path: ParameterPath) -> "SphericalLoop":
        nodes = path.nodes / np.linalg.norm(path.nodes, axis=1)[:, None]
        return cls(nodes, path.axis)

    def reversed(self) -> "SphericalLoop":
        return SphericalLoop(self.nodes[::-1].copy(), self.axis)


@dataclass(frozen=True)
class PlanarLoop:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise InputError(f"a planar loop needs (m, 2) nodes, got {nodes.shape}")
        if np.any(np.hypot(nodes[:, 0], nodes[:, 1]) == 0.0):
            raise InputError("planar loop passes through the origin")
        object.__setattr__(self, "nodes", nodes)


def triangle_solid_angle(a, b, c) -> float:
    """Signed solid angle of the geodesic triangle ``a, b, c`` (unit vectors);
    positive when ``a -> b -> c`` turns counter-clockwise seen from outside."""
    num = float(np.dot(a, np.cross(b, c)))
    den = 1.0 + float(np.dot(a, b) + np.dot(b, c) + np.dot(c, a))
    return 2.0 * np.arctan2(num, den)


def _reference_axis(nodes: np.ndarray, axis) -> np.ndarray:
    if axis is None:
        centroid = nodes.mean(axis=0)
        if np.linalg.norm(centroid) < CENTROID_TOL:
            raise DegenerateLoop("centroid axis undefined; pass an explicit reference axis")
        axis = centroid
    axis = np.asarray(axis, dtype=float)
    return axis / np.linalg.norm(axis)


def _reduce(raw: float) -> float:
    """Map into ``(-2 pi, 2 pi]``, snapping values within roundoff of the
    upper end onto it."""
    turns = np.ceil((raw - 2 * np.pi) / (4 * np.pi) - 1e-12)
    return float(raw - 4 * np.pi * turns)


def _polygon_solid_angle(nodes: np.ndarray, axis: np.ndarray) -> float:
    nxt = np.roll(nodes, -1, axis=0)
    num = np.einsum("j,ij->i", axis, np.cross(nodes, nxt))
    den = 1.0 + nodes @ axis + np.einsum("ij,ij->i", nodes, nxt) + nxt @ axis
    return float(np.sum(2.0 * np.arctan2(num, den)))


def _smooth_solid_angle(path: ParameterPath, axis: np.ndarray, intervals: int = 64) -> float:
    # continuum limit of the triangle fan: integrand (u x u') . axis / (1 + u . axis)
    x, w = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(0.0, 1.0, intervals + 1)
    s = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * x).ravel()
    weights = np.tile(w / (2 * intervals), intervals)
    total = 0.0
    for piece in path.pieces:
        b = piece.point(s)
        v = piece.velocity(s)
        r = np.linalg.norm(b, axis=1)
        u = b / r[:, None]
        du = (v - u * np.einsum("ij,ij->i", u, v)[:, None]) / r[:, None]
        den = 1.0 + u @ axis
        if np.min(den) < 1e-9:
            raise DegenerateLoop("loop passes through the antipode of the reference axis")
        total += float(np.sum(weights * (np.cross(u, du) @ axis) / den))
    return total


def solid_angle(loop, axis=None, *, total: bool = False) -> float:
    """Signed solid angle enclosed by a spherical loop.

    A :class:`SphericalLoop` (or a node array) is read as the geodesic
    polygon through its nodes, whose area the triangle fan gives exactly.
    A :class:`ParameterPath` is read as the smooth curve of its pieces and
    integrated by Gauss quadrature, so sampled circles give the cap area
    rather than that of the inscribed polygon.

    The reference ``axis`` (default: the loop's own axis, then the
    normalized centroid) selects the enclosed side; orientation follows the
    right-hand rule about it. The value is reduced to ``(-2 pi, 2 pi]``;
    pass ``total=True`` for the raw sum, which is defined modulo ``4 pi``.
    """
    if isinstance(loop, ParameterPath):
        nodes = SphericalLoop.from_path(loop).nodes
        ax = _reference_axis(nodes, loop.axis if axis is None else axis)
        if np.min(np.linalg.norm(nodes + ax, axis=1)) < 1e-9:
            raise DegenerateLoop("loop passes through the antipode of the reference axis")
        raw = _smooth_solid_angle(loop, ax)
    else:
        if not isinstance(loop, SphericalLoop):
            loop = SphericalLoop(loop)
        nodes = loop.nodes
        ax = _reference_axis(nodes, loop.axis if axis is None else axis)
        if np.min(np.linalg.norm(nodes + ax, axis=1)) < 1e-9:
            raise DegenerateLoop("loop passes through the antipode of the reference axis")
        raw = _polygon_solid_angle(nodes, ax)
    return raw if total else _reduce(raw)


def planar_winding(loop) -> int:
    """Winding number of a planar loop about the origin."""
    if isinstance(loop, ParameterPath):
        nodes = loop.nodes
    elif isinstance(loop, PlanarLoop):
        nodes = loop.nodes
    else:
        nodes = PlanarLoop(loop).nodes
    return winding_number_u1(nodes[:, 0] + 1j * nodes[:, 1])


# -- presets ----------------------------------------------------------------


def _node_count(n) -> int:
    try:
        n = int(n)
    except (TypeError, ValueError):
        raise BadPresetParams(f"node count must be an integer, got {n!r}") from None
    if n < MIN_NODES:
        raise BadPresetParams(f"node count must be >= {MIN_NODES}, got {n}")
    return n


def _orthonormal_pair(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-handed ``(u, v)`` with ``u x v = axis``; for ``axis = z`` this is
    ``(x, y)``."""
    trial = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = trial - axis * (trial @ axis)
    u /= np.linalg.norm(u)
    return u, np.cross(axis, u)


def _closed_from(piece: PathPiece, n: int, axis=None, **meta) -> ParameterPath:
    nodes = piece.point(np.linspace(0.0, 1.0, n + 1))
    nodes[-1] = nodes[0]
    return ParameterPath(nodes, True, (piece,), axis, meta)


def circle_path(radius=1.0, nodes=256, center=(0.0, 0.0), turns=1, radii=None, phase=0.0):
    """Planar ellipse/circle ``center + (a cos, b sin)(2 pi turns s + phase)``.

    Negative ``turns`` run clockwise.
    """
    n = _node_count(nodes)
    a, b = (radius, radius) if radii is None else radii
    if a <= 0 or b <= 0:
        raise BadPresetParams("radii must be positive")
    if int(turns) != turns or turns == 0:
        raise BadPresetParams("turns must be a nonzero integer")
    c = np.asarray(center, dtype=float)
    w = 2 * np.pi * turns
    piece = PathPiece(
        point=lambda s: c
        + np.column_stack([a * np.cos(w * np.asarray(s) + phase), b * np.sin(w * np.asarray(s) + phase)]),
        velocity=lambda s: w
        * np.column_stack([-a * np.sin(w * np.asarray(s) + phase), b * np.cos(w * np.asarray(s) + phase)]),
    )
    return _closed_from(piece, n, preset="circle")


def spherical_cap_path(theta, nodes=256, radius=1.0, axis=(0.0, 0.0, 1.0), turns=1):
    """Circle of polar angle ``theta`` about ``axis``, right-handed."""
    n = _node_count(nodes)
    if not 0 < theta < np.pi:
        raise BadPresetParams("theta must lie in (0, pi)")
    if radius <= 0:
        raise BadPresetParams("radius must be positive")
    ax = np.asarray(axis, dtype=float)
    ax = ax / np.linalg.norm(ax)
    u, v = _orthonormal_pair(ax)
    w = 2 * np.pi * turns
    st, ct = np.sin(theta), np.cos(theta)

    def point(s):
        ang = w * np.asarray(s, float)[:, None]
        return radius * (st * (np.cos(ang) * u + np.sin(ang) * v) + ct * ax)

    def velocity(s):
        ang = w * np.asarray(s, float)[:, None]
        return radius * w * st * (-np.sin(ang) * u + np.cos(ang) * v)

    return _closed_from(PathPiece(point, velocity), n, axis=ax, preset="spherical_cap", theta=theta)


def geodesic_piece(a, b, radius=1.0) -> PathPiece:
    """Great-circle arc from direction ``a`` to direction ``b`` at ``radius``."""
    a = np.asarray(a, float) / np.linalg.norm(a)
    b = np.asarray(b, float) / np.linalg.norm(b)
    omega = np.arccos(np.clip(a @ b, -1.0, 1.0))
    if omega < 1e-12 or np.pi - omega < 1e-9:
        raise BadPresetParams("geodesic edge endpoints must be distinct and not antipodal")
    sw = np.sin(omega)

    def point(s):
        s = np.asarray(s, float)[:, None]
        return radius * (np.sin((1 - s) * omega) * a + np.sin(s * omega) * b) / sw

    def velocity(s):
        s = np.asarray(s, float)[:, None]
        return radius * omega * (-np.cos((1 - s) * omega) * a + np.cos(s * omega) * b) / sw

    return PathPiece(point, velocity)


def geodesic_polygon_path(vertices, nodes_per_edge=128, radius=1.0, axis=None):
    """Closed polygon of great-circle arcs through ``vertices``."""
    n = _node_count(nodes_per_edge)
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 3 or len(verts) < 3:
        raise BadPresetParams("need at least three 3-vectors as vertices")
    pieces = tuple(
        geodesic_piece(verts[i], verts[(i + 1) % len(verts)], radius) for i in range(len(verts))
    )
    grid = np.linspace(0.0, 1.0, n + 1)[:-1]
    nodes = np.vstack([p.point(grid) for p in pieces] + [pieces[0].point(np.zeros(1))])
    ax = None if axis is None else np.asarray(axis, float)
    return ParameterPath(nodes, True, pieces, ax, {"preset": "geodesic_polygon"})


def meridian_path(theta_start=0.0, theta_end=np.pi / 2, phi=0.0, nodes=100, radius=1.0):
    """Open arc of the meridian at azimuth ``phi`` between two polar angles."""
    n = _node_count(nodes)
    if not (0 <= theta_start < np.pi and 0 < theta_end < np.pi) or theta_start == theta_end:
        raise BadPresetParams("polar angles must lie in [0, pi) and differ")
    d = theta_end - theta_start
    cp, sp = np.cos(phi), np.sin(phi)

    def point(s):
        t = theta_start + d * np.asarray(s, float)
        return radius * np.column_stack([np.sin(t) * cp, np.sin(t) * sp, np.cos(t)])

    def velocity(s):
        t = theta_start + d * np.asarray(s, float)
        return radius * d * np.column_stack([np.cos(t) * cp, np.cos(t) * sp, -np.sin(t)])

    piece = PathPiece(point, velocity)
    return ParameterPath(piece.point(np.linspace(0, 1, n + 1)), False, (piece,), None, {"preset": "meridian"})


def fourier_path(center, cos_coeffs, sin_coeffs, nodes=256):
    """Smooth closed loop ``center + sum_k a_k cos(2 pi k s) + b_k sin(2 pi k s)``.

    ``cos_coeffs`` and ``sin_coeffs`` have shape ``(modes, d)``; mode ``k``
    is row ``k - 1``.
    """
    n = _node_count(nodes)
    c = np.asarray(center, float)
    a = np.atleast_2d(np.asarray(cos_coeffs, float))
    b = np.atleast_2d(np.asarray(sin_coeffs, float))
    if a.shape != b.shape or a.shape[1] != c.size:
        raise BadPresetParams("coefficient arrays must both have shape (modes, dim)")
    k = 2 * np.pi * np.arange(1, a.shape[0] + 1)

    def point(s):
        ang = np.asarray(s, float)[:, None] * k[None, :]
        return c + np.cos(ang) @ a + np.sin(ang) @ b

    def velocity(s):
        ang = np.asarray(s, float)[:, None] * k[None, :]
        return (-np.sin(ang) * k) @ a + (np.cos(ang) * k) @ b

    return _closed_from(PathPiece(point, velocity), n, preset="fourier")


def custom_path(nodes, closed=None):
    return from_nodes(nodes, closed)


PRESETS = {
    "circle": circle_path,
    "spherical_cap": spherical_cap_path,
    "geodesic_polygon": geodesic_polygon_path,
    "meridian": meridian_path,
    "fourier": fourier_path,
    "custom": custom_path,
}


def make_path(preset: str, params: dict | None = None) -> ParameterPath:
    """Build a path from a preset name and keyword parameters."""
    params = dict(params or {})
    try:
        factory = PRESETS[preset]
    except KeyError:
        raise BadPresetParams(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise BadPresetParams(f"bad parameters for preset {preset!r}: {exc}") from None


def square_path(center, side, plane=(0, 1)):
    """Axis-aligned square (counter-clockwise in ``plane``)."""
    c = np.asarray(center, float)
    k, l = plane
    ek = np.zeros_like(c)
    el = np.zeros_like(c)
    ek[k] = el[l] = 0.5 * side
    corners = [c - ek - el, c + ek - el, c + ek + el, c - ek + el]
    return ParameterPath(
        np.vstack(corners + corners[:1]),
        True,
        tuple(line_piece(corners[i], corners[(i + 1) % 4]) for i in range(4)),
    )


# -- random loops (seeded generators for tests and checks) -----------------------


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_geodesic_polygon(rng: np.random.Generator, nodes_per_edge=64, radius=1.0):
    """Star-shaped geodesic polygon with 3 to 6 vertices around a random
    centre, which becomes the reference axis."""
    center = random_unit_vector(rng)
    u, v = _orthonormal_pair(center)
    k = int(rng.integers(3, 7))
    gaps = rng.uniform(0.5, 1.5, size=k)
    angles = np.cumsum(2 * np.pi * gaps / gaps.sum()) + rng.uniform(0, 2 * np.pi)
    rho = rng.uniform(0.3, 1.2, size=k)
    verts = np.cos(rho)[:, None] * center + np.sin(rho)[:, None] * (
        np.cos(angles)[:, None] * u + np.sin(angles)[:, None] * v
    )
    return geodesic_polygon_path(verts, nodes_per_edge, radius, axis=center)


def random_cap(rng: np.random.Generator, nodes=256, radius=1.0):
    return spherical_cap_path(rng.uniform(0.2, np.pi - 0.2), nodes, radius, random_unit_vector(rng))


def random_fourier_loop(
    rng: np.random.Generator, dim=3, modes=3, center_norm=1.5, amplitude=0.5, nodes=256, min_norm=0.3
):
    """Smooth closed loop around a random centre that keeps away from the
    origin by ``min_norm``."""
    for _ in range(100):
        direction = rng.normal(size=dim)
        center = center_norm * direction / np.linalg.norm(direction)
        scale = amplitude / np.arange(1, modes + 1)[:, None]
        a = rng.normal(size=(modes, dim)) * scale
        b = rng.normal(size=(modes, dim)) * scale
        path = fourier_path(center, a, b, nodes)
        if np.min(np.linalg.norm(path.pieces[0].point(np.linspace(0, 1, 2048)), axis=1)) > min_norm:
            return path
    raise BadPresetParams("could not draw a loop avoiding the origin")
