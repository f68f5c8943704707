"""Parameter paths.

A path is a chain of smooth pieces, each parameterized on ``s in [0, 1]``
with an analytic point and velocity. The integrators place their steps
piece by piece, so corners of piecewise-smooth loops always fall on step
boundaries. ``nodes`` is a fixed sampling used by the discrete routines
(tracking, geometry, export).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ShapeMismatch

CLOSE_TOL = 1e-12


@dataclass(frozen=True)
class PathPiece:
    """A smooth segment. Both callables map an ``(m,)`` array of ``s`` values
    to an ``(m, d)`` array."""

    point: Callable[[np.ndarray], np.ndarray]
    velocity: Callable[[np.ndarray], np.ndarray]


def line_piece(a, b) -> PathPiece:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    d = b - a
    return PathPiece(
        point=lambda s: a + np.asarray(s, float)[:, None] * d,
        velocity=lambda s: np.broadcast_to(d, (np.size(s), d.size)).copy(),
    )


def split_steps(total: int, pieces: int) -> list[int]:
    """Distribute ``total`` steps over ``pieces`` as evenly as possible
    (at least one per piece)."""
    total = max(int(total), pieces)
    base, extra = divmod(total, pieces)
    return [base + (1 if j < extra else 0) for j in range(pieces)]


@dataclass(frozen=True)
class ParameterPath:
    nodes: np.ndarray
    closed: bool
    pieces: tuple[PathPiece, ...]
    axis: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[0] < 2:
            raise ShapeMismatch(f"a path needs at least 2 nodes, got shape {nodes.shape}")
        object.__setattr__(self, "nodes", nodes)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def start(self) -> np.ndarray:
        return self.nodes[0]

    def grid(self, steps: int) -> np.ndarray:
        """The ``steps + 1`` step boundaries (steps are split over pieces)."""
        counts = split_steps(steps, len(self.pieces))
        pts = []
        for j, (piece, n) in enumerate(zip(self.pieces, counts)):
            s = np.linspace(0.0, 1.0, n + 1)
            pts.append(piece.point(s if j == len(self.pieces) - 1 else s[:-1]))
        points = np.concatenate(pts)
        if self.closed:
            points[-1] = points[0]
        return points

    def stages(self, steps: int):
        """Runge-Kutta stage data.

        Returns ``(points, velocities, h)``: ``points`` interleaves step
        starts and midpoints (length ``2 * steps + 1``); ``velocities`` has
        shape ``(steps, 3, d)`` for the start, midpoint and end of every step,
        each taken from the step's own piece; ``h`` holds the step widths in
        piece-local units.
        """
        counts = split_steps(steps, len(self.pieces))
        pts, vels, widths = [], [], []
        for j, (piece, n) in enumerate(zip(self.pieces, counts)):
            s = np.linspace(0.0, 1.0, 2 * n + 1)
            pts.append(piece.point(s if j == len(self.pieces) - 1 else s[:-1]))
            v = piece.velocity(s)
            vels.append(np.stack([v[0:-1:2], v[1::2], v[2::2]], axis=1))
            widths.extend([1.0 / n] * n)
        points = np.concatenate(pts)
        if self.closed:
            points[-1] = points[0]
        return points, np.concatenate(vels), np.array(widths)

    def reversed(self) -> "ParameterPath":
        pieces = tuple(
            PathPiece(
                point=(lambda p: lambda s: p.point(1.0 - np.asarray(s, float)))(p),
                velocity=(lambda p: lambda s: -p.velocity(1.0 - np.asarray(s, float)))(p),
            )
            for p in reversed(self.pieces)
        )
        return ParameterPath(self.nodes[::-1].copy(), self.closed, pieces, self.axis, dict(self.meta))

    def then(self, other: "ParameterPath") -> "ParameterPath":
        """Concatenation: traverse ``self`` and then ``other``."""
        if np.max(np.abs(self.nodes[-1] - other.nodes[0])) > 1e-9:
            raise ShapeMismatch("paths do not join: end of first != start of second")
        nodes = np.vstack([self.nodes, other.nodes[1:]])
        closed = bool(np.max(np.abs(nodes[0] - nodes[-1])) <= CLOSE_TOL)
        return ParameterPath(nodes, closed, self.pieces + other.pieces, self.axis)


def from_nodes(nodes, closed: bool | None = None) -> ParameterPath:
    """Piecewise-linear path through explicit nodes."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or nodes.shape[0] < 2:
        raise ShapeMismatch(f"a path needs at least 2 nodes, got shape {nodes.shape}")
    ends_meet = bool(np.max(np.abs(nodes[0] - nodes[-1])) <= CLOSE_TOL)
    if closed and not ends_meet:
        nodes = np.vstack([nodes, nodes[:1]])
        ends_meet = True
    pieces = tuple(line_piece(a, b) for a, b in zip(nodes[:-1], nodes[1:]))
    return ParameterPath(nodes, ends_meet, pieces)
