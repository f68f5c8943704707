"""Parameter-dependent Hamiltonians.

A :class:`HamiltonianFamily` bundles a map ``b -> H(b)`` with the allowed
parameter region and the energy branches that are tracked over it. Three
concrete families ship with the package:

* ``spin_dipole``: a spin ``s`` coupled to a field, ``H(b) = b . S``.
* ``lambda_system``: a four-level system with two degenerate dark states.
* ``planar_spin``: ``H_J(b) = eps S . n_J(b)`` with ``n_J`` winding ``J``
  times as ``b`` goes once around the origin of the plane.

User models can be built directly from callbacks, or from a tabulated grid
of matrices (:func:`make_tabulated`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidJ, InvalidSpin, ShapeMismatch, UnknownBranch, UnknownModel
from .linalg import check_hermitian


@dataclass(frozen=True)
class BranchDescriptor:
    """An energy branch: a label, its degeneracy, and where it sits in the
    ascending spectrum at a reference point (``start`` is the first index)."""

    label: str
    degeneracy: int
    start: int

    @property
    def indices(self) -> range:
        return range(self.start, self.start + self.degeneracy)

    def to_dict(self) -> dict:
        return {"label": self.label, "degeneracy": self.degeneracy, "start": self.start}


@dataclass(frozen=True)
class HamiltonianFamily:
    """A smooth family of Hermitian operators over a parameter space.

    Parameters
    ----------
    name : str
    param_dim, hilbert_dim : int
    evaluate : callable
        ``b -> H(b)``, an ``(n, n)`` Hermitian array.
    in_domain : callable
        Predicate for the allowed parameter space.
    branches : sequence of BranchDescriptor
    evaluate_many : callable, optional
        Vectorized ``(m, d) -> (m, n, n)``; defaults to looping ``evaluate``.
    jacobian : callable, optional
        ``b -> (d, n, n)`` stack of partial derivatives ``dH/db_k``. When
        absent, central differences of ``evaluate`` are used.
    base_topology : {"S2", "S1", None}
        Homotopy type of the allowed space, used for bundle classification.
    generators : tuple of three (n, n) arrays, optional
        Hermitian rotation generators ``G`` with
        ``H(R b) = exp(-i theta n.G) H(b) exp(i theta n.G)`` for the rotation
        ``R`` by ``theta`` about ``n``. Enables the rotate-to-pole sections.
    pole_frames : mapping, optional
        ``(label, +1 | -1) -> (n, K)`` frames at the poles ``(0, 0, +-1)``.
    params, metadata : mapping
        Construction parameters and free-form documentation.
    """

    name: str
    param_dim: int
    hilbert_dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    in_domain: Callable[[np.ndarray], bool]
    branches: tuple[BranchDescriptor, ...]
    evaluate_many: Callable[[np.ndarray], np.ndarray] | None = None
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    base_topology: str | None = None
    generators: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
    pole_frames: Mapping[tuple[str, int], np.ndarray] = field(default_factory=dict)
    params: Mapping[str, object] = field(default_factory=dict)
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __call__(self, b) -> np.ndarray:
        return self.evaluate(self.point(b))

    def point(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.param_dim,):
            raise ShapeMismatch(
                f"{self.name} expects a {self.param_dim}-vector, got shape {b.shape}"
            )
        return b

    def hamiltonians(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.param_dim)
        if self.evaluate_many is not None:
            return self.evaluate_many(points)
        return np.stack([self.evaluate(p) for p in points])

    def derivatives(self, b) -> np.ndarray:
        """``(d, n, n)`` stack of ``dH/db_k`` at ``b``."""
        b = self.point(b)
        if self.jacobian is not None:
            return self.jacobian(b)
        h = 1e-6 * (1.0 + np.linalg.norm(b))
        eye = np.eye(self.param_dim)
        return np.stack(
            [(self.evaluate(b + h * e) - self.evaluate(b - h * e)) / (2 * h) for e in eye]
        )

    def derivatives_many(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.param_dim)
        return np.stack([self.derivatives(p) for p in points])

    def branch(self, label) -> BranchDescriptor:
        """Look up a branch by label; numeric labels (``0.5``, ``Fraction``)
        are matched against spin projections."""
        if isinstance(label, BranchDescriptor):
            return label
        key = _branch_key(label)
        for br in self.branches:
            if br.label == key:
                return br
        known = ", ".join(br.label for br in self.branches)
        raise UnknownBranch(f"model {self.name!r} has no branch {label!r} (known: {known})")

    def describe(self) -> dict:
        return {
            "name": self.name,
            "param_dim": self.param_dim,
            "hilbert_dim": self.hilbert_dim,
            "params": dict(self.params),
            "branches": [br.to_dict() for br in self.branches],
            "base_topology": self.base_topology,
            "metadata": dict(self.metadata),
        }


def _branch_key(label) -> str:
    if isinstance(label, str):
        try:
            return _format_m(Fraction(label))
        except (ValueError, ZeroDivisionError):
            return label
    if isinstance(label, (int, float, Fraction, np.integer, np.floating)):
        return _format_m(Fraction(label).limit_denominator(4))
    return str(label)


def _format_m(m: Fraction) -> str:
    return str(m.numerator) if m.denominator == 1 else f"{m.numerator}/{m.denominator}"


def _check_spin(s) -> Fraction:
    try:
        exact = Fraction(s)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InvalidSpin(f"spin must be a number, got {s!r}") from None
    two_s = exact.limit_denominator(1000) * 2
    if two_s.denominator != 1 or two_s < 1 or abs(float(two_s) - 2 * float(exact)) > 1e-12:
        raise InvalidSpin(f"2s must be a positive integer, got s={s!r}")
    return two_s / 2


def spin_projections(s) -> list[Fraction]:
    """``[s, s-1, ..., -s]``."""
    s = _check_spin(s)
    return [s - k for k in range(int(2 * s) + 1)]


def spin_matrices(s):
    """Spin operators ``(Sx, Sy, Sz)`` in the ``Sz`` eigenbasis ordered
    ``s, s-1, ..., -s``."""
    ms = np.array([float(m) for m in spin_projections(s)])
    sf = float(_check_spin(s))
    dim = ms.size
    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)); row index of m+1 is one above m
    raising = np.zeros((dim, dim))
    for col in range(1, dim):
        m = ms[col]
        raising[col - 1, col] = np.sqrt(sf * (sf + 1) - m * (m + 1))
    sx = 0.5 * (raising + raising.T).astype(complex)
    sy = -0.5j * (raising - raising.T)
    sz = np.diag(ms).astype(complex)
    return sx, sy, sz


def _spin_branches(s) -> tuple[BranchDescriptor, ...]:
    # ascending energies eps * m: the lowest m comes first
    ms = sorted(spin_projections(s))
    return tuple(BranchDescriptor(_format_m(m), 1, i) for i, m in enumerate(ms))


def _nonzero(b) -> bool:
    return bool(np.linalg.norm(b) > 0.0)


def make_spin_dipole(s=Fraction(1, 2)) -> HamiltonianFamily:
    """Spin ``s`` in a field: ``H(b) = b . S`` with the coupling set to 1."""
    s = _check_spin(s)
    gens = spin_matrices(s)
    stack = np.stack(gens)
    ms = spin_projections(s)
    index = {m: i for i, m in enumerate(ms)}  # Sz basis position of projection m
    dim = len(ms)
    poles = {}
    for m in ms:
        label = _format_m(m)
        # at b = +z the branch m is Sz = m; at b = -z it is Sz = -m
        up = np.zeros((dim, 1), complex)
        up[index[m], 0] = 1.0
        down = np.zeros((dim, 1), complex)
        down[index[-m], 0] = 1.0
        poles[(label, +1)] = up
        poles[(label, -1)] = down

    return HamiltonianFamily(
        name="spin_dipole",
        param_dim=3,
        hilbert_dim=dim,
        evaluate=lambda b: np.tensordot(b, stack, axes=1),
        evaluate_many=lambda pts: np.einsum("mk,kij->mij", pts, stack),
        jacobian=lambda b: stack.copy(),
        in_domain=_nonzero,
        branches=_spin_branches(s),
        base_topology="S2",
        generators=gens,
        pole_frames=poles,
        params={"s": float(s)},
        metadata={
            "coupling": "g*hbar = 1",
            "energy": "eps_m(b) = |b| m",
            "allowed_space": "R^3 minus the origin",
        },
    )


# Hilbert basis order of the four-level system
LAMBDA_BASIS = ("0", "1", "a", "e")


def _lambda_couplings() -> np.ndarray:
    terms = np.zeros((3, 4, 4), complex)
    for k in range(3):  # coordinate k couples level k of (0, 1, a) to e
        terms[k, 3, k] = 1.0
        terms[k, k, 3] = 1.0
    return terms


def _lambda_generators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # vector representation (L_k)_ij = -i eps_kij on (|0>, |1>, |a>), acting on
    # the parameter vector (O0, O1, Oa) itself; |e> is rotation invariant
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    gens = []
    for k in range(3):
        g = np.zeros((4, 4), complex)
        for i in range(3):
            for j in range(3):
                g[i, j] = -1j * eps[k, i, j]
        gens.append(g)
    return tuple(gens)


def make_lambda_system() -> HamiltonianFamily:
    """Four-level system ``H = |e>(O0 <0| + O1 <1| + Oa <a|) + h.c.``.

    Parameters are ``(O0, O1, Oa)``. Branches are ``minus`` (-|O|),
    ``dark`` (0, twofold degenerate) and ``plus`` (+|O|).
    """
    terms = _lambda_couplings()
    x_state = np.zeros(4, complex)
    x_state[1] = 1.0
    y_state = np.zeros(4, complex)
    y_state[0] = 1.0
    a_state = np.zeros(4, complex)
    a_state[2] = 1.0
    e_state = np.zeros(4, complex)
    e_state[3] = 1.0
    # dark frame columns ordered (|1>, |0>), i.e. (x, y) under the axis
    # identification O1 -> x, O0 -> y, Oa -> z
    dark = np.column_stack([x_state, y_state])
    poles = {("dark", +1): dark, ("dark", -1): dark.copy()}
    for sign in (+1, -1):
        # at O = sign * z the bright state is sign*|a>; eigenvalues +-1
        bright = sign * a_state
        poles[("plus", sign)] = ((bright + e_state) / np.sqrt(2))[:, None]
        poles[("minus", sign)] = ((bright - e_state) / np.sqrt(2))[:, None]

    return HamiltonianFamily(
        name="lambda_system",
        param_dim=3,
        hilbert_dim=4,
        evaluate=lambda b: np.tensordot(b, terms, axes=1),
        evaluate_many=lambda pts: np.einsum("mk,kij->mij", pts, terms),
        jacobian=lambda b: terms.copy(),
        in_domain=_nonzero,
        branches=(
            BranchDescriptor("minus", 1, 0),
            BranchDescriptor("dark", 2, 1),
            BranchDescriptor("plus", 1, 3),
        ),
        base_topology="S2",
        generators=_lambda_generators(),
        pole_frames=poles,
        params={},
        metadata={
            "basis": list(LAMBDA_BASIS),
            "coords": ["Omega_0", "Omega_1", "Omega_a"],
            "axis_identification": {"Omega_1": "x", "Omega_0": "y", "Omega_a": "z"},
            "energies": {"minus": "-|Omega|", "dark": "0", "plus": "+|Omega|"},
            "allowed_space": "R^3 minus the origin",
        },
    )


def make_planar_spin(s=Fraction(1, 2), J: int = 1, eps: float = 1.0) -> HamiltonianFamily:
    """``H_J(b) = eps (n_x Sx + n_y Sy)`` with ``n = -(cos J phi, sin J phi)``
    and ``phi`` the polar angle of ``b`` in the plane."""
    s = _check_spin(s)
    if J not in (1, 2) or isinstance(J, bool):
        raise InvalidJ(f"J must be 1 or 2, got {J!r}")
    if eps == 0:
        raise ValueError("eps must be nonzero")
    sx, sy, sz = spin_matrices(s)
    eps = float(eps)

    # the direction is undefined at b = 0, where all levels collapse: H(0) = 0
    def evaluate(b):
        if b[0] == 0.0 and b[1] == 0.0:
            return np.zeros_like(sx)
        phi = np.arctan2(b[1], b[0])
        return -eps * (np.cos(J * phi) * sx + np.sin(J * phi) * sy)

    def evaluate_many(pts):
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        alive = np.any(pts != 0.0, axis=1)[:, None, None]
        c = np.cos(J * phi)[:, None, None]
        sn = np.sin(J * phi)[:, None, None]
        return np.where(alive, -eps * (c * sx + sn * sy), 0.0)

    def jacobian(b):
        r2 = b[0] ** 2 + b[1] ** 2
        phi = np.arctan2(b[1], b[0])
        dh_dphi = eps * J * (np.sin(J * phi) * sx - np.cos(J * phi) * sy)
        return np.stack([dh_dphi * (-b[1] / r2), dh_dphi * (b[0] / r2)])

    ms = sorted(spin_projections(s))
    if eps > 0:
        branches = tuple(BranchDescriptor(_format_m(m), 1, i) for i, m in enumerate(ms))
    else:
        branches = tuple(
            BranchDescriptor(_format_m(m), 1, len(ms) - 1 - i) for i, m in enumerate(ms)
        )
    return HamiltonianFamily(
        name="planar_spin",
        param_dim=2,
        hilbert_dim=len(ms),
        evaluate=evaluate,
        evaluate_many=evaluate_many,
        jacobian=jacobian,
        in_domain=_nonzero,
        branches=branches,
        base_topology="S1",
        params={"s": float(s), "J": J, "eps": eps},
        metadata={
            "direction": "n_J(b) = -(cos J phi_b, sin J phi_b), unit length",
            "energy": "eps_m = eps * m, independent of |b|",
            "allowed_space": "R^2 minus the origin",
        },
    )


def make_tabulated(
    axes: Sequence[np.ndarray],
    matrices: np.ndarray,
    branches: Sequence[BranchDescriptor],
    *,
    name: str = "tabulated",
    domain: Callable[[np.ndarray], bool] | None = None,
) -> HamiltonianFamily:
    """Family interpolated entry-wise (multilinear) from a grid of matrices.

    Interpolated matrices are exact only at grid nodes; between nodes a
    declared degeneracy may be split, which the eigenbundle checks will
    report as a :class:`~berrybundle.errors.DegeneracyViolation`.
    """
    from scipy.interpolate import RegularGridInterpolator

    axes = [np.asarray(ax, dtype=float) for ax in axes]
    matrices = np.asarray(matrices, dtype=complex)
    d = len(axes)
    n = matrices.shape[-1]
    if matrices.shape != tuple(ax.size for ax in axes) + (n, n):
        raise ShapeMismatch(
            f"matrix grid shape {matrices.shape} does not match axes "
            f"{tuple(ax.size for ax in axes)} + ({n}, {n})"
        )
    check_hermitian(matrices.reshape(-1, n, n))
    warnings.warn(
        "tabulated model: entry-wise linear interpolation may violate the declared "
        "degeneracy away from grid nodes",
        stacklevel=2,
    )
    interp = RegularGridInterpolator(tuple(axes), matrices, method="linear")
    lo = np.array([ax[0] for ax in axes])
    hi = np.array([ax[-1] for ax in axes])

    def inside(b):
        b = np.asarray(b, dtype=float)
        ok = bool(np.all(b >= lo) and np.all(b <= hi))
        return ok and (domain(b) if domain is not None else True)

    def evaluate_many(pts):
        h = interp(pts)
        return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))

    return HamiltonianFamily(
        name=name,
        param_dim=d,
        hilbert_dim=n,
        evaluate=lambda b: evaluate_many(np.asarray(b, float)[None, :])[0],
        evaluate_many=evaluate_many,
        in_domain=inside,
        branches=tuple(branches),
        params={"grid": [ax.size for ax in axes]},
        metadata={"interpolation": "entry-wise multilinear"},
    )


ZOO = {
    "spin_dipole": make_spin_dipole,
    "lambda_system": make_lambda_system,
    "planar_spin": make_planar_spin,
}

ZOO_DOCS = {
    "spin_dipole": {
        "params": {"s": "spin, positive half-integer (default 1/2)"},
        "coords": ["b_x", "b_y", "b_z"],
        "branches": "m = -s..s, nondegenerate, energy |b| m",
    },
    "lambda_system": {
        "params": {},
        "coords": ["Omega_0", "Omega_1", "Omega_a"],
        "branches": "minus (K=1, -|Omega|), dark (K=2, 0), plus (K=1, +|Omega|)",
    },
    "planar_spin": {
        "params": {"s": "spin (default 1/2)", "J": "1 or 2 (default 1)", "eps": "coupling (default 1)"},
        "coords": ["b_x", "b_y"],
        "branches": "m = -s..s, nondegenerate, energy eps m",
    },
}


def make_model(name: str, **params) -> HamiltonianFamily:
    try:
        factory = ZOO[name]
    except KeyError:
        raise UnknownModel(f"unknown model {name!r}; zoo has {sorted(ZOO)}") from None
    return factory(**params)
