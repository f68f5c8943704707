"""Dense complex linear algebra for small Hermitian problems.

The eigensolver is a cyclic complex Jacobi method. It accepts a single
matrix or a stack of matrices with shape ``(..., n, n)``; rotations are
applied to the whole stack at once, which keeps long parameter paths cheap
even though each matrix is only a few rows wide.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    NoConvergence,
    NonAntiHermitian,
    NonHermitianInput,
    ShapeMismatch,
    SingularInput,
)

HERMITIAN_RTOL = 1e-12
JACOBI_RTOL = 1e-14
JACOBI_MAX_SWEEPS = 100


def max_norm(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def unitarity_residual(u: np.ndarray) -> float:
    """``max |U^dagger U - I|``."""
    u = np.asarray(u)
    return max_norm(dagger(u) @ u - np.eye(u.shape[-1]))


def check_hermitian(h, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate and return the exactly Hermitian part of ``h``."""
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ShapeMismatch(f"expected square matrices, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NonHermitianInput("matrix has non-finite entries")
    scale = np.max(np.abs(h), axis=(-2, -1))
    asym = np.max(np.abs(h - dagger(h)), axis=(-2, -1))
    if np.any(asym > rtol * scale):
        raise NonHermitianInput(
            f"Hermiticity residual {float(np.max(asym)):.3e} exceeds "
            f"{rtol:g} * max-norm"
        )
    return 0.5 * (h + dagger(h))


def _off_norm(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    off = a.copy()
    idx = np.arange(n)
    off[..., idx, idx] = 0.0
    return np.sqrt(np.sum(np.abs(off) ** 2, axis=(-2, -1)))


def jacobi_eigh(h, *, rtol: float = JACOBI_RTOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic complex Jacobi diagonalization of Hermitian matrices.

    Parameters
    ----------
    h : array_like, shape (..., n, n)
        Hermitian input (already validated).
    rtol : float
        Sweeps stop once the off-diagonal Frobenius norm of every matrix is
        below ``rtol * max|h|``.
    max_sweeps : int
        Iteration cap; :class:`NoConvergence` is raised when it is exhausted.

    Returns
    -------
    values : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    vectors : ndarray, shape (..., n, n)
        Orthonormal eigenvectors as columns.
    """
    a = np.array(h, dtype=complex, copy=True)
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape((-1, n, n))
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = np.max(np.abs(a), axis=(-2, -1))
    threshold = rtol * np.where(scale > 0, scale, 1.0)
    tiny = np.finfo(float).tiny

    for _ in range(max_sweeps):
        if np.all(_off_norm(a) <= threshold):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                active = mag > tiny
                if not np.any(active):
                    continue
                safe = np.where(active, mag, 1.0)
                phase = np.where(active, apq / safe, 1.0)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                tau = (aqq - app) / (2.0 * safe)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                se = (s * phase)[:, None]  # s e^{i phi}
                sec = np.conj(se)  # s e^{-i phi}
                cc = c[:, None]

                col_p = a[:, :, p].copy()
                col_q = a[:, :, q]
                a[:, :, p] = cc * col_p - sec * col_q
                a[:, :, q] = se * col_p + cc * col_q
                row_p = a[:, p, :].copy()
                row_q = a[:, q, :]
                a[:, p, :] = cc * row_p - se * row_q
                a[:, q, :] = sec * row_p + cc * row_q
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0

                vp = v[:, :, p].copy()
                vq = v[:, :, q]
                v[:, :, p] = cc * vp - sec * vq
                v[:, :, q] = se * vp + cc * vq
    else:
        if not np.all(_off_norm(a) <= threshold):
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    values = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    order = np.argsort(values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return values.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n))


def eig_hermitian(h, *, rtol: float = JACOBI_RTOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a Hermitian matrix or stack of matrices.

    Validates Hermiticity (relative to the max-norm of each input) and
    delegates to :func:`jacobi_eigh`.
    """
    return jacobi_eigh(check_hermitian(h), rtol=rtol, max_sweeps=max_sweeps)


def unitarize(m, *, tol: float = 1e-12) -> np.ndarray:
    """Polar factor ``M (M^dagger M)^{-1/2}``.

    Works for square matrices and for tall ``n x K`` matrices (where the
    result is the closest isometry). Raises :class:`SingularInput` when the
    smallest singular value is ``<= tol``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ShapeMismatch(f"unitarize needs a square or tall matrix, got {m.shape}")
    w, sigma, vh = np.linalg.svd(m, full_matrices=False)
    if sigma[-1] <= tol:
        raise SingularInput(
            f"smallest singular value {sigma[-1]:.3e} <= {tol:g}; "
            "eigenspace overlap collapsed (path step too coarse?)"
        )
    return w @ vh


def exp_antihermitian(a, *, tol: float = 1e-10) -> np.ndarray:
    """Matrix exponential of an anti-Hermitian generator."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got {a.shape}")
    if max_norm(a + dagger(a)) > tol:
        raise NonAntiHermitian(f"||A + A^dagger||_max = {max_norm(a + dagger(a)):.3e}")
    values, vectors = jacobi_eigh(0.5j * (a - dagger(a)))
    return (vectors * np.exp(-1j * values)) @ dagger(vectors)


def overlap(frame_a, frame_b) -> np.ndarray:
    """Overlap matrix with entry ``(j, i) = <b_j | a_i>``.

    Accepts raw ``n x K`` arrays or objects exposing ``.matrix``.
    """
    a = np.asarray(getattr(frame_a, "matrix", frame_a), dtype=complex)
    b = np.asarray(getattr(frame_b, "matrix", frame_b), dtype=complex)
    if a.ndim != 2 or a.shape != b.shape:
        raise ShapeMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    return dagger(b) @ a


def logm_unitary(u, *, guard: float = 1e-6) -> np.ndarray:
    """Principal logarithm of a unitary matrix, returned anti-Hermitian.

    Uses the complex Schur form (diagonal for normal matrices). Raises
    :class:`~berrybundle.errors.LogBranch` when an eigenvalue sits within
    ``guard`` of -1, where the principal branch is discontinuous.
    """
    from scipy.linalg import schur

    from .errors import LogBranch

    u = np.asarray(u, dtype=complex)
    t, z = schur(u, output="complex")
    lam = np.diag(t)
    if np.any(np.abs(lam + 1.0) < guard):
        raise LogBranch("holonomy has an eigenvalue at -1; principal log undefined")
    log = (z * (1j * np.angle(lam))) @ dagger(z)
    return 0.5 * (log - dagger(log))


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``k x k`` unitary (QR of a complex Gaussian matrix)."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (z + dagger(z))
