"""
Linear symplectic algebra on R^{2n} with interleaved coordinates
(x1, y1, ..., xn, yn).

The complex structure ``J`` is multiplication by i, i.e. block diagonal
with blocks [[0, -1], [1, 0]].  A matrix ``M`` is symplectic when
``M.T @ J @ M == J``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import DimensionError, DomainError

TOL_SYM = 1e-10
TOL_SYMP = 1e-8
TOL_REC = 1e-9
TOL_PD = 1e-12
TOL_DET = 1e-8
TOL_GAP = 1e-6


def half_dim(d):
    """Return n for an even dimension d = 2n, raising on odd d."""
    d = int(d)
    if d <= 0 or d % 2:
        raise DimensionError(f"dimension must be even and positive, got {d}")
    return d // 2


def complex_structure(n):
    """Return the 2n x 2n matrix of multiplication by i."""
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[2 * j + 1, 2 * j] = 1.0
        J[2 * j, 2 * j + 1] = -1.0
    return J


def omega(u, v):
    """Standard symplectic form ``<Ju, v>``."""
    u = np.asarray(u, dtype=float)
    J = complex_structure(half_dim(u.shape[0]))
    return float(np.dot(J @ u, v))


def _check_square_even(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    half_dim(M.shape[0])
    return M


def symplectic_defect(M):
    """Frobenius norm of ``M^T J M - J``."""
    M = _check_square_even(M)
    J = complex_structure(M.shape[0] // 2)
    return float(np.linalg.norm(M.T @ J @ M - J))


def is_symplectic(M, tol=TOL_SYMP):
    return symplectic_defect(M) <= tol


def rotate(theta, n):
    """The action of e^{i theta} on C^n = R^{2n}."""
    c, s = np.cos(theta), np.sin(theta)
    return np.kron(np.eye(n), np.array([[c, -s], [s, c]]))


def symplectic_inverse(S):
    """Inverse of a symplectic matrix, ``-J S^T J``."""
    J = complex_structure(S.shape[0] // 2)
    return -J @ S.T @ J


def commutes_with_j(M, tol=0.0):
    J = complex_structure(M.shape[0] // 2)
    return float(np.linalg.norm(M @ J - J @ M)) <= tol


@dataclass(frozen=True)
class WilliamsonForm:
    """``A = S.T @ D @ S`` with S symplectic and D = diag(d1, d1, ..., dn, dn).

    ``spectrum`` holds the symplectic eigenvalues d1 >= ... >= dn and
    ``near_degenerate`` is set when two of them are closer than the gap
    tolerance.
    """

    S: np.ndarray
    D: np.ndarray
    spectrum: np.ndarray
    near_degenerate: bool = False

    def reconstruct(self):
        return self.S.T @ self.D @ self.S


@dataclass(frozen=True)
class WDSForm:
    """``T = W @ D @ S`` with W orthogonal, D complex linear, S symplectic."""

    W: np.ndarray
    D: np.ndarray
    S: np.ndarray

    def reconstruct(self):
        return self.W @ self.D @ self.S


def _first_nonzero(v, tol=1e-12):
    idx = np.flatnonzero(np.abs(v) > tol)
    return int(idx[0]) if idx.size else v.size


def williamson(A, gap_tol=TOL_GAP):
    """Williamson normal form of a positive definite symmetric matrix.

    Parameters
    ----------
    A : (2n, 2n) array_like
        Symmetric positive definite matrix.
    gap_tol : float
        Relative gap below which two symplectic eigenvalues are reported as
        near-degenerate.

    Returns
    -------
    WilliamsonForm

    Notes
    -----
    With ``R = A^{-1/2}``, the matrix ``M = R J R`` is antisymmetric and its
    real Schur form is block diagonal with blocks ``mu_j J_2``.  If ``O`` is
    the orthogonal Schur basis (columns ordered so each block reads
    ``+mu_j J_2``) then ``S = Delta^{-1} O^T A^{1/2}`` with
    ``Delta = diag(mu_j^{-1/2})`` is symplectic and ``A = S^T D S`` with
    ``d_j = 1 / mu_j``.
    """
    A = _check_square_even(A)
    n = A.shape[0] // 2
    if np.linalg.norm(A - A.T) > TOL_SYM * max(1.0, np.linalg.norm(A)):
        raise DomainError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    evals, evecs = np.linalg.eigh(A)
    if evals[0] <= TOL_PD:
        raise DomainError(
            f"matrix is not positive definite (smallest eigenvalue {evals[0]:.3g})")
    sqrt_A = (evecs * np.sqrt(evals)) @ evecs.T
    isqrt_A = (evecs / np.sqrt(evals)) @ evecs.T
    J = complex_structure(n)
    M = isqrt_A @ J @ isqrt_A
    M = 0.5 * (M - M.T)

    T, O = sla.schur(M, output="real")
    mus = np.empty(n)
    for j in range(n):
        p, q = 2 * j, 2 * j + 1
        b = T[q, p]
        if b < 0:
            # block reads -|b| J_2; swapping the basis pair flips it
            O[:, [p, q]] = O[:, [q, p]]
            b = -b
        mus[j] = b

    # descending d = 1/mu; ties broken by first nonzero index of the pair
    keys = []
    for j in range(n):
        col = O[:, 2 * j]
        if col[_first_nonzero(col)] < 0:
            O[:, [2 * j, 2 * j + 1]] *= -1.0
        keys.append(_first_nonzero(O[:, 2 * j]))
    d = 1.0 / mus
    scale = float(np.max(d))
    rounded = np.round(d / (scale * gap_tol))
    order = sorted(range(n), key=lambda j: (-rounded[j], keys[j], -d[j]))
    cols = np.concatenate([[2 * j, 2 * j + 1] for j in order])
    O = O[:, cols]
    mus = mus[order]
    d = d[order]

    delta_inv = np.repeat(np.sqrt(mus), 2)
    S = delta_inv[:, None] * (O.T @ sqrt_A)
    gaps = -np.diff(d)
    near = bool(n > 1 and np.any(gaps < gap_tol * scale))
    return WilliamsonForm(S=S, D=np.diag(np.repeat(d, 2)), spectrum=d,
                          near_degenerate=near)


def symplectic_spectrum(A):
    """Symplectic eigenvalues of A, sorted descending."""
    return williamson(A).spectrum


def wds_decompose(T, det_tol=TOL_DET):
    """Factor a volume preserving matrix as ``T = W D S``.

    Williamson of ``T^T T = S^T D2 S`` gives ``D = D2^{1/2}`` and
    ``W = T S^{-1} D^{-1}``.
    """
    T = _check_square_even(T)
    det = np.linalg.det(T)
    cond = np.linalg.cond(T)
    if not np.isfinite(cond) or cond > 1e14:
        raise DomainError("matrix is singular")
    if abs(abs(det) - 1.0) > det_tol:
        raise DomainError(f"matrix is not volume preserving: det = {det:.12g}")
    wf = williamson(T.T @ T)
    dvals = np.sqrt(np.diag(wf.D))
    D = np.diag(dvals)
    W = (T @ symplectic_inverse(wf.S)) / dvals[None, :]
    return WDSForm(W=W, D=D, S=wf.S)


def ellipsoid_capacity(E):
    """Linear symplectic capacity of a centred ellipsoid ``<A x, x> <= 1``.

    Equals ``pi / d_max`` with ``d_max`` the largest symplectic eigenvalue of
    ``A``; ``pi r^2`` for the ball of radius r.
    """
    if np.any(np.abs(E.center) > 0):
        raise DomainError("ellipsoid must be centred at the origin")
    return float(np.pi / williamson(E.shape).spectrum[0])
