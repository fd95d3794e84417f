"""Dense matrix-function kernels used by the geometry layer.

All functions are pure maps on real, finite ndarrays.  The matrix
exponential is SciPy's scaling-and-squaring Pade implementation; the
principal logarithm of special-orthogonal matrices goes through the real
Schur form so the result is skew-symmetric by construction and failures
(eigenvalue at -1, wrong orientation) surface as typed errors instead of
complex output.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from . import tolerances
from .errors import (
    DimensionError,
    EigenvalueAtMinusOne,
    NotOrthonormal,
    OrientationMismatch,
    ValueOutOfRange,
)

__all__ = [
    "matrix_exp",
    "matrix_log_so",
    "compact_svd",
    "orthonormal_completion",
    "arcsin_clamped",
    "skew_part",
    "check_skew",
    "check_special_orthogonal",
]


def skew_part(M: np.ndarray) -> np.ndarray:
    """Skew-symmetric part (M - M^T)/2 with an exactly zero diagonal."""
    X = 0.5 * (np.asarray(M, dtype=float) - np.asarray(M, dtype=float).T)
    np.fill_diagonal(X, 0.0)
    return X


def check_skew(X: np.ndarray, name: str = "X") -> np.ndarray:
    """Validate that X is square and skew-symmetric (relative residual)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {X.shape}")
    tol = tolerances.active().skewness
    residual = np.linalg.norm(X + X.T)
    if residual > tol * max(1.0, np.linalg.norm(X)):
        raise NotOrthonormal(f"{name} is not skew-symmetric: residual {residual:.3e}")
    return X


def check_special_orthogonal(Q: np.ndarray, name: str = "Q") -> np.ndarray:
    """Validate Q^T Q = I and det Q = +1; raise typed errors otherwise."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {Q.shape}")
    tol = tolerances.active()
    residual = np.linalg.norm(Q.T @ Q - np.eye(Q.shape[0]))
    if residual > tol.orthogonality * max(1.0, float(Q.shape[0])):
        raise NotOrthonormal(f"{name} is not orthogonal: residual {residual:.3e}")
    det = np.linalg.det(Q)
    if det < 0.0:
        raise OrientationMismatch(f"det({name}) = {det:.6f} < 0, not in SO(n)")
    if abs(det - 1.0) > tol.determinant * max(1.0, float(Q.shape[0])):
        raise NotOrthonormal(f"det({name}) = {det:.12f} deviates from 1")
    return Q


def matrix_exp(X: np.ndarray) -> np.ndarray:
    """Matrix exponential expm(X) of a square real matrix.

    Scaling and squaring with a degree-13 Pade approximant (SciPy).  For
    skew-symmetric input the result is special orthogonal to roundoff.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"matrix_exp needs a square matrix, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueOutOfRange("matrix_exp: input has non-finite entries")
    return scipy.linalg.expm(X)


def matrix_log_so(Q: np.ndarray) -> np.ndarray:
    """Principal logarithm of a special-orthogonal matrix.

    Reduces Q to real Schur form; an orthogonal matrix comes out block
    diagonal there, with 1x1 blocks +-1 and 2x2 rotation blocks.  Each
    rotation block contributes its angle, so the output is exactly
    skew-symmetric with spectral radius below pi.

    Raises EigenvalueAtMinusOne when a rotation angle is within the
    configured gap of pi (or an unpaired -1 appears), and
    OrientationMismatch when det Q < 0.
    """
    Q = check_special_orthogonal(Q)
    tol = tolerances.active()
    T, Z = scipy.linalg.schur(Q, output="real")
    n = Q.shape[0]
    L = np.zeros((n, n))
    i = 0
    while i < n:
        # LAPACK leaves the subdiagonal exactly zero outside 2x2 blocks
        if i + 1 < n and T[i + 1, i] != 0.0:
            c = 0.5 * (T[i, i] + T[i + 1, i + 1])
            s = 0.5 * (T[i + 1, i] - T[i, i + 1])
            theta = math.atan2(s, c)
            if math.pi - abs(theta) < tol.minus_one_gap:
                raise EigenvalueAtMinusOne(
                    f"rotation angle {theta:.6f} too close to pi for a principal log"
                )
            L[i, i + 1] = -theta
            L[i + 1, i] = theta
            i += 2
        else:
            if T[i, i] < 0.0:
                raise EigenvalueAtMinusOne("real eigenvalue -1: principal log undefined")
            i += 1
    return skew_part(Z @ L @ Z.T)


def compact_svd(M: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Economy SVD of an n x p matrix (n >= p): M = Q diag(S) V^T.

    Returns (Q, S, V) with Q n x p and V p x p orthonormal, S descending.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"compact_svd needs a 2-D array, got {M.shape}")
    n, p = M.shape
    if n < p:
        raise DimensionError(f"compact_svd needs n >= p, got {M.shape}")
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    return u, s, vt.T


def orthonormal_completion(U: np.ndarray) -> np.ndarray:
    """An n x (n-p) frame U_perp with [U U_perp] orthogonal.

    Any valid completion is acceptable; this one comes from the full
    Householder QR of U and is deterministic for fixed input bits.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise DimensionError(f"completion needs a 2-D array, got {U.shape}")
    n, p = U.shape
    if n <= p:
        raise DimensionError(f"no orthonormal completion exists for shape {U.shape}")
    full = np.linalg.qr(U, mode="complete")[0]
    return full[:, p:]


def arcsin_clamped(S: np.ndarray) -> np.ndarray:
    """Elementwise arcsin with values clamped into [0, 1] first.

    Values above 1 + arcsin_slack signal a broken SVD upstream and raise
    ValueOutOfRange rather than being silently clamped.
    """
    S = np.asarray(S, dtype=float)
    slack = tolerances.active().arcsin_slack
    if np.any(S > 1.0 + slack):
        raise ValueOutOfRange(f"singular value {S.max():.12f} exceeds 1 beyond tolerance")
    if np.any(S < 0.0):
        raise ValueOutOfRange("arcsin_clamped expects non-negative input")
    return np.arcsin(np.minimum(S, 1.0))
