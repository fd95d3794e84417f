"""Quasi-geodesics on the Stiefel manifold.

Two curve families connect given frames U and Utilde:

* economy-size curves
      gamma(t) = (U V cos(t Sigma) + Q sin(t Sigma)) V^T expm(t A),
  built from a p x p principal logarithm plus compact SVDs.  They have
  constant speed and covariant acceleration of constant norm
  ||(Sigma V^T) A||_F;

* short curves
      rho(t) = [U Q] expm(t [[A, -B^T], [B, C]]) [I_p; 0],
  whose 2p x 2p generator comes from a principal logarithm after a
  correction block c is chosen to nearly cancel C.  The single
  fixed-point step c = -(1/6) b a b^T from the block
  Baker-Campbell-Hausdorff expansion leaves ||C|| of fifth order in the
  data, so these curves hug the true geodesic far closer than the
  economy ones.  They require p <= n - p.

Both connectors share the alignment prefix: an orthogonal Procrustes
rotation R of the target frame followed by principal angles between the
subspaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import (
    DimensionError,
    NotOrthonormal,
    OrientationMismatch,
    SubspaceAngleTooLarge,
    ValueOutOfRange,
)
from .matfunc import arcsin_clamped, matrix_exp, matrix_log_so, skew_part
from .stiefel import (
    StiefelPoint,
    TangentVector,
    _normal_frame_svd,
    project_tangent,
)

__all__ = [
    "EconQuasiGeodesic",
    "ShortQuasiGeodesic",
    "BchFactors",
    "retraction_rs",
    "econ_qg_from_tangent",
    "econ_qg_connect",
    "econ_qg_eval",
    "econ_qg_velocity",
    "econ_qg_length",
    "econ_qg_covaccel_norm",
    "bch_c1",
    "bch_c_iterate",
    "bch_factors",
    "c_residual",
    "short_qg_connect",
    "short_qg_eval",
    "short_qg_velocity",
    "short_qg_length",
    "short_qg_covaccel_norm",
]

_ACTIVE_ANGLE = 1e-12  # sigma entries below this are padding, their frame column is arbitrary


@dataclass(frozen=True)
class EconQuasiGeodesic:
    """Closed-form data (U, V, Q, sigma, A) of an economy-size curve.

    ``sigma`` holds the arc rates per frame column; curves built by the
    endpoint solver carry principal angles in [0, pi/2].  Frame columns
    whose sigma vanishes never enter an evaluation, so only the active
    columns are validated against the base.
    """

    U: StiefelPoint
    V: np.ndarray
    Q: np.ndarray
    sigma: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        n, p = self.U.n, self.U.p
        V = np.asarray(self.V, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        A = np.asarray(self.A, dtype=float)
        if V.shape != (p, p) or Q.shape != (n, p) or sigma.shape != (p,) or A.shape != (p, p):
            raise DimensionError("curve factor shapes are inconsistent with the base point")
        tol = tolerances.active()
        if np.linalg.norm(V.T @ V - np.eye(p)) > tol.frame_orthogonality:
            raise NotOrthonormal("V factor is not orthogonal")
        if np.linalg.norm(Q.T @ Q - np.eye(p)) > tol.frame_orthogonality:
            raise NotOrthonormal("Q factor is not orthonormal")
        active = sigma > _ACTIVE_ANGLE
        if np.any(active):
            if np.linalg.norm(self.U.U.T @ Q[:, active]) > tol.frame_orthogonality:
                raise NotOrthonormal("active Q columns are not orthogonal to the base")
        if np.linalg.norm(A + A.T) > tol.skewness * max(1.0, np.linalg.norm(A)):
            raise NotOrthonormal("A factor is not skew-symmetric")
        for name, value in (("V", V), ("Q", Q), ("sigma", sigma), ("A", A)):
            frozen = np.array(value)
            frozen.setflags(write=False)
            object.__setattr__(self, name, frozen)

    @property
    def p(self) -> int:
        return self.U.p


@dataclass(frozen=True)
class ShortQuasiGeodesic:
    """Frame Q and 2p x 2p skew generator G of a short curve."""

    U: StiefelPoint
    Q: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        n, p = self.U.n, self.U.p
        Q = np.asarray(self.Q, dtype=float)
        G = np.asarray(self.G, dtype=float)
        if Q.shape != (n, p) or G.shape != (2 * p, 2 * p):
            raise DimensionError("curve factor shapes are inconsistent with the base point")
        tol = tolerances.active()
        if np.linalg.norm(Q.T @ Q - np.eye(p)) > tol.frame_orthogonality:
            raise NotOrthonormal("Q factor is not orthonormal")
        if np.linalg.norm(self.U.U.T @ Q) > tol.frame_orthogonality:
            raise NotOrthonormal("Q factor is not orthogonal to the base")
        if np.linalg.norm(G + G.T) > tol.skewness * max(1.0, np.linalg.norm(G)):
            raise NotOrthonormal("generator is not skew-symmetric")
        for name, value in (("Q", Q), ("G", G)):
            frozen = np.array(value)
            frozen.setflags(write=False)
            object.__setattr__(self, name, frozen)

    @property
    def p(self) -> int:
        return self.U.p

    @property
    def A(self) -> np.ndarray:
        p = self.p
        return self.G[:p, :p]

    @property
    def B(self) -> np.ndarray:
        p = self.p
        return self.G[p:, :p]

    @property
    def C(self) -> np.ndarray:
        p = self.p
        return self.G[p:, p:]


@dataclass(frozen=True)
class BchFactors:
    """Alignment data (a, b, c) of a frame pair: a = logm(R^T), b = Sigma V^T,
    and the correction block c feeding the short-curve generator."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        p = a.shape[0]
        if a.shape != (p, p) or b.shape != (p, p) or c.shape != (p, p):
            raise DimensionError("BCH factors must be square matrices of equal size")
        if np.linalg.norm(b, 2) > 0.5 * math.pi + 1e-9:
            raise ValueOutOfRange("||b||_2 exceeds pi/2, not a principal-angle block")


# --------------------------------------------------------------------------
# economy-size curves


def _econ_eval_factors(curve: EconQuasiGeodesic, t: float):
    cos_t = np.cos(t * curve.sigma)
    sin_t = np.sin(t * curve.sigma)
    rot = matrix_exp(t * curve.A)
    return cos_t, sin_t, rot


def econ_qg_eval(curve: EconQuasiGeodesic, t: float) -> StiefelPoint:
    """gamma(t) = (U V cos(t sigma) + Q sin(t sigma)) V^T expm(t A)."""
    cos_t, sin_t, rot = _econ_eval_factors(curve, t)
    M = (curve.U.U @ curve.V) * cos_t + curve.Q * sin_t
    return StiefelPoint(M @ (curve.V.T @ rot))


def econ_qg_from_tangent(U: StiefelPoint, delta: TangentVector) -> EconQuasiGeodesic:
    """The curve t -> RS_U(t Delta) generated by a tangent vector.

    The normal component Q_delta B is refactored through the SVD of B so
    the stored sigma are its singular values (arc rates, not bounded by
    pi/2 for large tangents).
    """
    W, S, Vt = np.linalg.svd(delta.B)
    return EconQuasiGeodesic(U, Vt.T, delta.Q @ W, S, np.array(delta.A))


def retraction_rs(U: StiefelPoint, delta: TangentVector) -> StiefelPoint:
    """The retraction RS_U(Delta) = (U V cos(Sigma) + Q sin(Sigma)) V^T expm(A)."""
    if not delta.A.any() and not delta.B.any():
        return U  # exact at the zero vector
    return econ_qg_eval(econ_qg_from_tangent(U, delta), 1.0)


def _endpoint_prefix(U: StiefelPoint, Ut: StiefelPoint):
    """Shared alignment steps of both endpoint solvers.

    Procrustes rotation R of the target basis, principal logarithm
    A = logm(R^T), and the compact SVD (Q, sigma, V) of the normal
    component of the aligned target.
    """
    if (U.n, U.p) != (Ut.n, Ut.p):
        raise DimensionError(
            f"endpoints live on different manifolds: St({U.n},{U.p}) vs St({Ut.n},{Ut.p})"
        )
    tol = tolerances.active()
    u, s, vt = np.linalg.svd(Ut.U.T @ U.U)
    if s[-1] <= tol.subspace_gap:
        raise SubspaceAngleTooLarge(
            f"smallest singular value of Utilde^T U is {s[-1]:.3e}: "
            "a principal angle reaches pi/2"
        )
    R = u @ vt
    if np.linalg.det(R) < 0.0:
        raise OrientationMismatch("derived rotation has determinant -1")
    A = matrix_log_so(R.T)
    aligned = Ut.U @ R
    K = aligned - U.U @ (U.U.T @ aligned)
    Q, s_norm, V = _normal_frame_svd(U.U, K)
    sigma = arcsin_clamped(s_norm)
    return R, A, Q, sigma, V


def econ_qg_connect(U: StiefelPoint, Ut: StiefelPoint) -> EconQuasiGeodesic:
    """Economy-size quasi-geodesic with gamma(0) = U and gamma(1) = Ut."""
    _, A, Q, sigma, V = _endpoint_prefix(U, Ut)
    return EconQuasiGeodesic(U, V, Q, sigma, A)


def econ_qg_velocity(curve: EconQuasiGeodesic, t: float) -> TangentVector:
    """Velocity gamma'(t) = gamma(t) A + Q(t) (sigma V^T expm(t A)).

    Q(t) = -U V sin(t sigma) + Q cos(t sigma) stays orthonormal and
    orthogonal to gamma(t), so the result is tangent with constant
    canonical norm.
    """
    cos_t, sin_t, rot = _econ_eval_factors(curve, t)
    UV = curve.U.U @ curve.V
    point = StiefelPoint((UV * cos_t + curve.Q * sin_t) @ (curve.V.T @ rot))
    frame = -UV * sin_t + curve.Q * cos_t
    B_t = (curve.sigma[:, None] * curve.V.T) @ rot
    return _tangent_checked(point, np.array(curve.A), B_t, frame)


def _tangent_checked(
    base: StiefelPoint, A: np.ndarray, B: np.ndarray, Q: np.ndarray
) -> TangentVector:
    # fall back to a full projection if rounding broke the skew structure
    if np.linalg.norm(A + A.T) > 1e-12 * max(1.0, np.linalg.norm(A)):
        return project_tangent(base, base.U @ A + Q @ B)
    return TangentVector(base, A, B, Q)


def econ_qg_length(curve: EconQuasiGeodesic) -> float:
    """L(gamma) = sqrt(1/2 tr(A^T A) + tr(sigma^2)); speed is constant."""
    return math.sqrt(
        0.5 * float(np.sum(curve.A * curve.A)) + float(np.sum(curve.sigma**2))
    )


def econ_qg_covaccel_norm(curve: EconQuasiGeodesic) -> float:
    """||(sigma V^T) A||_F: zero exactly when the curve is a geodesic."""
    return float(np.linalg.norm((curve.sigma[:, None] * curve.V.T) @ curve.A))


# --------------------------------------------------------------------------
# Baker-Campbell-Hausdorff correction


def bch_c1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Single fixed-point step c1 = -(1/6) b a b^T (skew since a is)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return skew_part(-(1.0 / 6.0) * (b @ a @ b.T))


def bch_c_iterate(a: np.ndarray, b: np.ndarray, iterations: int = 1) -> np.ndarray:
    """Fixed-point iterations on the order-4 block expansion, from c0 = 0.

    The C-block of logm(expm([[0,-b^T],[b,0]]) expm(diag(a, c))) expanded
    to combined order four reads

        C(c) = c + 1/12 (2 b a b^T - {b b^T, c})
                 - 1/24 (2 [c, b a b^T] - [c, {b b^T, c}]),

    and solving C(c) = 0 for the leading c gives the update below.  One
    iteration reproduces c1; more refine the cancellation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if iterations < 0:
        raise ValueOutOfRange("iterations must be non-negative")
    p = a.shape[0]
    bbt = b @ b.T
    bab = b @ a @ b.T
    c = np.zeros((p, p))
    for _ in range(iterations):
        anti = bbt @ c + c @ bbt
        c = -(1.0 / 12.0) * (2.0 * bab - anti) + (1.0 / 24.0) * (
            2.0 * (c @ bab - bab @ c) - (c @ anti - anti @ c)
        )
        c = skew_part(c)
    return c


def c_residual(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Exact C-block of logm(expm([[0,-b^T],[b,0]]) expm(diag(a, c)))."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    p = a.shape[0]
    zeros = np.zeros((p, p))
    x = np.block([[zeros, -b.T], [b, zeros]])
    y = np.block([[a, zeros], [zeros, c]])
    G = matrix_log_so(matrix_exp(x) @ matrix_exp(y))
    return G[p:, p:]


def bch_factors(U: StiefelPoint, Ut: StiefelPoint, iterations: int = 1) -> BchFactors:
    """Alignment factors (a, b, c) of a frame pair."""
    R, a, Q, sigma, V = _endpoint_prefix(U, Ut)
    b = sigma[:, None] * V.T
    return BchFactors(a, b, bch_c_iterate(a, b, iterations))


# --------------------------------------------------------------------------
# short curves


def short_qg_connect(
    U: StiefelPoint, Ut: StiefelPoint, bch_iterations: int = 1
) -> ShortQuasiGeodesic:
    """Short economy-size quasi-geodesic with rho(0) = U and rho(1) = Ut.

    The 2p x 2p orthogonal matrix whose logarithm supplies the generator
    is assembled in closed form,

        [[V cos(Sigma) V^T R^T,  -V sin(Sigma) expm(c)],
         [  sin(Sigma) V^T R^T,    cos(Sigma) expm(c)]],

    using expm([[0, -Sigma], [Sigma, 0]]) = [[cos Sigma, -sin Sigma],
    [sin Sigma, cos Sigma]] for diagonal Sigma, which saves one 2p x 2p
    exponential.
    """
    n, p = U.n, U.p
    if p > n - p:
        raise DimensionError(f"short curves need p <= n - p, got St({n},{p})")
    R, a, Q, sigma, V = _endpoint_prefix(U, Ut)
    b = sigma[:, None] * V.T
    c = bch_c_iterate(a, b, bch_iterations)
    cos_s = np.cos(sigma)
    sin_s = np.sin(sigma)
    VtRt = V.T @ R.T
    exp_c = matrix_exp(c)
    M = np.block(
        [
            [V @ (cos_s[:, None] * VtRt), -(V * sin_s) @ exp_c],
            [sin_s[:, None] * VtRt, cos_s[:, None] * exp_c],
        ]
    )
    G = matrix_log_so(M)
    return ShortQuasiGeodesic(U, Q, G)


def short_qg_eval(curve: ShortQuasiGeodesic, t: float) -> StiefelPoint:
    """rho(t) = [U Q] expm(t G) [I_p; 0]."""
    p = curve.p
    E = matrix_exp(t * curve.G)[:, :p]
    return StiefelPoint(curve.U.U @ E[:p] + curve.Q @ E[p:])


def short_qg_velocity(curve: ShortQuasiGeodesic, t: float) -> TangentVector:
    """rho'(t) = [U Q] expm(t G) [A; B] = rho(t) A + rho_perp(t) B."""
    p = curve.p
    E = matrix_exp(t * curve.G)
    W_point = curve.U.U @ E[:p, :p] + curve.Q @ E[p:, :p]
    W_perp = curve.U.U @ E[:p, p:] + curve.Q @ E[p:, p:]
    point = StiefelPoint(W_point)
    return _tangent_checked(point, np.array(curve.A), np.array(curve.B), W_perp)


def short_qg_length(curve: ShortQuasiGeodesic) -> float:
    """L(rho) = sqrt(1/2 tr(A^T A) + tr(B^T B)); speed is constant."""
    A, B = curve.A, curve.B
    return math.sqrt(0.5 * float(np.sum(A * A)) + float(np.sum(B * B)))


def short_qg_covaccel_norm(curve: ShortQuasiGeodesic) -> float:
    """||C B||_F: zero exactly when rho is the Stiefel geodesic."""
    return float(np.linalg.norm(curve.C @ curve.B))
