"""Independent verification machinery.

Nothing here is needed to build or evaluate a quasi-geodesic; these are
the cross-checks: full n x n curve representations, a finite-difference
covariant derivative built from the ambient formula

    D_t c'(t) = c''(t) + c'(t) c'(t)^T c(t)
               + c(t) ((c(t)^T c'(t))^2 + c'(t)^T c'(t)),

and a shooting-based Riemannian logarithm used as the distance reference
in experiments.  The shooting update is the plain projected residual
step Delta <- Delta + step * P_U(Utilde - Exp_U(Delta)), damped when the
residual grows; it is deliberately simple and auditable rather than
fast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NoConvergence, ValueOutOfRange
from .matfunc import matrix_exp, orthonormal_completion
from .quasigeo import short_qg_connect
from .stiefel import (
    StiefelPoint,
    TangentVector,
    canonical_norm,
    project_tangent,
    stiefel_exp,
)

__all__ = [
    "ShootingConfig",
    "full_frame",
    "tangent_completion_form",
    "full_qg_eval",
    "full_geodesic_eval",
    "covariant_accel_numeric",
    "stiefel_log_shooting",
    "riemannian_dist",
]


@dataclass(frozen=True)
class ShootingConfig:
    """Budget of the shooting iteration.

    ``tol`` bounds the Frobenius endpoint residual, ``step`` is the
    damping factor in (0, 1], halved whenever a step would increase the
    residual.
    """

    tol: float = 1e-10
    max_iter: int = 200
    step: float = 1.0

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueOutOfRange("tol must be positive")
        if self.max_iter < 1:
            raise ValueOutOfRange("max_iter must be at least 1")
        if not 0.0 < self.step <= 1.0:
            raise ValueOutOfRange("step must lie in (0, 1]")


def full_frame(U: StiefelPoint) -> np.ndarray:
    """The n x n orthogonal matrix [U U_perp]."""
    return np.hstack([U.U, orthonormal_completion(U.U)])


def tangent_completion_form(delta: TangentVector) -> tuple[np.ndarray, np.ndarray]:
    """Convert compact coordinates to completion form: Delta = U A + U_perp B_full.

    Uses the same deterministic completion as :func:`full_qg_eval`, so the
    pair (A, B_full) plugs straight into the full-size evaluators.
    """
    U_perp = orthonormal_completion(delta.base.U)
    return np.array(delta.A), U_perp.T @ (delta.Q @ delta.B)


def full_qg_eval(
    U: StiefelPoint, A: np.ndarray, B_full: np.ndarray, t: float
) -> StiefelPoint:
    """Economy-curve value through the n x n representation.

    Evaluates [U U_perp] expm(t [[0, -B_full^T], [B_full, 0]]) [expm(tA); 0].
    Exists purely to cross-validate the 2p-frame implementation.
    """
    n, p = U.n, U.p
    if p >= n:
        raise DimensionError("full representation needs p < n")
    A = np.asarray(A, dtype=float)
    B_full = np.asarray(B_full, dtype=float)
    if B_full.shape != (n - p, p):
        raise DimensionError(f"B_full must be (n-p) x p, got {B_full.shape}")
    W = full_frame(U)
    M = np.zeros((n, n))
    M[:p, p:] = -B_full.T
    M[p:, :p] = B_full
    E = matrix_exp(t * M)[:, :p]
    return StiefelPoint(W @ (E @ matrix_exp(t * A)))


def full_geodesic_eval(
    U: StiefelPoint, A: np.ndarray, B_full: np.ndarray, t: float
) -> StiefelPoint:
    """Geodesic value through the n x n representation
    [U U_perp] expm(t [[A, -B_full^T], [B_full, 0]]) [I_p; 0]."""
    n, p = U.n, U.p
    if p >= n:
        raise DimensionError("full representation needs p < n")
    A = np.asarray(A, dtype=float)
    B_full = np.asarray(B_full, dtype=float)
    if B_full.shape != (n - p, p):
        raise DimensionError(f"B_full must be (n-p) x p, got {B_full.shape}")
    W = full_frame(U)
    M = np.zeros((n, n))
    M[:p, :p] = A
    M[:p, p:] = -B_full.T
    M[p:, :p] = B_full
    return StiefelPoint(W @ matrix_exp(t * M)[:, :p])


def _as_matrix(x) -> np.ndarray:
    return np.asarray(getattr(x, "U", x), dtype=float)


def covariant_accel_numeric(curve, t: float, h: float = 1e-5, richardson: bool = False) -> np.ndarray:
    """Finite-difference covariant acceleration of a curve of frames.

    ``curve`` maps a float to a StiefelPoint (or raw n x p array); first
    and second derivatives come from central differences with step h,
    then enter the ambient covariant-derivative formula.  With
    ``richardson`` the h and h/2 results are extrapolated.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueOutOfRange("h must lie in [1e-6, 1e-3]")

    def estimate(step: float) -> np.ndarray:
        plus = _as_matrix(curve(t + step))
        here = _as_matrix(curve(t))
        minus = _as_matrix(curve(t - step))
        vel = (plus - minus) / (2.0 * step)
        acc = (plus - 2.0 * here + minus) / step**2
        G = here.T @ vel
        return acc + vel @ (vel.T @ here) + here @ (G @ G + vel.T @ vel)

    if richardson:
        return (4.0 * estimate(0.5 * h) - estimate(h)) / 3.0
    return estimate(h)


def stiefel_log_shooting(
    U: StiefelPoint,
    Ut: StiefelPoint,
    init: TangentVector | None = None,
    config: ShootingConfig | None = None,
) -> TangentVector:
    """Tangent vector Delta with Exp_U(Delta) = Ut, by damped shooting.

    Initialised from the short quasi-geodesic velocity at 0 unless an
    explicit ``init`` is given.  Converges for moderate distances
    (empirically up to roughly 0.9 pi with the default initialisation);
    beyond the basin it raises NoConvergence with the final residual.
    """
    cfg = config or ShootingConfig()
    if init is None:
        rho = short_qg_connect(U, Ut)
        delta = TangentVector(U, rho.A, rho.B, rho.Q)
    else:
        delta = init
    step = cfg.step
    target = Ut.U

    def residual(d: TangentVector) -> tuple[np.ndarray, float]:
        gap = target - stiefel_exp(U, d, 1.0).U
        return gap, float(np.linalg.norm(gap))

    gap, res = residual(delta)
    for _ in range(cfg.max_iter):
        if res <= cfg.tol:
            return delta
        candidate = project_tangent(U, delta.ambient() + step * gap)
        gap_c, res_c = residual(candidate)
        if res_c < res:
            delta, gap, res = candidate, gap_c, res_c
        else:
            step *= 0.5
            if step < 1e-16:
                break
    if res <= cfg.tol:
        return delta
    raise NoConvergence(
        f"shooting stalled at residual {res:.3e} (tol {cfg.tol:.1e}, "
        f"max_iter {cfg.max_iter})"
    )


def riemannian_dist(
    U: StiefelPoint, Ut: StiefelPoint, config: ShootingConfig | None = None
) -> float:
    """Canonical norm of the shooting logarithm from U to Ut."""
    return canonical_norm(stiefel_log_shooting(U, Ut, config=config))
