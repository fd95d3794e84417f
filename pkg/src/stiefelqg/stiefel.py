"""Core Stiefel manifold St(n, p) data model.

Points are n x p frames with orthonormal columns.  Tangent vectors are
kept in compact (A, B) coordinates against a stored frame Q orthogonal
to the base point,

    Delta = U A + Q B,   A in so(p),  B p x p,  U^T Q = 0,

which keeps every curve computation inside a 2p-dimensional frame and
never materialises an n x (n-p) completion.  This representation needs
p <= n - p.

The module also carries the canonical metric, the Riemannian
exponential, seeded random generators for experiments, and the text
file format for frames shared with the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import (
    BaseMismatch,
    DimensionError,
    NotOrthonormal,
    ParseError,
    ValueOutOfRange,
)
from .matfunc import matrix_exp, orthonormal_completion, skew_part

__all__ = [
    "StiefelPoint",
    "TangentVector",
    "make_point",
    "project_tangent",
    "canonical_inner",
    "canonical_inner_ambient",
    "canonical_norm",
    "canonical_norm_ambient",
    "stiefel_exp",
    "random_point",
    "random_tangent",
    "gaussian_matrix",
    "rng_from_seed",
    "read_matrix_file",
    "write_matrix_file",
]


def _readonly(M: np.ndarray) -> np.ndarray:
    out = np.array(M, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StiefelPoint:
    """A point on St(n, p): an n x p matrix with orthonormal columns."""

    U: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=float)
        if U.ndim != 2:
            raise DimensionError(f"a Stiefel point must be a 2-D array, got {U.shape}")
        n, p = U.shape
        if p < 1 or n < p:
            raise DimensionError(f"need n >= p >= 1, got shape {U.shape}")
        if not np.all(np.isfinite(U)):
            raise NotOrthonormal("frame has non-finite entries")
        residual = np.linalg.norm(U.T @ U - np.eye(p))
        tol = tolerances.active().point_orthonormality
        if residual > tol:
            raise NotOrthonormal(
                f"columns not orthonormal: residual {residual:.3e} > {tol:.1e}"
            )
        object.__setattr__(self, "U", _readonly(U))

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def p(self) -> int:
        return self.U.shape[1]


def make_point(M: np.ndarray) -> StiefelPoint:
    """Validate an n x p array as a Stiefel point."""
    return StiefelPoint(np.asarray(M, dtype=float))


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector Delta = U A + Q B at ``base`` in compact coordinates.

    A is p x p skew-symmetric, B is p x p, and Q is an n x p frame with
    base.U^T Q = 0.  Requires p <= n - p so that such a frame exists.
    """

    base: StiefelPoint
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        p, n = self.base.p, self.base.n
        if p > n - p:
            raise DimensionError(
                f"compact tangent coordinates need p <= n - p, got St({n},{p})"
            )
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        if A.shape != (p, p) or B.shape != (p, p) or Q.shape != (n, p):
            raise DimensionError(
                f"tangent blocks have shapes {A.shape}, {B.shape}, {Q.shape}; "
                f"expected ({p},{p}), ({p},{p}), ({n},{p})"
            )
        tol = tolerances.active()
        if np.linalg.norm(A + A.T) > tol.skewness * max(1.0, np.linalg.norm(A)):
            raise NotOrthonormal("tangent A-block is not skew-symmetric")
        if np.linalg.norm(Q.T @ Q - np.eye(p)) > tol.frame_orthogonality:
            raise NotOrthonormal("tangent frame Q is not orthonormal")
        if np.linalg.norm(self.base.U.T @ Q) > tol.frame_orthogonality:
            raise NotOrthonormal("tangent frame Q is not orthogonal to the base")
        object.__setattr__(self, "A", _readonly(A))
        object.__setattr__(self, "B", _readonly(B))
        object.__setattr__(self, "Q", _readonly(Q))

    def ambient(self) -> np.ndarray:
        """The n x p matrix U A + Q B."""
        return self.base.U @ self.A + self.Q @ self.B

    def scaled(self, factor: float) -> "TangentVector":
        return TangentVector(self.base, factor * self.A, factor * self.B, self.Q)


def _normal_frame_svd(
    U: np.ndarray, K: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compact SVD of a normal component K = (I - U U^T) X with frame repair.

    Returns (Q, S, V) with K = Q diag(S) V^T.  Left singular vectors of
    near-zero singular values are arbitrary and need not be orthogonal to
    U, so they are replaced by deterministic completion vectors; columns
    carrying genuine signal are re-projected against U and each other,
    which changes them only at roundoff level.  If the orthogonal
    complement of U cannot host p columns (p > n - p), the spare raw SVD
    columns are kept, orthonormalised against everything accepted so far.
    """
    n, p = U.shape
    u, s, vt = np.linalg.svd(K, full_matrices=False)
    cut = 1e-9 * max(1.0, s[0] if s.size else 0.0)
    cols: list[np.ndarray] = []
    for j in range(p):
        if s[j] <= cut:
            break
        q = u[:, j] - U @ (U.T @ u[:, j])
        for c in cols:
            q = q - c * (c @ q)
        cols.append(q / np.linalg.norm(q))
    rank = len(cols)
    if rank < p:
        # candidate pool: completion vectors first (orthogonal to U by
        # construction), discarded SVD columns as a last resort
        anchored = np.hstack([U] + [c[:, None] for c in cols]) if cols else U
        pool = []
        if anchored.shape[1] < n:
            pool.extend(orthonormal_completion(anchored).T)
        pool.extend(u[:, rank:].T)
        for cand in pool:
            if len(cols) == p:
                break
            q = cand.copy()
            for c in cols:
                q = q - c * (c @ q)
            norm = np.linalg.norm(q)
            if norm > 1e-6:
                cols.append(q / norm)
        if len(cols) < p:
            raise DimensionError("could not complete an orthonormal frame")
    return np.stack(cols, axis=1), s, vt.T


def project_tangent(U: StiefelPoint, M: np.ndarray) -> TangentVector:
    """Orthogonal projection of an ambient n x p matrix onto T_U St(n, p).

    Delta = M - U sym(U^T M); inputs already tangent are fixed points.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != U.U.shape:
        raise DimensionError(f"shape mismatch: point {U.U.shape}, matrix {M.shape}")
    UtM = U.U.T @ M
    A = skew_part(UtM)
    K = M - U.U @ UtM
    Q, s, V = _normal_frame_svd(U.U, K)
    B = s[:, None] * V.T
    return TangentVector(U, A, B, Q)


def _check_base(U: StiefelPoint, v: TangentVector) -> None:
    if v.base.U.shape != U.U.shape or not np.allclose(
        v.base.U, U.U, rtol=0.0, atol=1e-10
    ):
        raise BaseMismatch("tangent vector is anchored at a different point")


def canonical_inner(U: StiefelPoint, v1: TangentVector, v2: TangentVector) -> float:
    """Canonical metric g_U(v1, v2) = tr(v1^T (I - 1/2 U U^T) v2).

    In compact coordinates with a shared frame this is
    1/2 tr(A1^T A2) + tr(B1^T B2); distinct frames contribute through
    their Gram matrix Q1^T Q2.
    """
    _check_base(U, v1)
    _check_base(U, v2)
    a_part = 0.5 * float(np.sum(v1.A * v2.A))
    if v1.Q is v2.Q:
        b_part = float(np.sum(v1.B * v2.B))
    else:
        b_part = float(np.sum(v1.B * ((v1.Q.T @ v2.Q) @ v2.B)))
    return a_part + b_part


def canonical_norm(v: TangentVector) -> float:
    return math.sqrt(max(0.0, canonical_inner(v.base, v, v)))


def canonical_inner_ambient(U: StiefelPoint, M1: np.ndarray, M2: np.ndarray) -> float:
    """tr(M1^T (I - 1/2 U U^T) M2) for ambient n x p matrices."""
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    return float(np.sum(M1 * M2) - 0.5 * np.sum((U.U.T @ M1) * (U.U.T @ M2)))


def canonical_norm_ambient(U: StiefelPoint, M: np.ndarray) -> float:
    return math.sqrt(max(0.0, canonical_inner_ambient(U, M, M)))


def stiefel_exp(U: StiefelPoint, delta: TangentVector, t: float = 1.0) -> StiefelPoint:
    """Riemannian exponential Exp_U(t Delta) under the canonical metric.

    Evaluates the 2p x 2p form
    [U Q] expm(t [[A, -B^T], [B, 0]]) [I_p; 0] without forming any n x n
    matrix.
    """
    _check_base(U, delta)
    if t == 0.0:
        return U
    p = U.p
    A, B = delta.A, delta.B
    G = np.block([[A, -B.T], [B, np.zeros((p, p))]])
    E = matrix_exp(t * G)[:, :p]
    return StiefelPoint(U.U @ E[:p] + delta.Q @ E[p:])


# --------------------------------------------------------------------------
# seeded random generators
#
# PCG64 supplies the uniform stream; normals come from Box-Muller on
# fixed-order draws (one block of u1, one block of u2 per matrix), so a
# given seed replays the same matrices on every run of a given numpy
# build.


def rng_from_seed(seed: int) -> np.random.Generator:
    if seed < 0:
        raise ValueOutOfRange("seeds are unsigned 64-bit integers")
    return np.random.Generator(np.random.PCG64(seed))


def gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Standard-normal matrix via Box-Muller, filled row-major."""
    count = rows * cols
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]: keeps the log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    return z[:count].reshape(rows, cols)


def random_point(n: int, p: int, seed: int) -> StiefelPoint:
    """Seeded random frame: QR of a Gaussian with the R-diagonal forced positive."""
    if n < p:
        raise DimensionError(f"need n >= p, got ({n}, {p})")
    G = gaussian_matrix(n, p, rng_from_seed(seed))
    Q, R = np.linalg.qr(G)
    sign = np.sign(np.diag(R))
    sign[sign == 0.0] = 1.0
    return StiefelPoint(Q * sign)


def random_tangent(U: StiefelPoint, norm: float, seed: int) -> TangentVector:
    """Seeded random tangent vector with prescribed canonical norm.

    The A-block is the skew part of a Gaussian; the normal component is a
    full-width Gaussian in the span of the orthonormal completion of U,
    orthonormalised into (Q, B) with B the sign-fixed triangular factor.
    Both blocks are then rescaled together so the canonical norm is
    exactly ``norm``.
    """
    if norm < 0.0:
        raise ValueOutOfRange("tangent norm must be non-negative")
    n, p = U.n, U.p
    if p > n - p:
        raise DimensionError(f"compact tangent coordinates need p <= n - p, got St({n},{p})")
    rng = rng_from_seed(seed)
    A = skew_part(gaussian_matrix(p, p, rng))
    G = gaussian_matrix(n - p, p, rng)
    U_perp = orthonormal_completion(U.U)
    Qg, Rg = np.linalg.qr(G)
    sign = np.sign(np.diag(Rg))
    sign[sign == 0.0] = 1.0
    Q = (U_perp @ Qg) * sign
    B = sign[:, None] * Rg
    scale = math.sqrt(0.5 * float(np.sum(A * A)) + float(np.sum(B * B)))
    if norm == 0.0 or scale == 0.0:
        return TangentVector(U, np.zeros((p, p)), np.zeros((p, p)), Q)
    factor = norm / scale
    return TangentVector(U, factor * A, factor * B, Q)


# --------------------------------------------------------------------------
# matrix file format (shared with the CLI)
#
# UTF-8 text; first line "n p"; then n lines of p comma-separated floats
# printed with 17 significant digits (lossless float64 round trip).


def write_matrix_file(path, M: np.ndarray) -> None:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"matrix files hold 2-D arrays, got shape {M.shape}")
    n, p = M.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{n} {p}\n")
        for row in M:
            fh.write(",".join(format(x, ".17g") for x in row))
            fh.write("\n")


def read_matrix_file(path) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(f"{path}: first line must be 'n p', got {lines[0]!r}")
    try:
        n, p = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"{path}: non-integer dimensions in header") from exc
    if n < 1 or p < 1:
        raise ParseError(f"{path}: dimensions must be positive, got {n} x {p}")
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != n:
        raise ParseError(f"{path}: expected {n} data rows, found {len(body)}")
    out = np.empty((n, p))
    for i, line in enumerate(body):
        fields = line.split(",")
        if len(fields) != p:
            raise ParseError(f"{path}: row {i + 1} has {len(fields)} fields, expected {p}")
        try:
            out[i] = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(f"{path}: row {i + 1} has a non-numeric field") from exc
    if not np.all(np.isfinite(out)):
        raise ParseError(f"{path}: non-finite value in matrix")
    return out
