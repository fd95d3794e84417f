import numpy as np

from stiefelqg import skew_part
from stiefelqg.stiefel import gaussian_matrix, rng_from_seed


def random_skew(dim: int, seed: int, spectral_norm: float | None = None) -> np.ndarray:
    """Seeded skew-symmetric matrix, optionally rescaled to a given 2-norm."""
    X = skew_part(gaussian_matrix(dim, dim, rng_from_seed(seed)))
    if spectral_norm is not None:
        current = np.linalg.norm(X, 2)
        if current > 0:
            X = X * (spectral_norm / current)
    return X


def fro(a, b) -> float:
    """Frobenius distance between frames / arrays (unwraps points)."""
    a = np.asarray(getattr(a, "U", a), dtype=float)
    b = np.asarray(getattr(b, "U", b), dtype=float)
    return float(np.linalg.norm(a - b))
