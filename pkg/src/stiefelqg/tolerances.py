"""Central tolerance record.

Library validation and the test suite read the same numbers from here, so
an assertion in a test and the guard that enforces it cannot drift apart.
Setting the environment variable ``QG_TOL`` to a float overrides the two
frame-validation entries (``point_orthonormality``, ``frame_orthogonality``),
which is occasionally needed when frames come from lossy external files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

ENV_OVERRIDE = "QG_TOL"


@dataclass(frozen=True)
class Tolerances:
    # validation of constructed objects
    point_orthonormality: float = 1e-10  # ||U^T U - I||_F on point construction
    frame_orthogonality: float = 1e-10   # ||U^T Q||_F and ||Q^T Q - I||_F on tangent frames
    skewness: float = 1e-12              # ||X + X^T||_F relative to ||X||_F
    orthogonality: float = 1e-12         # ||Q^T Q - I||_F on special-orthogonal inputs
    determinant: float = 1e-10           # |det Q - 1| on special-orthogonal inputs
    # numerical guards
    minus_one_gap: float = 1e-8          # angular distance from -1 tolerated by the principal log
    arcsin_slack: float = 1e-8           # overshoot above 1 tolerated in singular values
    subspace_gap: float = 1e-10          # smallest singular value of Utilde^T U accepted


DEFAULT = Tolerances()


def active() -> Tolerances:
    """Tolerances in effect, honouring the QG_TOL override if set."""
    raw = os.environ.get(ENV_OVERRIDE)
    if not raw:
        return DEFAULT
    try:
        value = float(raw)
    except ValueError:
        return DEFAULT
    return replace(DEFAULT, point_orthonormality=value, frame_orthogonality=value)
