"""Quadratic twists of double covers that violate the Hasse principle, with checkable certificates."""

__version__ = "0.1.0"

from .elliptic import EllipticCurveQ, EPoint, INFINITY, mw_evidence, torsion_subgroup  # noqa: E402
from .localfields import (  # noqa: E402
    Place,
    PlaneQuartic,
    everywhere_local,
    is_square_local,
    local_solvable_bielliptic,
    local_solvable_plane,
    weil_threshold,
)
from .ntheory import SquareClass, class_number, factor, kronecker, squarefree_part  # noqa: E402
from .tahp import (  # noqa: E402
    BiellipticModel,
    HyperellipticBaseModel,
    Verdict,
    certify,
    check_hypotheses,
    construct_bielliptic,
    construct_hyperelliptic_base,
    twist_candidates,
)

__all__ = [
    "BiellipticModel",
    "EPoint",
    "EllipticCurveQ",
    "HyperellipticBaseModel",
    "INFINITY",
    "Place",
    "PlaneQuartic",
    "SquareClass",
    "Verdict",
    "certify",
    "check_hypotheses",
    "class_number",
    "construct_bielliptic",
    "construct_hyperelliptic_base",
    "everywhere_local",
    "factor",
    "is_square_local",
    "kronecker",
    "local_solvable_bielliptic",
    "local_solvable_plane",
    "mw_evidence",
    "squarefree_part",
    "torsion_subgroup",
    "twist_candidates",
    "weil_threshold",
]
