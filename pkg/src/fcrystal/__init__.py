"""Newton, Hodge and Hodge-Newton computations for crystals of O_B-modules."""

from .errors import CrystalError, PrecisionError, VerificationError
from .hodgenewton import HNDecomposition, breakpoints, hn_decompose, hn_eligible, verify_decomposition
from .obcrystal import OBCrystal, TypeDF, build_elementary, build_mu_ordinary, direct_sum, mu_ordinary_polygon
from .polygon import LatticePoint, Polygon, dual_point, from_slopes, pointwise_sum, preceq
from .wittring import WittRing, make_ring

__all__ = [
    "CrystalError", "PrecisionError", "VerificationError",
    "HNDecomposition", "breakpoints", "hn_decompose", "hn_eligible", "verify_decomposition",
    "OBCrystal", "TypeDF", "build_elementary", "build_mu_ordinary", "direct_sum", "mu_ordinary_polygon",
    "LatticePoint", "Polygon", "dual_point", "from_slopes", "pointwise_sum", "preceq",
    "WittRing", "make_ring",
]
