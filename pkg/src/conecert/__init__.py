"""Certification of area-minimizing cones by Lawlor's curvature criterion."""

__version__ = "0.1.0"

from .certify import Certificate, Verdict, certify, min_copies
from .links import Link, SpectrumFamily, catalog_enumerate, classify, make_focal, make_isoparametric_hypersurface, make_sphere
from .product import det_envelope, minimal_product
from .vanishing import BoundEvaluator, Outcome, VanishingResult, theta_c, theta_det, theta_F, vanishing_angle, vanishing_angle_gform

__all__ = [
    "BoundEvaluator",
    "Certificate",
    "Link",
    "Outcome",
    "SpectrumFamily",
    "VanishingResult",
    "Verdict",
    "catalog_enumerate",
    "certify",
    "classify",
    "det_envelope",
    "make_focal",
    "make_isoparametric_hypersurface",
    "make_sphere",
    "min_copies",
    "minimal_product",
    "theta_F",
    "theta_c",
    "theta_det",
    "vanishing_angle",
    "vanishing_angle_gform",
]
