"""Convex hulls of centred ellipses.

Decide whether an ellipse lies in the convex hull of others, compute
elliptic-polytope norms, and build invariant elliptic polytopes for
Lyapunov functions and joint spectral radii.
"""
from ._accel import backend
from .applications import (InvariantPolytopeCert, JsrResult, MatrixFamily, SmpCandidate,
                           SpectralError, appendix_family, jsr_invariant_polytope,
                           lyapunov_single)
from .cpm import cpm_decide, cpm_value
from .cutting import cut_decide, ee_norm, pe_norm_socp
from .engine import decide, mixed_decide, reduce
from .exact import RootFindingError, decide_ee_2d, decide_ee_3d, exact_separator
from .geometry import (DimensionError, Ellipse, EllipticPolytope, NormBracket, ellipse,
                       polytope, separation_margin, support)
from .hardness import build_perturbed_lift, count_local_maxima, qp_to_ee_reduction
from .projection import assemble_wlin, build_lifted_polygon, choose_level, pe_norm_lp, proj_decide
from .verdict import INSIDE, OUTSIDE, QINSIDE, EeVerdict

__version__ = "0.1.0"

__all__ = [
    "Ellipse", "EllipticPolytope", "NormBracket", "EeVerdict", "MatrixFamily", "SmpCandidate",
    "InvariantPolytopeCert", "JsrResult", "ellipse", "polytope", "support", "separation_margin",
    "decide", "mixed_decide", "reduce", "decide_ee_2d", "decide_ee_3d", "exact_separator",
    "cpm_value", "cpm_decide", "cut_decide", "ee_norm", "pe_norm_socp", "pe_norm_lp",
    "proj_decide", "choose_level", "build_lifted_polygon", "assemble_wlin", "lyapunov_single",
    "jsr_invariant_polytope", "appendix_family", "build_perturbed_lift", "count_local_maxima",
    "qp_to_ee_reduction", "backend", "INSIDE", "OUTSIDE", "QINSIDE", "DimensionError",
    "RootFindingError", "SpectralError",
]
