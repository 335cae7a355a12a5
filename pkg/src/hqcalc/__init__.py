"""Numerical engine for quaternionic sectorial functional calculi.

Finite operators with commuting components, their pencil and resolvent
kernels, sector-boundary quadrature, closed polynomial/rational forms, and
the regularized extension to polynomially growing functions, plus a
verification harness that checks the algebraic identities tying them all
together.
"""

from ._kernels import backend_name
from .calculus import (
    CalculusResult,
    calc_sweep,
    d_calc,
    d_poly_calc,
    hinf_d,
    hinf_s,
    poly_calc,
    rational_d,
    rational_s,
    s_calc,
)
from .contour import (
    ContourPlan,
    PencilInverseKernel,
    SResolventKernel,
    contour_integrate,
    plan_contour,
)
from .functions import (
    DecayCertificate,
    IntrinsicRational,
    StemFunction,
    add_stems,
    eval_slice,
    make_rational,
    make_regularizer,
    monomial,
    pointwise_cf_derivative,
    product,
)
from .operators import (
    CommutingOperator,
    QMatrix,
    SectorBounds,
    SpectrumReport,
    build_diagonal,
    build_poly_family,
    pencil_inverse,
    pencil_solve,
    s_resolvent,
    s_spectrum,
    sector_certificate,
)
from .quaternions import (
    ImaginaryUnit,
    Quaternion,
    Sector,
    Sphere,
    decompose,
    in_sector,
    qinv,
    qmul,
)

__version__ = "0.1.0"

__all__ = [
    "CalculusResult",
    "CommutingOperator",
    "ContourPlan",
    "DecayCertificate",
    "ImaginaryUnit",
    "IntrinsicRational",
    "PencilInverseKernel",
    "QMatrix",
    "Quaternion",
    "SResolventKernel",
    "Sector",
    "SectorBounds",
    "SpectrumReport",
    "Sphere",
    "StemFunction",
    "add_stems",
    "backend_name",
    "build_diagonal",
    "build_poly_family",
    "calc_sweep",
    "contour_integrate",
    "d_calc",
    "d_poly_calc",
    "decompose",
    "eval_slice",
    "hinf_d",
    "hinf_s",
    "in_sector",
    "make_rational",
    "make_regularizer",
    "monomial",
    "pencil_inverse",
    "pencil_solve",
    "plan_contour",
    "pointwise_cf_derivative",
    "poly_calc",
    "product",
    "qinv",
    "qmul",
    "rational_d",
    "rational_s",
    "s_calc",
    "s_resolvent",
    "s_spectrum",
    "sector_certificate",
]
