"""The four calculi: resolvent-kernel, pencil-kernel, polynomial/rational
closed forms, and the two-step regularized extension for growing functions.

``calc_sweep`` evaluates the resolvent and pencil integrals off one shared
set of pencil solves.  Beyond speed this makes the algebraic couplings
between f(T), f(conj T) and the pencil-kernel value exact in floating
arithmetic, which the product-rule and regularized-form checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .contour import (
    PENCIL_PREFACTOR,
    RESOLVENT_PREFACTOR,
    DEFAULT_MAX_NODES,
    ContourPlan,
    PencilInverseKernel,
    SResolventKernel,
    contour_integrate,
    plan_contour,
    run_adaptive,
)
from .errors import (
    HypothesisViolation,
    NonFinite,
    NotSectorial,
    ProductNotDecaying,
    RegularizerSingular,
    ZeroInSector,
)
from .functions import (
    IntrinsicRational,
    StemFunction,
    make_regularizer,
    product,
)
from .operators import (
    CommutingOperator,
    QMatrix,
    s_spectrum,
    sector_certificate,
)
from .quaternions import DEFAULT_UNIT, ImaginaryUnit, Quaternion

# numerical injectivity: smallest singular value relative to the norm
INJECTIVITY_TOL = 1e-10


@dataclass
class CalculusResult:
    """Computed operator value with its error bookkeeping."""

    value: QMatrix
    est_error: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.est_error) or not np.all(np.isfinite(self.value.data)):
            raise NonFinite("calculus produced a non-finite result")

    def to_json(self):
        out = {"value": self.value.to_json(), "est_error": self.est_error}
        out.update({k: v for k, v in self.diagnostics.items() if k != "plan"})
        if "plan" in self.diagnostics:
            out["plan"] = self.diagnostics["plan"]
        return out


def _pick_angle(T: CommutingOperator, f: StemFunction, phi):
    """Contour angle strictly between the spectral angle and the function sector."""
    rep = s_spectrum(T)
    omega_t = rep.max_arg()
    theta_f = f.sector.omega
    if theta_f - omega_t < 1e-3:
        raise NotSectorial(
            "function sector %.4f leaves no room beyond the spectral angle %.4f"
            % (theta_f, omega_t)
        )
    if phi is None:
        phi = omega_t + 0.55 * (theta_f - omega_t)
    phi = float(phi)
    if not omega_t < phi < theta_f:
        raise NotSectorial("contour angle %.4f outside (%.4f, %.4f)" % (phi, omega_t, theta_f))
    return phi


def _make_plan(T, f, phi, unit, tol, max_nodes, kernels):
    phi = _pick_angle(T, f, phi)
    unit = unit or DEFAULT_UNIT
    consts = sector_certificate(T, phi)
    return plan_contour(f.cert, consts, phi, unit, tol, max_nodes=max_nodes, kernels=kernels)


def s_calc(
    T: CommutingOperator,
    f: StemFunction,
    side="left",
    tol=1e-7,
    phi=None,
    unit: ImaginaryUnit | None = None,
    max_nodes=DEFAULT_MAX_NODES,
) -> CalculusResult:
    """Resolvent-kernel calculus (1/2pi) * integral of kernel ds f."""
    if f.cert is None or not f.cert.resolvent_admissible():
        raise HypothesisViolation("class", "function class does not decay enough for the resolvent kernel")
    plan = _make_plan(T, f, phi, unit, tol, max_nodes, ("resolvent",))
    kernel = SResolventKernel(T, side)
    return contour_integrate(plan, kernel, f, side=side, prefactor=RESOLVENT_PREFACTOR)


def d_calc(
    T: CommutingOperator,
    f: StemFunction,
    side="left",
    tol=1e-7,
    phi=None,
    unit: ImaginaryUnit | None = None,
    max_nodes=DEFAULT_MAX_NODES,
) -> CalculusResult:
    """Pencil-kernel calculus (-1/pi) * integral of pencil-inverse ds f.

    Depends on the operator only through its pencil, so conjugating the
    operator reproduces the result bit for bit.
    """
    if f.cert is None or not f.cert.pencil_admissible():
        raise HypothesisViolation("class", "function class does not decay enough for the pencil kernel")
    plan = _make_plan(T, f, phi, unit, tol, max_nodes, ("pencil",))
    kernel = PencilInverseKernel(T)
    return contour_integrate(plan, kernel, f, side=side, prefactor=-PENCIL_PREFACTOR)


class SweepResult(NamedTuple):
    """Values of both calculi off one contour sweep."""

    value: QMatrix          # f(T)
    value_conj: QMatrix     # f(conj T)
    harmonic: QMatrix       # pencil-kernel value
    est_error: float
    nodes: int
    plan: ContourPlan


def calc_sweep(
    T: CommutingOperator,
    f: StemFunction,
    tol=1e-7,
    phi=None,
    unit: ImaginaryUnit | None = None,
    max_nodes=DEFAULT_MAX_NODES,
) -> SweepResult:
    """Evaluate f(T), f(conj T) and the pencil-kernel value together.

    All three come from the same accumulated sums, so the exact relations
    harmonic = -2 * base and value - value_conj = (conj T - T) @ base hold
    to rounding, independently of quadrature error.
    """
    if f.cert is None or not f.cert.pencil_admissible():
        raise HypothesisViolation("class", "fused sweep needs a pencil-admissible class")
    plan = _make_plan(T, f, phi, unit, tol, max_nodes, ("resolvent", "pencil"))
    t_q = T.as_qmatrix()
    tbar_q = T.conj().as_qmatrix()

    def assemble(level):
        base = RESOLVENT_PREFACTOR * level.b_q
        a_q = RESOLVENT_PREFACTOR * level.a_q
        return (a_q - tbar_q @ base, a_q - t_q @ base, -2.0 * base)

    (val, val_conj, harm), est, nodes, _ = run_adaptive(plan, T, f, "left", True, assemble)
    tail = max(plan.est_tail.values())
    return SweepResult(val, val_conj, harm, est + tail, nodes, plan)


# ---------------------------------------------------------------------------
# polynomial and rational closed forms
# ---------------------------------------------------------------------------


def poly_calc(coeffs, T: CommutingOperator) -> QMatrix:
    """Polynomial of the operator, Horner evaluated in quaternionic arithmetic."""
    coeffs = [float(c) for c in coeffs] or [0.0]
    t_q = T.as_qmatrix()
    out = coeffs[-1] * QMatrix.identity(T.n)
    for c in reversed(coeffs[:-1]):
        out = out @ t_q + c * QMatrix.identity(T.n)
    return out


def d_poly_calc(coeffs, T: CommutingOperator) -> QMatrix:
    """Polynomial rule -2 * sum_i p_i sum_{k<i} T^k conj(T)^(i-1-k)."""
    coeffs = [float(c) for c in coeffs]
    deg = len(coeffs) - 1
    t_q = T.as_qmatrix()
    tbar_q = T.conj().as_qmatrix()
    powers = [QMatrix.identity(T.n)]
    cpowers = [QMatrix.identity(T.n)]
    for _ in range(max(deg - 1, 0)):
        powers.append(powers[-1] @ t_q)
        cpowers.append(cpowers[-1] @ tbar_q)
    out = QMatrix.zeros(T.n)
    for i, c in enumerate(coeffs):
        if c == 0.0 or i == 0:
            continue
        inner = QMatrix.zeros(T.n)
        for k in range(i):
            inner = inner + powers[k] @ cpowers[i - 1 - k]
        out = out + (-2.0 * c) * inner
    return out


class RationalD(NamedTuple):
    value: QMatrix      # (Dp q[T] - p[T] Dq) q[T]^-1 q[conj T]^-1
    alt_value: QMatrix  # (Dp q[conj T] - p[conj T] Dq) q[T]^-1 q[conj T]^-1


def rational_d(p_coeffs, q_coeffs, T: CommutingOperator) -> RationalD:
    """Closed form of the pencil-kernel calculus on an intrinsic rational.

    Both algebraically equal arrangements are returned so quadrature tests
    can cross-check them.
    """
    rat = IntrinsicRational(p_coeffs, q_coeffs)
    roots = rat.profile().denominator_roots()
    omega_t = s_spectrum(T).max_arg()
    if len(roots):
        bad = np.abs(np.angle(roots)) <= omega_t + 1e-9
        bad |= (np.abs(roots.imag) < 1e-300) & (roots.real >= 0.0)
        if np.any(bad):
            raise ZeroInSector("denominator zero inside the closed operator sector")
    q_t = poly_calc(rat.q_coeffs, T)
    q_tbar = poly_calc(rat.q_coeffs, T.conj())
    if q_t.smallest_sv() < INJECTIVITY_TOL * max(q_t.norm2(), 1e-300):
        raise ZeroInSector("denominator of the closed form is numerically singular")
    p_t = poly_calc(rat.p_coeffs, T)
    p_tbar = poly_calc(rat.p_coeffs, T.conj())
    dp = d_poly_calc(rat.p_coeffs, T)
    dq = d_poly_calc(rat.q_coeffs, T)
    inv_q = q_t.inv()
    inv_qbar = q_tbar.inv()
    value = (dp @ q_t - p_t @ dq) @ inv_q @ inv_qbar
    alt = (dp @ q_tbar - p_tbar @ dq) @ inv_q @ inv_qbar
    return RationalD(value, alt)


def rational_s(p_coeffs, q_coeffs, T: CommutingOperator) -> QMatrix:
    """Closed form p[T] q[T]^{-1} of the resolvent-kernel calculus on p/q."""
    rat = IntrinsicRational(p_coeffs, q_coeffs)
    q_t = poly_calc(rat.q_coeffs, T)
    if q_t.smallest_sv() < INJECTIVITY_TOL * max(q_t.norm2(), 1e-300):
        raise ZeroInSector("denominator evaluation is numerically singular")
    return poly_calc(rat.p_coeffs, T) @ q_t.inv()


# ---------------------------------------------------------------------------
# two-step regularized calculi
# ---------------------------------------------------------------------------


def default_regularizer_power(f: StemFunction) -> int:
    """Smallest power beyond the growth exponent, plus one for margin."""
    growth = f.cert.alpha_exp if f.cert.class_tag == "F" else 0.0
    return int(math.floor(1.0 + growth)) + 2


def _check_injective(name, mat: QMatrix):
    sv = mat.smallest_sv()
    if sv < INJECTIVITY_TOL * max(mat.norm2(), 1e-300):
        raise RegularizerSingular("%s numerically non-injective (sv %.3e)" % (name, sv))


def _regularized_pair(T, f, n, tol, phi, unit, max_nodes):
    """Shared setup: regularizer, product, and the two fused sweeps."""
    e = make_regularizer(n)
    ef = product(e, f)
    if not e.cert.pencil_admissible():
        raise ProductNotDecaying("regularizer power %d is not pencil admissible" % n)
    if not ef.cert.pencil_admissible():
        raise ProductNotDecaying(
            "product with the power-%d regularizer keeps class %r" % (n, ef.cert.class_tag)
        )

    # coarse pass to size the internal tolerance against the solve conditioning
    coarse_tol = min(1e-4, tol * 1e3)
    se_c = calc_sweep(T, e, tol=coarse_tol, phi=phi, unit=unit, max_nodes=max_nodes)
    sef_c = calc_sweep(T, ef, tol=coarse_tol, phi=phi, unit=unit, max_nodes=max_nodes)
    _check_injective("regularizer value", se_c.value)
    _check_injective("conjugate regularizer value", se_c.value_conj)
    einv_norm = 1.0 / se_c.value.smallest_sv()
    f_norm = einv_norm * sef_c.value.norm2()
    de_norm = se_c.harmonic.norm2()
    amp = einv_norm * (1.0 + f_norm + de_norm * einv_norm * (1.0 + f_norm))
    tol_int = min(tol, max(tol / (4.0 * amp), 1e-12))

    se = calc_sweep(T, e, tol=tol_int, phi=phi, unit=unit, max_nodes=max_nodes)
    sef = calc_sweep(T, ef, tol=tol_int, phi=phi, unit=unit, max_nodes=max_nodes)
    _check_injective("regularizer value", se.value)
    _check_injective("conjugate regularizer value", se.value_conj)
    return e, se, sef, tol_int


def hinf_s(
    T: CommutingOperator,
    f: StemFunction,
    n: int | None = None,
    tol=1e-7,
    phi=None,
    unit: ImaginaryUnit | None = None,
    max_nodes=DEFAULT_MAX_NODES,
) -> CalculusResult:
    """Regularized resolvent-kernel calculus: solve e(T) X = (e f)(T)."""
    n = n if n is not None else default_regularizer_power(f)
    e, se, sef, tol_int = _regularized_pair(T, f, n, tol, phi, unit, max_nodes)
    value = se.value.solve(sef.value)
    est = (se.est_error + sef.est_error) / se.value.smallest_sv() * (1.0 + value.norm2())
    return CalculusResult(
        value=value,
        est_error=est,
        diagnostics={
            "regularizer_power": n,
            "internal_tol": tol_int,
            "nodes": se.nodes + sef.nodes,
            "plan": se.plan.to_json(),
        },
    )


def hinf_d(
    T: CommutingOperator,
    f: StemFunction,
    n: int | None = None,
    tol=1e-7,
    phi=None,
    unit: ImaginaryUnit | None = None,
    max_nodes=DEFAULT_MAX_NODES,
) -> CalculusResult:
    """Regularized pencil-kernel calculus, both arrangements.

    Returns the first arrangement; the Frobenius gap to the second is
    reported under ``form_gap`` in the diagnostics.
    """
    n = n if n is not None else default_regularizer_power(f)
    e, se, sef, tol_int = _regularized_pair(T, f, n, tol, phi, unit, max_nodes)
    f_t = se.value.solve(sef.value)
    f_tbar = se.value_conj.solve(sef.value_conj)
    bracket1 = sef.harmonic - f_t @ se.harmonic
    bracket2 = sef.harmonic - f_tbar @ se.harmonic
    form1 = se.value_conj.solve(bracket1)
    form2 = se.value.solve(bracket2)
    gap = (form1 - form2).fro()
    einv = 1.0 / se.value.smallest_sv()
    est = einv * (sef.est_error + (1.0 + f_t.norm2()) * se.est_error) * 4.0
    return CalculusResult(
        value=form1,
        est_error=est,
        diagnostics={
            "form_gap": gap,
            "form2": form2,
            "regularizer_power": n,
            "internal_tol": tol_int,
            "nodes": 2 * (se.nodes + sef.nodes),
            "plan": se.plan.to_json(),
        },
    )
