"""Slice functions given by stem pairs, with decay/growth certificates.

Every catalog function is induced by a complex profile z -> f(z) with real
coefficients: its real and imaginary parts on the upper half plane are the
even/odd stem pair (alpha, beta), and the two-dimensional Cauchy-Riemann
system holds by construction.  Non-intrinsic members carry a constant
quaternion factor on the function side prescribed by ``side``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    HypothesisViolation,
    NotIntrinsic,
    OutOfDomain,
    StepTooLarge,
)
from .quaternions import (
    ONE,
    Quaternion,
    Sector,
    compose,
    decompose,
    qinv,
    qmul,
)

DEFAULT_SECTOR = Sector(0.8 * math.pi)

# log-radius grid on which certificates are fitted and spot-checked
CERT_RADII = np.geomspace(1e-6, 1e6, 64)
CERT_RAYS = 9


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


class RationalProfile:
    """Ratio of two real-coefficient polynomials, ascending coefficients."""

    __slots__ = ("p", "q")

    def __init__(self, p, q):
        self.p = _trim(p)
        self.q = _trim(q)
        if self.q == (0.0,):
            raise ValueError("denominator is identically zero")

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return P.polyval(z, self.p) / P.polyval(z, self.q)

    def derivative(self):
        num = P.polysub(
            P.polymul(P.polyder(self.p), self.q), P.polymul(self.p, P.polyder(self.q))
        )
        den = P.polymul(self.q, self.q)
        return RationalProfile(num, den)

    def multiply(self, other):
        return RationalProfile(P.polymul(self.p, other.p), P.polymul(self.q, other.q))

    def add(self, other):
        num = P.polyadd(P.polymul(self.p, other.q), P.polymul(other.p, self.q))
        return RationalProfile(num, P.polymul(self.q, other.q))

    def scale(self, c):
        return RationalProfile(P.polymul(self.p, [float(c)]), self.q)

    def zero_order(self):
        """Vanishing order at the origin (p's leading zero run; q(0) != 0 assumed)."""
        k = 0
        while k < len(self.p) and self.p[k] == 0.0:
            k += 1
        return k if k < len(self.p) else len(self.p)

    def decay_order(self):
        """deg q - deg p; negative means polynomial growth at infinity."""
        return (len(self.q) - 1) - (len(self.p) - 1)

    def denominator_roots(self):
        if len(self.q) == 1:
            return np.array([])
        return np.roots(self.q[::-1])

    def is_zero(self):
        return self.p == (0.0,)

    def __repr__(self):
        return f"RationalProfile(p={list(self.p)}, q={list(self.q)})"


def _trim(coeffs):
    out = [float(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return tuple(out) if out else (0.0,)


@dataclass(frozen=True)
class IntrinsicRational:
    """Coefficient form of p/q with real coefficients, ascending degree."""

    p_coeffs: tuple
    q_coeffs: tuple

    def __init__(self, p_coeffs, q_coeffs):
        object.__setattr__(self, "p_coeffs", _trim(p_coeffs))
        object.__setattr__(self, "q_coeffs", _trim(q_coeffs))
        if self.q_coeffs == (0.0,):
            raise ValueError("denominator is identically zero")

    def profile(self):
        return RationalProfile(self.p_coeffs, self.q_coeffs)


# ---------------------------------------------------------------------------
# decay certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayCertificate:
    """Grid-verified growth envelope of a function on its sector.

    ``zero_order`` is the vanishing rate at the origin, ``decay_order`` the
    decay rate at infinity (negative = growth).  For the decaying classes the
    envelope is C * r^a0 / (1 + r^(a0+ainf)); growing functions use the
    two-sided envelope C * (r^a + r^-a).
    """

    class_tag: str  # 'PsiQ' | 'Psi' | 'F'
    alpha_exp: float
    C_alpha: float
    zero_order: float
    decay_order: float

    def bound(self, r):
        r = np.asarray(r, dtype=float)
        if self.class_tag == "F":
            a = self.alpha_exp
            return self.C_alpha * (r**a + r ** (-a))
        a0, ainf = self.zero_order, self.decay_order
        return self.C_alpha * r**a0 / (1.0 + r ** (a0 + ainf))

    def pencil_admissible(self):
        return self.class_tag == "PsiQ"

    def resolvent_admissible(self):
        return self.class_tag in ("PsiQ", "Psi")

    def to_json(self):
        return {
            "class": self.class_tag,
            "alpha": self.alpha_exp,
            "C": self.C_alpha,
            "zero_order": self.zero_order,
            "decay_order": self.decay_order,
        }


def _classify(zero_order, decay_order):
    """Class tag and exponent from the endpoint orders."""
    if zero_order > 1 and decay_order > 0:
        return "PsiQ", min(zero_order - 1.0, decay_order)
    if zero_order > 0 and decay_order > 0:
        return "Psi", min(zero_order, decay_order)
    return "F", max(1.0, abs(decay_order), abs(zero_order))


def fit_certificate(profile, sector: Sector, zero_order, decay_order, tag=None, scale=1.0):
    """Fit the envelope constant on a log grid and inflate it by 2.

    ``scale`` accounts for a constant quaternion factor multiplying the
    profile on the function side.
    """
    derived_tag, alpha = _classify(zero_order, decay_order)
    tag = tag or derived_tag
    probe = DecayCertificate(tag, alpha, 1.0, zero_order, decay_order)
    angles = np.linspace(-sector.omega, sector.omega, CERT_RAYS) * 0.999
    ratio = 0.0
    for ang in angles:
        z = CERT_RADII * np.exp(1j * ang)
        vals = scale * np.abs(np.asarray(profile(z), dtype=np.complex128))
        if not np.all(np.isfinite(vals)):
            raise ValueError("profile not finite on the certificate grid")
        ratio = max(ratio, float(np.max(vals / probe.bound(CERT_RADII))))
    return DecayCertificate(tag, alpha, 2.0 * max(ratio, 1e-300), zero_order, decay_order)


def verify_certificate(profile, sector: Sector, cert: DecayCertificate):
    """Largest ratio of |f| to the certified bound over the fitting grid."""
    angles = np.linspace(-sector.omega, sector.omega, CERT_RAYS) * 0.999
    worst = 0.0
    for ang in angles:
        z = CERT_RADII * np.exp(1j * ang)
        vals = np.abs(np.asarray(profile(z), dtype=np.complex128))
        worst = max(worst, float(np.max(vals / cert.bound(CERT_RADII))))
    return worst


# ---------------------------------------------------------------------------
# stem functions
# ---------------------------------------------------------------------------


class StemFunction:
    """Slice function built from a complex profile and an optional constant factor.

    ``side='left'`` evaluates to (alpha + J*beta) * factor, ``side='right'``
    to factor * (alpha + beta*J).  With a real factor both coincide and the
    function is intrinsic.
    """

    __slots__ = ("profile", "sector", "side", "factor", "cert", "name")

    def __init__(self, profile, sector=DEFAULT_SECTOR, side="left", factor=ONE, cert=None, name=""):
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.profile = profile
        self.sector = sector
        self.side = side
        self.factor = factor if isinstance(factor, Quaternion) else Quaternion(float(factor))
        self.cert = cert
        self.name = name

    @property
    def intrinsic(self):
        return self.factor.is_real()

    # -- evaluation ----------------------------------------------------

    def profile_at(self, z):
        return np.asarray(self.profile(z), dtype=np.complex128)

    def eval(self, s: Quaternion) -> Quaternion:
        u, v, unit = decompose(s)
        if s.norm_sq() == 0.0 or math.atan2(v, u) >= self.sector.omega:
            raise OutOfDomain("point outside the holomorphy sector")
        w = complex(self.profile_at(complex(u, v)))
        slice_val = compose(w.real, w.imag, unit)
        if self.side == "left":
            return qmul(slice_val, self.factor)
        return qmul(self.factor, slice_val)

    def alpha(self, u, v) -> Quaternion:
        """Even stem component at (u, v), including the constant factor."""
        w = complex(self.profile_at(complex(u, abs(v))))
        if self.side == "left":
            return qmul(Quaternion(w.real), self.factor)
        return qmul(self.factor, Quaternion(w.real))

    def beta(self, u, v) -> Quaternion:
        """Odd stem component; defined for v >= 0 and extended oddly."""
        sign = -1.0 if v < 0 else 1.0
        w = complex(self.profile_at(complex(u, abs(v))))
        if self.side == "left":
            return qmul(Quaternion(sign * w.imag), self.factor)
        return qmul(self.factor, Quaternion(sign * w.imag))

    def cr_residual(self, u, v, h=1e-5):
        """Finite-difference residual of the stem Cauchy-Riemann system."""
        f = lambda uu, vv: complex(self.profile_at(complex(uu, vv)))
        du = (f(u + h, v) - f(u - h, v)) / (2 * h)
        dv = (f(u, v + h) - f(u, v - h)) / (2 * h)
        return abs(du.real - dv.imag) + abs(dv.real + du.imag)

    # -- algebra ---------------------------------------------------------

    def with_cert(self, cert):
        return StemFunction(self.profile, self.sector, self.side, self.factor, cert, self.name)

    def __repr__(self):
        tag = self.cert.class_tag if self.cert else "?"
        return f"StemFunction({self.name or self.profile!r}, side={self.side!r}, class={tag})"


# ---------------------------------------------------------------------------
# catalog constructors
# ---------------------------------------------------------------------------


def _sector_from_roots(roots, requested: Sector | None):
    if requested is not None:
        return requested
    if len(roots) == 0:
        return DEFAULT_SECTOR
    min_arg = float(np.min(np.abs(np.angle(roots))))
    if min_arg <= 1e-9:
        raise HypothesisViolation("iii", "denominator zero on the positive real axis")
    return Sector(min(DEFAULT_SECTOR.omega, 0.9 * min_arg))


def make_rational(r: IntrinsicRational, class_tag="PsiQ", sector: Sector | None = None,
                  factor=ONE, side="left") -> StemFunction:
    """Stem + certificate for p/q under one of the admissibility regimes.

    PsiQ demands (i) deg q >= deg p + 1, (ii) a zero of order >= 2 at the
    origin, (iii) no denominator zeros in the closed sector.  Psi relaxes the
    vanishing order to 1; F only needs (iii).
    """
    prof = r.profile()
    roots = prof.denominator_roots()
    k0 = prof.zero_order() if not prof.is_zero() else math.inf
    d = prof.decay_order()
    if class_tag == "PsiQ":
        if d < 1:
            raise HypothesisViolation("i", "need deg q >= deg p + 1 (degree gap %d)" % d)
        if k0 < 2:
            raise HypothesisViolation("ii", "numerator vanishes only to order %d at 0" % k0)
    elif class_tag == "Psi":
        if d < 1:
            raise HypothesisViolation("i", "need deg q >= deg p + 1 (degree gap %d)" % d)
        if k0 < 1:
            raise HypothesisViolation("ii", "numerator does not vanish at 0")
    elif class_tag != "F":
        raise ValueError("unknown class tag %r" % class_tag)
    if prof.is_zero():
        k0, d = 0.0, 0.0
    sec = _sector_from_roots(roots, sector)
    if len(roots):
        if np.min(np.abs(np.angle(roots))) <= sec.omega:
            raise HypothesisViolation("iii", "denominator zero inside the closed sector")
        if np.any((np.abs(roots.imag) < 1e-300) & (roots.real >= 0)):
            raise HypothesisViolation("iii", "denominator zero on the positive real axis")
    factor = factor if isinstance(factor, Quaternion) else Quaternion(float(factor))
    tag = "F" if class_tag == "F" else class_tag
    cert = fit_certificate(prof, sec, float(k0), float(d), tag=tag, scale=abs(factor))
    name = "p/q deg(%d/%d)" % (len(prof.p) - 1, len(prof.q) - 1)
    return StemFunction(prof, sec, side, factor, cert, name)


def make_regularizer(n: int) -> StemFunction:
    """Decaying intrinsic damper s^n / (1+s)^(2n-1).

    For n >= 2 it vanishes to order n at 0 and decays like |s|^(1-n), which
    puts it in the pencil-admissible class; n = 1 is merely bounded and only
    earns the growth-class envelope.
    """
    if n < 1:
        raise ValueError("regularizer power must be >= 1")
    p = [0.0] * n + [1.0]
    q = list(P.polypow([1.0, 1.0], 2 * n - 1))
    prof = RationalProfile(p, q)
    sec = DEFAULT_SECTOR
    tag = "PsiQ" if n >= 2 else "F"
    cert = fit_certificate(prof, sec, float(n), float(n - 1), tag=tag)
    return StemFunction(prof, sec, "left", ONE, cert, "regularizer(n=%d)" % n)


def monomial(degree: int, factor=ONE, side="left") -> StemFunction:
    """s^k as a growth-class member (k = 0 gives the constant one)."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    factor = factor if isinstance(factor, Quaternion) else Quaternion(float(factor))
    prof = RationalProfile([0.0] * degree + [1.0], [1.0])
    cert = fit_certificate(
        prof, DEFAULT_SECTOR, float(degree), float(-degree), tag="F", scale=abs(factor)
    )
    return StemFunction(prof, DEFAULT_SECTOR, side, factor, cert, "s^%d" % degree)


def product(f: StemFunction, g: StemFunction) -> StemFunction:
    """Pointwise product f*g for intrinsic f; endpoint orders add."""
    if not f.intrinsic:
        raise NotIntrinsic("left factor of a product must be intrinsic")
    if not isinstance(f.profile, RationalProfile) or not isinstance(g.profile, RationalProfile):
        prof = lambda z, fp=f.profile, gp=g.profile, c=f.factor.w: c * np.asarray(fp(z)) * np.asarray(gp(z))
    else:
        prof = f.profile.multiply(g.profile).multiply(RationalProfile([f.factor.w], [1.0]))
    sec = Sector(min(f.sector.omega, g.sector.omega))
    zero = f.cert.zero_order + g.cert.zero_order
    decay = f.cert.decay_order + g.cert.decay_order
    cert = fit_certificate(prof, sec, zero, decay, scale=abs(g.factor))
    name = "(%s)*(%s)" % (f.name or "f", g.name or "g")
    return StemFunction(prof, sec, g.side, g.factor, cert, name)


def add_stems(f: StemFunction, g: StemFunction) -> StemFunction:
    """Sum of two rational-profile stems with matching side and factor."""
    if f.side != g.side or f.factor != g.factor:
        raise ValueError("can only add stems with identical side and factor")
    if not (isinstance(f.profile, RationalProfile) and isinstance(g.profile, RationalProfile)):
        raise ValueError("stem addition needs rational profiles")
    prof = f.profile.add(g.profile)
    sec = Sector(min(f.sector.omega, g.sector.omega))
    zero = min(f.cert.zero_order, g.cert.zero_order)
    decay = min(f.cert.decay_order, g.cert.decay_order)
    cert = fit_certificate(prof, sec, zero, decay)
    return StemFunction(prof, sec, f.side, f.factor, cert, "(%s)+(%s)" % (f.name, g.name))


def eval_slice(f: StemFunction, s: Quaternion) -> Quaternion:
    return f.eval(s)


# ---------------------------------------------------------------------------
# pointwise Cauchy-Fueter derivative
# ---------------------------------------------------------------------------

_UNIT_DIRS = (
    Quaternion(1.0, 0.0, 0.0, 0.0),
    Quaternion(0.0, 1.0, 0.0, 0.0),
    Quaternion(0.0, 0.0, 1.0, 0.0),
    Quaternion(0.0, 0.0, 0.0, 1.0),
)


def cf_derivative_poly(coeffs, q: Quaternion) -> Quaternion:
    """Exact derivative of a real polynomial under the four-direction operator.

    Monomials obey D s^i = -2 * sum_{k<i} s^k conj(s)^(i-1-k).
    """
    out = Quaternion()
    qc = q.conj
    powers = [ONE]
    cpowers = [ONE]
    top = len(coeffs) - 1
    for _ in range(max(top, 0)):
        powers.append(qmul(powers[-1], q))
        cpowers.append(qmul(cpowers[-1], qc))
    for i, c in enumerate(coeffs):
        if c == 0.0 or i == 0:
            continue
        acc = Quaternion()
        for k in range(i):
            acc = acc + qmul(powers[k], cpowers[i - 1 - k])
        out = out + (-2.0 * float(c)) * acc
    return out


def cf_derivative_rational(r: IntrinsicRational, s: Quaternion) -> Quaternion:
    """Quotient-rule form (Dp*q - p*Dq) / (q(s) q(conj(s))) at a scalar point."""
    pv = _poly_at(r.p_coeffs, s)
    qv = _poly_at(r.q_coeffs, s)
    qv_conj = _poly_at(r.q_coeffs, s.conj)
    dp = cf_derivative_poly(r.p_coeffs, s)
    dq = cf_derivative_poly(r.q_coeffs, s)
    num = qmul(dp, qv) - qmul(pv, dq)
    return qmul(qmul(num, qinv(qv)), qinv(qv_conj))


def _poly_at(coeffs, s: Quaternion) -> Quaternion:
    out = Quaternion()
    for c in reversed(coeffs):
        out = qmul(out, s) + Quaternion(float(c))
    return out


def pointwise_cf_derivative(f, q: Quaternion, h=None, fd_tol=1e-3) -> Quaternion:
    """Derivative of a slice function at a point under the four-direction operator.

    Polynomial coefficient lists evaluate exactly through the monomial rule;
    everything else goes through Richardson-extrapolated central differences
    of the four partials with step scaled by |q|.
    """
    if isinstance(f, (list, tuple)):
        return cf_derivative_poly(f, q)
    if (
        isinstance(f, StemFunction)
        and isinstance(f.profile, RationalProfile)
        and len(f.profile.q) == 1
        and f.side == "left"
    ):
        # constant right factors pass through the derivative untouched
        scaled = [c / f.profile.q[0] for c in f.profile.p]
        return qmul(cf_derivative_poly(scaled, q), f.factor)

    if h is None:
        h = 1e-5 * max(1.0, abs(q))

    def fd(step):
        acc = Quaternion()
        for direction in _UNIT_DIRS:
            delta = step * direction
            diff = f.eval(q + delta) - f.eval(q - delta)
            acc = acc + qmul(direction, diff) / (2.0 * step)
        return acc

    coarse = fd(2.0 * h)
    fine = fd(h)
    rich = (4.0 / 3.0) * fine - (1.0 / 3.0) * coarse
    est = abs(fine - coarse) / 3.0
    if est > fd_tol * max(1.0, abs(rich)):
        raise StepTooLarge("extrapolation estimate %.3e exceeds tolerance" % est)
    return rich


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def function_from_json(obj) -> StemFunction:
    kind = obj.get("kind")
    sector = Sector(float(obj["sector"])) if "sector" in obj else None
    if kind == "rational":
        r = IntrinsicRational(obj["p"], obj["q"])
        tag = obj.get("class", "PsiQ")
        return make_rational(r, tag, sector)
    if kind == "regularizer":
        return make_regularizer(int(obj["n"]))
    if kind == "monomial":
        return monomial(int(obj["degree"]))
    raise ValueError("unknown function kind %r" % kind)


def function_to_json(f: StemFunction):
    if isinstance(f.profile, RationalProfile):
        out = {"kind": "rational", "p": list(f.profile.p), "q": list(f.profile.q)}
    else:
        out = {"kind": "opaque"}
    if f.cert is not None:
        out["certificate"] = f.cert.to_json()
    out["sector"] = f.sector.omega
    return out
