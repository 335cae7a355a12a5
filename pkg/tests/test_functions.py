import math

import numpy as np
import pytest

from hqcalc import (
    IntrinsicRational,
    Quaternion,
    Sector,
    add_stems,
    eval_slice,
    make_rational,
    make_regularizer,
    monomial,
    pointwise_cf_derivative,
    product,
    qinv,
    qmul,
)
from hqcalc.errors import HypothesisViolation, NotIntrinsic, OutOfDomain
from hqcalc.functions import (
    RationalProfile,
    cf_derivative_poly,
    cf_derivative_rational,
    function_from_json,
    function_to_json,
    verify_certificate,
)
from hqcalc.quaternions import E1, E2, E3, compose, decompose

from conftest import random_unit


def _psiq_example():
    return make_rational(IntrinsicRational([0, 0, 1], [1, 3, 3, 1]), "PsiQ")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_eval_slice_square():
    f = monomial(2)
    got = eval_slice(f, Quaternion(1, 0, 0, 1))
    assert got.allclose(Quaternion(0, 0, 0, 2))  # alpha=u^2-v^2, beta=2uv at (1,1)


def test_eval_slice_rational_real_point():
    f = make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "Psi")
    assert eval_slice(f, Quaternion(2)).allclose(Quaternion(2.0 / 9.0))


def test_eval_slice_rational_complex_point():
    f = make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "Psi")
    got = eval_slice(f, Quaternion(1, 1, 0, 0))
    z = complex(1, 1)
    expect = z / (1 + z) ** 2
    assert got.allclose(Quaternion(expect.real, expect.imag, 0, 0))
    assert got.y == 0.0 and got.z == 0.0


def test_eval_outside_sector_raises():
    f = _psiq_example()
    with pytest.raises(OutOfDomain):
        eval_slice(f, Quaternion(-1))
    with pytest.raises(OutOfDomain):
        eval_slice(f, Quaternion(0))


def test_representation_formula(rng):
    """Evaluations at u +/- Jv recover alpha and J beta by averaging."""
    f = _psiq_example()
    for _ in range(10):
        u = rng.uniform(0.2, 3.0)
        v = rng.uniform(0.1, 2.0)
        unit = random_unit(rng)
        plus = f.eval(compose(u, v, unit))
        minus = f.eval(compose(u, -v, unit))
        avg = (plus + minus) / 2.0
        alpha = f.alpha(u, v)
        assert abs(avg - alpha) < 1e-13 * max(1.0, abs(alpha))


def test_intrinsic_stays_in_slice(rng):
    f = _psiq_example()
    for _ in range(10):
        unit = random_unit(rng)
        s = compose(rng.uniform(0.3, 3.0), rng.uniform(0.0, 2.0), unit)
        val = f.eval(s)
        u, v, _ = decompose(val)
        back = compose(u, v if abs(v) > 0 else 0.0, unit)
        # value must lie in the slice plane spanned by 1 and the unit of s
        leak = val - compose(val.w, float(val.imag_vector @ unit.vector), unit)
        assert abs(leak) <= 1e-13 * max(1.0, abs(val))


def test_cauchy_riemann_residual():
    f = _psiq_example()
    for u, v in [(1.0, 0.5), (2.0, 1.0), (0.5, 0.2)]:
        assert f.cr_residual(u, v) < 1e-8


def test_non_intrinsic_left_stem():
    f = make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "Psi", factor=E2)
    assert not f.intrinsic
    s = Quaternion(1, 1, 0, 0)
    z = complex(1, 1)
    w = z / (1 + z) ** 2
    expect = qmul(Quaternion(w.real, w.imag, 0, 0), E2)
    assert f.eval(s).allclose(expect)


# ---------------------------------------------------------------------------
# class admission
# ---------------------------------------------------------------------------


def test_make_rational_psiq_example():
    f = _psiq_example()
    assert f.cert.class_tag == "PsiQ"
    assert f.cert.alpha_exp == pytest.approx(1.0)
    assert verify_certificate(f.profile, f.sector, f.cert) <= 1.0


def test_make_rational_psiq_violations():
    with pytest.raises(HypothesisViolation) as e:
        make_rational(IntrinsicRational([0, 1], [1]), "PsiQ")
    assert e.value.condition == "i"
    # accepted under the growth class instead
    f = make_rational(IntrinsicRational([0, 1], [1]), "F")
    assert f.cert.class_tag == "F"
    assert f.cert.alpha_exp >= 1.0

    with pytest.raises(HypothesisViolation) as e:
        make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "PsiQ")
    assert e.value.condition == "ii"


def test_make_rational_sector_zero():
    # q = (s-1)(1+s)^2 has a root on the positive real axis
    with pytest.raises(HypothesisViolation) as e:
        make_rational(IntrinsicRational([0, 0, 1], [-1, -1, 1, 1]), "PsiQ")
    assert e.value.condition == "iii"


def test_make_rational_f_with_sector():
    f = make_rational(IntrinsicRational([1], [1, 1]), "F", sector=Sector(math.pi / 2))
    assert f.cert.class_tag == "F"
    assert verify_certificate(f.profile, f.sector, f.cert) <= 1.0


def test_constant_plus_decaying_is_not_decaying():
    base = IntrinsicRational([0, 0, 1], [1, 3, 3, 1])
    shifted = IntrinsicRational(
        np.polynomial.polynomial.polyadd(base.p_coeffs, base.q_coeffs), base.q_coeffs
    )
    with pytest.raises(HypothesisViolation):
        make_rational(shifted, "PsiQ")


# ---------------------------------------------------------------------------
# regularizers
# ---------------------------------------------------------------------------


def test_regularizer_values():
    e1 = make_regularizer(1)
    assert e1.eval(Quaternion(1)).allclose(Quaternion(0.5))
    assert e1.cert.class_tag == "F"  # bounded but not decaying at infinity

    e3 = make_regularizer(3)
    assert e3.cert.class_tag == "PsiQ"
    assert e3.cert.alpha_exp == pytest.approx(2.0)
    # |e3| ~ |s|^-2 along a ray
    big = abs(e3.eval(Quaternion(1e4)))
    assert big == pytest.approx(1e-8, rel=1e-2)


def test_regularizer_times_identity_class():
    e3 = make_regularizer(3)
    f = monomial(1)
    ef = product(e3, f)
    assert ef.cert.class_tag == "PsiQ"
    assert ef.cert.alpha_exp == pytest.approx(1.0)
    # symbolic product: s^4 / (1+s)^5
    assert ef.profile.p == (0, 0, 0, 0, 1)
    assert ef.profile.q == tuple(np.polynomial.polynomial.polypow([1, 1], 5))


def test_product_with_one_is_identity():
    one = monomial(0)
    g = _psiq_example()
    fg = product(one, g)
    for s in (Quaternion(2), Quaternion(1, 1, 0, 0)):
        assert fg.eval(s).allclose(g.eval(s))


def test_product_requires_intrinsic_left():
    g = _psiq_example()
    f = make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "Psi", factor=E3)
    with pytest.raises(NotIntrinsic):
        product(f, g)


def test_product_regularizer_n1_symbolic():
    e1 = make_regularizer(1)
    fid = monomial(1)
    prod = product(e1, fid)
    assert prod.profile.p == (0, 0, 1)
    assert prod.profile.q == (1, 1)


def test_add_stems_linearity_of_eval():
    f = _psiq_example()
    g = make_regularizer(3)
    h = add_stems(f, g)
    s = Quaternion(1.5, 0.5, 0.5, 0)
    assert h.eval(s).allclose(f.eval(s) + g.eval(s), atol=1e-13)


# ---------------------------------------------------------------------------
# pointwise derivative
# ---------------------------------------------------------------------------


def test_cf_derivative_monomials():
    anyq = Quaternion(0.3, -0.7, 1.1, 0.2)
    assert cf_derivative_poly([0, 1], anyq).allclose(Quaternion(-2))
    assert cf_derivative_poly([0, 0, 1], E1).allclose(Quaternion(0))
    assert cf_derivative_poly([0, 0, 1], Quaternion(2)).allclose(Quaternion(-8))
    assert cf_derivative_poly([3], anyq).allclose(Quaternion(0))


def test_pointwise_cf_derivative_dispatch():
    f = monomial(1)
    assert pointwise_cf_derivative(f, Quaternion(0.4, 1, 2, 3)).allclose(Quaternion(-2))
    assert pointwise_cf_derivative([1, 0, 1], Quaternion(2)).allclose(Quaternion(-8))


def test_fd_matches_analytic_rational(rng):
    """Finite differences against the quotient-rule value, second order in h."""
    rat = IntrinsicRational([0, 0, 1], [1, 3, 3, 1])
    f = make_rational(rat, "PsiQ")
    for _ in range(5):
        q = Quaternion(rng.uniform(0.5, 2.5), *(0.3 * rng.standard_normal(3)))
        exact = cf_derivative_rational(rat, q)
        fd = pointwise_cf_derivative(f, q)
        assert abs(fd - exact) <= 1e-7 * max(1.0, abs(exact))

        # O(h^2): residual drops by ~4 when h is halved
        def raw_fd(h):
            acc = Quaternion()
            for d in (Quaternion(1), E1, E2, E3):
                acc = acc + qmul(d, f.eval(q + h * d) - f.eval(q - h * d)) / (2 * h)
            return acc

        r1 = abs(raw_fd(1e-3) - exact)
        r2 = abs(raw_fd(5e-4) - exact)
        assert r1 / max(r2, 1e-300) > 3.0


def test_scalar_rational_derivative_pinned():
    """Hand-derived values of the closed quotient form."""
    rat = IntrinsicRational([0, 0, 1], [1, 3, 3, 1])
    assert cf_derivative_rational(rat, Quaternion(2)).allclose(Quaternion(0), atol=1e-14)
    assert cf_derivative_rational(rat, E1).allclose(Quaternion(-0.5), atol=1e-14)


def test_cauchy_circle_reconstruction():
    """Discretized circle integral of kernel * ds * f reproduces f(q)."""
    from hqcalc.operators import left_kernel

    f = make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "Psi")
    q = Quaternion(1.0, 0.8, 0.0, 0.0)
    u, v, unit = decompose(q)
    m = 800
    total = Quaternion()
    for center_sign in (1.0, -1.0):
        center = compose(u, center_sign * v, unit)
        r = 0.35
        for k in range(m):
            ang = 2 * math.pi * (k + 0.5) / m
            s = center + compose(r * math.cos(ang), r * math.sin(ang), unit)
            w = compose(r * math.cos(ang), r * math.sin(ang), unit) * (2 * math.pi / m)
            total = total + qmul(qmul(left_kernel(s, q), w), f.eval(s))
    got = total / (2 * math.pi)
    expect = f.eval(q)
    assert abs(got - expect) < 1e-9


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_function_json_roundtrip():
    f = function_from_json({"kind": "rational", "p": [0, 0, 1], "q": [1, 3, 3, 1]})
    assert f.cert.class_tag == "PsiQ"
    blob = function_to_json(f)
    assert blob["kind"] == "rational"
    assert blob["certificate"]["class"] == "PsiQ"

    e = function_from_json({"kind": "regularizer", "n": 3})
    assert e.name == "regularizer(n=3)"
    m = function_from_json({"kind": "monomial", "degree": 1})
    assert m.cert.class_tag == "F"
