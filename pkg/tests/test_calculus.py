import math

import numpy as np
import pytest

from hqcalc import (
    IntrinsicRational,
    QMatrix,
    Quaternion,
    build_diagonal,
    build_poly_family,
    calc_sweep,
    d_calc,
    d_poly_calc,
    eval_slice,
    hinf_d,
    hinf_s,
    make_rational,
    make_regularizer,
    monomial,
    poly_calc,
    product,
    rational_d,
    rational_s,
    s_calc,
)
from hqcalc.errors import HypothesisViolation, NotSectorial, ZeroInSector
from hqcalc.functions import add_stems, cf_derivative_rational
from hqcalc.quaternions import E1, E2, compose

from conftest import random_sectorial_operator, random_unit, rel


PSIQ = IntrinsicRational([0, 0, 1], [1, 3, 3, 1])  # s^2/(1+s)^3


def psiq_stem():
    return make_rational(PSIQ, "PsiQ")


# ---------------------------------------------------------------------------
# resolvent-kernel calculus
# ---------------------------------------------------------------------------


def test_s_calc_real_diagonal():
    t = build_diagonal([Quaternion(2)])
    f = make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "Psi")
    res = s_calc(t, f, tol=1e-8)
    assert res.value.entry(0, 0).allclose(Quaternion(2.0 / 9.0), atol=1e-7)


def test_s_calc_block_diagonal_acts_entrywise():
    f = make_rational(IntrinsicRational([0, 1], [1, 2, 1]), "Psi")
    q = Quaternion(1, 1, 0, 0)
    t = build_diagonal([Quaternion(2), q])
    res = s_calc(t, f, tol=1e-8)
    assert res.value.entry(0, 0).allclose(Quaternion(2.0 / 9.0), atol=1e-7)
    assert res.value.entry(1, 1).allclose(eval_slice(f, q), atol=1e-7)
    assert abs(res.value.entry(0, 1)) < 1e-9


def test_s_calc_right_side_matches_left_for_intrinsic(rng):
    t = random_sectorial_operator(rng, n=3)
    f = psiq_stem()
    left = s_calc(t, f, side="left", tol=1e-8)
    right = s_calc(t, f, side="right", tol=1e-8)
    assert rel(left.value, right.value) < 1e-7


def test_regularizer_value_injective():
    """Closed form T(1+T)^{-1} of the power-1 damper is injective for our models."""
    t = build_diagonal([Quaternion(2), Quaternion(1, 1, 0, 0)])
    e1_t = rational_s([0, 1], [1, 1], t)
    assert e1_t.smallest_sv() > 0.1

    # power-3 damper via quadrature agrees with its closed form
    e3 = make_regularizer(3)
    res = s_calc(t, e3, tol=1e-8)
    closed = rational_s(list(e3.profile.p), list(e3.profile.q), t)
    assert rel(res.value, closed) < 1e-7
    assert res.value.smallest_sv() > 1e-3


# ---------------------------------------------------------------------------
# pencil-kernel calculus
# ---------------------------------------------------------------------------


def test_d_calc_zero_case():
    t = build_diagonal([Quaternion(2)])
    res = d_calc(t, psiq_stem(), tol=1e-8)
    assert res.value.fro() < 1e-7


def test_d_calc_scalar_pointwise_oracle(rng):
    """On a 1x1 operator the integral reduces to the pointwise derivative."""
    for _ in range(5):
        q = Quaternion(rng.uniform(0.8, 3.0), *(0.3 * rng.standard_normal(3)))
        t = build_diagonal([q])
        res = d_calc(t, psiq_stem(), tol=1e-9)
        oracle = cf_derivative_rational(PSIQ, q)
        assert abs(res.value.entry(0, 0) - oracle) < 1e-7


def test_d_calc_conjugation_bitwise(rng):
    t = random_sectorial_operator(rng, n=3)
    f = psiq_stem()
    a = d_calc(t, f, tol=1e-7)
    b = d_calc(t.conj(), f, tol=1e-7)
    assert np.array_equal(a.value.data, b.value.data)


def test_d_calc_linearity(rng):
    t = random_sectorial_operator(rng, n=2)
    f = psiq_stem()
    g = make_regularizer(3)
    fg = add_stems(f, g)
    a = d_calc(t, f, tol=1e-8)
    b = d_calc(t, g, tol=1e-8)
    c = d_calc(t, fg, tol=1e-8)
    assert rel(a.value + b.value, c.value) < 1e-7


def test_d_calc_intrinsic_reality(rng):
    t = random_sectorial_operator(rng, n=3)
    res = d_calc(t, psiq_stem(), tol=1e-8)
    imag = float(np.linalg.norm(res.value.data[1:]))
    assert imag <= 1e-10 * max(1.0, res.value.fro())


def test_output_components_commute(rng):
    t = random_sectorial_operator(rng, n=3)
    f = psiq_stem()
    for res in (d_calc(t, f, tol=1e-8), s_calc(t, f, tol=1e-8)):
        comps = res.value.data
        for i in range(4):
            for j in range(i + 1, 4):
                resid = np.linalg.norm(comps[i] @ comps[j] - comps[j] @ comps[i])
                scale = max(1.0, np.linalg.norm(comps[i]) * np.linalg.norm(comps[j]))
                assert resid <= 1e-9 * scale


def test_commutant_commutation(rng):
    """Anything commuting with every component commutes with the calculus value."""
    m = np.array([[2.0, 0.4, 0.0], [0.4, 1.5, 0.2], [0.0, 0.2, 3.0]])
    t = build_poly_family(m, [0, 1], [0, 0.2], [0, 0, 0.05], [0])
    b = QMatrix.from_real(0.3 * np.eye(3) + 0.5 * t.comps[1] + 0.2 * (t.comps[2] @ t.comps[0]))
    res = d_calc(t, psiq_stem(), tol=1e-8)
    lhs = b @ res.value
    rhs = res.value @ b
    assert rel(lhs, rhs) < 1e-9


def test_mutual_commutation(rng):
    t = random_sectorial_operator(rng, n=3)
    f = make_regularizer(3)
    g = psiq_stem()
    df = d_calc(t, f, tol=1e-9)
    g_t = s_calc(t, g, tol=1e-9)
    assert rel(g_t.value @ df.value, df.value @ g_t.value) < 1e-8


# ---------------------------------------------------------------------------
# polynomial / rational closed forms
# ---------------------------------------------------------------------------


def test_poly_calc_examples():
    t = build_diagonal([E1])
    got = poly_calc([1, 3, 3, 1], t)  # (1+s)^3 at e1
    assert got.entry(0, 0).allclose(Quaternion(-2, 2, 0, 0))

    t2 = build_diagonal([Quaternion(0.5), Quaternion(2)])
    assert poly_calc([7], t2).allclose(7.0 * QMatrix.identity(2))
    assert poly_calc([0, 1], t2).allclose(t2.as_qmatrix())


def test_d_poly_calc_examples(rng):
    t = random_sectorial_operator(rng, n=3)
    assert d_poly_calc([0, 1], t).allclose(-2.0 * QMatrix.identity(3))
    assert d_poly_calc([5], t).allclose(QMatrix.zeros(3))
    te = build_diagonal([E1])
    assert d_poly_calc([0, 0, 1], te).allclose(QMatrix.zeros(1), atol=1e-15)


def test_rational_d_pinned_values():
    t2 = build_diagonal([Quaternion(2)])
    got = rational_d([0, 0, 1], [1, 3, 3, 1], t2)
    assert got.value.fro() < 1e-13
    assert got.alt_value.fro() < 1e-13

    te = build_diagonal([E1])
    got = rational_d([0, 0, 1], [1, 3, 3, 1], te)
    assert got.value.entry(0, 0).allclose(Quaternion(-0.5), atol=1e-13)
    assert got.alt_value.entry(0, 0).allclose(Quaternion(-0.5), atol=1e-13)


def test_rational_d_polynomial_path(rng):
    t = random_sectorial_operator(rng, n=2)
    got = rational_d([0, 1], [1], t)
    assert got.value.allclose(-2.0 * QMatrix.identity(2), atol=1e-12)


def test_rational_d_zero_in_sector():
    t = build_diagonal([Quaternion(2)])
    with pytest.raises(ZeroInSector):
        rational_d([0, 0, 1], [-1, -1, 1, 1], t)  # root at +1


def test_rational_d_forms_agree(rng):
    for _ in range(5):
        t = random_sectorial_operator(rng, n=3)
        got = rational_d([0, 0, 1, 0.5], [1, 4, 6, 4, 1], t)
        assert rel(got.value, got.alt_value) < 1e-11


def test_polynomial_product_rule_exact(rng):
    """D(pq)[T] = Dp[T] q[T] + p[conj T] Dq[T] to roundoff."""
    rng2 = np.random.default_rng(7)
    for _ in range(5):
        t = random_sectorial_operator(rng2, n=3)
        p = rng2.standard_normal(4)
        q = rng2.standard_normal(3)
        pq = np.polynomial.polynomial.polymul(p, q)
        lhs = d_poly_calc(pq, t)
        rhs = d_poly_calc(p, t) @ poly_calc(q, t) + poly_calc(p, t.conj()) @ d_poly_calc(q, t)
        assert rel(lhs, rhs) < 1e-12


def test_rational_vs_quadrature(rng):
    for _ in range(3):
        t = random_sectorial_operator(rng, n=3)
        quad = d_calc(t, psiq_stem(), tol=1e-8)
        closed = rational_d(list(PSIQ.p_coeffs), list(PSIQ.q_coeffs), t)
        assert rel(quad.value, closed.value) <= 1e-7


# ---------------------------------------------------------------------------
# product rule (quadrature)
# ---------------------------------------------------------------------------


def test_product_rule_both_forms(rng):
    f = make_regularizer(3)
    g = psiq_stem()
    fg = product(f, g)
    for _ in range(3):
        t = random_sectorial_operator(rng, n=3)
        lhs = d_calc(t, fg, tol=1e-8)
        sf = calc_sweep(t, f, tol=1e-8)
        sg = calc_sweep(t, g, tol=1e-8)
        form_a = sf.harmonic @ sg.value + sf.value_conj @ sg.harmonic
        form_b = sf.harmonic @ sg.value_conj + sf.value @ sg.harmonic
        assert rel(lhs.value, form_a) <= 1e-7
        assert rel(lhs.value, form_b) <= 1e-7
        assert (form_a - form_b).fro() <= 1e-9 * max(1.0, form_a.fro())


def test_sweep_internal_consistency(rng):
    t = random_sectorial_operator(rng, n=2)
    f = psiq_stem()
    sw = calc_sweep(t, f, tol=1e-8)
    direct_d = d_calc(t, f, tol=1e-8)
    direct_s = s_calc(t, f, tol=1e-8)
    assert rel(sw.harmonic, direct_d.value) < 1e-7
    assert rel(sw.value, direct_s.value) < 1e-7
    # the sweep's conjugate value is the value at the conjugate operator
    direct_s_conj = s_calc(t.conj(), f, tol=1e-8)
    assert rel(sw.value_conj, direct_s_conj.value) < 1e-7


# ---------------------------------------------------------------------------
# regularized calculi
# ---------------------------------------------------------------------------


def test_hinf_s_identity_function():
    t = build_diagonal([Quaternion(2)])
    res = hinf_s(t, monomial(1), n=3, tol=1e-7)
    assert res.value.entry(0, 0).allclose(Quaternion(2), atol=1e-6)

    tq = build_diagonal([Quaternion(1, 1, 0, 0), Quaternion(3)])
    res = hinf_s(tq, monomial(1), n=3, tol=1e-7)
    assert rel(res.value, tq.as_qmatrix()) < 1e-6


def test_hinf_s_consistent_with_direct():
    t = build_diagonal([Quaternion(2), Quaternion(1, 0.4, 0, 0)])
    f = psiq_stem()
    via_hinf = hinf_s(t, f, n=3, tol=1e-7)
    direct = s_calc(t, f, tol=1e-7)
    assert (via_hinf.value - direct.value).fro() <= 2e-7


def test_hinf_d_canonical_cases():
    t = build_diagonal([Quaternion(2)])
    res = hinf_d(t, monomial(1), n=3, tol=1e-7)
    assert rel(res.value, -2.0 * QMatrix.identity(1)) < 1e-7
    assert res.diagnostics["form_gap"] <= 1e-8

    res2 = hinf_d(t, monomial(2), n=4, tol=1e-7)
    assert rel(res2.value, -8.0 * QMatrix.identity(1)) < 1e-6

    t3 = build_diagonal([Quaternion(1, 2, 0, 0)])
    res3 = hinf_d(t3, monomial(2), n=4, tol=1e-7)
    oracle = d_poly_calc([0, 0, 1], t3)  # -2(T + conj T) = -4
    assert rel(res3.value, oracle) < 1e-6
    assert oracle.entry(0, 0).allclose(Quaternion(-4))


def test_hinf_d_regularizer_independence(rng):
    t = build_diagonal([Quaternion(2), Quaternion(1, 0.5, 0, 0)])
    a = hinf_d(t, monomial(1), n=3, tol=1e-7)
    b = hinf_d(t, monomial(1), n=4, tol=1e-7)
    assert (a.value - b.value).fro() <= 3e-7


def test_hinf_d_kernel_of_d_invariance():
    """Adding a constant leaves the regularized derivative unchanged."""
    t = build_diagonal([Quaternion(2), Quaternion(1, 0.3, 0.3, 0)])
    f = monomial(1)
    f_plus = make_rational(IntrinsicRational([1, 1], [1]), "F")  # s + 1
    a = hinf_d(t, f, n=3, tol=1e-7)
    b = hinf_d(t, f_plus, n=3, tol=1e-7)
    assert (a.value - b.value).fro() <= 2e-7


def test_hinf_default_power():
    f = monomial(1)  # growth exponent 1
    from hqcalc.calculus import default_regularizer_power

    assert default_regularizer_power(f) == 4
    assert default_regularizer_power(psiq_stem()) == 3


def test_left_right_harmonic_both_reported():
    """No preferred normalization for non-intrinsic stems: compute both sides."""
    t = build_diagonal([Quaternion(2), Quaternion(1, 0, 0, 0.5)])
    f_left = make_rational(PSIQ, "PsiQ", factor=E2)
    f_right = make_rational(PSIQ, "PsiQ", factor=E2, side="right")
    left = d_calc(t, f_left, side="left", tol=1e-7)
    right = d_calc(t, f_right, side="right", tol=1e-7)
    assert math.isfinite(left.est_error) and math.isfinite(right.est_error)


def test_not_sectorial_function_sector():
    t = build_diagonal([Quaternion(0, 1, 0, 0)])  # spectral angle pi/2
    f = make_rational(PSIQ, "PsiQ", sector=None)
    # sector of f is wide enough, so this works:
    res = rational_d(list(PSIQ.p_coeffs), list(PSIQ.q_coeffs), t)
    assert res.value.entry(0, 0).allclose(Quaternion(-0.5), atol=1e-12)
    # but a function holomorphic only on a thin sector cannot be applied
    thin = make_rational(PSIQ, "PsiQ", sector=__import__("hqcalc").Sector(0.3))
    with pytest.raises(NotSectorial):
        d_calc(t, thin, tol=1e-6)


def test_d_calc_quadrature_on_half_turn_operator():
    """Spectral sphere at angle pi/2 still integrates on an obtuse contour."""
    te = build_diagonal([E1])
    quad = d_calc(te, psiq_stem(), tol=1e-8)
    assert quad.value.entry(0, 0).allclose(Quaternion(-0.5), atol=1e-7)
