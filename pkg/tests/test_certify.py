"""Certification engine: axis-bound certificates, the discriminant fallback,
Hurwitz criteria, and the per-family bundles."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from modestab import certify as ct
from modestab import quasisolution as qs
from modestab.cases import FAMILIES, family_by_key, start_index_case
from modestab.exactalg import MultiPoly, RatFunc, parse_expression, poly_in_t, to_expression
from modestab.recurrence import r_iterates

LAM = RatFunc.variable("lambda")

#: the published certificate polynomial of the one fallback case (in t)
FALLBACK_POLY_T = ("t^12 + 89*t^10 + 2987*t^8 + 75391*t^6 + 606252*t^4"
                   " - 380160*t^2 + 1843200")

#: the eight continued-fraction coefficients of the degree-8 numerator
WALL_EXPECTED = (
    Fraction(1, 44),
    Fraction(11, 156),
    Fraction(1352, 10691),
    Fraction(1257272291, 6279558844),
    Fraction(14583158015998009, 47686278024425370),
    Fraction(913465855584827404205, 2012154184581448576794),
    Fraction(138816450390479914710584802, 144189564446831042990725115),
    Fraction(10667746155294185, 5531890170247464),
)


# -- shift-and-check ------------------------------------------------------------------


def test_shifted_nonneg_basic():
    n = MultiPoly.variable("n")
    p = n * n - 3 * n + 1          # negative dip for small n ...
    assert not ct.shifted_nonneg(p, {}, strict=False).ok
    assert ct.shifted_nonneg(p, {"n": 3}, strict=True).ok   # ... gone for n >= 3


def test_shifted_nonneg_strict_needs_positive_constant():
    n = MultiPoly.variable("n")
    check = ct.shifted_nonneg(n, {}, strict=True)
    assert not check.ok and "constant" in check.witness


# -- axis-bound certificates -----------------------------------------------------------


def test_simple_failing_certificate_modulus_of_it():
    # |it| <= 1 is false; the certificate polynomial is 1 - s
    cert = ct.imag_axis_bound_certificate(LAM, RatFunc.coerce(1), {}, "demo", "demo")
    s = MultiPoly.variable("s")
    assert cert.polynomial == 1 - s or cert.polynomial == -(s - 1)
    assert not cert.verdict


def test_fallback_case_polynomial_matches_published_value():
    fam = family_by_key("1_min_4")
    aux = qs.auxiliary(fam)
    triple = qs.bound_triple(fam)
    cert = ct.imag_axis_bound_certificate(
        aux.delta_start, RatFunc.coerce(triple.alpha), {}, fam.key, "delta_N")
    assert cert.verdict
    assert cert.fallback is not None and cert.fallback.ok
    expected = parse_expression(FALLBACK_POLY_T).as_poly()
    assert poly_in_t(cert.polynomial) == expected
    # the fallback discriminant is negative by exact integer arithmetic
    assert cert.fallback.discriminant == 380160 ** 2 - 4 * 1843200 * 606252
    assert cert.fallback.discriminant < 0


def test_general_epsilon_certificate_passes_by_inspection():
    fam = family_by_key("geq3_pl_geq6")
    aux = qs.auxiliary(fam)
    triple = qs.bound_triple(fam)
    cert = ct.imag_axis_bound_certificate(
        aux.epsilon, triple.gamma, fam.shifts(start_index_case(fam)),
        fam.key, "epsilon")
    assert cert.verdict and cert.fallback is None


def test_certificate_rejects_nonreal_structure():
    rho = RatFunc.variable("rho")
    with pytest.raises(ct.NonRealCoefficients):
        ct.imag_axis_bound_certificate(rho, RatFunc.coerce(1), {}, "x", "x")


def test_quadratic_fallback_unit_cases():
    s = MultiPoly.variable("s")
    assert ct.quadratic_fallback(1 - 2 * s + s * s).ok            # discriminant 0
    assert not ct.quadratic_fallback(1 - 3 * s + s * s).ok        # discriminant 5
    with pytest.raises(ct.FallbackNotApplicable):
        ct.quadratic_fallback(1 + s)                               # nothing to rescue
    with pytest.raises(ct.FallbackNotApplicable):
        ct.quadratic_fallback(-1 + 3 * s)                          # offender at s^0
    with pytest.raises(ct.FallbackNotApplicable):
        n = MultiPoly.variable("n")
        ct.quadratic_fallback(n - 2 * s + s * s)                   # not univariate


# -- Wall expansion -----------------------------------------------------------------------


def test_wall_on_r3_numerator_reproduces_printed_coefficients():
    fam = family_by_key("1_pl_4")
    r3 = r_iterates(fam, 3)[3]
    expansion = ct.wall_continued_fraction(r3.num)
    assert expansion.coefficients == WALL_EXPECTED
    assert expansion.hurwitz


def test_wall_degree2_closed_form():
    # hand oracle from the continued-fraction identity:
    # Q/P = 1/(1 + c1 z + 1/(c2 z)), P = z^2 + b1 z + b2  =>  c1 = 1/b1, c2 = b1/b2
    expansion = ct.wall_continued_fraction([1, 3, 2])
    assert expansion.coefficients == (Fraction(1, 3), Fraction(3, 2))
    assert expansion.hurwitz


def test_wall_degenerate_cases():
    assert not ct.wall_continued_fraction([1, 0, 1]).ok        # z^2 + 1
    exp = ct.wall_continued_fraction([1, -3, 2])               # roots 1, 2
    assert exp.ok and not exp.hurwitz


def test_wall_product_of_linear_factors_property():
    rng = random.Random(4242)
    for _ in range(20):
        degree = rng.randint(2, 6)
        roots = [Fraction(rng.randint(1, 12), rng.randint(1, 6)) for _ in range(degree)]
        # expand prod (z + r) by convolution: all roots at -r < 0
        coeffs = [Fraction(1)]
        for r in roots:
            new = [Fraction(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                new[i] += c            # z * c z^i
                new[i + 1] += r * c    # r * c z^i
            coeffs = new
        assert ct.wall_continued_fraction(coeffs).hurwitz
        # flipping one root's sign always breaks stability
        flipped = [Fraction(1)]
        for i, r in enumerate(roots):
            rr = -r if i == 0 else r
            new = [Fraction(0)] * (len(flipped) + 1)
            for j, c in enumerate(flipped):
                new[j] += c
                new[j + 1] += rr * c
            flipped = new
        assert not ct.wall_continued_fraction(flipped).hurwitz


def test_closed_forms_agree_with_wall_on_random_polynomials():
    rng = random.Random(31337)
    for _ in range(50):
        if rng.random() < 0.5:
            b1 = Fraction(rng.randint(-8, 8), rng.randint(1, 4))
            b2 = Fraction(rng.randint(-8, 8), rng.randint(1, 4))
            by_wall = ct.wall_continued_fraction([1, b1, b2]).hurwitz
            by_closed, _ = ct.hurwitz_degree2(b1, b2)
            assert by_wall == by_closed, (b1, b2)
        else:
            bs = [Fraction(rng.randint(-6, 10), rng.randint(1, 3)) for _ in range(4)]
            by_wall = ct.wall_continued_fraction([Fraction(1)] + bs).hurwitz
            by_closed, _ = ct.hurwitz_degree4(*bs)
            assert by_wall == by_closed, bs


def test_hurwitz_degree4_unit_circle_roots():
    # z^4 + z^3 + z^2 + z + 1 has b1 b2 b3 - b3^2 - b1^2 b4 = -1
    ok, checks = ct.hurwitz_degree4(1, 1, 1, 1)
    assert not ok
    combo = RatFunc.coerce(1 * 1 * 1 - 1 - 1)
    assert combo == RatFunc.coerce(-1)


def test_hurwitz_degree2_symbolic_over_range():
    dd = RatFunc.variable("d")
    ok, _ = ct.hurwitz_degree2((dd - 3) / (dd - 2), 1 / (dd - 2), {"d": 4})
    assert ok
    ok2, _ = ct.hurwitz_degree2(dd - 7, RatFunc.coerce(1), {"d": 4})
    assert not ok2    # d - 7 is negative at the start of the shifted range


# -- per-family certificates ---------------------------------------------------------------


def test_rtilde_nonzero_certificates_all_families():
    for fam in FAMILIES:
        cert = ct.rtilde_nonzero_certificate(fam)
        assert cert.verdict, (fam.key, cert.witness)


def test_r_holomorphy_certificate_degrees_and_criteria():
    by_key = {}
    for fam in FAMILIES:
        cert = ct.r_holomorphy_certificate(fam)
        assert cert.verdict, (fam.key, cert.witness)
        by_key[fam.key] = cert.details["criterion"]
    assert by_key["1_pl_4"] == "wall"
    assert by_key["1_pl_geq5"] == "degree4"
    assert by_key["1_min_4"] == "degree4"
    assert by_key["geq3_pl_geq6"] == "degree2"
    assert by_key["2_1_geq4"] == "degree2"


def test_full_bundle_for_fallback_family():
    bundle = ct.certify_case(family_by_key("1_min_4"))
    assert bundle.passed
    delta = bundle.by_target("delta_N")
    assert delta.fallback is not None and delta.fallback.ok
    assert bundle.by_target("contraction").verdict
    assert len(bundle.notes) == 3


def test_certificates_reverify_numerically():
    bundle = ct.certify_case(family_by_key("2_min_geq5"))
    for cert in bundle.certificates:
        assert ct.verify_certificate_numerically(cert, samples=50)


def test_corrupted_bound_fails_with_witness():
    fam = family_by_key("1_pl_geq5")
    n0 = start_index_case(fam)
    aux = qs.auxiliary(fam)
    # a weakened C bound still passes coefficientwise, but the contraction
    # identity breaks with residual 1/20 ...
    loose = qs.BoundTriple(Fraction(1, 3), RatFunc.coerce(Fraction(3, 5)),
                           RatFunc.coerce(Fraction(1, 12)), fam)
    assert loose.contraction_residual() == RatFunc.coerce(Fraction(1, 20))
    # ... while a tightened bound fails with a negative-coefficient witness
    cert = ct.imag_axis_bound_certificate(
        aux.C, RatFunc.coerce(Fraction(1, 5)), fam.shifts(n0), fam.key, "C")
    assert not cert.verdict
    assert "negative coefficient" in cert.witness


def test_bundle_serialization_deterministic():
    fam = family_by_key("1_1_4")
    text1 = ct.serialize_bundle(ct.certify_case(fam))
    text2 = ct.serialize_bundle(ct.certify_case(fam))
    assert text1 == text2
    assert "[case 1_1_4]" in text1
    assert "verdict = pass" in text1


def test_serialized_certificate_polynomials_parse_back():
    fam = family_by_key("1_min_4")
    bundle = ct.certify_case(fam)
    cert = bundle.by_target("delta_N")
    text = ct.serialize_certificate(cert)
    for line in text.splitlines():
        if line.startswith("polynomial = "):
            expr = parse_expression(line.split(" = ", 1)[1])
            assert expr == RatFunc(poly_in_t(cert.polynomial))
            break
    else:
        raise AssertionError("no polynomial line in serialized certificate")
