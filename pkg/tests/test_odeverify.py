"""ODE layer: potentials, residuals, factorization identities, normal form,
indicial roots and the l = 0 hypergeometric series."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from modestab import odeverify as ov
from modestab.exactalg import PowerProduct, RatFunc

D = RatFunc.variable("d")
L = RatFunc.variable("l")
RHO = RatFunc.variable("rho")


# -- potentials -------------------------------------------------------------------


def test_tilde_potential_l0():
    v = ov.potential(None, 0, None, "tilde")
    assert v == -2 * D / (RHO ** 2 * (1 - RHO ** 2))


def test_tilde_equals_original_outside_removed_rows():
    assert ov.potential(None, 3, "one", "tilde") == ov.potential(None, 3, "one", "original")
    assert ov.potential(None, 1, "minus", "tilde") == ov.potential(None, 1, "minus", "original")
    # and differs on a removed row
    assert not ov.potential(None, 1, "plus", "tilde") == ov.potential(None, 1, "plus", "original")


def test_potential_value_against_hand_expansion():
    # independent evaluation oracle at d=3, l=1, m=2 (= l+d-2), rho = 1/2:
    # numerator -(d-2)^2 l(l+d-2) + 2(d-2)(-2+2d+2m-l(l+d-2)) rho^2
    #           + (4-4d+4m-l(l+d-2)) rho^4 over rho^2 (1-rho^2)(d-2+rho^2)^2
    rho = Fraction(1, 2)
    num = (Fraction(-1 * 1 * 2)
           + 2 * 1 * (-2 + 6 + 4 - 2) * rho ** 2
           + (4 - 12 + 8 - 2) * rho ** 4)
    den = rho ** 2 * (1 - rho ** 2) * (1 + rho ** 2) ** 2
    expected = num / den
    assert expected == Fraction(224, 75)
    got = ov.potential(3, 1, 2, "original").evaluate({"rho": rho})
    assert got == expected


def test_potential_rejects_bad_cases():
    with pytest.raises(Exception):
        ov.potential(2, 1, "plus")
    with pytest.raises(Exception):
        ov.potential(4, 1, 2, "original")       # m=2 not admissible for l=1, d=4
    with pytest.raises(Exception):
        ov.potential(4, 1, None, "original")    # m required for l >= 1
    with pytest.raises(Exception):
        ov.potential(4, 0, None, "sideways")


# -- mode equation and residuals ----------------------------------------------------


def test_mode_ode_first_order_pole_residue():
    ode = ov.mode_ode(None, 2, "one", "original")
    order, lead = ov._laurent_leading(ode.p, "rho")
    assert order == 1 and lead == D - 1


def test_mode_ode_tilde_q_row():
    ode = ov.mode_ode(4, 1, "plus", "tilde")
    lam = RatFunc.variable("lambda")
    rho2 = RHO ** 2
    expected_q = -lam * (lam + 1) / (1 - rho2) \
        - 2 * (4 - 2) * (4 - rho2) / (rho2 * (1 - rho2) * (4 - 2 + rho2))
    assert ode.q == expected_q


def test_symmetry_modes_all_zero_with_symbolic_d():
    residuals = ov.symmetry_mode_residuals()
    assert len(residuals) == 5
    assert all(r.is_zero for r in residuals.values())


def test_symmetry_modes_all_zero_at_concrete_d():
    residuals = ov.symmetry_mode_residuals(6)
    assert all(r.is_zero for r in residuals.values())


def test_residual_nonzero_off_eigenvalue():
    # the l=2 plus mode belongs to lambda = 0; at lambda = 1 it must fail
    ode = ov.mode_ode(None, 2, "plus", "original")
    ode_at = ov.OdeSecondOrder(ode.var, ode.p.substitute("lambda", 1),
                               ode.q.substitute("lambda", 1))
    f = RHO ** 2 / (D - 2 + RHO ** 2)
    res = ov.residual(ode_at, f)
    assert not res.is_zero
    assert res.evaluate({"d": 5, "rho": Fraction(1, 3)}) != 0


# -- factorization identities ----------------------------------------------------------


def test_susy_identities_symbolic():
    report = ov.susy_factor_check()
    assert report.all_zero
    assert len(report.residuals) == 6


def test_susy_identities_concrete_dimension_numeric_spot():
    report = ov.susy_factor_check(5)
    assert report.all_zero
    # numeric oracle: each gauge log-derivative matches its displayed formula
    # at 10 random rational radii
    factors = ov.susy_gauge_factors(5)
    displayed = ov._displayed_log_derivatives(5)
    rng = random.Random(20240517)
    for name, g in factors.items():
        ld = g.log_derivative()
        for _ in range(10):
            rho = Fraction(rng.randint(1, 30), rng.randint(31, 99))
            assert ld.evaluate({"rho": rho}) == displayed[name].evaluate({"rho": rho})


# -- normal-form chain ------------------------------------------------------------------


HEUN_ROWS = [(None, 0, None), (None, 1, "plus"), (None, 1, "one"), (None, 2, "plus"),
             (None, 1, "minus"), (None, 2, "one"), (None, 2, "minus"),
             (None, None, "minus"), (None, None, "one"), (None, None, "plus")]


@pytest.mark.parametrize("d,l,mk", HEUN_ROWS)
def test_heun_chain_reproduces_table(d, l, mk):
    chain = ov.heun_normal_form(d, l, mk)
    table = ov.heun_coeffs(d, l, mk)
    assert chain.same_as(table)


def test_l0_table_q():
    lam = RatFunc.variable("lambda")
    x = RatFunc.variable("x")
    assert ov.heun_coeffs(None, 0).q == (lam + 2) * (lam + 3) / (4 * x * (x - 1))


def test_gauge_with_unit_weight_is_identity():
    ode = ov.heun_coeffs(None, 2, "one")
    same = ov.gauge_transform(ode, PowerProduct.of((RatFunc.coerce(1), 1)))
    assert same.same_as(ode)


def test_gauge_inverse_recovers_ode():
    ode = ov.heun_coeffs(None, 2, "minus")
    w = PowerProduct.of((RatFunc.variable("x"), Fraction(3, 2)),
                        (RatFunc.variable("x") + 2, -1))
    assert ov.gauge_transform(ov.gauge_transform(ode, w), w.inverse()).same_as(ode)


def test_square_substitution_parity_error():
    bad = ov.OdeSecondOrder("rho", 1 / RHO, RHO)   # q odd in rho
    with pytest.raises(ov.SubstitutionParityError):
        ov.variable_square_substitution(bad)


# -- indicial roots ------------------------------------------------------------------------


def test_indicial_roots_generic_and_removed():
    r1, r2 = ov.indicial_roots(ov.mode_ode(None, None, "plus", "original"), 0)
    assert {True} == {r1 == L, r2 == -(L + D - 2)}
    s1, s2 = ov.indicial_roots(ov.mode_ode(None, 0, None, "tilde"), 0)
    assert s1 == RatFunc.coerce(2) and s2 == -D


def test_indicial_roots_double_zero():
    ode = ov.OdeSecondOrder("rho", 1 / RHO, RatFunc.coerce(0))
    r1, r2 = ov.indicial_roots(ode, 0)
    assert r1 == RatFunc.coerce(0) and r2 == RatFunc.coerce(0)


def test_indicial_invariant_under_trivial_gauge():
    ode = ov.mode_ode(5, 2, "one", "original")
    gauged = ov.gauge_transform(ode, PowerProduct.of((RHO, 0)))
    assert ov.indicial_roots(ode, 0) == ov.indicial_roots(gauged, 0)


def test_indicial_irregular_point_raises():
    ode = ov.OdeSecondOrder("rho", 1 / (RHO ** 2), RatFunc.coerce(0))
    with pytest.raises(ov.IrregularSingularPoint):
        ov.indicial_roots(ode, 0)


# -- l = 0 hypergeometric -------------------------------------------------------------------


def test_hypergeom_parameters_and_first_coefficient():
    rep = ov.hypergeometric_check(4, 0, n_max=200, exact_cap=30)
    assert rep.ratio_identity_symbolic
    assert rep.exact_terms_checked == 30
    # (a,b,c) = (1, 3/2, 4): the n=0 coefficient of the series is 1 by
    # construction (empty products); the first ratio is a*b/c = 3/8
    ratio0 = ov.series_ratio_from_ode(4).evaluate({"n": 0, "lambda": 0})
    assert ratio0 == Fraction(1) * Fraction(3, 2) / (Fraction(4) * 1)


def test_hypergeom_ratio_tends_to_one():
    rep = ov.hypergeometric_check(4, 0, n_max=10**4, exact_cap=0)
    assert rep.ratio_error < 1e-3
    rep = ov.hypergeometric_check(5, 1j, n_max=10**4, exact_cap=0)
    assert rep.ratio_error < 1e-3


def test_hypergeom_degenerate_parameters():
    with pytest.raises(ov.DegenerateParameters):
        ov.hypergeometric_check(4, -2, n_max=10)    # a = 0
