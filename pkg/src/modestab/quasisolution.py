"""Quasi-solutions, auxiliary error functions, and bound triples.

A quasi-solution rt_n(lambda) is an explicit degree-2 polynomial in lambda
approximating the true ratio iterate r_n well enough that the relative error

    delta_n = r_n / rt_n - 1

obeys a contraction: with C_n = B_n / (rt_n rt_{n+1}) and
epsilon_n = (A_n rt_n + B_n) / (rt_n rt_{n+1}) - 1 one has

    delta_{n+1} = epsilon_n - C_n * delta_n / (1 + delta_n),

so bounds |delta_N| <= alpha, |C_n| <= beta, |epsilon_n| <= gamma propagate to
all n >= N provided  gamma + beta * alpha / (1 - alpha) = alpha  and
alpha <= 1/2.  This module houses the tabulated quasi-solutions, the starting
index N, the auxiliary functions and the bound triples; the positivity
machinery that proves the bounds lives in ``certify``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from modestab.cases import CaseSpec, InvalidCase, start_index_case
from modestab.exactalg import RatFunc
from modestab.recurrence import RecurrenceCoeffs, coeffs, r_iterates

LAM = RatFunc.variable("lambda")
N = RatFunc.variable("n")


class IdentityFailed(AssertionError):
    """An exact identity expected to hold did not."""


@dataclass(frozen=True)
class QuasiSolution:
    """Tabulated approximation to the ratio iterates; degree 2 in lambda."""

    expr: RatFunc
    case: CaseSpec

    def at(self, n) -> RatFunc:
        return self.expr.substitute("n", n)

    def lambda_coefficients(self) -> dict:
        return self.expr.coefficients_in("lambda")

    def limit_coefficientwise(self) -> RatFunc:
        """n -> infinity limit (the lambda-free part's leading ratio)."""
        c0 = self.lambda_coefficients()[0]
        deg = c0.num.degree("n")
        if deg != c0.den.degree("n"):
            raise InvalidCase("constant term degrees do not match")
        return RatFunc(c0.num.leading_coefficient_in("n"),
                       c0.den.leading_coefficient_in("n"))


def _rtilde_l1_l2(case: CaseSpec) -> RatFunc:
    d = case.d_param()
    n = N
    lam = LAM
    l, kind = case.l_start, case.m_kind
    concrete_d4 = (not case.d_open) and case.d_start == 4
    if l == 1 and kind == "plus":
        den = 2 * (n + 1) * (2 * n + d + 4)
        return (lam ** 2 + (4 * n + 5) * lam) / den + (4 * n + 5) / (
            2 * (2 * n + 7) if concrete_d4 else 2 * (2 * n + d + 4))
    if l == 1 and kind == "one":
        den = 2 * (n + 1) * (2 * n + d + 4)
        if concrete_d4:
            return (lam ** 2 + (4 * n + 5) * lam) / den + (20 * n + 33) / (10 * (2 * n + 9))
        return (lam ** 2 + (4 * n + 5) * lam) / den + (2 * n + 3) / (2 * n + d + 5)
    if l == 2 and kind == "plus":
        den = 2 * (n + 1) * (2 * n + d + 6)
        if concrete_d4:
            return (lam ** 2 + (4 * n + 7) * lam) / den + (2 * n + 3) / (2 * n + 7)
        return (lam ** 2 + (4 * n + 7) * lam) / den + (2 * n + 5) / (2 * n + d + 6)
    if l == 1 and kind == "minus":
        den = 2 * (n + 1) * (2 * n + d + 2)
        return (lam ** 2 + (4 * n + 4) * lam) / den + (2 * n + 1) / (2 * n + d + 2)
    if l == 2 and kind == "one":
        den = 2 * (n + 1) * (2 * n + d + 4)
        return (lam ** 2 + (4 * n + 6) * lam) / den + (2 * n + 2) / (2 * n + d + 4)
    if l == 2 and kind == "minus":
        den = 2 * (n + 1) * (2 * n + d + 4)
        return (lam ** 2 + (4 * n + 6) * lam) / den + (2 * n + 3) / (2 * n + d + 4)
    raise InvalidCase(f"no quasi-solution row for {case.key}")


def _rtilde_low_dim_high_l(case: CaseSpec) -> RatFunc:
    # d = 4 or d = 5 with l >= 3 symbolic; the minus entry at d = 5 is
    # defined to coincide with the m = 1 entry.
    d0 = case.d_start
    l = case.l_param()
    n = N
    lam = LAM
    lam_part = (lam ** 2 + (4 * n + 2 * l + 1) * lam) / (2 * (n + 1) * (2 * n + 2 * l + d0)) \
        + lam / (2 * (n + 1) * (2 * n + d0))
    kind = case.m_kind
    if d0 == 5 and kind == "minus":
        kind = "one"
    offsets = {"plus": -1, "one": 0, "minus": 2}
    const_part = (3 * l + offsets[kind]) / (2 * (7 * n + 3)) + (n - 1) / (n + 1)
    return lam_part + const_part


def _rtilde_general(case: CaseSpec) -> RatFunc:
    rc = coeffs(case)
    d = case.d_param()
    return rc.A.substitute("n", N - 1) + 1 / (d - 2) - 5 / (10 * N + 3 * d + 10)


def rtilde(case: CaseSpec) -> QuasiSolution:
    """The tabulated quasi-solution for a certificate family."""
    if case.l_open:
        if case.d_open:
            expr = _rtilde_general(case)           # d >= 6, l >= 3
        else:
            expr = _rtilde_low_dim_high_l(case)    # d in {4, 5}, l >= 3
    else:
        expr = _rtilde_l1_l2(case)
    return QuasiSolution(expr, case)


def rtilde_general_expanded(case: CaseSpec) -> RatFunc:
    """The expanded display of the general (d >= 6, l >= 3) quasi-solution."""
    if not (case.d_open and case.l_open):
        raise InvalidCase("expanded form applies to the fully open families")
    d = case.d_param()
    l = case.l_param()
    m = case.m_param()
    n = N
    lam = LAM
    return (lam ** 2 / (2 * (n + 1) * (2 * n + 2 * l + d))
            + (4 * n + 2 * l + 1) * lam / (2 * (n + 1) * (2 * n + 2 * l + d))
            + 1 - 5 / (10 * n + 3 * d + 10)
            + ((-2 * d ** 2 + 2 * d + 20) * n + (d - 2) * l ** 2
               + (-3 * d + 14) * l - 2 * d ** 2 + 4 * d - 4 * m + 4)
            / (2 * (d - 2) * (n + 1) * (2 * n + 2 * l + d)))


@dataclass(frozen=True)
class AuxiliaryFunctions:
    """delta at the starting index, plus C_n and epsilon_n with n symbolic."""

    case: CaseSpec
    start: int
    r_start: RatFunc       # exact ratio iterate r_N
    delta_start: RatFunc   # r_N / rt_N - 1
    C: RatFunc             # B_n / (rt_n rt_{n+1})
    epsilon: RatFunc       # (A_n rt_n + B_n)/(rt_n rt_{n+1}) - 1


def auxiliary(case: CaseSpec) -> AuxiliaryFunctions:
    n0 = start_index_case(case)
    rc = coeffs(case)
    rt = rtilde(case)
    iterates = r_iterates(case, n0)
    r_n0 = iterates[n0]
    delta = r_n0 / rt.at(n0) - 1
    rt_n = rt.expr
    rt_next = rt.at(N + 1)
    c_fn = rc.B / (rt_n * rt_next)
    eps_fn = (rc.A * rt_n + rc.B) / (rt_n * rt_next) - 1
    return AuxiliaryFunctions(case, n0, r_n0, delta, c_fn, eps_fn)


def delta_recursion_residual(case: CaseSpec) -> RatFunc:
    """Residual of the one-step error recursion with a symbolic current ratio.

    Substituting r_{n+1} = A_n + B_n / r_n (r_n kept symbolic, stand-in
    variable x) into delta_{n+1} must reproduce
    epsilon_n - C_n delta_n / (1 + delta_n) exactly.
    """
    rc = coeffs(case)
    rt = rtilde(case)
    rt_n = rt.expr
    rt_next = rt.at(N + 1)
    c_fn = rc.B / (rt_n * rt_next)
    eps_fn = (rc.A * rt_n + rc.B) / (rt_n * rt_next) - 1
    r_sym = RatFunc.variable("x")
    delta_n = r_sym / rt_n - 1
    delta_next = (rc.A + rc.B / r_sym) / rt_next - 1
    return delta_next - (eps_fn - c_fn * delta_n / (1 + delta_n))


def epsilon_decomposition_residual(case: CaseSpec) -> RatFunc:
    """epsilon_n minus its split (A_n - rt_{n+1}) rt_n/(rt_n rt_{n+1}) + C_n."""
    rc = coeffs(case)
    rt = rtilde(case)
    rt_n = rt.expr
    rt_next = rt.at(N + 1)
    eps_fn = (rc.A * rt_n + rc.B) / (rt_n * rt_next) - 1
    c_fn = rc.B / (rt_n * rt_next)
    return eps_fn - ((rc.A - rt_next) * rt_n / (rt_n * rt_next) + c_fn)


@dataclass(frozen=True)
class BoundTriple:
    """(alpha, beta_n, gamma_n) controlling the error induction for one family."""

    alpha: Fraction
    beta: RatFunc
    gamma: RatFunc
    case: CaseSpec

    def contraction_residual(self) -> RatFunc:
        a = RatFunc.coerce(self.alpha)
        return self.gamma + self.beta * a / (1 - a) - a

    @property
    def alpha_at_most_half(self) -> bool:
        return self.alpha <= Fraction(1, 2)


def bound_triple(case: CaseSpec) -> BoundTriple:
    """Tabulated (alpha, beta, gamma); rows resolved most-specific first."""
    l, kind = case.l_start, case.m_kind
    d0, d_open = case.d_start, case.d_open
    half = Fraction(1, 2)
    third = Fraction(1, 3)

    if not case.l_open:
        if l == 1 and kind == "one" and d0 == 4 and not d_open:
            return BoundTriple(Fraction(1, 4), RatFunc.coerce(Fraction(11, 20)),
                               RatFunc.coerce(Fraction(1, 15)), case)
        if l == 1 and kind == "minus" and d0 >= 5:
            return BoundTriple(third, RatFunc.coerce(third),
                               RatFunc.coerce(Fraction(1, 6)), case)
        if l == 2 and kind == "minus" and d0 >= 5:
            return BoundTriple(third, RatFunc.coerce(third),
                               RatFunc.coerce(Fraction(1, 6)), case)
        return BoundTriple(third, RatFunc.coerce(half),
                           RatFunc.coerce(Fraction(1, 12)), case)
    if d0 == 4 and not d_open:
        l_e = case.l_param()
        beta = half - l_e / (6 * (l_e + N + 1))
        gamma = Fraction(1, 12) + l_e / (12 * (l_e + N + 1))
        return BoundTriple(third, beta, gamma, case)
    return BoundTriple(half, RatFunc.coerce(third), RatFunc.coerce(Fraction(1, 6)), case)


def contraction_check(triple: BoundTriple) -> bool:
    """gamma + beta*alpha/(1-alpha) = alpha as an exact identity, and alpha <= 1/2."""
    if not triple.contraction_residual().is_zero:
        raise IdentityFailed(f"contraction identity fails for {triple.case.key}")
    if not triple.alpha_at_most_half:
        raise IdentityFailed(f"alpha > 1/2 for {triple.case.key}")
    return True
