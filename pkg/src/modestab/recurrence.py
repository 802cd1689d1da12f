"""Three-term recurrence engine for the power-series coefficients.

The normal-form equation forces a_{n+2} = A_n a_{n+1} + B_n a_n on the series
coefficients (a_{-1} = 0, a_0 = 1).  This module provides

* the tabulated coefficient pair (A_n, B_n) per case row, with any of
  lambda, n, d, l symbolic,
* an independent re-derivation of (A_n, B_n) from the differential equation
  by series insertion and band extraction (the oracle for the tables),
* exact symbolic iterates r_n = a_{n+1}/a_n of the ratio recurrence
  r_{n+1} = A_n + B_n / r_n,
* overflow-safe numeric ratio/value sequences for concrete parameters, and
* the coefficient limits and characteristic roots driving the ratio
  dichotomy (limits 1 and -1/(d-2)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from modestab.cases import CaseSpec, InvalidCase, is_special_row, m_expr, m_value
from modestab.exactalg import MultiPoly, RatFunc, ratfunc_sqrt
from modestab.odeverify import OdeSecondOrder

LAM = RatFunc.variable("lambda")
N = RatFunc.variable("n")


class NotThreeTerm(ValueError):
    """Series insertion produced more than three coefficient bands."""


class IntermediateZeroFunction(ZeroDivisionError):
    """A symbolic ratio iterate vanished identically."""


class ZeroDenominatorAtStep(ZeroDivisionError):
    def __init__(self, step: int):
        super().__init__(f"coefficient a_{step} vanished; ratio undefined")
        self.step = step


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """Coefficient pair of a_{n+2} = A_n a_{n+1} + B_n a_n for one case row."""

    A: RatFunc
    B: RatFunc
    case: CaseSpec | None = None

    def at(self, n) -> tuple:
        return self.A.substitute("n", n), self.B.substitute("n", n)


def recurrence_tables(d, l, m_kind: str) -> RecurrenceCoeffs:
    """Tabulated (A_n, B_n); d and l may be None for symbolic parameters."""
    d_e = RatFunc.variable("d") if d is None else RatFunc.coerce(d)
    l_e = RatFunc.variable("l") if l is None else RatFunc.coerce(l)
    lam, n = LAM, N
    if is_special_row(l, m_kind):
        if l == 1 and m_kind == "plus":
            den = 2 * (d_e - 2) * (n + 2) * (2 * n + d_e + 6)
            a = (4 * (d_e - 3) * n ** 2 + (4 * (d_e - 2) * lam + 16 * (d_e - 3)) * n
                 + (d_e - 2) * lam ** 2 + 9 * (d_e - 2) * lam + 14 * d_e - 44) / den
            b = (2 * n + lam + 2) * (2 * n + lam + 3) / den
        elif l == 1 and m_kind == "one":
            den = 2 * (d_e - 2) * (n + 2) * (2 * n + d_e + 6)
            a = (4 * (d_e - 3) * n ** 2 + (4 * (d_e - 2) * lam + 16 * (d_e - 3)) * n
                 + (d_e - 2) * lam ** 2 + 9 * (d_e - 2) * lam + 16 * (d_e - 3)) / den
            b = (2 * n + lam + 1) * (2 * n + lam + 4) / den
        else:
            den = 2 * (d_e - 2) * (n + 2) * (2 * n + d_e + 8)
            a = (4 * (d_e - 3) * n ** 2 + (4 * (d_e - 2) * lam + 20 * (d_e - 3)) * n
                 + (d_e - 2) * lam ** 2 + 11 * (d_e - 2) * lam + 24 * (d_e - 3)) / den
            b = (2 * n + lam + 3) * (2 * n + lam + 4) / den
        return RecurrenceCoeffs(a, b)
    m_e = m_expr(l_e, d_e, m_kind)
    den = 2 * (d_e - 2) * (n + 2) * (2 * n + 2 * l_e + d_e + 2)
    a = (4 * (d_e - 3) * n ** 2
         + (4 * (d_e - 2) * lam + 4 * (d_e - 3) * l_e + 8 * d_e - 16) * n
         + (d_e - 2) * lam ** 2 + (d_e - 2) * (2 * l_e + 5) * lam
         + (d_e - 2) * l_e ** 2 + 5 * (d_e - 2) * l_e + 2 * d_e - 4 * m_e) / den
    b = (2 * n + lam + l_e - 2) * (2 * n + lam + l_e - 1) / den
    return RecurrenceCoeffs(a, b)


def coeffs(case: CaseSpec) -> RecurrenceCoeffs:
    """Table entry for a certificate family (symbolic over its open ranges)."""
    d = None if case.d_open else case.d_start
    l = None if case.l_open else case.l_start
    rc = recurrence_tables(d, l, case.m_kind)
    return RecurrenceCoeffs(rc.A, rc.B, case)


def derive_recurrence_from_ode(ode: OdeSecondOrder) -> tuple:
    """Re-derive (A_n, B_n) from the equation by inserting h = sum a_n x^n.

    Clears denominators to polynomial coefficients alpha h'' + beta h' +
    gamma h = 0 of x-degree at most 3, reads off the coefficient bands of the
    relation in x^n, demands that all bands beyond three vanish identically,
    and solves for A_n, B_n.  This is the independent oracle for the
    tabulated coefficients.
    """
    if ode.var != "x":
        raise InvalidCase("series derivation expects an equation in x")
    from modestab.exactalg import poly_div_exact

    den_p, den_q = ode.p.den, ode.q.den
    q_over_p = poly_div_exact(den_q, den_p)
    p_over_q = poly_div_exact(den_p, den_q)
    if q_over_p is not None:
        alpha_p = den_q
        beta_p = q_over_p * ode.p.num
        gamma_p = ode.q.num
    elif p_over_q is not None:
        alpha_p = den_p
        beta_p = ode.p.num
        gamma_p = p_over_q * ode.q.num
    else:
        alpha_p = den_p * den_q
        beta_p = den_q * ode.p.num
        gamma_p = den_p * ode.q.num
    polys = (alpha_p, beta_p, gamma_p)
    if max(p.degree("x") for p in polys) > 3:
        raise NotThreeTerm("cleared coefficients exceed cubic degree in x")

    a_c = alpha_p.coefficients_in("x")
    b_c = beta_p.coefficients_in("x")
    g_c = gamma_p.coefficients_in("x")
    n = MultiPoly.variable("n")

    def band(k: int) -> MultiPoly:
        # coefficient multiplying a_{n+1-k} in the x^n relation
        out = MultiPoly.zero()
        if k + 1 in a_c:
            out = out + a_c[k + 1] * (n + (1 - k)) * (n - k)
        if k in b_c:
            out = out + b_c[k] * (n + (1 - k))
        if k - 1 in g_c:
            out = out + g_c[k - 1]
        return out

    for k in range(3, 5):
        if not band(k).is_zero:
            raise NotThreeTerm(f"band at offset {k} does not vanish")
    lead = band(0)
    if lead.is_zero:
        raise NotThreeTerm("leading band vanishes identically")
    shift = RatFunc.variable("n") + 1
    lead_s = RatFunc(lead).substitute("n", shift)
    a = -RatFunc(band(1)).substitute("n", shift) / lead_s
    b = -RatFunc(band(2)).substitute("n", shift) / lead_s
    return a, b


# -- symbolic ratio iterates -----------------------------------------------------


def r_iterates(case: CaseSpec, upto: int) -> list:
    """Exact [r_0, ..., r_upto] with r_0 = A_{-1}, r_{k+1} = A_k + B_k / r_k."""
    rc = coeffs(case)
    a0, b0 = rc.at(-1)
    iterates = [a0]
    for k in range(upto):
        a_k, b_k = rc.at(k)
        prev = iterates[-1]
        if prev.is_zero:
            raise IntermediateZeroFunction(f"r_{k} vanishes identically")
        iterates.append(a_k + b_k / prev)
    return iterates


def r_symbolic(case: CaseSpec, n: int | None = None) -> RatFunc:
    """Exact symbolic ratio iterate r_n.

    The default index is N(d,l,m) - 1, the iterate whose numerator the
    pole-freeness certificate analyses; pass ``n`` for any other iterate.
    """
    from modestab.cases import start_index_case

    if n is None:
        n = start_index_case(case) - 1
    return r_iterates(case, n)[n]


# -- numeric sequences -------------------------------------------------------------


def numeric_sequence(case: CaseSpec, d: int, l: int, lam: complex, n_max: int,
                     mode: str = "ratio", rescale_every: int = 64,
                     strict: bool = False) -> list:
    """Float iteration of the coefficient recurrence at concrete parameters.

    ``ratio`` mode returns [r_0, ..., r_{n_max}] with periodic rescaling of
    the coefficient pair (which leaves every ratio unchanged); ``value`` mode
    returns the raw coefficients [a_0, ..., a_{n_max+1}] without rescaling and
    is intended for moderate n_max.

    A vanishing coefficient makes one ratio entry infinite without breaking
    later entries (this happens e.g. at lambda = 0 for l=1, m=1+d-2, where the
    first coefficient is a symmetry-mode zero); ``strict`` raises
    ZeroDenominatorAtStep instead.
    """
    if not case.contains(d, l):
        raise InvalidCase(f"(d={d}, l={l}) outside family {case.key}")
    rc = recurrence_tables(d, l, case.m_kind)
    a_fn = _ratfunc_to_lambda_n_callable(rc.A, d, l)
    b_fn = _ratfunc_to_lambda_n_callable(rc.B, d, l)
    lam = complex(lam)
    prev, curr = 0j, 1 + 0j      # a_{-1}, a_0
    ratios = []
    values = [curr]
    for k in range(-1, n_max):
        nxt = a_fn(k, lam) * curr + b_fn(k, lam) * prev
        prev, curr = curr, nxt
        if mode == "value":
            values.append(curr)
        else:
            if prev == 0:
                if strict:
                    raise ZeroDenominatorAtStep(k + 1)
                ratios.append(complex("inf"))
            else:
                ratios.append(curr / prev)
            if rescale_every and (k + 2) % rescale_every == 0:
                scale = max(abs(prev), abs(curr))
                if scale > 0:
                    prev /= scale
                    curr /= scale
    return values if mode == "value" else ratios


def _ratfunc_to_lambda_n_callable(f: RatFunc, d: int, l: int):
    """Compile a table entry into a fast (n, lambda) -> complex callable."""
    f = f.substitute("d", d).substitute("l", l)

    def poly_coeffs(p: MultiPoly) -> dict:
        return {e: c for e, c in p.coefficients_in("lambda").items()}

    num_c = {e: c for e, c in f.num.coefficients_in("lambda").items()}
    den_c = {e: c for e, c in f.den.coefficients_in("lambda").items()}

    def horner(coeff_polys: dict, n_val: float) -> dict:
        return {e: float(p.evaluate({"n": Fraction(n_val)})) for e, p in coeff_polys.items()}

    def call(n_val: int, lam: complex) -> complex:
        num = sum(float(p.evaluate({"n": n_val})) * lam ** e for e, p in num_c.items())
        den = sum(float(p.evaluate({"n": n_val})) * lam ** e for e, p in den_c.items())
        return num / den

    return call


def sweep_grid(d: int, l: int, m_kind: str, re_max: Fraction, im_max: Fraction,
               step: Fraction, n_max: int, rescale_every: int = 64) -> tuple:
    """Vectorised ratio iteration over the half-plane grid.

    Returns (grid of lambda values, r_{n_max} per grid point) as numpy arrays.
    Grid: Re(lambda) in [0, re_max], Im(lambda) in [-im_max, im_max], spacing
    ``step`` (exact rational spacing, evaluated in double precision).
    """
    rc = recurrence_tables(d, l, m_kind)
    re_n = int(Fraction(re_max) / Fraction(step)) + 1
    im_n = 2 * int(Fraction(im_max) / Fraction(step)) + 1
    res = [float(Fraction(step) * k) for k in range(re_n)]
    ims = [float(-Fraction(im_max) + Fraction(step) * k) for k in range(im_n)]
    lam = np.array([complex(r, i) for r in res for i in ims])

    def compile_poly_pair(f: RatFunc):
        f = f.substitute("d", d).substitute("l", l)
        num_c = [(e, p) for e, p in f.num.coefficients_in("lambda").items()]
        den_c = [(e, p) for e, p in f.den.coefficients_in("lambda").items()]
        return num_c, den_c

    a_num, a_den = compile_poly_pair(rc.A)
    b_num, b_den = compile_poly_pair(rc.B)
    lam_pows = {e: lam ** e for e in range(3)}

    def eval_at(coeff_list, n_val):
        total = np.zeros_like(lam)
        for e, p in coeff_list:
            total = total + float(p.evaluate({"n": n_val})) * lam_pows[e]
        return total

    prev = np.zeros_like(lam)
    curr = np.ones_like(lam)
    for k in range(-1, n_max):
        a_k = eval_at(a_num, k) / eval_at(a_den, k)
        b_k = eval_at(b_num, k) / eval_at(b_den, k)
        prev, curr = curr, a_k * curr + b_k * prev
        if rescale_every and (k + 2) % rescale_every == 0:
            scale = np.maximum(np.abs(prev), np.abs(curr))
            scale[scale == 0] = 1.0
            prev = prev / scale
            curr = curr / scale
    return lam, curr / prev


# -- limits and the ratio dichotomy ------------------------------------------------


@dataclass(frozen=True)
class RatioLimits:
    lim_A: RatFunc
    lim_B: RatFunc
    roots: tuple
    distinct_moduli: bool


def limits(case: CaseSpec) -> RatioLimits:
    """n -> infinity limits of (A_n, B_n) and the characteristic roots.

    The limits are read off by leading-coefficient extraction in n and the
    quadratic  alpha^2 - lim_A * alpha - lim_B = 0  is solved exactly.  The
    root moduli are distinct except at the boundary dimension d = 3, which is
    flagged via ``distinct_moduli``.
    """
    rc = coeffs(case)

    def limit_of(f: RatFunc) -> RatFunc:
        deg_n = f.num.degree("n")
        deg_d = f.den.degree("n")
        if deg_n != deg_d:
            raise InvalidCase("coefficient limit requires equal n-degrees")
        return RatFunc(f.num.leading_coefficient_in("n"),
                       f.den.leading_coefficient_in("n"))

    lim_a = limit_of(rc.A)
    lim_b = limit_of(rc.B)
    disc = lim_a * lim_a + 4 * lim_b
    root = ratfunc_sqrt(disc)
    if root is None:
        raise InvalidCase("characteristic discriminant is not a perfect square")
    r1 = (lim_a + root) / 2
    r2 = (lim_a - root) / 2
    # equal moduli would need r1 = -r2, i.e. lim_A = 0; here that means d = 3
    distinct = not (case.d_start == 3 and not case.d_open)
    return RatioLimits(lim_a, lim_b, (r1, r2), distinct)


def lambda_leading_behavior_matches(case: CaseSpec, n_value: int) -> bool:
    """Check the large-lambda expansion of r_n for the general (non-removed) rows.

    Verifies that   r_n * 2(n+1)(2n+2l+d) - (lambda^2 + (4n+2l+1) lambda)
    stays bounded as lambda -> infinity, i.e. the two top coefficients of the
    quotient expansion match the quasi-solution ansatz.
    """
    if is_special_row(case.l_start if not case.l_open else None, case.m_kind):
        raise InvalidCase("lambda expansion is tabulated for the general rows only")
    r_n = r_symbolic(case, n_value)
    d_e = case.d_param()
    l_e = case.l_param()
    n_e = RatFunc.coerce(n_value)
    scale = 2 * (n_e + 1) * (2 * n_e + 2 * l_e + d_e)
    lead = LAM * LAM + (4 * n_e + 2 * l_e + 1) * LAM
    rem = r_n * scale - lead
    return rem.num.degree("lambda") <= rem.den.degree("lambda")
