"""Exact rational, polynomial and rational-function arithmetic.

Everything downstream (recurrence tables, quasi-solutions, positivity
certificates) is built on the value types in this module:

* ``MultiPoly``    -- sparse multivariate polynomial over the rationals in the
  fixed variable universe ``VARIABLES``,
* ``RatFunc``      -- quotient of two ``MultiPoly`` with nonzero denominator,
* ``PowerProduct`` -- formal product of rational-function bases raised to
  (possibly symbolic) exponents, e.g. the gauge factor
  rho^((d-1)/2) * (1-rho^2)^((3-d)/4) * (d-rho^2)/(d-2+rho^2).

All values are immutable after construction and every operation is a pure
function, so values may be shared freely between threads and processes.

No multivariate gcd is ever computed: rational functions are normalised only
up to integer content and the sign of the denominator, and equality is decided
by cross multiplication.  Certificates need exactness, not canonical forms.

Floating-point evaluation is provided for numerical sweeps and spot checks;
no exact code path depends on it.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

#: Scalar of all exact computation: arbitrary-precision reduced fraction.
Rational = Fraction

#: Fixed, ordered variable universe.  The order defines the graded
#: lexicographic term order used for serialization (ties between monomials of
#: equal total degree are broken by the exponent of the largest variable).
VARIABLES = ("lambda", "t", "s", "n", "d", "l", "rho", "x")

_NVARS = len(VARIABLES)
_VAR_INDEX = {name: i for i, name in enumerate(VARIABLES)}
_ZERO_EXP = (0,) * _NVARS

#: Variable names admitted by the expression serialization grammar.  The
#: internal bookkeeping variable ``s`` (standing for t^2 in certificates) is
#: deliberately absent: certificate polynomials are emitted in ``t``.
GRAMMAR_VARIABLES = ("lambda", "t", "n", "d", "l", "rho", "x")

Scalar = Union[int, Fraction]


class DivisionByZeroFunction(ZeroDivisionError):
    """Division by the zero rational function."""


class PoleAtEvaluationPoint(ZeroDivisionError):
    """Exact evaluation hit a zero of the denominator."""


def _coeff(value: Scalar) -> Scalar:
    """Canonical coefficient: plain int when the denominator is 1."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return value.numerator
        return value
    return int(value)


def _grlex_key(exp: tuple) -> tuple:
    # Graded lex: total degree first, ties broken by the largest variable.
    return (sum(exp), exp[::-1])


class MultiPoly:
    """Sparse multivariate polynomial over ``Fraction`` coefficients.

    ``terms`` maps exponent tuples (one entry per variable in ``VARIABLES``)
    to nonzero coefficients.  The zero polynomial has an empty ``terms`` dict.
    Instances are treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Scalar] | None = None):
        clean = {}
        if terms:
            for exp, c in terms.items():
                c = _coeff(c)
                if c != 0:
                    clean[tuple(exp)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> MultiPoly:
        return cls()

    @classmethod
    def const(cls, value: Scalar) -> MultiPoly:
        value = _coeff(Fraction(value))
        if value == 0:
            return cls()
        return cls({_ZERO_EXP: value})

    @classmethod
    def variable(cls, name: str) -> MultiPoly:
        exp = [0] * _NVARS
        exp[_VAR_INDEX[name]] = 1
        return cls({tuple(exp): 1})

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or self.terms.keys() == {_ZERO_EXP}

    def const_value(self) -> Fraction:
        """Value of a constant polynomial (raises if not constant)."""
        if self.is_zero:
            return Fraction(0)
        if not self.is_const():
            raise ValueError("polynomial is not constant")
        return Fraction(self.terms[_ZERO_EXP])

    def degree(self, var: str) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        if self.is_zero:
            return -1
        i = _VAR_INDEX[var]
        return max(exp[i] for exp in self.terms)

    def total_degree(self) -> int:
        if self.is_zero:
            return -1
        return max(sum(exp) for exp in self.terms)

    def variables_present(self) -> set:
        present = set()
        for exp in self.terms:
            for i, e in enumerate(exp):
                if e:
                    present.add(VARIABLES[i])
        return present

    def sorted_terms(self) -> list:
        """Terms in descending graded-lex order (leading term first)."""
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def leading_term(self) -> tuple:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading term")
        exp = max(self.terms, key=_grlex_key)
        return exp, self.terms[exp]

    # -- ring operations ---------------------------------------------------

    def _coerce(self, other) -> MultiPoly | None:
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(other)
        return None

    def __add__(self, other) -> MultiPoly:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for exp, c in other.terms.items():
            v = out.get(exp, 0) + c
            if v == 0:
                out.pop(exp, None)
            else:
                out[exp] = _coeff(v)
        p = MultiPoly.__new__(MultiPoly)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        p = MultiPoly.__new__(MultiPoly)
        p.terms = {exp: -c for exp, c in self.terms.items()}
        return p

    def __sub__(self, other) -> MultiPoly:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> MultiPoly:
        return (-self) + other

    def __mul__(self, other) -> MultiPoly:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return MultiPoly()
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                exp = tuple(map(int.__add__, ea, eb))
                v = out.get(exp, 0) + ca * cb
                if v == 0:
                    out.pop(exp, None)
                else:
                    out[exp] = v
        p = MultiPoly.__new__(MultiPoly)
        p.terms = {e: _coeff(c) for e, c in out.items()}
        return p

    __rmul__ = __mul__

    def __pow__(self, k: int) -> MultiPoly:
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial power requires a nonnegative integer")
        result = MultiPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    # -- calculus and substitution ------------------------------------------

    def derivative(self, var: str) -> MultiPoly:
        i = _VAR_INDEX[var]
        out = {}
        for exp, c in self.terms.items():
            e = exp[i]
            if e == 0:
                continue
            new = list(exp)
            new[i] = e - 1
            out[tuple(new)] = _coeff(c * e)
        p = MultiPoly.__new__(MultiPoly)
        p.terms = out
        return p

    def substitute(self, var: str, value) -> MultiPoly:
        """Replace ``var`` by a polynomial (or scalar) exactly."""
        if isinstance(value, (int, Fraction)):
            value = MultiPoly.const(value)
        if not isinstance(value, MultiPoly):
            raise TypeError("substitution value must be MultiPoly or scalar")
        i = _VAR_INDEX[var]
        if self.degree(var) <= 0:
            return self
        # powers[e] = value**e, built incrementally up to the maximal exponent
        max_e = self.degree(var)
        powers = [MultiPoly.const(1)]
        for _ in range(max_e):
            powers.append(powers[-1] * value)
        result = MultiPoly()
        for exp, c in self.terms.items():
            e = exp[i]
            rest = list(exp)
            rest[i] = 0
            mono = MultiPoly({tuple(rest): c})
            result = result + (mono * powers[e] if e else mono)
        return result

    def shift(self, var: str, k: Scalar) -> MultiPoly:
        """Variable shift var -> var + k (exact; shift by k then -k is identity)."""
        return self.substitute(var, MultiPoly.variable(var) + MultiPoly.const(k))

    def coefficients_in(self, var: str) -> dict:
        """Split into coefficients of powers of ``var``: {exponent: MultiPoly}."""
        i = _VAR_INDEX[var]
        buckets: dict = {}
        for exp, c in self.terms.items():
            e = exp[i]
            rest = list(exp)
            rest[i] = 0
            buckets.setdefault(e, {})[tuple(rest)] = c
        return {e: MultiPoly(t) for e, t in buckets.items()}

    def leading_coefficient_in(self, var: str) -> MultiPoly:
        """Coefficient of the highest power of ``var`` (zero poly for zero)."""
        if self.is_zero:
            return MultiPoly()
        return self.coefficients_in(var)[self.degree(var)]

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, assignment: Mapping[str, Scalar]) -> Fraction:
        """Exact evaluation; every variable present must be assigned."""
        missing = self.variables_present() - set(assignment)
        if missing:
            raise KeyError(f"unassigned variables: {sorted(missing)}")
        values = [Fraction(assignment.get(name, 0)) for name in VARIABLES]
        total = Fraction(0)
        for exp, c in self.terms.items():
            term = Fraction(c)
            for i, e in enumerate(exp):
                if e:
                    term *= values[i] ** e
            total += term
        return total

    def evaluate_complex(self, assignment: Mapping[str, complex]) -> complex:
        """Double-precision complex evaluation (numerics only)."""
        missing = self.variables_present() - set(assignment)
        if missing:
            raise KeyError(f"unassigned variables: {sorted(missing)}")
        values = [complex(assignment.get(name, 0)) for name in VARIABLES]
        total = 0j
        for exp, c in self.terms.items():
            term = complex(c)
            for i, e in enumerate(exp):
                if e:
                    term *= values[i] ** e
            total += term
        return total

    # -- content -------------------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if self.is_zero:
            return Fraction(0)
        num_gcd = 0
        den_lcm = 1
        for c in self.terms.values():
            f = Fraction(c)
            num_gcd = math.gcd(num_gcd, abs(f.numerator))
            den_lcm = den_lcm * f.denominator // math.gcd(den_lcm, f.denominator)
        return Fraction(num_gcd, den_lcm)

    def primitive(self) -> tuple:
        """Return (content, primitive part) with self == content * primitive."""
        c = self.content()
        if c == 0:
            return Fraction(0), MultiPoly()
        inv = 1 / c
        p = MultiPoly.__new__(MultiPoly)
        p.terms = {e: _coeff(v * inv) for e, v in self.terms.items()}
        return c, p

    def __repr__(self) -> str:
        if self.is_zero:
            return "MultiPoly(0)"
        return f"MultiPoly({_poly_str(self, strict=False)})"


def poly_const(value: Scalar) -> MultiPoly:
    return MultiPoly.const(value)


def poly_var(name: str) -> MultiPoly:
    return MultiPoly.variable(name)


def poly_div_exact(f: MultiPoly, g: MultiPoly) -> MultiPoly | None:
    """Exact polynomial division: q with f == q*g, or None if g does not divide f."""
    if g.is_zero:
        raise DivisionByZeroFunction("division by the zero polynomial")
    if f.is_zero:
        return MultiPoly()
    g_exp, g_coeff = g.leading_term()
    quotient = MultiPoly()
    rem = f
    while not rem.is_zero:
        r_exp, r_coeff = rem.leading_term()
        exp = tuple(map(int.__sub__, r_exp, g_exp))
        if any(e < 0 for e in exp):
            return None
        t = MultiPoly({exp: Fraction(r_coeff) / Fraction(g_coeff)})
        quotient = quotient + t
        rem = rem - t * g
    return quotient


def _frac_sqrt(c: Fraction) -> Fraction | None:
    if c < 0:
        return None
    c = Fraction(c)
    rn = math.isqrt(c.numerator)
    rd = math.isqrt(c.denominator)
    if rn * rn != c.numerator or rd * rd != c.denominator:
        return None
    return Fraction(rn, rd)


def poly_sqrt(p: MultiPoly) -> MultiPoly | None:
    """Square root of a perfect-square polynomial, or None.

    Works by cancelling graded-lex leading terms; terminates because the
    leading monomial of the residual strictly decreases in a well order.
    """
    if p.is_zero:
        return MultiPoly()
    lead_exp, lead_coeff = p.leading_term()
    if any(e % 2 for e in lead_exp):
        return None
    root_coeff = _frac_sqrt(Fraction(lead_coeff))
    if root_coeff is None:
        return None
    q_lead = MultiPoly({tuple(e // 2 for e in lead_exp): root_coeff})
    q = q_lead
    two_lead = q_lead * 2
    lt_exp, lt_coeff = two_lead.leading_term()
    rem = p - q * q
    while not rem.is_zero:
        r_exp, r_coeff = rem.leading_term()
        exp = tuple(map(int.__sub__, r_exp, lt_exp))
        if any(e < 0 for e in exp):
            return None
        t = MultiPoly({exp: Fraction(r_coeff) / Fraction(lt_coeff)})
        q = q + t
        rem = p - q * q
    return q


def ratfunc_sqrt(f: "RatFunc") -> "RatFunc | None":
    """Square root of a perfect-square rational function, or None.

    Since representatives are not reduced, squareness is tested on the
    product num*den:  sqrt(u/v) = sqrt(u*v)/v.
    """
    if f.is_zero:
        return RatFunc(MultiPoly.zero())
    root = poly_sqrt(f.num * f.den)
    if root is None:
        return None
    return RatFunc(root, f.den)


def abs2_on_imaginary_axis(p: MultiPoly) -> MultiPoly:
    """|P(it)|^2 as a polynomial in s := t^2.

    ``p`` is a polynomial in ``lambda`` with real (rational) coefficients that
    may involve the parameters n, d, l.  Writing P(it) = R(s) + i*t*S(s) with

        R(s) = sum_j (-1)^j c_{2j} s^j,    S(s) = sum_j (-1)^j c_{2j+1} s^j,

    the result is R(s)^2 + s*S(s)^2, which has no odd powers of t.
    """
    present = p.variables_present()
    if "t" in present or "s" in present:
        raise ValueError("polynomial already involves t or s")
    s = MultiPoly.variable("s")
    r_part = MultiPoly()
    s_part = MultiPoly()
    for e, coeff in p.coefficients_in("lambda").items():
        j, rem = divmod(e, 2)
        piece = coeff * (s ** j)
        if j % 2:
            piece = -piece
        if rem == 0:
            r_part = r_part + piece
        else:
            s_part = s_part + piece
    return r_part * r_part + s * (s_part * s_part)


def poly_in_t(p: MultiPoly) -> MultiPoly:
    """Rewrite a polynomial in s as a polynomial in t via s = t^2."""
    si = _VAR_INDEX["s"]
    ti = _VAR_INDEX["t"]
    out = {}
    for exp, c in p.terms.items():
        new = list(exp)
        new[ti] = exp[ti] + 2 * exp[si]
        new[si] = 0
        out[tuple(new)] = c
    return MultiPoly(out)


class RatFunc:
    """Quotient of two multivariate polynomials with nonzero denominator.

    Normalisation: numerator and denominator are jointly scaled so that both
    have coprime integer coefficients, and the graded-lex leading coefficient
    of the denominator is positive.  Equality is decided by cross
    multiplication: P/Q == R/S  iff  P*S - R*Q == 0.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_poly(num)
        den = MultiPoly.const(1) if den is None else _as_poly(den)
        if den.is_zero:
            raise DivisionByZeroFunction("zero denominator")
        if num.is_zero:
            self.num = MultiPoly()
            self.den = MultiPoly.const(1)
            return
        cn = num.content()
        cd = den.content()
        scale = cn / cd
        num = MultiPoly({e: Fraction(c) / cn for e, c in num.terms.items()})
        den = MultiPoly({e: Fraction(c) / cd for e, c in den.terms.items()})
        # fold the rational scale back into the numerator, keeping integers
        num = num * MultiPoly.const(scale.numerator)
        den = den * MultiPoly.const(scale.denominator)
        cn = num.content()
        cd = den.content()
        g = Fraction(math.gcd(cn.numerator, cd.numerator), 1)
        if g > 1:
            num = MultiPoly({e: Fraction(c) / g for e, c in num.terms.items()})
            den = MultiPoly({e: Fraction(c) / g for e, c in den.terms.items()})
        _, lead = den.leading_term()
        if lead < 0:
            num, den = -num, -den
        self.num = num
        self.den = den

    # -- constructors --------------------------------------------------------

    @classmethod
    def coerce(cls, value) -> RatFunc:
        if isinstance(value, RatFunc):
            return value
        return cls(_as_poly(value))

    @classmethod
    def variable(cls, name: str) -> RatFunc:
        return cls(MultiPoly.variable(name))

    # -- queries -------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        return self.num.const_value() / self.den.const_value()

    def variables_present(self) -> set:
        return self.num.variables_present() | self.den.variables_present()

    def as_poly(self) -> MultiPoly:
        """The numerator divided through by a constant denominator."""
        if not self.den.is_const():
            raise ValueError("denominator is not constant")
        inv = 1 / self.den.const_value()
        return self.num * MultiPoly.const(inv)

    # -- field operations ------------------------------------------------------

    def __add__(self, other) -> RatFunc:
        other = _as_ratfunc(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> RatFunc:
        out = RatFunc.__new__(RatFunc)
        out.num = -self.num
        out.den = self.den
        return out

    def __sub__(self, other) -> RatFunc:
        other = _as_ratfunc(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> RatFunc:
        return (-self) + other

    def __mul__(self, other) -> RatFunc:
        other = _as_ratfunc(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> RatFunc:
        other = _as_ratfunc(other)
        if other is None:
            return NotImplemented
        if other.is_zero:
            raise DivisionByZeroFunction("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> RatFunc:
        return _as_ratfunc(other) / self

    def __pow__(self, k: int) -> RatFunc:
        if not isinstance(k, int):
            raise ValueError("rational-function power requires an integer")
        if k < 0:
            if self.is_zero:
                raise DivisionByZeroFunction("negative power of zero")
            return RatFunc(self.den ** (-k), self.num ** (-k))
        return RatFunc(self.num ** k, self.den ** k)

    def __eq__(self, other) -> bool:
        other = _as_ratfunc(other)
        if other is None:
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero

    __hash__ = None

    # -- calculus, substitution, evaluation ------------------------------------

    def derivative(self, var: str) -> RatFunc:
        return RatFunc(
            self.num.derivative(var) * self.den - self.num * self.den.derivative(var),
            self.den * self.den,
        )

    def substitute(self, var: str, value) -> RatFunc:
        if isinstance(value, RatFunc):
            # exact composition: substitute into num and den over a common form
            num = _subst_poly_ratfunc(self.num, var, value)
            den = _subst_poly_ratfunc(self.den, var, value)
            return num / den
        return RatFunc(self.num.substitute(var, value), self.den.substitute(var, value))

    def shift(self, var: str, k: Scalar) -> RatFunc:
        return RatFunc(self.num.shift(var, k), self.den.shift(var, k))

    def evaluate(self, assignment: Mapping[str, Scalar]) -> Fraction:
        den = self.den.evaluate(assignment)
        if den == 0:
            raise PoleAtEvaluationPoint(f"denominator vanishes at {dict(assignment)}")
        return self.num.evaluate(assignment) / den

    def evaluate_complex(self, assignment: Mapping[str, complex]) -> complex:
        den = self.den.evaluate_complex(assignment)
        if den == 0:
            raise PoleAtEvaluationPoint(f"denominator vanishes at {dict(assignment)}")
        return self.num.evaluate_complex(assignment) / den

    def coefficients_in(self, var: str) -> dict:
        """Coefficients in ``var`` as RatFuncs; the denominator must not involve var."""
        if var in self.den.variables_present():
            raise ValueError(f"denominator involves {var}")
        return {e: RatFunc(c, self.den) for e, c in self.num.coefficients_in(var).items()}

    def __repr__(self) -> str:
        return f"RatFunc({to_expression(self)})"


def _as_poly(value) -> MultiPoly:
    if isinstance(value, MultiPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return MultiPoly.const(value)
    raise TypeError(f"cannot treat {type(value).__name__} as a polynomial")


def _as_ratfunc(value) -> RatFunc | None:
    if isinstance(value, RatFunc):
        return value
    if isinstance(value, (int, Fraction, MultiPoly)):
        return RatFunc(_as_poly(value))
    return None


def _subst_poly_ratfunc(p: MultiPoly, var: str, value: RatFunc) -> RatFunc:
    deg = p.degree(var)
    if deg <= 0:
        return RatFunc(p)
    result = RatFunc(0)
    power = RatFunc(1)
    coeffs = p.coefficients_in(var)
    for e in range(deg + 1):
        if e:
            power = power * value
        if e in coeffs:
            result = result + RatFunc(coeffs[e]) * power
    return result


class PowerProduct:
    """Formal product  prod_i base_i ^ exponent_i  of rational functions.

    Exponents are rational functions as well, which admits symbolic-dimension
    gauge factors such as rho^((d-1)/2).  The object itself is never expanded;
    its defining feature is that the logarithmic derivative

        f'/f = sum_i exponent_i * base_i'/base_i

    is always an exact ``RatFunc``.
    """

    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[tuple]):
        cleaned = []
        for base, exponent in factors:
            base = RatFunc.coerce(base)
            exponent = RatFunc.coerce(exponent)
            if base.is_zero:
                raise DivisionByZeroFunction("PowerProduct base is the zero function")
            if exponent.is_zero:
                continue
            cleaned.append((base, exponent))
        self.factors = tuple(cleaned)

    @classmethod
    def of(cls, *factors: tuple) -> PowerProduct:
        return cls(factors)

    @classmethod
    def from_ratfunc(cls, f) -> PowerProduct:
        return cls([(f, 1)])

    def __mul__(self, other) -> PowerProduct:
        if isinstance(other, PowerProduct):
            return PowerProduct(self.factors + other.factors)
        return PowerProduct(self.factors + ((RatFunc.coerce(other), RatFunc.coerce(1)),))

    def inverse(self) -> PowerProduct:
        return PowerProduct([(b, -e) for b, e in self.factors])

    def log_derivative(self, var: str = "rho") -> RatFunc:
        """Exact f'/f = sum_i e_i * b_i'/b_i."""
        total = RatFunc(0)
        for base, exponent in self.factors:
            total = total + exponent * base.derivative(var) / base
        return total

    def second_log_derivative(self, var: str = "rho") -> RatFunc:
        """Exact f''/f = (f'/f)' + (f'/f)^2."""
        ld = self.log_derivative(var)
        return ld.derivative(var) + ld * ld

    def __repr__(self) -> str:
        parts = [f"({to_expression(b)})^({to_expression(e)})" for b, e in self.factors]
        return "PowerProduct(" + " * ".join(parts) + ")" if parts else "PowerProduct(1)"


# ---------------------------------------------------------------------------
# Expression serialization grammar
#
#   expr   := term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := '-' factor | atom ('^' integer)?
#   atom   := integer | variable | '(' expr ')'
#
# Variables are restricted to GRAMMAR_VARIABLES.  Polynomial terms are emitted
# in descending graded-lex order, which makes output deterministic and
# round-trippable.
# ---------------------------------------------------------------------------


def _monomial_str(exp: tuple, strict: bool = True) -> str:
    parts = []
    for i, e in enumerate(exp):
        if e == 0:
            continue
        name = VARIABLES[i]
        if strict and name not in GRAMMAR_VARIABLES:
            raise ValueError(f"variable {name!r} is not part of the emission grammar")
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _coeff_str(c: Scalar) -> str:
    f = Fraction(c)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _poly_str(p: MultiPoly, strict: bool = True) -> str:
    if p.is_zero:
        return "0"
    pieces = []
    for exp, c in p.sorted_terms():
        mono = _monomial_str(exp, strict)
        f = Fraction(c)
        mag = abs(f)
        if not mono:
            body = _coeff_str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_coeff_str(mag)}*{mono}"
        pieces.append(("-" if f < 0 else "+", body))
    sign, body = pieces[0]
    out = body if sign == "+" else "-" + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def to_expression(value) -> str:
    """Serialize a MultiPoly or RatFunc in the expression grammar."""
    if isinstance(value, MultiPoly):
        return _poly_str(value)
    if isinstance(value, RatFunc):
        if value.den.is_const() and value.den.const_value() == 1:
            return _poly_str(value.num)
        return f"({_poly_str(value.num)})/({_poly_str(value.den)})"
    if isinstance(value, (int, Fraction)):
        return _coeff_str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|([()+\-*/^]))")


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ValueError(f"bad character in expression at {text[pos:pos + 10]!r}")
            break
        if m.group(1):
            tokens.append(("int", int(m.group(1))))
        elif m.group(2):
            name = m.group(2)
            if name not in GRAMMAR_VARIABLES:
                raise ValueError(f"unknown variable {name!r}")
            tokens.append(("var", name))
        else:
            tokens.append(("op", m.group(3)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ValueError(f"expected {op!r}, got {val!r}")

    def parse(self) -> RatFunc:
        value = self.expr()
        if self.pos != len(self.tokens):
            raise ValueError("trailing tokens in expression")
        return value

    def expr(self) -> RatFunc:
        value = self.term()
        while True:
            kind, op = self.peek()
            if kind == "op" and op in "+-":
                self.take()
                rhs = self.term()
                value = value + rhs if op == "+" else value - rhs
            else:
                return value

    def term(self) -> RatFunc:
        value = self.factor()
        while True:
            kind, op = self.peek()
            if kind == "op" and op in "*/":
                self.take()
                rhs = self.factor()
                value = value * rhs if op == "*" else value / rhs
            else:
                return value

    def factor(self) -> RatFunc:
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, e = self.take()
            if kind != "int":
                raise ValueError("exponent must be an integer literal")
            return base ** e
        return base

    def atom(self) -> RatFunc:
        kind, val = self.take()
        if kind == "int":
            return RatFunc(MultiPoly.const(val))
        if kind == "var":
            return RatFunc(MultiPoly.variable(val))
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        raise ValueError(f"unexpected token {val!r}")


def parse_expression(text: str) -> RatFunc:
    """Parse an expression in the serialization grammar back into a RatFunc."""
    tokens = _tokenize(text)
    if not tokens:
        raise ValueError("empty expression")
    return _Parser(tokens).parse()
