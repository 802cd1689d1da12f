"""Exact-arithmetic certification toolkit for self-similar wave-map mode stability.

The package re-executes every computational step behind the spectral analysis
of the equivariant blowup profile: spectral ODE construction, power-series
recurrences, quasi-solution error bounds, polynomial positivity certificates,
Hurwitz tests, and a brute-force check of the angular-operator decoupling.
"""

from modestab.exactalg import MultiPoly, PowerProduct, RatFunc, Rational

__all__ = ["MultiPoly", "PowerProduct", "RatFunc", "Rational"]
__version__ = "0.1.0"
