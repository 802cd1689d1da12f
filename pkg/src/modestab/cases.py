"""Parameter cases of the spectral problem.

A case is a triple (d, l, m) with dimension d >= 3, angular degree l >= 0 and
coupling eigenvalue m in {-l, 1, l+d-2}.  The three admissible m values are
encoded by ``m_kind`` in {"minus", "one", "plus"}; the kind determines m as a
function of (l, d), which is what makes fully symbolic computations possible
(m itself is not a variable of the polynomial ring).

``CaseSpec`` describes a parameter family: a fixed or left-bounded range of d,
same for l, plus the m kind.  The module also fixes the canonical list of
certificate families (one per emitted data file) and the starting index
N(d, l, m) of the quasi-solution induction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from modestab.exactalg import MultiPoly, RatFunc

M_KINDS = ("minus", "one", "plus")

#: m-kind tags used in data-file names.
M_FILE_TAGS = {"minus": "min", "one": "1", "plus": "pl"}


class InvalidCase(ValueError):
    """Parameters outside the tabulated case rows."""


def m_value(l: int, d: int, m_kind: str) -> int:
    """Concrete coupling eigenvalue m for given integer l, d."""
    if m_kind == "minus":
        return -l
    if m_kind == "one":
        return 1
    if m_kind == "plus":
        return l + d - 2
    raise InvalidCase(f"unknown m kind {m_kind!r}")


def m_expr(l, d, m_kind: str) -> RatFunc:
    """m as an exact expression in (possibly symbolic) l and d."""
    l = RatFunc.coerce(l)
    d = RatFunc.coerce(d)
    if m_kind == "minus":
        return -l
    if m_kind == "one":
        return RatFunc.coerce(1)
    if m_kind == "plus":
        return l + d - 2
    raise InvalidCase(f"unknown m kind {m_kind!r}")


@dataclass(frozen=True)
class CaseSpec:
    """A parameter family: d range, l range, and the m kind.

    ``d_open`` / ``l_open`` mark left-bounded infinite ranges [start, inf);
    otherwise the range is the single value ``d_start`` / ``l_start``.
    """

    d_start: int
    d_open: bool
    l_start: int
    l_open: bool
    m_kind: str

    def __post_init__(self):
        if self.d_start < 3:
            raise InvalidCase("d must be at least 3")
        if self.l_start < 0:
            raise InvalidCase("l must be nonnegative")
        if self.m_kind not in M_KINDS:
            raise InvalidCase(f"unknown m kind {self.m_kind!r}")

    # -- symbolic/concrete parameter views ---------------------------------

    def d_param(self):
        """Symbolic d for open ranges, the concrete integer otherwise."""
        return RatFunc.variable("d") if self.d_open else RatFunc.coerce(self.d_start)

    def l_param(self):
        return RatFunc.variable("l") if self.l_open else RatFunc.coerce(self.l_start)

    def m_param(self) -> RatFunc:
        return m_expr(self.l_param(), self.d_param(), self.m_kind)

    def contains(self, d: int, l: int) -> bool:
        ok_d = d >= self.d_start if self.d_open else d == self.d_start
        ok_l = l >= self.l_start if self.l_open else l == self.l_start
        return ok_d and ok_l

    def shifts(self, n0: int = 0) -> dict:
        """Variable shifts mapping the family range onto the nonnegative orthant."""
        out = {}
        if n0:
            out["n"] = n0
        if self.d_open:
            out["d"] = self.d_start
        if self.l_open:
            out["l"] = self.l_start
        return out

    @property
    def key(self) -> str:
        l_tag = f"geq{self.l_start}" if self.l_open else str(self.l_start)
        d_tag = f"geq{self.d_start}" if self.d_open else str(self.d_start)
        return f"{l_tag}_{M_FILE_TAGS[self.m_kind]}_{d_tag}"

    def describe(self) -> str:
        d_rng = f"d>={self.d_start}" if self.d_open else f"d={self.d_start}"
        l_rng = f"l>={self.l_start}" if self.l_open else f"l={self.l_start}"
        return f"{d_rng}, {l_rng}, m={self.m_kind}"


def is_special_row(l, m_kind: str) -> bool:
    """Rows whose symmetry mode was removed by the first-order factorization.

    These are (l=1, m=l+d-2), (l=1, m=1) and (l=2, m=l+d-2); they carry their
    own potential, series-space coefficients and quasi-solutions.
    """
    if isinstance(l, int):
        return (l == 1 and m_kind in ("plus", "one")) or (l == 2 and m_kind == "plus")
    return False


def start_index(d: int, l: int, m_kind_or_m) -> int:
    """Starting index N(d, l, m) of the error-bound induction."""
    if isinstance(m_kind_or_m, str):
        kind = m_kind_or_m
    else:
        m = int(m_kind_or_m)
        if m == m_value(l, d, "plus"):
            kind = "plus"
        elif m == 1:
            kind = "one"
        elif m == -l:
            kind = "minus"
        else:
            raise InvalidCase(f"m={m} is not admissible for l={l}, d={d}")
    if d < 4 or l < 1:
        raise InvalidCase("starting index is tabulated for d >= 4, l >= 1")
    if d == 4 and l == 1 and kind == "plus":
        return 4
    if d >= 5 and l == 1 and kind == "plus":
        return 2
    if d == 4 and l == 1 and kind == "one":
        return 2
    if d == 4 and l == 2 and kind == "plus":
        return 2
    if l == 1 and kind == "minus":
        return 2
    return 1


def start_index_case(case: CaseSpec) -> int:
    """N(d, l, m) for a whole family (constant across each tabulated family)."""
    n0 = start_index(case.d_start, case.l_start, case.m_kind)
    if case.d_open or case.l_open:
        # spot-check constancy across the open range
        for dd in range(case.d_start, case.d_start + (4 if case.d_open else 1)):
            for ll in range(case.l_start, case.l_start + (4 if case.l_open else 1)):
                if start_index(dd, ll, case.m_kind) != n0:
                    raise InvalidCase(f"start index not constant on family {case.key}")
    return n0


def _family_rows() -> list:
    rows = []

    def add(l_start, l_open, m_kind, d_start, d_open):
        rows.append(CaseSpec(d_start=d_start, d_open=d_open,
                             l_start=l_start, l_open=l_open, m_kind=m_kind))

    # l = 1
    add(1, False, "minus", 4, False)
    add(1, False, "minus", 5, True)
    add(1, False, "one", 4, False)
    add(1, False, "one", 5, True)
    add(1, False, "plus", 4, False)
    add(1, False, "plus", 5, True)
    # l = 2
    add(2, False, "minus", 4, False)
    add(2, False, "minus", 5, True)
    add(2, False, "one", 4, True)
    add(2, False, "plus", 4, False)
    add(2, False, "plus", 5, True)
    # l >= 3
    add(3, True, "minus", 4, False)
    add(3, True, "minus", 5, False)
    add(3, True, "minus", 6, True)
    add(3, True, "one", 4, False)
    add(3, True, "one", 5, False)
    add(3, True, "one", 6, True)
    add(3, True, "plus", 4, False)
    add(3, True, "plus", 5, False)
    add(3, True, "plus", 6, True)
    return rows


#: Canonical ordered list of certificate families (one emitted file each).
FAMILIES = tuple(_family_rows())

#: File basenames; the d>=6 minus-kind family is tagged "6" rather than
#: "geq6" to match the published data-file list verbatim.
FAMILY_FILENAMES = {case.key: f"{case.key}.csv" for case in FAMILIES}
FAMILY_FILENAMES["geq3_min_geq6"] = "geq3_min_6.csv"


def family_filename(case: CaseSpec) -> str:
    return FAMILY_FILENAMES[case.key]


def family_by_key(key: str) -> CaseSpec:
    for case in FAMILIES:
        if case.key == key:
            return case
    raise InvalidCase(f"unknown family {key!r}")


def family_for(d: int, l: int, m_kind: str) -> CaseSpec:
    """The certificate family covering concrete parameters (d, l, m_kind)."""
    if l < 1:
        raise InvalidCase("certificate families start at l = 1")
    for case in FAMILIES:
        if case.m_kind == m_kind and case.contains(d, l):
            return case
    raise InvalidCase(f"no family covers d={d}, l={l}, m={m_kind}")


def select_families(l=None, m_kind=None, d=None) -> list:
    """Families matching optional concrete filters (l, m kind, d)."""
    out = []
    for case in FAMILIES:
        if m_kind is not None and case.m_kind != m_kind:
            continue
        if l is not None:
            if not (l >= case.l_start if case.l_open else l == case.l_start):
                continue
        if d is not None:
            if not (d >= case.d_start if case.d_open else d == case.d_start):
                continue
        out.append(case)
    return out
