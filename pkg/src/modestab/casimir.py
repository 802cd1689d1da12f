"""Brute-force verification of the angular-operator decoupling.

The coupling operator K acts on vector-valued harmonic polynomials by
(K f)_k = sum_j (xi_k d_j - xi_j d_k) f_j.  For each degree l it restricts to
the space Y_l^d of d-tuples of harmonic homogeneous degree-l polynomials, is
diagonalisable there, and has exactly the eigenvalues -l, 1, l+d-2.  This
module verifies that claim exactly for small (d, l):

* harmonic bases are computed as the exact kernel of the Laplacian on
  homogeneous monomials,
* the minimal-polynomial identity (K+l)(K-1)(K-(l+d-2)) = 0 is applied to a
  full basis using integer arithmetic,
* eigenspace dimensions are recovered exactly from the traces of K and K^2
  (sound once the minimal polynomial certifies diagonalisability) and, in
  small dimensions, cross-checked against exact fraction-free ranks,
* the quadratic Casimir identity
  sum_{j<k} rho(F_jk)^2 = -(d-1) I + 2 K - l(l+d-2) I  is checked entrywise,
  where rho(X) acts as X on the target index plus the angular derivative on
  coefficients.

All heavy arithmetic runs on int64 arrays with explicit headroom checks;
nothing depends on floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

_INT64_HEADROOM = 2 ** 61


class SizeCapExceeded(ValueError):
    """Requested space exceeds the configured dimension cap."""


class InvarianceViolated(AssertionError):
    """K failed to map the harmonic space into itself (engine bug)."""


class MinimalPolynomialFailed(AssertionError):
    """(K+l)(K-1)(K-(l+d-2)) did not annihilate the space."""


class IdentityFailed(AssertionError):
    """The quadratic Casimir identity failed entrywise."""


def monomials(d: int, degree: int) -> list:
    """All exponent tuples of homogeneous degree ``degree`` in d variables."""
    if degree < 0:
        return []
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(tuple(prefix + [remaining]))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], degree, d)
    return out


def harmonic_space_dimension(d: int, l: int) -> int:
    return comb(l + d - 1, d - 1) - comb(l + d - 3, d - 1)


@dataclass(frozen=True)
class HarmonicBasis:
    """Integer basis of the degree-l harmonics in d variables.

    ``vectors[b]`` holds the monomial coefficients of the b-th basis element;
    the submatrix at ``free_cols`` is diagonal with entries ``scales``, so the
    coordinates of any harmonic q in this basis are q[free_cols] / scales.
    """

    d: int
    l: int
    monomials: tuple
    vectors: np.ndarray     # (dim, n_monomials), int64
    free_cols: tuple
    scales: tuple

    @property
    def dimension(self) -> int:
        return len(self.free_cols)

    def coordinates(self, poly_vec: np.ndarray) -> list:
        return [Fraction(int(poly_vec[c]), s) for c, s in zip(self.free_cols, self.scales)]


def _laplacian_matrix(d: int, l: int, monos: list, index: dict) -> np.ndarray:
    rows = monomials(d, l - 2)
    row_index = {m: i for i, m in enumerate(rows)}
    lap = np.zeros((len(rows), len(monos)), dtype=np.int64)
    for c, alpha in enumerate(monos):
        for i in range(d):
            if alpha[i] >= 2:
                target = list(alpha)
                target[i] -= 2
                lap[row_index[tuple(target)], c] += alpha[i] * (alpha[i] - 1)
    return lap


def _kernel_basis(matrix: np.ndarray) -> tuple:
    """Exact kernel of an integer matrix: (vectors, free columns, scales).

    Gauss-Jordan over Fractions; each kernel vector is scaled to coprime
    integers.  Vector i has value ``scale_i`` at its free column and 0 at
    every other free column.
    """
    rows, cols = matrix.shape
    m = [[Fraction(int(matrix[r, c])) for c in range(cols)] for r in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        pivot_row = None
        for rr in range(r, rows):
            if m[rr][c] != 0:
                pivot_row = rr
                break
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for rr in range(rows):
            if rr != r and m[rr][c] != 0:
                f = m[rr][c]
                m[rr] = [x - f * y for x, y in zip(m[rr], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    pivot_set = set(pivots)
    free_cols = [c for c in range(cols) if c not in pivot_set]
    vectors = []
    scales = []
    for f in free_cols:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            if i < len(m):
                v[c] = -m[i][f]
        lcm = 1
        for x in v:
            lcm = lcm * x.denominator // np.gcd(lcm, x.denominator)
        ints = [int(x * lcm) for x in v]
        g = 0
        for x in ints:
            g = np.gcd(g, abs(x))
        g = int(g) or 1
        ints = [x // g for x in ints]
        vectors.append(ints)
        scales.append(ints[f])
    return (np.array(vectors, dtype=np.int64) if vectors else
            np.zeros((0, cols), dtype=np.int64), tuple(free_cols), tuple(scales))


def harmonic_basis(d: int, l: int, cap: int = 2000) -> HarmonicBasis:
    """Exact basis of harmonic homogeneous degree-l polynomials in d variables."""
    if d < 3 or l < 0:
        raise ValueError("need d >= 3 and l >= 0")
    expected = harmonic_space_dimension(d, l)
    if d * expected > cap:
        raise SizeCapExceeded(f"dim Y_l^d = {d * expected} exceeds cap {cap}")
    monos = monomials(d, l)
    index = {m: i for i, m in enumerate(monos)}
    if l < 2:
        vectors = np.eye(len(monos), dtype=np.int64)
        basis = HarmonicBasis(d, l, tuple(monos), vectors,
                              tuple(range(len(monos))), (1,) * len(monos))
    else:
        lap = _laplacian_matrix(d, l, monos, index)
        vectors, free_cols, scales = _kernel_basis(lap)
        basis = HarmonicBasis(d, l, tuple(monos), vectors, free_cols, scales)
    if basis.dimension != expected:
        raise AssertionError(
            f"harmonic dimension {basis.dimension} != binomial formula {expected}")
    # exact annihilation check
    if l >= 2:
        lap = _laplacian_matrix(d, l, monos, index)
        if np.any(lap @ basis.vectors.T != 0):
            raise AssertionError("basis element is not annihilated by the Laplacian")
    return basis


class AngularOperators:
    """Dense integer matrices of K_kj = xi_k d_j - xi_j d_k on degree-l monomials."""

    def __init__(self, d: int, l: int):
        self.d = d
        self.l = l
        self.monos = monomials(d, l)
        self.index = {m: i for i, m in enumerate(self.monos)}
        n = len(self.monos)
        self.k_mats = {}
        for k in range(d):
            for j in range(d):
                if k == j:
                    continue
                mat = np.zeros((n, n), dtype=np.int64)
                for c, alpha in enumerate(self.monos):
                    # xi_k d_j
                    if alpha[j] >= 1:
                        t = list(alpha)
                        t[j] -= 1
                        t[k] += 1
                        mat[self.index[tuple(t)], c] += alpha[j]
                    # - xi_j d_k
                    if alpha[k] >= 1:
                        t = list(alpha)
                        t[k] -= 1
                        t[j] += 1
                        mat[self.index[tuple(t)], c] -= alpha[k]
                self.k_mats[(k, j)] = mat

    def k_apply_block(self, block: np.ndarray) -> np.ndarray:
        """K on a stacked block of shape (d, n_monomials, width)."""
        out = np.zeros_like(block)
        for k in range(self.d):
            acc = out[k]
            for j in range(self.d):
                if j != k:
                    acc += self.k_mats[(k, j)] @ block[j]
        return out


def _guard(*arrays) -> None:
    for a in arrays:
        if a.size and np.max(np.abs(a)) >= _INT64_HEADROOM:
            raise OverflowError("int64 headroom exhausted in exact integer path")


@dataclass(frozen=True)
class OperatorMatrix:
    """Exact matrix of K on the stacked basis, stored as integers over row scales.

    Entry ((k, b'), (a, b)) equals numerators[k*dim+b', a*dim+b] / scales[b'].
    """

    d: int
    l: int
    numerators: np.ndarray
    scales: tuple

    @property
    def size(self) -> int:
        return self.numerators.shape[0]

    def entry(self, i: int, j: int) -> Fraction:
        dim = len(self.scales)
        return Fraction(int(self.numerators[i, j]), self.scales[i % dim])

    def fraction_rows(self):
        dim = len(self.scales)
        for i in range(self.size):
            s = self.scales[i % dim]
            yield [Fraction(int(x), s) for x in self.numerators[i]]


def _component_blocks(basis: HarmonicBasis) -> np.ndarray:
    """Blocks B_a with B_a[j] = delta_{ja} * (basis vectors as columns)."""
    nmono = basis.vectors.shape[1]
    dim = basis.dimension
    blocks = np.zeros((basis.d, basis.d, nmono, dim), dtype=np.int64)
    for a in range(basis.d):
        blocks[a, a] = basis.vectors.T
    return blocks


def _reconstruction_spot_check(basis: HarmonicBasis, img: np.ndarray,
                               columns: int = 3) -> None:
    """Exact check that free-coordinate reads reproduce sample polynomials."""
    dim = basis.dimension
    nmono = basis.vectors.shape[1]
    for col in range(min(columns, img.shape[1])):
        q = img[:, col]
        coords = basis.coordinates(q)
        recon = [Fraction(0)] * nmono
        for b, c in enumerate(coords):
            if c:
                row = basis.vectors[b]
                for i in range(nmono):
                    if row[i]:
                        recon[i] += c * int(row[i])
        if any(recon[i] != int(q[i]) for i in range(nmono)):
            raise InvarianceViolated("coordinate reconstruction mismatch")


def k_matrix(d: int, l: int, cap: int = 2000) -> OperatorMatrix:
    """Exact matrix of K on the stacked harmonic basis, with invariance check.

    Invariance of the harmonic space is certified by exact Laplacian
    annihilation of every image polynomial, plus reconstruction spot checks
    of the free-coordinate reads.
    """
    basis = harmonic_basis(d, l, cap)
    ops = AngularOperators(d, l)
    dim = basis.dimension
    lap = (_laplacian_matrix(d, l, list(basis.monomials),
                             {m: i for i, m in enumerate(basis.monomials)})
           if l >= 2 else None)
    numerators = np.zeros((d * dim, d * dim), dtype=np.int64)
    free = np.array(basis.free_cols, dtype=np.intp)
    blocks = _component_blocks(basis)
    for a in range(d):
        out = ops.k_apply_block(blocks[a])
        _guard(out)
        for k in range(d):
            img = out[k]                      # (nmono, dim): polynomials K_{ka} Y_b
            if lap is not None and np.any(lap @ img != 0):
                raise InvarianceViolated(f"K_({k},{a}) image left the harmonic space")
            _reconstruction_spot_check(basis, img)
            numerators[k * dim:(k + 1) * dim, a * dim:(a + 1) * dim] = img[free, :]
    return OperatorMatrix(d, l, numerators, basis.scales)


# -- eigenstructure --------------------------------------------------------------------


@dataclass(frozen=True)
class EigenReport:
    d: int
    l: int
    dimension: int                  # dim Y_l^d = d * dim Y_l
    minimal_polynomial_ok: bool
    eigenvalues: tuple              # (-l, 1, l+d-2)
    multiplicities: tuple
    multiplicities_sum_ok: bool
    radial_field_contained: bool | None
    rank_cross_checked: bool

    @property
    def ok(self) -> bool:
        return (self.minimal_polynomial_ok and self.multiplicities_sum_ok
                and all(m >= 0 for m in self.multiplicities)
                and self.radial_field_contained in (None, True))


def _minimal_polynomial_holds(basis: HarmonicBasis, ops: AngularOperators) -> bool:
    """(K + l)(K - 1)(K - (l+d-2)) annihilates every stacked basis vector."""
    d, l = basis.d, basis.l
    roots = (-l, 1, l + d - 2)
    blocks = _component_blocks(basis)
    for a in range(d):
        w = blocks[a]
        for mu in roots:
            w = ops.k_apply_block(w) - mu * w
            _guard(w)
        if np.any(w != 0):
            return False
    return True


def _traces(basis: HarmonicBasis, ops: AngularOperators) -> tuple:
    """Exact (tr K, tr K^2) via free-coordinate reads of diagonal images."""
    d = basis.d
    free = np.array(basis.free_cols, dtype=np.intp)
    scales = basis.scales
    tr1 = Fraction(0)
    tr2 = Fraction(0)
    cols = basis.vectors.T              # (nmono, dim)
    for a in range(d):
        # first application restricted to component a ... K(e_a Y)_j = K_{ja} Y
        diag1 = np.zeros_like(cols)     # component a of K(e_a Y_b): K_{aa} = 0
        second = np.zeros_like(cols)
        for j in range(d):
            if j == a:
                continue
            img_j = ops.k_mats[(j, a)] @ cols       # component j of K(e_a Y_b)
            second = second + ops.k_mats[(a, j)] @ img_j
        _guard(second)
        for b in range(basis.dimension):
            tr1 += Fraction(int(diag1[free[b], b]), scales[b])
            tr2 += Fraction(int(second[free[b], b]), scales[b])
    return tr1, tr2


def _multiplicities_from_traces(dim_total: int, roots: tuple, tr1: Fraction,
                                tr2: Fraction) -> tuple:
    """Solve the 3x3 Vandermonde system for the eigenvalue multiplicities."""
    mu1, mu2, mu3 = (Fraction(r) for r in roots)
    # m1 + m2 + m3 = dim, sum mi*mui = tr1, sum mi*mui^2 = tr2
    det = (mu2 - mu1) * (mu3 - mu1) * (mu3 - mu2)
    if det == 0:
        raise MinimalPolynomialFailed("eigenvalues are not distinct")
    b0, b1, b2 = Fraction(dim_total), tr1, tr2
    m1 = (b2 - b1 * (mu2 + mu3) + b0 * mu2 * mu3) / ((mu1 - mu2) * (mu1 - mu3))
    m2 = (b2 - b1 * (mu1 + mu3) + b0 * mu1 * mu3) / ((mu2 - mu1) * (mu2 - mu3))
    m3 = (b2 - b1 * (mu1 + mu2) + b0 * mu1 * mu2) / ((mu3 - mu1) * (mu3 - mu2))
    out = []
    for m in (m1, m2, m3):
        if m.denominator != 1 or m < 0:
            raise MinimalPolynomialFailed(f"non-integral multiplicity {m}")
        out.append(int(m))
    return tuple(out)


def _bareiss_rank(rows: list) -> int:
    """Fraction-free (Bareiss) rank of an integer matrix given as row lists."""
    m = [list(map(int, r)) for r in rows]
    n_rows = len(m)
    n_cols = len(m[0]) if n_rows else 0
    rank = 0
    prev = 1
    col = 0
    while rank < n_rows and col < n_cols:
        pivot_row = None
        for r in range(rank, n_rows):
            if m[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            col += 1
            continue
        m[rank], m[pivot_row] = m[pivot_row], m[rank]
        pv = m[rank][col]
        for r in range(rank + 1, n_rows):
            factor = m[r][col]
            for c in range(col, n_cols):
                m[r][c] = (m[r][c] * pv - factor * m[rank][c]) // prev
        prev = pv
        rank += 1
        col += 1
    return rank


def _rank_multiplicities(op: OperatorMatrix, roots: tuple) -> tuple:
    """Eigenspace dimensions via exact ranks of K - mu I (small sizes only)."""
    dim = op.size
    out = []
    for mu in roots:
        rows = []
        scales = op.scales
        n_scales = len(scales)
        for i in range(dim):
            s = scales[i % n_scales]
            row = [int(op.numerators[i, j]) - (mu * s if i == j else 0)
                   for j in range(dim)]
            rows.append(row)
        out.append(dim - _bareiss_rank(rows))
    return tuple(out)


def _radial_field_check(basis: HarmonicBasis, ops: AngularOperators) -> bool:
    """For l = 1 the radial field xi lies in the eigenspace of l + d - 2 = d - 1."""
    d = basis.d
    nmono = len(basis.monomials)
    index = {m: i for i, m in enumerate(basis.monomials)}
    field = np.zeros((d, nmono, 1), dtype=np.int64)
    for k in range(d):
        e = [0] * d
        e[k] = 1
        field[k, index[tuple(e)], 0] = 1
    image = ops.k_apply_block(field)
    return bool(np.all(image == (d - 1) * field))


def eigen_check(d: int, l: int, cap: int = 2000, rank_limit: int = 60) -> EigenReport:
    """Verify the minimal polynomial, eigenvalues and multiplicities of K."""
    basis = harmonic_basis(d, l, cap)
    ops = AngularOperators(d, l)
    dim_total = d * basis.dimension
    roots = (-l, 1, l + d - 2)
    if l == 0:
        # K annihilates constant fields: everything collapses to eigenvalue 0
        blocks = _component_blocks(basis)
        zero = all(not np.any(ops.k_apply_block(blocks[a])) for a in range(d))
        return EigenReport(d, l, dim_total, zero, (0,), (dim_total,), True, None, False)
    min_ok = _minimal_polynomial_holds(basis, ops)
    if not min_ok:
        raise MinimalPolynomialFailed(f"minimal polynomial fails at d={d}, l={l}")
    tr1, tr2 = _traces(basis, ops)
    mults = _multiplicities_from_traces(dim_total, roots, tr1, tr2)
    sum_ok = sum(mults) == dim_total
    rank_checked = False
    if dim_total <= rank_limit:
        op = k_matrix(d, l, cap)
        if _rank_multiplicities(op, roots) != mults:
            raise MinimalPolynomialFailed("trace and rank multiplicities disagree")
        rank_checked = True
    radial = _radial_field_check(basis, ops) if l == 1 else None
    return EigenReport(d, l, dim_total, min_ok, roots, mults, sum_ok, radial,
                       rank_checked)


# -- the quadratic Casimir identity ------------------------------------------------------


def casimir_identity_check(d: int, l: int, cap: int = 2000) -> bool:
    """sum_{j<k} rho(F_jk)^2 == -(d-1) I + 2 K - l(l+d-2) I, entrywise exact.

    rho(F_jk) acts on a stacked block as the skew matrix F_jk on the component
    index plus the scalar angular operator K_jk on every component.
    """
    basis = harmonic_basis(d, l, cap)
    ops = AngularOperators(d, l)
    blocks = _component_blocks(basis)

    def rho_apply(j: int, k: int, block: np.ndarray) -> np.ndarray:
        out = np.zeros_like(block)
        # pi part: (F_jk v)_j = v_k, (F_jk v)_k = -v_j
        out[j] += block[k]
        out[k] -= block[j]
        # psi part: K_jk on coefficients, every component
        kjk = ops.k_mats[(j, k)] if l >= 1 else None
        if kjk is not None:
            for c in range(d):
                out[c] += kjk @ block[c]
        return out

    for a in range(d):
        block = blocks[a]
        lhs = np.zeros_like(block)
        for j in range(d):
            for k in range(j + 1, d):
                lhs += rho_apply(j, k, rho_apply(j, k, block))
                _guard(lhs)
        rhs = -(d - 1) * block + 2 * ops.k_apply_block(block) - l * (l + d - 2) * block
        if np.any(lhs != rhs):
            raise IdentityFailed(f"Casimir identity fails at d={d}, l={l}")
    return True


# -- sphere pairing ----------------------------------------------------------------------


def monomial_sphere_average(exponents: tuple, d: int) -> Fraction:
    """Average of a monomial over the unit sphere, exact.

    Zero for any odd exponent; otherwise
    prod_i (e_i - 1)!! / prod_{i=1}^{|e|/2} (d + 2i - 2).
    """
    if any(e % 2 for e in exponents):
        return Fraction(0)
    num = 1
    for e in exponents:
        for k in range(e - 1, 0, -2):
            num *= k
    den = 1
    half_total = sum(exponents) // 2
    for i in range(1, half_total + 1):
        den *= d + 2 * i - 2
    return Fraction(num, den)


def sphere_pairing(p: dict, q: dict, d: int) -> Fraction:
    """Exact sphere average of p * q for monomial-coefficient dicts."""
    total = Fraction(0)
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            combined = tuple(a + b for a, b in zip(e1, e2))
            avg = monomial_sphere_average(combined, d)
            if avg:
                total += c1 * c2 * avg
    return total


def vector_to_monomial_dict(basis: HarmonicBasis, vec) -> dict:
    return {m: int(c) for m, c in zip(basis.monomials, vec) if c}


def k_entry_skew_symmetric(d: int, l: int, k: int, j: int) -> bool:
    """<K_kj p, q> = -<p, K_kj q> for every pair of basis harmonics."""
    basis = harmonic_basis(d, l)
    ops = AngularOperators(d, l)
    mat = ops.k_mats[(k, j)]
    vecs = basis.vectors
    for b1 in range(basis.dimension):
        img1 = vector_to_monomial_dict(basis, mat @ vecs[b1])
        p1 = vector_to_monomial_dict(basis, vecs[b1])
        for b2 in range(basis.dimension):
            p2 = vector_to_monomial_dict(basis, vecs[b2])
            img2 = vector_to_monomial_dict(basis, mat @ vecs[b2])
            if sphere_pairing(img1, p2, d) != -sphere_pairing(p1, img2, d):
                return False
    return True
