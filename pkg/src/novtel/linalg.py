"""Dense matrices over finite Novikov sums, valuated Smith normal form and
lattice arithmetic modulo ``T^lam``.

Elimination is fraction-free: with pivot ``a = T^k a'`` (``a'`` a unit) a row
``r`` with entry ``b = T^k b'`` is replaced by ``a' row_r - b' row_pivot``.
This stays inside finite sums and the transformation has unit determinant,
so certificates hold exactly.  When ``a'`` is a single rational constant the
division is exact and the cheaper ``row_r - (b'/a') row_pivot`` is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

from .novikov import INF, ONE, ZERO, NovikovScalar, as_fraction


class Mat:
    """A dense ``nrows x ncols`` matrix of :class:`NovikovScalar`."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence], ncols: Optional[int] = None):
        self.rows = [[NovikovScalar.coerce(x) for x in row] for row in rows]
        self.nrows = len(self.rows)
        if ncols is None:
            if not self.rows:
                raise ValueError("ncols is required for a matrix with no rows")
            ncols = len(self.rows[0])
        self.ncols = ncols
        for r in self.rows:
            if len(r) != ncols:
                raise ValueError(f"ragged matrix: expected {ncols} columns, got {len(r)}")

    @classmethod
    def _raw(cls, rows: List[list], nrows: int, ncols: int) -> "Mat":
        m = cls.__new__(cls)
        m.rows = rows
        m.nrows = nrows
        m.ncols = ncols
        return m

    @classmethod
    def zeros(cls, n: int, m: int) -> "Mat":
        return cls._raw([[ZERO] * m for _ in range(n)], n, m)

    @classmethod
    def identity(cls, n: int) -> "Mat":
        out = cls.zeros(n, n)
        for i in range(n):
            out.rows[i][i] = ONE
        return out

    @classmethod
    def diag(cls, entries: Sequence) -> "Mat":
        out = cls.zeros(len(entries), len(entries))
        for i, x in enumerate(entries):
            out.rows[i][i] = NovikovScalar.coerce(x)
        return out

    @classmethod
    def column(cls, entries: Sequence) -> "Mat":
        return cls._raw([[NovikovScalar.coerce(x)] for x in entries], len(entries), 1)

    @property
    def shape(self) -> tuple:
        return (self.nrows, self.ncols)

    def copy(self) -> "Mat":
        return Mat._raw([list(r) for r in self.rows], self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def col(self, j: int) -> list:
        return [r[j] for r in self.rows]

    def is_zero(self) -> bool:
        return all(not x.terms for r in self.rows for x in r)

    def in_ring(self) -> bool:
        return all(x.in_ring() for r in self.rows for x in r)

    def min_valuation(self):
        return min((x.valuation() for r in self.rows for x in r), default=INF)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.shape, tuple(tuple(r) for r in self.rows)))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in r) for r in self.rows)
        return f"Mat({self.nrows}x{self.ncols}: [{body}])"

    def transpose(self) -> "Mat":
        return Mat._raw([[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
                        self.ncols, self.nrows)

    def __neg__(self) -> "Mat":
        return Mat._raw([[-x for x in r] for r in self.rows], self.nrows, self.ncols)

    def __add__(self, other: "Mat") -> "Mat":
        _check_same(self, other)
        return Mat._raw([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                        self.nrows, self.ncols)

    def __sub__(self, other: "Mat") -> "Mat":
        _check_same(self, other)
        return Mat._raw([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                        self.nrows, self.ncols)

    def __matmul__(self, other: "Mat") -> "Mat":
        return matmul(self, other)

    def scale(self, c) -> "Mat":
        c = NovikovScalar.coerce(c)
        return Mat._raw([[c * x for x in r] for r in self.rows], self.nrows, self.ncols)

    def truncate(self, lam) -> "Mat":
        if lam is None or lam == INF:
            return self
        return Mat._raw([[x.truncate(lam) for x in r] for r in self.rows], self.nrows, self.ncols)

    def hstack(self, other: "Mat") -> "Mat":
        if self.nrows != other.nrows:
            raise ValueError(f"hstack row mismatch {self.shape} vs {other.shape}")
        return Mat._raw([list(a) + list(b) for a, b in zip(self.rows, other.rows)],
                        self.nrows, self.ncols + other.ncols)

    def vstack(self, other: "Mat") -> "Mat":
        if self.ncols != other.ncols:
            raise ValueError(f"vstack column mismatch {self.shape} vs {other.shape}")
        return Mat._raw([list(r) for r in self.rows] + [list(r) for r in other.rows],
                        self.nrows + other.nrows, self.ncols)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Mat":
        return Mat._raw([[self.rows[i][j] for j in cols] for i in rows], len(rows), len(cols))

    def apply(self, vec: Sequence) -> list:
        if len(vec) != self.ncols:
            raise ValueError(f"vector of length {len(vec)} for matrix {self.shape}")
        out = []
        for r in self.rows:
            acc = ZERO
            for a, x in zip(r, vec):
                if a.terms and x.terms:
                    acc = acc + a * x
            out.append(acc)
        return out

    def to_json(self) -> list:
        return [[x.to_json() for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, data, nrows: Optional[int] = None, ncols: Optional[int] = None) -> "Mat":
        rows = [[NovikovScalar.from_json(x) for x in r] for r in data]
        if not rows:
            return cls.zeros(nrows or 0, ncols or 0)
        m = cls(rows)
        if nrows is not None and m.nrows != nrows or ncols is not None and m.ncols != ncols:
            raise ValueError(f"matrix shape {m.shape} does not match expected ({nrows}, {ncols})")
        return m


def _check_same(a: Mat, b: Mat) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


def matmul(a: Mat, b: Mat, precision=None) -> Mat:
    if a.ncols != b.nrows:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    brows = b.rows
    out = []
    for r in a.rows:
        acc = [ZERO] * b.ncols
        for k, x in enumerate(r):
            if not x.terms:
                continue
            for j, y in enumerate(brows[k]):
                if y.terms:
                    acc[j] = acc[j] + x.mul(y, precision)
        out.append(acc)
    return Mat._raw(out, a.nrows, b.ncols)


def mat_chain(*mats: Mat, precision=None) -> Mat:
    out = mats[0]
    for m in mats[1:]:
        out = matmul(out, m, precision)
    return out


def mat_power(a: Mat, k: int, precision=None) -> Mat:
    out = Mat.identity(a.nrows)
    base = a
    while k:
        if k & 1:
            out = matmul(out, base, precision)
        base = matmul(base, base, precision)
        k >>= 1
    return out


def block(blocks: Sequence[Sequence[Mat]]) -> Mat:
    """Assemble a block matrix; every block row shares a height, every block column a width."""
    rows: list = []
    ncols = sum(m.ncols for m in blocks[0]) if blocks else 0
    for brow in blocks:
        h = brow[0].nrows
        for m in brow:
            if m.nrows != h:
                raise ValueError("block heights disagree")
        for i in range(h):
            row: list = []
            for m in brow:
                row.extend(m.rows[i])
            rows.append(row)
    return Mat._raw(rows, len(rows), ncols)


def kronecker(a: Mat, b: Mat) -> Mat:
    out = Mat.zeros(a.nrows * b.nrows, a.ncols * b.ncols)
    for i, ra in enumerate(a.rows):
        for j, x in enumerate(ra):
            if not x.terms:
                continue
            for k, rb in enumerate(b.rows):
                orow = out.rows[i * b.nrows + k]
                for l, y in enumerate(rb):
                    if y.terms:
                        orow[j * b.ncols + l] = x * y
    return out


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SNFResult:
    """``U @ m @ V == D`` with ``D`` diagonal (entries ``T^e * unit``).

    ``factors`` lists the valuations of the nonzero diagonal entries in
    non-decreasing order.  With a finite ``precision`` every identity holds
    modulo ``T^precision`` and factors are all ``< precision``.
    """

    U: Mat
    V: Mat
    D: Mat
    factors: List[Fraction]
    precision: Optional[Fraction] = None

    @property
    def rank(self) -> int:
        return len(self.factors)


def _lin(a: NovikovScalar, x: NovikovScalar, b: NovikovScalar, y: NovikovScalar, prec):
    """a*x - b*y truncated."""
    if not y.terms or not b.terms:
        return x.mul(a, prec) if a is not ONE else (x.truncate(prec) if prec is not None else x)
    bx = b.mul(y, prec)
    if a is ONE:
        return x - bx
    return x.mul(a, prec) - bx


def snf(m: Mat, precision=None, want_transforms: bool = True) -> SNFResult:
    """Valuated Smith normal form over ``Lambda_{>=0}`` (optionally mod ``T^precision``).

    Pivot: least valuation in the remaining block, ties to the lowest
    (row, column).  Output diagonal valuations are non-decreasing.
    """
    if not m.in_ring():
        raise ValueError("snf requires entries in Lambda_{>=0}")
    prec = None if precision is None or precision == INF else as_fraction(precision)
    if prec is not None and prec <= 0:
        raise ValueError("precision must be positive")
    n, k = m.shape
    A = [list(r) for r in m.truncate(prec).rows]
    U = [list(r) for r in Mat.identity(n).rows] if want_transforms else None
    V = [list(r) for r in Mat.identity(k).rows] if want_transforms else None
    factors: List[Fraction] = []
    diag: List[NovikovScalar] = []
    for t in range(min(n, k)):
        best = None
        for i in range(t, n):
            row = A[i]
            for j in range(t, k):
                x = row[j]
                if x.terms:
                    v = x.terms[0][0]
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, pi, pj = best
        if pi != t:
            A[t], A[pi] = A[pi], A[t]
            if U is not None:
                U[t], U[pi] = U[pi], U[t]
        if pj != t:
            for row in A:
                row[t], row[pj] = row[pj], row[t]
            if V is not None:
                for row in V:
                    row[t], row[pj] = row[pj], row[t]
        piv = A[t][t]
        unit = piv.shift(-v)
        single = len(unit.terms) == 1
        inv_c = 1 / unit.terms[0][1] if single else None
        prow = A[t]
        # clear column t below the pivot
        for r in range(t + 1, n):
            b = A[r][t]
            if not b.terms:
                continue
            bq = b.shift(-v)
            if single:
                coef, lead = bq.scale(inv_c), ONE
            else:
                coef, lead = bq, unit
            row = A[r]
            for j in range(t, k):
                row[j] = _lin(lead, row[j], coef, prow[j], prec)
            row[t] = ZERO
            if U is not None:
                urow, upiv = U[r], U[t]
                for j in range(n):
                    urow[j] = _lin(lead, urow[j], coef, upiv[j], prec)
        # clear row t right of the pivot
        for c in range(t + 1, k):
            b = A[t][c]
            if not b.terms:
                continue
            bq = b.shift(-v)
            if single:
                coef, lead = bq.scale(inv_c), ONE
            else:
                coef, lead = bq, unit
            for r in range(t, n):
                A[r][c] = _lin(lead, A[r][c], coef, A[r][t], prec)
            A[t][c] = ZERO
            if V is not None:
                for row in V:
                    row[c] = _lin(lead, row[c], coef, row[t], prec)
        factors.append(v)
        diag.append(piv)
    D = Mat._raw(A, n, k)
    return SNFResult(
        U=Mat._raw(U, n, n) if U is not None else None,
        V=Mat._raw(V, k, k) if V is not None else None,
        D=D,
        factors=factors,
        precision=prec,
    )


def invariant_factors(m: Mat, precision=None) -> List[Fraction]:
    return snf(m, precision, want_transforms=False).factors


def rank(m: Mat, precision=None) -> int:
    return len(invariant_factors(m, precision))


# ---------------------------------------------------------------------------
# modular inverses and lattices modulo T^lam


def inverse_mod(a: Mat, lam) -> Mat:
    """Inverse of a square matrix with unit determinant, modulo ``T^lam``."""
    lam = as_fraction(lam)
    n = a.nrows
    if a.ncols != n:
        raise ValueError("inverse of a non-square matrix")
    A = [list(r) for r in a.truncate(lam).rows]
    B = [list(r) for r in Mat.identity(n).rows]
    for t in range(n):
        piv = None
        for i in range(t, n):
            if A[i][t].is_unit():
                piv = i
                break
        if piv is None:
            raise ValueError("matrix is not invertible over Lambda_{>=0}")
        A[t], A[piv] = A[piv], A[t]
        B[t], B[piv] = B[piv], B[t]
        inv = A[t][t].invert(lam)
        A[t] = [x.mul(inv, lam) for x in A[t]]
        B[t] = [x.mul(inv, lam) for x in B[t]]
        for r in range(n):
            if r == t or not A[r][t].terms:
                continue
            f = A[r][t]
            A[r] = [x - f.mul(y, lam) for x, y in zip(A[r], A[t])]
            B[r] = [x - f.mul(y, lam) for x, y in zip(B[r], B[t])]
    return Mat._raw(B, n, n)


def is_invertible(a: Mat) -> bool:
    """Invertible over ``Lambda_{>=0}``: square with all invariant factors units."""
    if a.nrows != a.ncols:
        return False
    f = invariant_factors(a)
    return len(f) == a.nrows and all(x == 0 for x in f)


def _with_torsion_cap(gens: Mat, lam: Fraction) -> Mat:
    return gens.hstack(Mat.diag([NovikovScalar.T(lam)] * gens.nrows))


@dataclass
class Lattice:
    """``L = span(gens) + T^lam Lambda^n`` inside ``Lambda_{>=0}^n``.

    ``P`` is invertible mod ``T^lam`` with ``P L = diag(T^{exps}) Lambda^n``.
    """

    P: Mat
    exps: List[Fraction]
    lam: Fraction

    @classmethod
    def span(cls, gens: Mat, lam) -> "Lattice":
        lam = as_fraction(lam)
        res = snf(_with_torsion_cap(gens, lam), lam)
        exps = list(res.factors) + [lam] * (gens.nrows - res.rank)
        return cls(P=res.U, exps=exps, lam=lam)

    @property
    def dim(self) -> int:
        return len(self.exps)

    def colength(self) -> Fraction:
        """Length of ``Lambda^n / L`` measured in exponent units."""
        return sum(self.exps, Fraction(0))

    def contains(self, vec: Sequence) -> bool:
        y = self.P.apply([NovikovScalar.coerce(x).truncate(self.lam) for x in vec])
        return all(yi.truncate(self.lam).valuation() >= e for yi, e in zip(y, self.exps))

    def contains_all(self, gens: Mat) -> bool:
        return all(self.contains(gens.col(j)) for j in range(gens.ncols))


def kernel_mod(a: Mat, lam) -> Mat:
    """Generators of the lift of ``{x : a x = 0 mod T^lam}`` (``T^lam`` multiples included)."""
    lam = as_fraction(lam)
    res = snf(a, lam)
    k = a.ncols
    cols = []
    for j in range(k):
        e = res.factors[j] if j < res.rank else None
        scale = ONE if e is None else NovikovScalar.T(lam - e)
        cols.append([x.mul(scale, lam) for x in res.V.col(j)])
    gens = Mat._raw([[cols[j][i] for j in range(k)] for i in range(k)], k, k) if k else Mat.zeros(0, 0)
    return gens


def quotient_bars(big: Mat, small: Mat, lam) -> List[Fraction]:
    """Cyclic decomposition of ``(span(big) + T^lam) / (span(small) + T^lam)``.

    ``small`` must lie inside the big lattice.  Returns exponents ``x`` with
    the quotient ``= sum Lambda_{>=0}/T^x``, dropping ``x = 0``.
    """
    lam = as_fraction(lam)
    Y = Lattice.span(big, lam)
    W = _with_torsion_cap(small, lam)
    PW = matmul(Y.P, W, lam)
    rows = []
    for i, e in enumerate(Y.exps):
        row = []
        for x in PW.rows[i]:
            x = x.truncate(lam)
            if x.terms and x.valuation() < e:
                raise ValueError("quotient_bars: small lattice is not contained in big lattice")
            row.append(x.shift(-e))
        rows.append(row)
    # coordinates of Y/W live modulo T^{lam - e_i} in row i; cap with those
    X = Mat._raw(rows, len(rows), PW.ncols)
    cap = Mat.diag([NovikovScalar.T(lam - e) if lam - e > 0 else ONE for e in Y.exps])
    X = X.hstack(cap)
    res = snf(X, lam)
    # a factor equal to lam vanishes modulo T^lam and shows up as missing rank
    bars = [f for f in res.factors if f > 0] + [lam] * (len(Y.exps) - res.rank)
    return sorted(bars)


def right_inverse_mod(a: Mat, lam) -> Mat:
    """``S`` with ``a S = I mod T^lam`` for a surjective-mod-``T^lam`` matrix ``a``."""
    lam = as_fraction(lam)
    res = snf(a, lam)
    r = a.nrows
    if res.rank < r or any(f != 0 for f in res.factors):
        raise ValueError("matrix is not surjective modulo T^lam")
    # U a V = [D | 0], D diagonal units
    dinv = Mat.diag([res.D.rows[i][i].invert(lam) for i in range(r)])
    Vr = res.V.submatrix(range(a.ncols), range(r))
    return mat_chain(Vr, dinv, res.U, precision=lam)


def common_denominator(mats: Iterable[Mat]) -> int:
    d = 1
    for m in mats:
        for r in m.rows:
            for x in r:
                for e, _ in x.terms:
                    d = d * e.denominator // math.gcd(d, e.denominator)
    return d
