"""Finite Novikov sums with exact rational coefficients and exponents.

A :class:`NovikovScalar` is a finite formal sum ``sum a_i T^{w_i}`` kept in
canonical form: exponents strictly increasing, no zero coefficients.  When
every exponent is non-negative the element lives in the Novikov ring
``Lambda_{>=0}``; negative exponents are allowed and model elements of the
Novikov field.  Infinite sums are never stored; precision is controlled by
:meth:`NovikovScalar.truncate`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Union

Rational = Union[int, Fraction]

INF = math.inf


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and rational strings ("3/4") to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError(f"floats are not accepted as exact rationals: {x!r}")
    raise TypeError(f"cannot interpret {x!r} as a rational")


class NovikovScalar:
    """Immutable canonical finite sum of ``coeff * T^exp`` terms."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable = ()):
        acc: dict = {}
        for exp, coeff in terms:
            exp = as_fraction(exp)
            coeff = as_fraction(coeff)
            if coeff:
                acc[exp] = acc.get(exp, 0) + coeff
        self.terms = tuple(sorted((e, c) for e, c in acc.items() if c))
        self._hash = None

    @classmethod
    def _raw(cls, terms: tuple) -> "NovikovScalar":
        # terms already canonical
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._hash = None
        return obj

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: Rational) -> "NovikovScalar":
        c = as_fraction(c)
        return cls._raw(((Fraction(0), c),)) if c else ZERO

    @classmethod
    def monomial(cls, coeff: Rational, exp: Rational) -> "NovikovScalar":
        coeff = as_fraction(coeff)
        return cls._raw(((as_fraction(exp), coeff),)) if coeff else ZERO

    @classmethod
    def T(cls, exp: Rational = 1) -> "NovikovScalar":
        return cls.monomial(1, exp)

    @classmethod
    def coerce(cls, x) -> "NovikovScalar":
        if isinstance(x, NovikovScalar):
            return x
        if isinstance(x, str):
            return parse_scalar(x)
        return cls.const(x)

    # predicates -----------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def in_ring(self) -> bool:
        """True when all exponents are >= 0 (element of Lambda_{>=0})."""
        return not self.terms or self.terms[0][0] >= 0

    def is_unit(self) -> bool:
        """Unit of Lambda_{>=0}: valuation exactly zero."""
        return bool(self.terms) and self.terms[0][0] == 0

    def valuation(self):
        """Least exponent; ``math.inf`` for zero."""
        return self.terms[0][0] if self.terms else INF

    def leading(self) -> tuple:
        return self.terms[0]

    def max_exponent(self):
        return self.terms[-1][0] if self.terms else -INF

    # arithmetic --------------------------------------------------------------
    def __neg__(self) -> "NovikovScalar":
        return NovikovScalar._raw(tuple((e, -c) for e, c in self.terms))

    def __add__(self, other) -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            other = NovikovScalar.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        return NovikovScalar._raw(_merge(self.terms, other.terms, 1))

    __radd__ = __add__

    def __sub__(self, other) -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            other = NovikovScalar.coerce(other)
        if not other.terms:
            return self
        return NovikovScalar._raw(_merge(self.terms, other.terms, -1))

    def __rsub__(self, other) -> "NovikovScalar":
        return NovikovScalar.coerce(other) - self

    def __mul__(self, other) -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            other = NovikovScalar.coerce(other)
        return self.mul(other)

    __rmul__ = __mul__

    def mul(self, other: "NovikovScalar", precision=None) -> "NovikovScalar":
        """Product, optionally dropping every term with exponent >= precision."""
        a, b = self.terms, other.terms
        if not a or not b:
            return ZERO
        if len(a) == 1 and len(b) == 1:
            e = a[0][0] + b[0][0]
            if precision is not None and e >= precision:
                return ZERO
            return NovikovScalar._raw(((e, a[0][1] * b[0][1]),))
        acc: dict = {}
        for ea, ca in a:
            if precision is not None and ea + b[0][0] >= precision:
                break
            for eb, cb in b:
                e = ea + eb
                if precision is not None and e >= precision:
                    break
                acc[e] = acc.get(e, 0) + ca * cb
        return NovikovScalar._raw(tuple(sorted((e, c) for e, c in acc.items() if c)))

    def scale(self, c: Rational) -> "NovikovScalar":
        c = as_fraction(c)
        if not c:
            return ZERO
        return NovikovScalar._raw(tuple((e, c * x) for e, x in self.terms))

    def shift(self, w: Rational) -> "NovikovScalar":
        """Multiply by ``T^w``."""
        w = as_fraction(w)
        return NovikovScalar._raw(tuple((e + w, c) for e, c in self.terms))

    def __pow__(self, n: int) -> "NovikovScalar":
        if n < 0:
            raise ValueError("negative powers need invert()")
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def truncate(self, lam) -> "NovikovScalar":
        """Keep exactly the terms with exponent < lam."""
        if lam is None or lam == INF:
            return self
        lam = as_fraction(lam)
        if lam <= 0:
            raise ValueError(f"truncation level must be positive, got {lam}")
        t = self.terms
        if not t or t[-1][0] < lam:
            return self
        return NovikovScalar._raw(tuple(x for x in t if x[0] < lam))

    def invert(self, lam) -> "NovikovScalar":
        """Inverse in the Novikov field, correct modulo ``T^lam``.

        Writes ``x = a T^v (1 - y)`` with ``val(y) > 0`` and sums the
        geometric series for ``(1 - y)^{-1}`` until the next term would be
        invisible at precision ``lam + v``.
        """
        if not self.terms:
            raise ZeroDivisionError("zero has no inverse in the Novikov field")
        lam = as_fraction(lam)
        v, a = self.terms[0]
        inv_a = 1 / a
        # unit part u = 1 - y with val(y) > 0
        y = NovikovScalar._raw(tuple((e - v, -c * inv_a) for e, c in self.terms[1:]))
        # need (1-y)^{-1} modulo T^{lam + v} so that T^{-v} times it is good mod T^lam
        prec = lam + v
        if prec <= 0:
            return ZERO
        series = ONE
        if y.terms:
            power = ONE
            step = y.terms[0][0]
            for _ in range(int(math.ceil(prec / step)) + 1):
                power = power.mul(y, prec)
                if not power.terms:
                    break
                series = series + power
        return NovikovScalar._raw(
            tuple((e - v, c * inv_a) for e, c in series.terms)
        ).truncate(lam)

    # comparison ------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, NovikovScalar):
            return self.terms == other.terms
        try:
            return self.terms == NovikovScalar.coerce(other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def __repr__(self) -> str:
        return f"NovikovScalar({format_scalar(self)!r})"

    def __str__(self) -> str:
        return format_scalar(self)

    # serialization ---------------------------------------------------------
    def to_json(self) -> str:
        """Text form, e.g. ``"1 - 2*T^(1/2)"``; :meth:`from_json` also takes term lists."""
        return format_scalar(self)

    @classmethod
    def from_json(cls, data) -> "NovikovScalar":
        if isinstance(data, (int, str)):
            return cls.coerce(data)
        terms = []
        for item in data:
            if len(item) != 4:
                raise ValueError(f"scalar term must be [cn, cd, en, ed], got {item!r}")
            cn, cd, en, ed = item
            terms.append((Fraction(en, ed), Fraction(cn, cd)))
        return cls(terms)

    def denominators(self) -> set:
        return {e.denominator for e, _ in self.terms}


def _merge(a: tuple, b: tuple, sign: int) -> tuple:
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        ea, ca = a[i]
        eb, cb = b[j]
        if ea < eb:
            out.append(a[i])
            i += 1
        elif eb < ea:
            out.append((eb, cb if sign > 0 else -cb))
            j += 1
        else:
            c = ca + cb if sign > 0 else ca - cb
            if c:
                out.append((ea, c))
            i += 1
            j += 1
    out.extend(a[i:])
    if sign > 0:
        out.extend(b[j:])
    else:
        out.extend((e, -c) for e, c in b[j:])
    return tuple(out)


ZERO = NovikovScalar._raw(())
ONE = NovikovScalar._raw(((Fraction(0), Fraction(1)),))


def valuation(x: NovikovScalar):
    return x.valuation()


def truncate(x: NovikovScalar, lam) -> NovikovScalar:
    return x.truncate(lam)


def invert(x: NovikovScalar, lam) -> NovikovScalar:
    return x.invert(lam)


def arith(x: NovikovScalar, y: NovikovScalar, op: str) -> NovikovScalar:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# text syntax: sum of ``c*T^(p/q)`` terms

_TERM = re.compile(
    r"""^(?P<coeff>\d+(?:/\d+)?)?\s*\*?\s*
        (?:(?P<t>T)(?:\s*\^\s*(?:\((?P<pexp>-?\d+(?:/\d+)?)\)|(?P<exp>-?\d+(?:/\d+)?)))?)?$""",
    re.VERBOSE,
)


def parse_scalar(text: str) -> NovikovScalar:
    """Parse e.g. ``"1 - 2*T^(1/2) + 3/4*T^2"``."""
    src = text.strip()
    if not src:
        raise ValueError("empty scalar")
    # split on top-level + and - (exponent signs sit inside parentheses or after ^)
    pieces = []
    depth = 0
    cur = ""
    for i, ch in enumerate(src):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip() and not cur.rstrip().endswith("^"):
            pieces.append(cur)
            cur = ch
        else:
            cur += ch
    pieces.append(cur)
    terms = []
    for piece in pieces:
        p = piece.replace(" ", "")
        sign = 1
        while p and p[0] in "+-":
            if p[0] == "-":
                sign = -sign
            p = p[1:]
        m = _TERM.match(p)
        if not p or not m or (m.group("coeff") is None and m.group("t") is None):
            raise ValueError(f"cannot parse scalar term {piece.strip()!r} in {text!r}")
        coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
        if m.group("t"):
            e = m.group("pexp") or m.group("exp") or "1"
            exp = Fraction(e)
        else:
            exp = Fraction(0)
        terms.append((exp, sign * coeff))
    return NovikovScalar(terms)


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(x: NovikovScalar) -> str:
    if not x.terms:
        return "0"
    parts = []
    for e, c in x.terms:
        mag = abs(c)
        if e == 0:
            body = _fmt_q(mag)
        else:
            tpart = "T" if e == 1 else (f"T^{_fmt_q(e)}" if e.denominator == 1 and e > 0 else f"T^({_fmt_q(e)})")
            body = tpart if mag == 1 else f"{_fmt_q(mag)}*{tpart}"
        parts.append(("-" if c < 0 else "+", body))
    head_sign, head = parts[0]
    out = ("-" if head_sign == "-" else "") + head
    for s, body in parts[1:]:
        out += f" {s} {body}"
    return out
