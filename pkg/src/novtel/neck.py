"""Necks, profile and matching functions, energy shifts and index bounds.

All neck parameters are exact rationals, so breakpoint values, end
differences and energy shifts are exact.  The two monotone bump pieces use
the quintic smoothstep ``6x^5 - 15x^4 + 10x^3``, scaled to total increase
``delta``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .complex import GradedComplex, GradedMap
from .errors import ShapeError, UnsupportedInput, ValidationError
from .linalg import Mat
from .novikov import INF, NovikovScalar, as_fraction
from .ray import Ray, RayMorphism, validate_morphism


def bump(x: Fraction) -> Fraction:
    """Monotone template on [0, 1] with bump(0) = 0 and bump(1) = 1."""
    return x * x * x * (x * (6 * x - 15) + 10)


@dataclass(frozen=True)
class NeckParams:
    alpha: Fraction
    s: Fraction
    eps: Fraction
    delta: Fraction
    c: Fraction
    K: Fraction
    reeb_periods: Tuple[Fraction, ...] = ()

    # derived constants ----------------------------------------------------
    @property
    def s_tilde(self) -> Fraction:
        return tilde_s(self.s, self.eps)

    @property
    def b(self) -> Fraction:
        return -self.delta - self.c * (1 - self.eps)

    @property
    def c_K(self) -> Fraction:
        return -self.K

    @property
    def B(self) -> Fraction:
        return self.K * self.eps + self.delta - self.c * (1 + 2 * self.eps)

    @property
    def b_tilde(self) -> Fraction:
        return -self.s * self.delta - self.c * self.s * (1 - self.eps)

    @property
    def c_tilde_K(self) -> Fraction:
        return -self.K * self.s

    @property
    def d_tilde(self) -> Fraction:
        return self.K * self.eps * (1 - self.s_tilde)

    @property
    def B_tilde(self) -> Fraction:
        st = self.s_tilde
        return self.K * self.eps + st * self.delta - self.c * st * (1 + 2 * self.eps)

    @property
    def lo(self) -> Fraction:
        return 1 - self.alpha

    @property
    def hi(self) -> Fraction:
        return self.s + self.alpha

    def with_K(self, K) -> "NeckParams":
        return build_neck(self.alpha, self.s, self.eps, self.delta, self.c, K, self.reeb_periods)

    def constants(self) -> Dict[str, Fraction]:
        return {"s_tilde": self.s_tilde, "b": self.b, "c_K": self.c_K, "B": self.B,
                "b_tilde": self.b_tilde, "c_tilde_K": self.c_tilde_K, "d_tilde": self.d_tilde,
                "B_tilde": self.B_tilde}

    def to_json(self) -> dict:
        return {"alpha": str(self.alpha), "s": str(self.s), "epsilon": str(self.eps),
                "delta": str(self.delta), "c": str(self.c), "K": str(self.K),
                "reeb_periods": [str(p) for p in self.reeb_periods]}

    @classmethod
    def from_json(cls, data: Mapping) -> "NeckParams":
        try:
            return build_neck(data["alpha"], data["s"], data["epsilon"], data["delta"], data["c"],
                              data["K"], data.get("reeb_periods", ()))
        except KeyError as exc:
            raise ShapeError(f"neck: missing parameter {exc}") from None


def tilde_s(s, eps) -> Fraction:
    """``s~ = (s + eps) / (1 + eps)``, the unique solution of ``eps = s~(1 + eps) - s``."""
    s, eps = as_fraction(s), as_fraction(eps)
    return (s + eps) / (1 + eps)


def build_neck(alpha, s, eps, delta, c, K, reeb_periods: Iterable = ()) -> NeckParams:
    """Build and check a neck; every violated inequality is named."""
    alpha, s, eps, delta, c, K = (as_fraction(x) for x in (alpha, s, eps, delta, c, K))
    periods = tuple(sorted(as_fraction(p) for p in reeb_periods))
    p = NeckParams(alpha, s, eps, delta, c, K, periods)
    problems = []
    if not 0 < alpha < 1:
        problems.append("0 < alpha < 1")
    if s <= 1:
        problems.append("s > 1")
    if not (0 < eps < min(alpha, s)):
        problems.append("0 < epsilon < min(alpha, s)")
    if delta <= 0:
        problems.append("delta > 0")
    if c <= 0:
        problems.append("c > 0")
    if K <= 0:
        problems.append("K > 0")
    if problems:
        raise ValidationError("neck parameters violate: " + "; ".join(problems))
    if any(x <= 0 for x in periods):
        problems.append("Reeb periods must be positive")
    if K in periods:
        problems.append(f"K = {K} is a Reeb period")
    if periods and c >= periods[0]:
        problems.append(f"c = {c} is not smaller than the least Reeb period {periods[0]}")
    # c(1 - alpha) + b = f(1 - alpha) < 0, so the bound is read on its magnitude
    if not (s - 1 + alpha) * c < -(c * (1 - alpha) + p.b):
        problems.append("(s - 1 + alpha) c < |c (1 - alpha) + b|")
    if not c * (1 - alpha) + p.b + eps > 0:
        problems.append("c (1 - alpha) + b + epsilon > 0")
    # the five pieces of g must fit inside the neck
    if not s * (1 - eps) > 1 - alpha:
        problems.append("s (1 - epsilon) > 1 - alpha")
    if not p.s_tilde * (1 + 2 * eps) < s + alpha:
        problems.append("s_tilde (1 + 2 epsilon) < s + alpha")
    if not 1 + 2 * eps < s + alpha:
        problems.append("1 + 2 epsilon < s + alpha")
    if problems:
        raise ValidationError("inadmissible neck: " + "; ".join(problems))
    assert p.eps == p.s_tilde * (1 + p.eps) - p.s
    return p


def _check_domain(p: NeckParams, r: Fraction) -> Fraction:
    r = as_fraction(r)
    if not p.lo <= r <= p.hi:
        raise ValueError(f"r = {r} outside the neck [{p.lo}, {p.hi}]")
    return r


def eval_profile(p: NeckParams, r) -> Fraction:
    """``f(r)``; ``f(1) = 0``."""
    r = _check_domain(p, r)
    e = p.eps
    if r <= 1 - e:
        return p.c * r + p.b
    if r <= 1:
        return -p.delta + p.delta * bump((r - (1 - e)) / e)
    if r <= 1 + e:
        return p.K * r + p.c_K
    if r <= 1 + 2 * e:
        return p.K * e + p.delta * bump((r - 1 - e) / e)
    return p.c * r + p.B


def eval_matching(p: NeckParams, r) -> Fraction:
    """``F(r)`` with ``F'(r) = f'(g^{-1}(r))`` and ``F(s) = 0``."""
    r = _check_domain(p, r)
    s, e, st = p.s, p.eps, p.s_tilde
    if r <= s * (1 - e):
        return p.c * r + p.b_tilde
    if r <= s:
        return s * eval_profile(p, r / s)
    if r <= st * (1 + e):
        return p.K * r + p.c_tilde_K
    if r <= st * (1 + 2 * e):
        return st * eval_profile(p, r / st) + p.d_tilde
    return p.c * r + p.B_tilde


def eval_g(p: NeckParams, r) -> Fraction:
    """The neck diffeomorphism: linear on the transition pieces, ``g(1) = s``."""
    r = _check_domain(p, r)
    s, e, st, a = p.s, p.eps, p.s_tilde, p.alpha
    if r <= 1 - e:
        lo, hi = 1 - a, s * (1 - e)
        return lo + (r - lo) * (hi - lo) / (a - e)
    if r <= 1:
        return s * r
    if r <= 1 + e:
        return r + s - 1
    if r <= 1 + 2 * e:
        return st * r
    lo, hi = st * (1 + 2 * e), s + a
    return lo + (r - (1 + 2 * e)) * (hi - lo) / (s + a - 1 - 2 * e)


def breakpoints(p: NeckParams) -> Dict[str, List[Fraction]]:
    e, s, st = p.eps, p.s, p.s_tilde
    return {"f": [1 - e, Fraction(1), 1 + e, 1 + 2 * e],
            "F": [s * (1 - e), s, st * (1 + e), st * (1 + 2 * e)],
            "g": [1 - e, Fraction(1), 1 + e, 1 + 2 * e]}


def piece_values(p: NeckParams, which: str, r) -> Tuple[Fraction, Fraction]:
    """Left and right formulas at a breakpoint (for continuity checks)."""
    r = as_fraction(r)
    s, e, st = p.s, p.eps, p.s_tilde
    if which == "f":
        pieces = [lambda x: p.c * x + p.b,
                  lambda x: -p.delta + p.delta * bump((x - (1 - e)) / e),
                  lambda x: p.K * x + p.c_K,
                  lambda x: p.K * e + p.delta * bump((x - 1 - e) / e),
                  lambda x: p.c * x + p.B]
    elif which == "F":
        pieces = [lambda x: p.c * x + p.b_tilde,
                  lambda x: s * (-p.delta + p.delta * bump((x / s - (1 - e)) / e)),
                  lambda x: p.K * x + p.c_tilde_K,
                  lambda x: st * (p.K * e + p.delta * bump((x / st - 1 - e) / e)) + p.d_tilde,
                  lambda x: p.c * x + p.B_tilde]
    else:
        raise ValueError("which must be 'f' or 'F'")
    idx = breakpoints(p)[which].index(r)
    return pieces[idx](r), pieces[idx + 1](r)


# ---------------------------------------------------------------------------
# end differences and bounds


def inner_difference(p: NeckParams) -> Fraction:
    """``F(1 - alpha) - f(1 - alpha) = -(s - 1)(delta + c(1 - eps))``."""
    return eval_matching(p, p.lo) - eval_profile(p, p.lo)


def outer_difference(p: NeckParams) -> Fraction:
    """``F(s + alpha) - f(s + alpha) = (s_tilde - 1)(delta - c(1 + 2 eps))``."""
    return eval_matching(p, p.hi) - eval_profile(p, p.hi)


def band_samples(p: NeckParams, n: int = 16) -> List[Fraction]:
    e = p.eps
    inner = [1 - e + e * Fraction(j, n) for j in range(n + 1)]
    outer = [1 + e + e * Fraction(j, n) for j in range(n + 1)]
    return inner + outer


@dataclass
class BoundsReport:
    C: Fraction
    inner: Dict[str, Fraction]
    outer: Dict[str, Fraction]
    band_max: Dict[str, Fraction]
    k_independent: bool
    formulas: Dict[str, str]
    ok: bool

    def to_json(self) -> dict:
        return {"C": str(self.C),
                "inner_difference": {k: str(v) for k, v in self.inner.items()},
                "outer_difference": {k: str(v) for k, v in self.outer.items()},
                "band_max": {k: str(v) for k, v in self.band_max.items()},
                "k_independent": self.k_independent, "formulas": self.formulas, "ok": self.ok}


def check_bounds(p: NeckParams, C, K_sweep: Sequence, samples: int = 16) -> BoundsReport:
    """Check the matching bounds uniformly over a sweep of slopes ``K``.

    Raises :class:`ValidationError` with a witness ``(r, K)`` on violation.
    """
    C = as_fraction(C)
    if C <= 0:
        raise ValueError("C must be positive")
    inner, outer, band = {}, {}, {}
    for K in K_sweep:
        q = p.with_K(K)
        key = str(q.K)
        di, do = inner_difference(q), outer_difference(q)
        inner[key], outer[key] = di, do
        if abs(di) >= C:
            raise ValidationError(f"|F(1-alpha) - f(1-alpha)| = {abs(di)} >= C at K = {q.K}", where=(q.lo, q.K))
        if abs(do) >= C:
            raise ValidationError(f"|F(s+alpha) - f(s+alpha)| = {abs(do)} >= C at K = {q.K}", where=(q.hi, q.K))
        worst = Fraction(0)
        for r in band_samples(q, samples):
            gap = abs(eval_matching(q, eval_g(q, r)) - eval_profile(q, r))
            if gap >= C:
                raise ValidationError(f"|F(g(r)) - f(r)| = {gap} >= C at r = {r}, K = {q.K}", where=(r, q.K))
            worst = max(worst, gap)
        band[key] = worst
    k_indep = len(set(inner.values())) <= 1 and len(set(outer.values())) <= 1
    formulas = {
        "inner": "F(1-alpha) - f(1-alpha) = -(s-1)(delta + c(1-epsilon))",
        "outer": "F(s+alpha) - f(s+alpha) = (s_tilde-1)(delta - c(1+2 epsilon))",
        "inner_band": "F(g(r)) - f(r) = (s-1) f(r) on [1-epsilon, 1]",
        "outer_band": "F(g(r)) - f(r) = (s_tilde-1)(f(r) - K epsilon) on [1+epsilon, 1+2 epsilon]",
    }
    return BoundsReport(C, inner, outer, band, k_indep, formulas, True)


# ---------------------------------------------------------------------------
# orbits and energy shifts


@dataclass(frozen=True)
class OrbitDatum:
    kind: str
    radius: Optional[Fraction] = None
    period: Optional[Fraction] = None
    cz: Optional[int] = None
    region: Optional[str] = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("constant", "nonconstant"):
            raise ValueError(f"orbit kind must be 'constant' or 'nonconstant', got {self.kind!r}")
        if self.kind == "constant" and self.region not in ("inner", "outer"):
            raise ValueError("constant orbits need region 'inner' or 'outer'")
        if self.kind == "nonconstant" and (self.radius is None or self.period is None):
            raise ValueError("non-constant orbits need a radius and a period")
        if self.period is not None and self.period <= 0:
            raise ValueError("periods must be positive")

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.radius is not None:
            out["radius"] = str(self.radius)
        if self.period is not None:
            out["period"] = str(self.period)
        if self.cz is not None:
            out["cz"] = self.cz
        if self.region is not None:
            out["region"] = self.region
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, data: Mapping, label: str = "") -> "OrbitDatum":
        frac = lambda k: as_fraction(data[k]) if data.get(k) is not None else None
        return cls(data["kind"], frac("radius"), frac("period"),
                   int(data["cz"]) if data.get("cz") is not None else None,
                   data.get("region"), data.get("label", label))


def constant_orbit(region: str, label: str = "", cz: Optional[int] = None) -> OrbitDatum:
    return OrbitDatum("constant", region=region, label=label, cz=cz)


def reeb_orbit(radius, period, cz: Optional[int] = None, label: str = "") -> OrbitDatum:
    return OrbitDatum("nonconstant", as_fraction(radius), as_fraction(period), cz, None, label)


def in_bands(p: NeckParams, r: Fraction) -> bool:
    e = p.eps
    return 1 - e <= r <= 1 or 1 + e <= r <= 1 + 2 * e


def cylinder_area(p: NeckParams, gamma: OrbitDatum) -> Fraction:
    """Area of the trivial cylinder from ``r`` to ``g(r)``: ``P (g(r) - r)``."""
    return gamma.period * (eval_g(p, gamma.radius) - gamma.radius)


def delta(gamma: OrbitDatum, p: NeckParams) -> Fraction:
    """Energy shift ``Delta(gamma)``."""
    if gamma.kind == "constant":
        return inner_difference(p) if gamma.region == "inner" else outer_difference(p)
    r = gamma.radius
    if not in_bands(p, r):
        raise ValidationError(
            f"orbit {gamma.label or ''} at r = {r} is outside [1-eps, 1] and [1+eps, 1+2eps]")
    return (eval_matching(p, eval_g(p, r)) - eval_profile(p, r)) + cylinder_area(p, gamma)


def energy_shift_constant(p: NeckParams) -> Fraction:
    """Uniform constant: sup of |F - f| over the ends and the bands (sampled exactly)."""
    vals = [abs(inner_difference(p)), abs(outer_difference(p))]
    vals += [abs(eval_matching(p, eval_g(p, r)) - eval_profile(p, r)) for r in band_samples(p)]
    # exact band sup: |(s-1) f| <= (s-1) delta, |(s~-1)(f - K eps)| <= (1 - s~) delta
    vals += [(p.s - 1) * p.delta, abs(p.s_tilde - 1) * p.delta]
    return max(vals)


# ---------------------------------------------------------------------------
# rescaling


OrbitMap = Mapping[str, OrbitDatum]


def _orbit_for(orbits: OrbitMap, label: str, where: str) -> OrbitDatum:
    try:
        return orbits[label]
    except KeyError:
        raise ShapeError(f"generator {label!r} ({where}) carries no orbit datum") from None


def _deltas(C: GradedComplex, orbits: OrbitMap, p: NeckParams, where: str) -> Dict[int, List[Fraction]]:
    return {k: [delta(_orbit_for(orbits, g, where), p) for g in labels] for k, labels in C.gens.items()}


def _rescale(m: Mat, d_out: List[Fraction], d_in: List[Fraction], where: str) -> Mat:
    rows = []
    for i, row in enumerate(m.rows):
        new = []
        for j, x in enumerate(row):
            if x.terms:
                w = d_out[i] - d_in[j]
                y = x.shift(w)
                if not y.in_ring():
                    raise ValidationError(
                        f"{where}: entry ({i}, {j}) = {x} shifted by Delta(out) - Delta(in) = {w} "
                        f"leaves Lambda_>=0 (modeling error)", where=(i, j))
                new.append(y)
            else:
                new.append(x)
        rows.append(new)
    return Mat._raw(rows, m.nrows, m.ncols)


@dataclass
class PhiResult:
    ray: Ray
    phi: RayMorphism
    phi_inv: RayMorphism
    deltas: List[Dict[int, List[Fraction]]]


def apply_phi(R: Ray, params, orbits) -> PhiResult:
    """Rescale every entry by ``T^{Delta(out) - Delta(in)}``; ``Phi = diag(T^{Delta})``.

    ``params`` is one :class:`NeckParams` or one per prefix slice;
    ``orbits`` maps generator labels to :class:`OrbitDatum` (or is a list
    of such maps, one per slice).  Asserts that ``Phi`` is a strict chain
    isomorphism and ``Phi o Phi^{-1} = id``.
    """
    N = R.N
    plist = list(params) if isinstance(params, (list, tuple)) else [params] * N
    olist = list(orbits) if isinstance(orbits, (list, tuple)) else [orbits] * N
    if len(plist) != N or len(olist) != N:
        raise ShapeError("need neck parameters and orbit data for every prefix slice")
    deltas = [_deltas(R.slice(i), olist[i - 1], plist[i - 1], f"slice {i}") for i in range(1, N + 1)]
    g = R.grading

    def dl(i, k):
        return deltas[i - 1].get(g.norm(k), [])

    slices = []
    for i in range(1, N + 1):
        C = R.slice(i)
        diff = {k: _rescale(m, dl(i, k + 1), dl(i, k), f"slice {i} differential, degree {k}")
                for k, m in C.diff.items()}
        slices.append(GradedComplex(C.gens, diff, g))
    maps = []
    for i in range(1, N):
        c = R.map(i)
        blocks = {k: _rescale(m, dl(i + 1, k), dl(i, k), f"map c_{i}, degree {k}") for k, m in c.blocks.items()}
        maps.append(GradedMap(slices[i - 1], slices[i], blocks))
    phi_blocks = {k: _rescale(m, dl(N, k), dl(N, k), f"tail, degree {k}") for k, m in R.phi.blocks.items()}
    tail = GradedMap(slices[-1], slices[-1], phi_blocks)
    out = Ray(slices, maps, tail, (R.name + "~") if R.name else "")

    def diag_map(i, sign):
        C, S = R.slice(i), slices[i - 1]
        blocks = {k: Mat.diag([NovikovScalar.T(sign * x) for x in dl(i, k)]) for k in C.gens}
        return GradedMap(C, S, blocks) if sign > 0 else GradedMap(S, C, blocks)

    Phi = RayMorphism(R, out, [diag_map(i, 1) for i in range(1, N + 1)], name="Phi")
    Phi_inv = RayMorphism(out, R, [diag_map(i, -1) for i in range(1, N + 1)], name="Phi^-1")
    try:
        validate_morphism(Phi)
        validate_morphism(Phi_inv)
    except ValidationError as exc:
        raise ValidationError(f"Phi is not a strict chain isomorphism: {exc}") from None
    if not Phi.strict:
        raise ValidationError("Phi must be strict")
    from .ray import compose
    both = compose(Phi, Phi_inv)
    for i in range(1, N + 1):
        ident = both.fi(i)
        for k in slices[i - 1].gens:
            if ident.block(k) != Mat.identity(slices[i - 1].rank(k)):
                raise ValidationError(f"Phi o Phi^-1 is not the identity on slice {i}, degree {k}")
    return PhiResult(out, Phi, Phi_inv, deltas)


def valuation_shifts(R: Ray, res: PhiResult) -> List[Tuple[str, int, int, int, Fraction, Fraction]]:
    """For every nonzero structure entry: (where, degree, row, col, new - old valuation, expected)."""
    out = []
    g = R.grading
    d = res.deltas

    def dl(i, k):
        return d[i - 1].get(g.norm(k), [])

    def scan(where, i_in, i_out, k, m_old, m_new):
        for r, (ro, rn) in enumerate(zip(m_old.rows, m_new.rows)):
            for c, (x, y) in enumerate(zip(ro, rn)):
                if x.terms:
                    out.append((where, k, r, c, y.valuation() - x.valuation(), dl(i_out, k if where != "d" else k + 1)[r] - dl(i_in, k)[c]))

    for i in range(1, R.N + 1):
        for k, m in R.slice(i).diff.items():
            scan("d", i, i, k, m, res.ray.slice(i).d(k))
    for i in range(1, R.N):
        for k, m in R.map(i).blocks.items():
            scan("c", i, i + 1, k, m, res.ray.map(i).block(k))
    for k, m in R.phi.blocks.items():
        scan("c", R.N, R.N, k, m, res.ray.phi.block(k))
    return out


# ---------------------------------------------------------------------------
# index boundedness


@dataclass
class IndexTable:
    rows: Dict[int, Dict[str, object]]
    flagged: List[int]
    caps: Tuple[Fraction, ...]

    @property
    def bounded(self) -> bool:
        return not self.flagged

    def to_json(self) -> dict:
        return {"caps": [str(c) for c in self.caps],
                "verdict": "bounded-within-cap" if self.bounded else "unbounded",
                "flagged": self.flagged,
                "table": [{"cz": k, **{kk: (str(v) if isinstance(v, Fraction) else v) for kk, v in row.items()}}
                          for k, row in sorted(self.rows.items())]}


def index_bounded_check(orbits: Iterable, cap, orbits_high: Optional[Iterable] = None,
                        cap_high=None) -> IndexTable:
    """Group ``(period, cz)`` pairs by index; probe growth between two caps.

    An index is flagged when its count grows from ``cap`` to ``cap_high``
    and its least period lies below ``cap / 2``: such a class keeps acquiring
    orbits far beyond its start, unlike the classes of a nondegenerate
    ellipsoid whose periods span a bounded window.
    """
    cap = as_fraction(cap)

    def norm(items):
        out = []
        for o in items:
            if isinstance(o, OrbitDatum):
                out.append((o.period, o.cz))
            else:
                per, cz = o
                out.append((as_fraction(per), int(cz)))
        return out

    low = [o for o in norm(orbits) if o[0] <= cap]
    groups = defaultdict(list)
    for per, cz in low:
        groups[cz].append(per)
    rows = {cz: {"count": len(v), "min_period": min(v), "max_period": max(v)} for cz, v in groups.items()}
    flagged = []
    caps = (cap,)
    if orbits_high is not None:
        ch = as_fraction(cap_high)
        if ch <= cap:
            raise ValueError("second cap must exceed the first")
        caps = (cap, ch)
        hg = defaultdict(list)
        for per, cz in norm(orbits_high):
            if per <= ch:
                hg[cz].append(per)
        for cz, v in hg.items():
            row = rows.setdefault(cz, {"count": 0, "min_period": None, "max_period": None})
            row["count_high"] = len(v)
            row["max_period_high"] = max(v)
            if len(v) > row["count"] and min(v) < cap / 2:
                flagged.append(cz)
    return IndexTable(rows, sorted(flagged), caps)


@dataclass
class EllipsoidOrbits:
    orbits: List[OrbitDatum]
    warnings: List[str]


def ellipsoid_orbits(a: Sequence, period_cap) -> EllipsoidOrbits:
    """Reeb orbits ``gamma_i^k`` of the ellipsoid boundary with period ``k a_i <= cap``.

    ``CZ(gamma_i^k) = n - 1 + 2k + sum_{j != i} (2 floor(k a_i / a_j) + 1)``.
    """
    a = [as_fraction(x) for x in a]
    if not a or any(x <= 0 for x in a):
        raise ValueError("ellipsoid parameters must be positive")
    cap = as_fraction(period_cap)
    n = len(a)
    orbits, warnings = [], []
    for i, ai in enumerate(a):
        k = 1
        while k * ai <= cap:
            cz = n - 1 + 2 * k
            for j, aj in enumerate(a):
                if j == i:
                    continue
                ratio = k * ai / aj
                if ratio.denominator == 1:
                    msg = f"degenerate: {k}*a_{i + 1}/a_{j + 1} = {ratio} is an integer"
                    if msg not in warnings:
                        warnings.append(msg)
                cz += 2 * math.floor(ratio) + 1
            orbits.append(OrbitDatum("nonconstant", Fraction(1), k * ai, cz, None, f"gamma_{i + 1}^{k}"))
            k += 1
    orbits.sort(key=lambda o: (o.period, o.label))
    return EllipsoidOrbits(orbits, warnings)


# ---------------------------------------------------------------------------
# extension to completions


@dataclass
class ExtendsVerdict:
    extends: bool
    reason: str
    sup_by_index: Dict[object, Fraction]
    constant: Fraction
    lambda_level_agree: Optional[bool] = None
    barcodes_agree: Dict[str, bool] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verdict": "extends" if self.extends else "does-not-extend", "reason": self.reason,
                "sup_abs_delta_by_cz": {str(k): str(v) for k, v in self.sup_by_index.items()},
                "uniform_constant": str(self.constant),
                "lambda_level_agree": self.lambda_level_agree,
                "barcodes_agree": self.barcodes_agree}


def phi_extends(R: Ray, params: NeckParams, orbits: OrbitMap, bound_a, index_table: IndexTable,
                schedule: Sequence = (1, 10)) -> ExtendsVerdict:
    """Does ``Phi`` extend to completed telescopes?

    Per CZ index the table bounds the periods; then ``|Delta| <= a P_max +
    const``.  A flagged (unbounded) index class means no such bound.  When
    the verdict is "extends", the rescaled ray is computed and compared with
    ``R`` over Lambda (exact free ranks of the certified colimits) and by
    truncated barcodes at each scheduled level.
    """
    from .completion import truncated_homology
    from .complex import homology_barcode
    a = as_fraction(bound_a)
    const = energy_shift_constant(params)
    sup: Dict[object, Fraction] = {}
    labels = {g for i in range(1, R.N + 1) for v in R.slice(i).gens.values() for g in v}
    for lab in sorted(labels):
        o = _orbit_for(orbits, lab, "phi_extends")
        d = abs(delta(o, params))
        key = o.cz if o.cz is not None else "unindexed"
        sup[key] = max(sup.get(key, Fraction(0)), d)
        if o.kind == "nonconstant":
            row = index_table.rows.get(o.cz)
            pmax = row.get("max_period_high") or row.get("max_period") if row else None
            if pmax is not None and d > a * pmax + const:
                return ExtendsVerdict(False, f"|Delta| = {d} exceeds a*P_max + C for {lab} (CZ {o.cz})",
                                      sup, const)
    if index_table.flagged:
        return ExtendsVerdict(False, "unbounded index classes: " + ", ".join(f"CZ {k}" for k in index_table.flagged),
                              sup, const)
    res = apply_phi(R, params, orbits)
    S = res.ray
    agree = None
    kinds = (R.tail_kind(), S.tail_kind())
    if kinds[0] == kinds[1] == "positive_shift":
        agree = True
    elif kinds[0] == kinds[1] == "constant":
        hr, hs = homology_barcode(R.slice(R.N)), homology_barcode(S.slice(S.N))
        agree = all(hr.full_count(k) == hs.full_count(k) for k in R.slice(R.N).gens)
    bars = {}
    for lam in schedule:
        lam = as_fraction(lam)
        bars[str(lam)] = truncated_homology(R, lam) == truncated_homology(S, lam)
    return ExtendsVerdict(True, "every index class has bounded periods, so Delta is bounded per class",
                          sup, const, agree, bars)
