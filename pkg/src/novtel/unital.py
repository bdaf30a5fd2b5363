"""Units, realizations, raised levels and products at the level of chain data.

A unit on a ray ``C`` is a family of closed degree-0 elements ``u_i`` with
``c_i(u_i) = u_{i+1} + d p_{i+1}``.  Beyond the stored slices the data
scales by ``T^w`` per step (``w = tail_weight``): ``u_i = T^{w(i-L)} u_L``
and ``p_{i+1} = T^{w(i-L)} p_tail``, so the single identity
``phi(u_L) = T^w u_L + d p_tail`` covers the whole tail.  ``w = 0`` is the
periodic case, ``w = delta`` pushes a unit forward along ``phi = T^delta id``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .complex import GradedComplex, GradedMap, compose as compose_maps, tensor, tensor_vectors
from .completion import (HomologyClass, InducedMap, VisibilityVerdict, _schedule, class_from_slice,
                         same_class, visibility)
from .errors import InvariantViolation, ShapeError, ValidationError
from .linalg import Mat
from .novikov import ONE, ZERO, NovikovScalar, as_fraction
from .ray import (ColimitModel, Ray, RayHomotopy, RayMorphism, colimit_mod, compose, tensor_rays,
                  validate_homotopy, validate_morphism)

Vec = Sequence[NovikovScalar]


def _vec(v) -> List[NovikovScalar]:
    return [NovikovScalar.coerce(x) for x in v]


def _scale(v: Vec, w: Fraction) -> List[NovikovScalar]:
    if not w:
        return list(v)
    t = NovikovScalar.T(w)
    return [x * t for x in v]


def _nonzero_entry(v: Vec):
    for i, x in enumerate(v):
        if x.terms:
            return i, x
    return None


class UnitData:
    """``u_1..u_L`` (degree 0), ``p_2..p_L`` (degree -1), tail weight and ``p_{L+1}``."""

    def __init__(self, ray: Ray, u: Sequence[Vec], p: Optional[Sequence[Vec]] = None,
                 tail_weight=0, p_tail: Optional[Vec] = None):
        L = len(u)
        if L < ray.N:
            raise ShapeError(f"unit data must cover slices 1..{ray.N}, got {L}")
        self.ray = ray
        g = ray.grading
        self.u = [_vec(x) for x in u]
        zero_p = lambda i: [ZERO] * ray.slice(i).rank(-1)
        p = list(p) if p is not None else [None] * (L - 1)
        if len(p) != L - 1:
            raise ShapeError(f"need primitives p_2..p_{L}: {L - 1} entries, got {len(p)}")
        self.p = [_vec(x) if x is not None else zero_p(i + 2) for i, x in enumerate(p)]
        self.tail_weight = as_fraction(tail_weight)
        if self.tail_weight < 0:
            raise ShapeError("unit tail weight must be non-negative")
        self.p_tail = _vec(p_tail) if p_tail is not None else zero_p(L + 1)
        for i, x in enumerate(self.u, start=1):
            if len(x) != ray.slice(i).rank(0):
                raise ShapeError(f"u_{i} has {len(x)} entries, slice {i} has rank {ray.slice(i).rank(0)} in degree 0")
        for i, x in enumerate(self.p, start=2):
            if len(x) != ray.slice(i).rank(-1):
                raise ShapeError(f"p_{i} has {len(x)} entries, expected {ray.slice(i).rank(-1)}")
        if len(self.p_tail) != ray.slice(L + 1).rank(-1):
            raise ShapeError("p_tail has the wrong length")

    @property
    def L(self) -> int:
        return len(self.u)

    def ui(self, i: int) -> List[NovikovScalar]:
        if i <= self.L:
            return self.u[i - 1]
        return _scale(self.u[-1], self.tail_weight * (i - self.L))

    def pi(self, i: int) -> List[NovikovScalar]:
        """``p_i`` for ``i >= 2``."""
        if i < 2:
            raise IndexError("primitives start at p_2")
        if i <= self.L:
            return self.p[i - 2]
        return _scale(self.p_tail, self.tail_weight * (i - 1 - self.L))

    def to_json(self) -> dict:
        return {"u": [[x.to_json() for x in v] for v in self.u],
                "p": [[x.to_json() for x in v] for v in self.p],
                "tail_weight": str(self.tail_weight),
                "p_tail": [x.to_json() for x in self.p_tail]}

    @classmethod
    def from_json(cls, data: dict, ray: Ray) -> "UnitData":
        conv = lambda v: [NovikovScalar.from_json(x) for x in v]
        try:
            u = [conv(v) for v in data["u"]]
        except KeyError:
            raise ShapeError("unit: missing field 'u'") from None
        p = [conv(v) for v in data["p"]] if "p" in data else None
        pt = conv(data["p_tail"]) if "p_tail" in data else None
        return cls(ray, u, p, as_fraction(data.get("tail_weight", 0)), pt)


def canonical_unit(ray: Ray, weights: Sequence = (), tail_weight=0, index: int = 0) -> UnitData:
    """``u_1 = e_index`` pushed forward by ``T^{w_i}``; ``p = 0``."""
    u, s = [], Fraction(0)
    for i in range(1, ray.N + 1):
        v = [ZERO] * ray.slice(i).rank(0)
        v[index] = NovikovScalar.T(s)
        u.append(v)
        if i < ray.N:
            s += as_fraction(weights[i - 1])
    return UnitData(ray, u, None, tail_weight)


def validate_unit(ray: Ray, u: UnitData) -> bool:
    if u.ray is not ray and not all(u.ray.slice(i).same_shape(ray.slice(i)) for i in range(1, u.L + 1)):
        raise ShapeError("unit data belongs to a different ray")
    for i in range(1, u.L + 1):
        C = ray.slice(i)
        hit = _nonzero_entry(C.apply_d(0, u.ui(i)))
        if hit:
            raise ValidationError(f"u_{i} is not closed: d(u_{i}) has entry {hit[0]} = {hit[1]}",
                                  where=(i, hit[0]))
    for i in range(1, u.L + 1):
        lhs = ray.map(i).apply(0, u.ui(i))
        rhs_d = ray.slice(i + 1).apply_d(-1, u.pi(i + 1))
        diff = [a - b - c for a, b, c in zip(lhs, u.ui(i + 1), rhs_d)]
        hit = _nonzero_entry(diff)
        if hit:
            raise ValidationError(
                f"c_{i}(u_{i}) != u_{i + 1} + d p_{i + 1}: entry {hit[0]} differs by {hit[1]}",
                where=(i, hit[0]))
    return True


@dataclass
class UnitHomotopy:
    """``u_i - u*_i = d h_i`` and ``c_i h_i - h_{i+1} - (p_{i+1} - p*_{i+1}) = d q_{i+1}``.

    ``h`` holds ``h_1..h_L``, ``q`` holds ``q_2..q_L`` and ``q_tail = q_{L+1}``;
    both scale by ``T^w`` beyond ``L``.
    """

    u: UnitData
    ustar: UnitData
    h: List[list]
    q: List[list]
    q_tail: list

    def hi(self, i: int):
        L = self.u.L
        return self.h[i - 1] if i <= L else _scale(self.h[-1], self.u.tail_weight * (i - L))

    def qi(self, i: int):
        L = self.u.L
        if i <= L:
            return self.q[i - 2]
        return _scale(self.q_tail, self.u.tail_weight * (i - 1 - L))


def make_unit_homotopy(u: UnitData, ustar: UnitData, h: Sequence[Vec],
                       q: Optional[Sequence[Vec]] = None, q_tail: Optional[Vec] = None) -> UnitHomotopy:
    R = u.ray
    if ustar.L != u.L or ustar.tail_weight != u.tail_weight:
        raise ShapeError("homotopic units must share length and tail weight")
    if len(h) != u.L:
        raise ShapeError(f"need h_1..h_{u.L}")
    zq = lambda i: [ZERO] * R.slice(i).rank(-2)
    qs = [_vec(x) for x in q] if q is not None else [zq(i) for i in range(2, u.L + 1)]
    qt = _vec(q_tail) if q_tail is not None else zq(u.L + 1)
    return UnitHomotopy(u, ustar, [_vec(x) for x in h], qs, qt)


def validate_unit_homotopy(H: UnitHomotopy) -> bool:
    u, us, R = H.u, H.ustar, H.u.ray
    for i in range(1, u.L + 1):
        dh = R.slice(i).apply_d(-1, H.hi(i))
        hit = _nonzero_entry([a - b - c for a, b, c in zip(u.ui(i), us.ui(i), dh)])
        if hit:
            raise ValidationError(f"u_{i} - u*_{i} != d h_{i} (entry {hit[0]})", where=(i,))
    for i in range(1, u.L + 1):
        ch = R.map(i).apply(-1, H.hi(i))
        dq = R.slice(i + 1).apply_d(-2, H.qi(i + 1))
        diff = [a - b - (x - y) - z for a, b, x, y, z in
                zip(ch, H.hi(i + 1), u.pi(i + 1), us.pi(i + 1), dq)]
        hit = _nonzero_entry(diff)
        if hit:
            raise ValidationError(
                f"c_{i} h_{i} - h_{i + 1} - (p_{i + 1} - p*_{i + 1}) != d q_{i + 1} (entry {hit[0]})",
                where=(i,))
    return True


def strictify_unit(u: UnitData) -> Tuple[UnitData, UnitHomotopy]:
    """A unit with ``p* = 0`` on the prefix, and the homotopy to it.

    ``h_1 = 0``, ``h_{i+1} = c_i h_i - p_{i+1}``, ``u*_i = u_i - d h_i`` and
    ``p*_tail = p_tail - phi(h_L) + T^w h_L``; all ``q`` vanish.
    """
    R = u.ray
    h = [[ZERO] * R.slice(1).rank(-1)]
    for i in range(1, u.L):
        ch = R.map(i).apply(-1, h[-1])
        h.append([a - b for a, b in zip(ch, u.pi(i + 1))])
    ustar = [[a - b for a, b in zip(u.ui(i), R.slice(i).apply_d(-1, h[i - 1]))]
             for i in range(1, u.L + 1)]
    hL = h[-1]
    phi_h = R.phi.apply(-1, hL)
    p_tail = [a - b + c for a, b, c in zip(u.p_tail, phi_h, _scale(hL, u.tail_weight))]
    us = UnitData(R, ustar, None, u.tail_weight, p_tail)
    return us, make_unit_homotopy(u, us, h)


# ---------------------------------------------------------------------------
# classes


def unit_class(ray: Ray, u: UnitData, lam, model: Optional[ColimitModel] = None) -> HomologyClass:
    model = model or colimit_mod(ray, lam)
    return class_from_slice(model, u.L, 0, u.ui(u.L))


# ---------------------------------------------------------------------------
# morphisms built from units


def _tensor_column_map(A: GradedComplex, B: GradedComplex, AB: GradedComplex, pa: int, a: Vec,
                       k: int, post: Optional[Mat] = None) -> Mat:
    """Matrix of ``b -> a (x) post(b)`` from ``B_src^k`` into ``AB``."""
    src_rank = post.ncols if post is not None else B.rank(k)
    cols, deg = [], None
    for j in range(src_rank):
        if post is not None:
            b = post.col(j)
        else:
            b = [ZERO] * B.rank(k)
            b[j] = ONE
        deg, v = tensor_vectors(A, B, pa, a, k, b)
        cols.append(v)
    n = AB.rank(A.grading.norm(pa + k))
    return Mat._raw([[c[i] for c in cols] for i in range(n)], n, len(cols))


def unit_tensor_id(u: UnitData, C: Ray, target: Optional[Ray] = None) -> RayMorphism:
    """``u (x) id : C = U (x) C -> C' (x) C`` with ``h_i(c) = p_{i+1} (x) c_i(c)``."""
    Cp = u.ray
    tgt = target or tensor_rays(Cp, C)
    L = max(u.L, C.N, tgt.N)
    f, h = [], []
    for i in range(1, L + 1):
        A, B, AB, AB1 = Cp.slice(i), C.slice(i), tgt.slice(i), tgt.slice(i + 1)
        fb, hb = {}, {}
        for k in B.gens:
            fb[k] = _tensor_column_map(A, B, AB, 0, u.ui(i), k)
            A1, B1 = Cp.slice(i + 1), C.slice(i + 1)
            hb[k] = _tensor_column_map(A1, B1, AB1, -1, u.pi(i + 1), k, C.map(i).block(k))
        f.append(GradedMap(B, AB, fb, 0))
        h.append(GradedMap(B, AB1, hb, -1))
    return RayMorphism(C, tgt, f, h, name="u*id", tail_weight=u.tail_weight)


def unit_homotopy_tensor_id(H: UnitHomotopy, C: Ray, target: Optional[Ray] = None) -> RayHomotopy:
    """Homotopy from ``u (x) id`` to ``u* (x) id``: ``K_i(c) = h_i (x) c``, ``q_i(c) = q_{i+1} (x) c_i(c)``."""
    Cp = H.u.ray
    tgt = target or tensor_rays(Cp, C)
    F, G = unit_tensor_id(H.u, C, tgt), unit_tensor_id(H.ustar, C, tgt)
    L = F.L
    K, q = [], []
    for i in range(1, L + 1):
        A, B, AB, AB1 = Cp.slice(i), C.slice(i), tgt.slice(i), tgt.slice(i + 1)
        A1, B1 = Cp.slice(i + 1), C.slice(i + 1)
        kb = {k: _tensor_column_map(A, B, AB, -1, H.hi(i), k) for k in B.gens}
        qb = {k: _tensor_column_map(A1, B1, AB1, -2, H.qi(i + 1), k, C.map(i).block(k)) for k in B.gens}
        K.append(GradedMap(B, AB, kb, -1))
        q.append(GradedMap(B, AB1, qb, -2))
    return RayHomotopy(F, G, K, q)


def whisker(p: RayMorphism, H: RayHomotopy) -> RayHomotopy:
    """``p o H`` for a strict ``p``: homotopy from ``p F`` to ``p G``."""
    if not p.strict:
        raise ShapeError("whiskering implemented for strict morphisms")
    F, G = compose(p, H.F), compose(p, H.G)
    L = max(F.L, H.L)
    K = [compose_maps(p.fi(i), H.Ki(i)) for i in range(1, L + 1)]
    q = [compose_maps(p.fi(i + 1), H.qi(i)) for i in range(1, L + 1)]
    return RayHomotopy(F, G, K, q)


def concat(H1: RayHomotopy, H2: RayHomotopy) -> RayHomotopy:
    """Homotopy ``F -> G -> G'`` from ``H1 : F ~ G`` and ``H2 : G ~ G'``."""
    L = max(H1.L, H2.L)
    K = [H1.Ki(i) + H2.Ki(i) for i in range(1, L + 1)]
    q = [H1.qi(i) + H2.qi(i) for i in range(1, L + 1)]
    return RayHomotopy(H1.F, H2.G, K, q)


def check_realization(f: RayMorphism, p: RayMorphism, u: UnitData,
                      E: Optional[RayHomotopy] = None) -> RayHomotopy:
    """Check that ``E`` is a homotopy from ``p o (u (x) id)`` to ``f``.

    Returns the validated homotopy.  ``E`` may be ``None`` (zero homotopy)
    or any :class:`RayHomotopy` whose ``K``/``q`` components are reused.
    """
    C = f.source
    validate_unit(u.ray, u)
    validate_morphism(p)
    validate_morphism(f)
    ut = unit_tensor_id(u, C, p.source)
    comp = compose(p, ut)
    if comp.tail_weight != f.tail_weight:
        raise ValidationError(
            f"tail weights differ: p o (u x id) has {comp.tail_weight}, f has {f.tail_weight}")
    K = E.K if E is not None else []
    q = E.q if E is not None else []
    H = RayHomotopy(comp, f, K, q)
    validate_homotopy(H)
    return H


# ---------------------------------------------------------------------------
# products, raise, closed-open


def _cycle_rep(x) -> Tuple[Ray, int, int, list, Optional[Fraction]]:
    if isinstance(x, HomologyClass):
        m = x.model
        return m.ray, m.N, x.degree, m.lift(x.degree, x.vector), m.lam
    ray, j, k, vec = x
    return ray, j, k, _vec(vec), None


def product_on_classes(p: RayMorphism, x, y, lam, target: Optional[ColimitModel] = None) -> HomologyClass:
    """Image of ``x (x) y`` under ``p`` in the colimit model of ``p.target``.

    ``x`` and ``y`` are :class:`HomologyClass` objects or ``(ray, slice,
    degree, cycle)`` tuples.  Both are pushed to a common slice ``m`` first.
    """
    lam = as_fraction(lam)
    Rx, i, kx, vx, lx = _cycle_rep(x)
    Ry, j, ky, vy, ly = _cycle_rep(y)
    for l in (lx, ly):
        if l is not None and l != lam:
            raise ShapeError(f"class precision {l} differs from requested {lam}")
    m = max(i, j, p.L, Rx.N, Ry.N, p.target.N)
    ax = Rx.push(i, m, kx, vx, lam)
    ay = Ry.push(j, m, ky, vy, lam)
    A, B = Rx.slice(m), Ry.slice(m)
    if not tensor(A, B).same_shape(p.source.slice(m)):
        raise ShapeError("product source is not the tensor of the factor rays")
    k, v = tensor_vectors(A, B, kx, ax, ky, ay, lam)
    out = [z.truncate(lam) for z in p.fi(m).apply(k, v)]
    model = target or colimit_mod(p.target, lam)
    return class_from_slice(model, m, k, out)


def raise_(R: Ray, eps) -> RayMorphism:
    """Verticals ``T^eps id``, zero homotopies."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("raise needs eps > 0")
    t = NovikovScalar.T(eps)
    f = [GradedMap(R.slice(i), R.slice(i), {k: Mat.identity(R.slice(i).rank(k)).scale(t)
                                           for k in R.slice(i).gens}) for i in range(1, R.N + 1)]
    return RayMorphism(R, R, f, name=f"raise({eps})")


def co_check(co: RayMorphism, u_closed: UnitData, u_open: UnitData, lam) -> bool:
    lam = as_fraction(lam)
    validate_unit(u_closed.ray, u_closed)
    validate_unit(u_open.ray, u_open)
    validate_morphism(co)
    F = InducedMap(co, lam)
    image = F(unit_class(co.source, u_closed, lam, F.source))
    expected = unit_class(co.target, u_open, lam, F.target)
    if not image.equals(expected):
        raise ValidationError(
            f"closed-open map does not send unit to unit at lambda={lam}: image "
            f"{[str(x) for x in image.vector]} vs unit {[str(x) for x in expected.vector]}")
    return True


def iso_over_field(f: RayMorphism, lam) -> bool:
    """Does ``f`` induce an isomorphism on ``H(tel-hat) (x) Lambda``?

    Exact when both tails are certified: for invertible tails the colimits
    are the last slices and the cone of ``f_L`` is tested over the field;
    for tails of positive valuation both sides vanish.  Otherwise the
    answer is stamped with ``lam``: the cone of the model map has no full bar.
    """
    from .complex import is_quasi_iso
    kinds = (f.source.tail_kind(), f.target.tail_kind())
    if kinds == ("constant", "constant"):
        L = max(f.L, f.source.N, f.target.N)
        return is_quasi_iso(f.fi(L))
    if kinds == ("positive_shift", "positive_shift"):
        return True
    return InducedMap(f, lam).is_iso_over_field()


@dataclass
class UnitVerdict:
    schedule: List[Fraction]
    unit_orders: List[Fraction]
    unit_torsion: List[bool]
    levelwise_checked: List[bool]
    zero: bool
    certified: bool
    visibility: VisibilityVerdict

    def to_json(self) -> dict:
        return {"unit_zero": self.zero,
                "certified": self.certified,
                "levels": [{"lambda": str(l), "unit_order": str(o), "unit_torsion": t,
                            "compared_with_barcode": c}
                           for l, o, t, c in zip(self.schedule, self.unit_orders,
                                                 self.unit_torsion, self.levelwise_checked)],
                "visibility": self.visibility.to_json()}


def _unit_torsion_exact(R: Ray, u: UnitData) -> bool:
    """For an invertible tail: is the unit a torsion class of ``H(C_N)`` over Lambda_{>=0}?"""
    from .linalg import rank
    C = R.slice(R.N)
    B = C.d(-1)
    v = u.ui(max(u.L, R.N))
    col = Mat._raw([[x] for x in v], len(v), 1)
    return rank(B.hstack(col)) == rank(B)


def visibility_via_unit(f: RayMorphism, p: RayMorphism, u: UnitData, E: Optional[RayHomotopy],
                        schedule) -> UnitVerdict:
    """Visibility read off from the unit class, cross-checked against :func:`visibility`.

    At a level where the model map of ``f`` is invertible modulo ``T^lam``,
    the unit class is torsion (order ``< lam``) exactly when the truncated
    homology has no full bar, since ``u . x = f(x)`` on classes.  For
    certified tails the unit is also tested exactly over Lambda_{>=0} and
    compared with the certified verdict.  Disagreement raises
    :class:`InvariantViolation`.
    """
    from .complex import cone
    from .complex import homology_barcode
    lams = _schedule(schedule)
    R = u.ray
    check_realization(f, p, u, E)
    vis = visibility(R, lams)
    orders, torsion, checked = [], [], []
    for lam, level in zip(lams, vis.levels):
        if not iso_over_field(f, lam):
            raise ValidationError(f"induced map of f is not an isomorphism after inverting T at lambda={lam}")
        model = colimit_mod(R, lam)
        mu = unit_class(R, u, lam, model).order()
        orders.append(mu)
        torsion.append(mu < lam)
        F = InducedMap(f, lam, source=model)
        cm = GradedMap(F.source.complex, F.target.complex, F.blocks)
        iso_mod = homology_barcode(cone(cm), lam).is_empty()
        checked.append(iso_mod)
        if iso_mod and torsion[-1] != level.startswith("invisible"):
            raise InvariantViolation(
                f"unit order {mu} at lambda={lam} disagrees with visibility level {level}")
    kind = R.tail_kind()
    if kind == "positive_shift":
        zero, certified = True, True
    elif kind == "constant":
        zero, certified = _unit_torsion_exact(R, u), True
    else:
        zero, certified = torsion[-1], False
    if certified and vis.certified and zero != (vis.verdict == "certified-invisible"):
        raise InvariantViolation(f"unit torsion={zero} but visibility is {vis.verdict}")
    return UnitVerdict(lams, orders, torsion, checked, zero, certified, vis)


# ---------------------------------------------------------------------------
# self-products of rays built from a dga


@dataclass
class Realization:
    C: Ray
    D: Ray
    p: RayMorphism
    u: UnitData
    f: RayMorphism
    E: Optional[RayHomotopy] = None


def dga_ray(A: GradedComplex, weights: Sequence, tail_weight, scale: int = 1, name: str = "") -> Ray:
    """Slices ``A`` with maps ``T^{scale * w} id``."""
    mk = lambda w: GradedMap(A, A, {k: Mat.identity(A.rank(k)).scale(NovikovScalar.T(scale * as_fraction(w)))
                                    for k in A.gens})
    return Ray([A] * (len(weights) + 1), [mk(w) for w in weights], mk(tail_weight), name)


def dga_realization(A: GradedComplex, mu: GradedMap, one: Vec, weights: Sequence = (),
                    tail_weight=0) -> Realization:
    """Self-product realization for a dga ``(A, mu, one)``.

    ``C`` has maps ``T^w``, ``D`` the maps ``T^{2w}``; ``p_i = mu``;
    ``u_i = T^{s_i} one`` with ``s_i`` the partial sums of the weights;
    ``f = p o (u (x) id)`` and ``E = 0``.
    """
    C = dga_ray(A, weights, tail_weight, 1, "C")
    D = dga_ray(A, weights, tail_weight, 2, "D")
    CC = tensor_rays(C, C)
    p = RayMorphism(CC, D, [mu] * max(C.N, 1), name="mu")
    u, s = [], Fraction(0)
    for i in range(1, C.N + 1):
        u.append(_scale(_vec(one), s))
        if i < C.N:
            s += as_fraction(weights[i - 1])
    unit = UnitData(C, u, None, tail_weight)
    f = compose(p, unit_tensor_id(unit, C, CC))
    return Realization(C, D, p, unit, f, None)


def perturb_realization(r: Realization, K: Sequence[GradedMap]) -> Realization:
    """Replace ``f`` by ``f + dK + Kd`` with matching homotopy components."""
    from .complex import commutator_with_d
    C, D = r.C, r.D
    L = max(r.f.L, len(K))
    fr = r.f.extended(L)
    Kp = RayHomotopy(fr, fr, list(K)).K
    w = fr.tail_weight
    Ki = lambda i: Kp[i - 1] if i <= L else Kp[-1].scale(NovikovScalar.T(w * (i - L)))
    f = [fr.fi(i) + commutator_with_d(Ki(i)) for i in range(1, L + 1)]
    h = [fr.hi(i) + compose_maps(D.map(i), Ki(i)) - compose_maps(Ki(i + 1), C.map(i))
         for i in range(1, L + 1)]
    f_new = RayMorphism(C, D, f, h, name="f'", tail_weight=w)
    E = RayHomotopy(fr, f_new, [-k for k in Kp])
    return Realization(C, D, r.p, r.u, f_new, E)
