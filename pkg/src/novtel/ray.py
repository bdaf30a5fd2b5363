"""1-rays with eventually periodic tails, their morphisms and the telescope.

A :class:`Ray` stores slices ``C_1 .. C_N``, maps ``c_1 .. c_{N-1}`` and a
tail endomorphism ``phi`` of ``C_N``; for ``i >= N`` we have ``C_i = C_N``
and ``c_i = phi``.  Slices are indexed from 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import limits
from .complex import (GradedComplex, GradedMap, commutator_with_d, identity_map, tensor,
                      tensor_maps, validate, validate_chain_map)
from .complex import compose as compose_maps
from .errors import InvariantViolation, ShapeError, UnsupportedInput, ValidationError
from .linalg import (Lattice, Mat, inverse_mod, is_invertible, kernel_mod, mat_chain, mat_power,
                     matmul, right_inverse_mod)
from .novikov import INF, ONE, ZERO, NovikovScalar, as_fraction


def _first_nonzero(m: Mat):
    for i, row in enumerate(m.rows):
        for j, x in enumerate(row):
            if x.terms:
                return i, j, x
    return None


class Ray:
    def __init__(self, prefix: Sequence[GradedComplex], maps: Sequence[GradedMap], phi: GradedMap,
                 name: str = ""):
        if not prefix:
            raise ShapeError("a ray needs at least one slice")
        if len(maps) != len(prefix) - 1:
            raise ShapeError(f"{len(prefix)} slices need {len(prefix) - 1} maps, got {len(maps)}")
        self.prefix = list(prefix)
        self.maps = list(maps)
        self.phi = phi
        self.name = name
        for i, c in enumerate(self.maps, start=1):
            if not (c.source.same_shape(self.prefix[i - 1]) and c.target.same_shape(self.prefix[i])):
                raise ShapeError(f"map c_{i} does not go from C_{i} to C_{i + 1}")
        last = self.prefix[-1]
        if not (phi.source.same_shape(last) and phi.target.same_shape(last)):
            raise ShapeError("tail endomorphism must act on the last prefix slice")

    @property
    def N(self) -> int:
        return len(self.prefix)

    @property
    def grading(self):
        return self.prefix[0].grading

    def slice(self, i: int) -> GradedComplex:
        if i < 1:
            raise IndexError("slices are indexed from 1")
        return self.prefix[min(i, self.N) - 1]

    def map(self, i: int) -> GradedMap:
        """``c_i : C_i -> C_{i+1}``."""
        if i < 1:
            raise IndexError("maps are indexed from 1")
        return self.maps[i - 1] if i < self.N else self.phi

    def push(self, i: int, j: int, k: int, vec: Sequence, precision=None) -> list:
        """Image of a degree-``k`` vector of ``C_i`` in ``C_j`` (``j >= i``)."""
        if j < i:
            raise ValueError("can only push forward")
        v = list(vec)
        for t in range(i, j):
            m = self.map(t).block(k)
            v = [x.truncate(precision) if precision is not None else x for x in m.apply(v)]
        return v

    def composite(self, i: int, j: int) -> GradedMap:
        """``c_{j-1} o ... o c_i`` as a map ``C_i -> C_j``."""
        out = identity_map(self.slice(i))
        for t in range(i, j):
            out = compose_maps(self.map(t), out)
        return out

    def extended(self, L: int) -> "Ray":
        """Same ray with the prefix padded (by the tail) to length ``L``."""
        if L <= self.N:
            return self
        prefix = self.prefix + [self.prefix[-1]] * (L - self.N)
        maps = self.maps + [self.phi] * (L - self.N)
        return Ray(prefix, maps, self.phi, self.name)

    # tail classification -------------------------------------------------
    def tail_kind(self) -> str:
        """``"constant"``, ``"positive_shift"`` or ``"periodic"``."""
        last = self.prefix[-1]
        if all(is_invertible(self.phi.block(k)) for k in last.gens):
            return "constant"
        if self.tail_delta() > 0:
            return "positive_shift"
        return "periodic"

    def tail_delta(self):
        """Least valuation of an entry of ``phi`` (``inf`` for ``phi = 0``)."""
        return min((m.min_valuation() for m in self.phi.blocks.values()), default=INF)

    def least_positive_valuation(self):
        vals = [x.valuation() for m in self.phi.blocks.values() for r in m.rows for x in r
                if x.terms and x.valuation() > 0]
        return min(vals, default=None)

    # validation ---------------------------------------------------------
    def validate(self) -> bool:
        for i, C in enumerate(self.prefix, start=1):
            try:
                validate(C)
            except ValidationError as exc:
                raise ValidationError(f"slice {i}: {exc}", where=(i,) + tuple(exc.where or ())) from None
        for i, c in enumerate(self.maps + [self.phi], start=1):
            label = "tail phi" if i == self.N else f"map c_{i}"
            if not c.in_ring():
                raise ValidationError(f"{label}: entries must lie in Lambda_{{>=0}}", where=(i,))
            try:
                validate_chain_map(c)
            except ValidationError as exc:
                raise ValidationError(f"{label}: {exc}", where=(i,)) from None
        return True

    def __repr__(self) -> str:
        return f"Ray({self.name or 'unnamed'}; N={self.N}, tail={self.tail_kind()})"

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "prefix": [C.to_json() for C in self.prefix],
            "maps": [c.to_json() for c in self.maps],
            "tail": {"endomorphism": self.phi.to_json()},
        }
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Ray":
        try:
            prefix = [GradedComplex.from_json(c) for c in data["prefix"]]
        except KeyError as exc:
            raise ShapeError(f"ray: missing field {exc}") from None
        maps = []
        for i, m in enumerate(data.get("maps", []), start=1):
            if i >= len(prefix):
                raise ShapeError(f"ray: map c_{i} has no target slice")
            maps.append(GradedMap.from_json(m, prefix[i - 1], prefix[i]))
        tail = data.get("tail")
        if tail is None:
            phi = identity_map(prefix[-1])
        else:
            raw = tail.get("endomorphism", tail)
            phi = GradedMap.from_json(raw, prefix[-1], prefix[-1])
        return cls(prefix, maps, phi, data.get("name", ""))


def constant_ray(C: GradedComplex, name: str = "") -> Ray:
    return Ray([C], [], identity_map(C), name)


def unit_ray() -> Ray:
    """The ray ``U``: one generator in degree 0, identity maps."""
    C = GradedComplex({0: ["1"]})
    return constant_ray(C, "U")


def rank_one_ray(weights: Sequence, tail_weight, name: str = "", degree: int = 0) -> Ray:
    """Rank-one ray in one degree with maps ``T^w`` (prefix) and tail ``T^tail_weight``."""
    C = GradedComplex({degree: ["x"]})
    mk = lambda w: GradedMap(C, C, {degree: Mat([[NovikovScalar.T(w)]])})
    return Ray([C] * (len(weights) + 1), [mk(w) for w in weights], mk(tail_weight), name)


# ---------------------------------------------------------------------------
# morphisms


class RayMorphism:
    """Slice maps ``f_i`` and homotopies ``h_i : C_i -> C'_{i+1}`` for ``i = 1..L``.

    The square identity is ``c'_i f_i - f_{i+1} c_i = d h_i + h_i d``.
    Beyond ``L >= max(N, N')`` the data scales geometrically:
    ``f_i = T^{w (i - L)} f_L`` and likewise ``h_i``, where ``w =
    tail_weight >= 0``.  Squares for ``i > L`` are then ``T^w``-multiples of
    square ``L``, so validating squares ``1..L`` covers the whole ray.
    ``w > 0`` is what a unit pushed forward along a tail ``T^w id`` needs.
    """

    def __init__(self, source: Ray, target: Ray, f: Sequence[GradedMap],
                 h: Optional[Sequence[Optional[GradedMap]]] = None, name: str = "",
                 input_weight=None, output_weight=None, tail_weight=0):
        L = len(f)
        if L < max(source.N, target.N):
            raise ShapeError(f"morphism needs data on slices 1..{max(source.N, target.N)}, got {L}")
        self.source, self.target = source, target
        self.f = list(f)
        hs = list(h) if h is not None else [None] * L
        if len(hs) != L:
            raise ShapeError("need one homotopy per slice")
        self.h = [hi if hi is not None else
                  GradedMap(source.slice(i), target.slice(i + 1), {}, -1)
                  for i, hi in enumerate(hs, start=1)]
        for i, (fi, hi) in enumerate(zip(self.f, self.h), start=1):
            if not (fi.source.same_shape(source.slice(i)) and fi.target.same_shape(target.slice(i))):
                raise ShapeError(f"f_{i} has the wrong shape")
            if not (hi.source.same_shape(source.slice(i)) and hi.target.same_shape(target.slice(i + 1))):
                raise ShapeError(f"h_{i} has the wrong shape")
        self.tail_weight = as_fraction(tail_weight)
        if self.tail_weight < 0:
            raise ShapeError("tail weight must be non-negative")
        self.name = name
        self.input_weight = input_weight
        self.output_weight = output_weight

    @property
    def L(self) -> int:
        return len(self.f)

    def _tail_scale(self, m: GradedMap, i: int) -> GradedMap:
        if i <= self.L or not self.tail_weight:
            return m
        return m.scale(NovikovScalar.T(self.tail_weight * (i - self.L)))

    def fi(self, i: int) -> GradedMap:
        return self._tail_scale(self.f[min(i, self.L) - 1], i)

    def hi(self, i: int) -> GradedMap:
        return self._tail_scale(self.h[min(i, self.L) - 1], i)

    @property
    def strict(self) -> bool:
        return all(h.is_zero() for h in self.h)

    def extended(self, L: int) -> "RayMorphism":
        if L <= self.L:
            return self
        f = [self.fi(i) for i in range(1, L + 1)]
        h = [self.hi(i) for i in range(1, L + 1)]
        return RayMorphism(self.source, self.target, f, h, self.name, self.input_weight,
                           self.output_weight, self.tail_weight)

    def square_defect(self, i: int) -> GradedMap:
        c, cp = self.source.map(i), self.target.map(i)
        lhs = compose_maps(cp, self.fi(i)) - compose_maps(self.fi(i + 1), c)
        return lhs - commutator_with_d(self.hi(i))

    def to_json(self) -> dict:
        out = {"f": [m.to_json() for m in self.f], "h": [m.to_json() for m in self.h]}
        if self.tail_weight:
            out["tail_weight"] = str(self.tail_weight)
        if self.name:
            out["name"] = self.name
        if self.input_weight is not None:
            out["input_weight"] = str(self.input_weight)
        if self.output_weight is not None:
            out["output_weight"] = str(self.output_weight)
        return out

    @classmethod
    def from_json(cls, data: dict, source: Ray, target: Ray) -> "RayMorphism":
        f = [GradedMap.from_json(m, source.slice(i), target.slice(i))
             for i, m in enumerate(data["f"], start=1)]
        h = None
        if "h" in data:
            h = [GradedMap.from_json(m, source.slice(i), target.slice(i + 1))
                 for i, m in enumerate(data["h"], start=1)]
        return cls(source, target, f, h, data.get("name", ""),
                   data.get("input_weight"), data.get("output_weight"),
                   as_fraction(data.get("tail_weight", 0)))


def _report(defect: GradedMap, msg: str, i: int) -> None:
    for k, m in sorted(defect.blocks.items()):
        hit = _first_nonzero(m)
        if hit:
            r, c, x = hit
            raise ValidationError(f"{msg} at slice {i}, degree {k}, entry ({r}, {c}) = {x}",
                                  where=(i, k, r, c))


def validate_morphism(m: RayMorphism) -> bool:
    for i in range(1, m.L + 1):
        for name, g in (("f", m.fi(i)),):
            try:
                validate_chain_map(g)
            except ValidationError as exc:
                raise ValidationError(f"{name}_{i} is not a chain map: {exc}", where=(i,)) from None
        _report(m.square_defect(i), "square identity c'f - fc = dh + hd fails", i)
    return True


def identity_morphism(R: Ray) -> RayMorphism:
    return RayMorphism(R, R, [identity_map(R.slice(i)) for i in range(1, R.N + 1)], name="id")


def scalar_morphism(R: Ray, c) -> RayMorphism:
    c = NovikovScalar.coerce(c)
    return RayMorphism(R, R, [identity_map(R.slice(i)).scale(c) for i in range(1, R.N + 1)])


def compose(a: RayMorphism, b: RayMorphism) -> RayMorphism:
    """``a o b`` (apply ``b`` first): ``f_i = a_i b_i``, ``h_i = ha_i b_i + a_{i+1} hb_i``."""
    if b.target is not a.source and not _same_ray_shape(b.target, a.source):
        raise ShapeError("morphisms are not composable")
    L = max(a.L, b.L)
    f = [compose_maps(a.fi(i), b.fi(i)) for i in range(1, L + 1)]
    h = [compose_maps(a.hi(i), b.fi(i)) + compose_maps(a.fi(i + 1), b.hi(i)) for i in range(1, L + 1)]
    return RayMorphism(b.source, a.target, f, h, tail_weight=a.tail_weight + b.tail_weight)


def _same_ray_shape(R: Ray, S: Ray) -> bool:
    L = max(R.N, S.N)
    return all(R.slice(i).same_shape(S.slice(i)) for i in range(1, L + 1))


class RayHomotopy:
    """Homotopy between morphisms ``F`` and ``G``.

    ``K_i : C_i -> C'_i`` (degree -1) and ``q_i : C_i -> C'_{i+1}`` (degree
    -2) with ``f_i - g_i = dK_i + K_i d`` and
    ``c'_i K_i - K_{i+1} c_i - (hF_i - hG_i) = d q_i - q_i d``.
    Both morphisms must share a tail weight ``w``; beyond the stored data
    ``K`` and ``q`` scale by ``T^w`` per slice, like the morphisms.
    """

    def __init__(self, F: RayMorphism, G: RayMorphism, K: Sequence[Optional[GradedMap]],
                 q: Optional[Sequence[Optional[GradedMap]]] = None):
        if F.tail_weight != G.tail_weight:
            raise ShapeError("homotopic morphisms must share a tail weight")
        K = list(K) if K is not None else []
        q = list(q) if q is not None else []
        L = max(F.L, G.L, len(K), len(q), 1)
        self.F, self.G = F.extended(L), G.extended(L)
        self.tail_weight = F.tail_weight
        src, tgt = self.F.source, self.F.target
        self.K = self._fill(K, L, lambda i: GradedMap(src.slice(i), tgt.slice(i), {}, -1))
        self.q = self._fill(q, L, lambda i: GradedMap(src.slice(i), tgt.slice(i + 1), {}, -2))

    def _fill(self, data, L, zero):
        out = []
        for i in range(1, L + 1):
            if i <= len(data):
                out.append(data[i - 1] if data[i - 1] is not None else zero(i))
            elif data and data[-1] is not None:
                w = self.tail_weight * (i - len(data))
                out.append(data[-1].scale(NovikovScalar.T(w)) if w else data[-1])
            else:
                out.append(zero(i))
        return out

    @property
    def L(self) -> int:
        return len(self.K)

    def _scaled(self, data, i):
        m = data[min(i, self.L) - 1]
        if i <= self.L or not self.tail_weight:
            return m
        return m.scale(NovikovScalar.T(self.tail_weight * (i - self.L)))

    def Ki(self, i: int) -> GradedMap:
        return self._scaled(self.K, i)

    def qi(self, i: int) -> GradedMap:
        return self._scaled(self.q, i)


def validate_homotopy(H: RayHomotopy) -> bool:
    F, G = H.F, H.G
    src, tgt = F.source, F.target
    for i in range(1, H.L + 1):
        _report((F.fi(i) - G.fi(i)) - commutator_with_d(H.Ki(i)),
                "slice homotopy f - g = dK + Kd fails", i)
        lhs = (compose_maps(tgt.map(i), H.Ki(i)) - compose_maps(H.Ki(i + 1), src.map(i))
               - (F.hi(i) - G.hi(i)))
        _report(lhs - commutator_with_d(H.qi(i)), "second-order identity fails", i)
    return True


# ---------------------------------------------------------------------------
# telescope and strictification


def _tel_blocks(R: Ray, M: int, k: int):
    """Blocks of ``F^M`` in degree ``k``: (kind, i, offset, size), kind 's' for ``C_i[1]``."""
    blocks, off = [], 0
    for i in range(1, M + 1):
        if i < M:
            n = R.slice(i).rank(k + 1)
            blocks.append(("s", i, off, n))
            off += n
        n = R.slice(i).rank(k)
        blocks.append(("c", i, off, n))
        off += n
    return blocks


def _telescope_layout(R: Ray, M: int):
    g = R.grading
    degs = set()
    for i in range(1, M + 1):
        for k in R.slice(i).gens:
            degs.add(k)
            if i < M:
                degs.add(g.norm(k - 1))
    return {k: _tel_blocks(R, M, k) for k in sorted(degs)}


def _place(m: Mat, r0: int, c0: int, sub: Mat, sign: int = 1) -> None:
    for i, row in enumerate(sub.rows):
        orow = m.rows[r0 + i]
        for j, x in enumerate(row):
            if x.terms:
                orow[c0 + j] = orow[c0 + j] + (x if sign > 0 else -x)


def telescope(R: Ray, M: int) -> GradedComplex:
    """The finite telescope ``F^M = (sum_{i<M} C_i[1] + C_i) + C_M``.

    ``d(x[1]) = -(dx)[1] + x + c_i(x)`` and ``d`` on ``C_i`` is internal.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    limits.check_slices(M, "telescope length")
    g = R.grading
    layout = _telescope_layout(R, M)
    gens = {}
    for k, blocks in layout.items():
        labels = []
        for kind, i, _, _ in blocks:
            C = R.slice(i)
            src = C.gens.get(g.norm(k + 1), ()) if kind == "s" else C.gens.get(k, ())
            labels += [f"{kind}{i}:{x}" for x in src]
        gens[k] = labels
    out = GradedComplex(gens, {}, g)
    diff = {}
    for k, blocks in layout.items():
        tgt = {(kind, i): off for kind, i, off, _ in _tel_blocks(R, M, g.norm(k + 1))}
        m = Mat.zeros(out.rank(k + 1), out.rank(k))
        for kind, i, off, n in blocks:
            if not n:
                continue
            C = R.slice(i)
            if kind == "c":
                _place(m, tgt[("c", i)], off, C.d(k))
            else:
                _place(m, tgt[("s", i)], off, C.d(k + 1), -1)
                _place(m, tgt[("c", i)], off, Mat.identity(n))
                _place(m, tgt[("c", i + 1)], off, R.map(i).block(k + 1))
        diff[k] = m
    return GradedComplex(gens, diff, g)


def telescope_inclusion(R: Ray, n: int, M: int) -> GradedMap:
    """The inclusion ``F^n -> F^M`` for ``n <= M``."""
    A, B = telescope(R, n), telescope(R, M)
    la, lb = _telescope_layout(R, n), _telescope_layout(R, M)
    blocks = {}
    for k, ablocks in la.items():
        boff = {(kind, i): off for kind, i, off, _ in _tel_blocks(R, M, k)}
        m = Mat.zeros(B.rank(k), A.rank(k))
        for kind, i, off, size in ablocks:
            _place(m, boff[(kind, i)], off, Mat.identity(size))
        blocks[k] = m
    return GradedMap(A, B, blocks)


def comparison_map(R: Ray, n: int) -> GradedMap:
    """``F^n -> C_n``: ``(-1)^i c_{n-1}...c_i`` on ``C_i`` and zero on ``C_i[1]``."""
    F = telescope(R, n)
    layout = _telescope_layout(R, n)
    Cn = R.slice(n)
    blocks = {}
    for k, blist in layout.items():
        m = Mat.zeros(Cn.rank(k), F.rank(k))
        for kind, i, off, size in blist:
            if kind == "c" and size:
                comp = R.composite(i, n).block(k)
                _place(m, 0, off, comp, -1 if i % 2 else 1)
        blocks[k] = m
    return GradedMap(F, Cn, blocks)


@dataclass
class Strictification:
    slices: List[GradedComplex]
    inclusions: List[GradedMap]
    comparisons: List[GradedMap]

    def check_squares(self, R: Ray) -> bool:
        """``pi_{n+1} o incl_n = c_n o pi_n`` exactly for every stored ``n``."""
        for n in range(1, len(self.slices)):
            lhs = compose_maps(self.comparisons[n], self.inclusions[n - 1])
            rhs = compose_maps(R.map(n), self.comparisons[n - 1])
            _report(lhs - rhs, "strictification square fails", n)
        return True


def strictify(R: Ray, M: int) -> Strictification:
    slices = [telescope(R, n) for n in range(1, M + 1)]
    incl = [telescope_inclusion(R, n, n + 1) for n in range(1, M)]
    comps = [comparison_map(R, n) for n in range(1, M + 1)]
    return Strictification(slices, incl, comps)


# ---------------------------------------------------------------------------
# tensor products of rays


def tensor_rays(R: Ray, S: Ray) -> Ray:
    L = max(R.N, S.N)
    Re, Se = R.extended(L), S.extended(L)
    slices = [tensor(Re.slice(i), Se.slice(i)) for i in range(1, L + 1)]
    maps = [tensor_maps(Re.map(i), Se.map(i), slices[i - 1], slices[i]) for i in range(1, L)]
    phi = tensor_maps(R.phi, S.phi, slices[-1], slices[-1])
    name = f"{R.name}*{S.name}" if R.name or S.name else ""
    return Ray(slices, maps, phi, name)


def tensor_morphisms(a: RayMorphism, b: RayMorphism, source: Optional[Ray] = None,
                     target: Optional[Ray] = None) -> RayMorphism:
    """Slice-wise ``f_i (x) g_i``; only strict factors have an unambiguous tensor square."""
    if not (a.strict and b.strict):
        raise UnsupportedInput("tensor of morphisms implemented for strict morphisms only")
    src = source or tensor_rays(a.source, b.source)
    tgt = target or tensor_rays(a.target, b.target)
    L = max(a.L, b.L, src.N, tgt.N)
    f = [tensor_maps(a.fi(i), b.fi(i), src.slice(i), tgt.slice(i)) for i in range(1, L + 1)]
    return RayMorphism(src, tgt, f, tail_weight=a.tail_weight + b.tail_weight)


# ---------------------------------------------------------------------------
# the colimit model modulo T^lam


@dataclass
class ColimitModel:
    """``colim_i (C_i (x) Lambda/T^lam)`` realised as ``C_N / ker(phi^m)``.

    ``Pi[k]`` projects ``C_N`` onto model coordinates (kernel ``ker phi^m``),
    ``Bi[k]`` is the section with image ``im phi^m``, ``phi[k]`` the induced
    automorphism and ``phi_inv[k]`` its inverse, all modulo ``T^lam``.
    """

    ray: Ray
    lam: Fraction
    complex: GradedComplex
    Pi: Dict[int, Mat]
    Bi: Dict[int, Mat]
    phi: Dict[int, Mat]
    phi_inv: Dict[int, Mat]
    stabilized_at: int

    @property
    def N(self) -> int:
        return self.ray.N

    def rank(self, k: int) -> int:
        return self.complex.rank(k)

    def from_slice(self, j: int, k: int, vec: Sequence) -> list:
        """Image of a degree-``k`` vector of ``C_j`` in the model."""
        lam = self.lam
        k = self.ray.grading.norm(k)
        if self.rank(k) == 0:
            return []
        if j <= self.N:
            v = self.ray.push(j, self.N, k, vec, lam)
            return [x.truncate(lam) for x in self.Pi[k].apply(v)]
        v = [x.truncate(lam) for x in self.Pi[k].apply(list(vec))]
        step = self.phi_inv[k]
        for _ in range(j - self.N):
            v = [x.truncate(lam) for x in step.apply(v)]
        return v

    def slice_map(self, j: int, k: int) -> Mat:
        """Matrix of ``C_j^k -> model^k``."""
        Cj = self.ray.slice(j)
        cols = []
        for t in range(Cj.rank(k)):
            e = [ZERO] * Cj.rank(k)
            e[t] = ONE
            cols.append(self.from_slice(j, k, e))
        r = self.rank(k)
        return Mat._raw([[cols[t][i] for t in range(len(cols))] for i in range(r)], r, len(cols))

    def lift(self, k: int, y: Sequence) -> list:
        """A representative in ``C_N`` of a model vector."""
        k = self.ray.grading.norm(k)
        if self.rank(k) == 0:
            return [ZERO] * self.ray.slice(self.N).rank(k)
        return [x.truncate(self.lam) for x in self.Bi[k].apply(list(y))]


def _kernel_lattice(phi_k: Mat, m: int, lam: Fraction) -> Lattice:
    power = mat_power(phi_k, m, lam)
    return Lattice.span(kernel_mod(power, lam), lam)


def colimit_mod(R: Ray, lam) -> ColimitModel:
    """Filtered colimit of ``R (x) Lambda/T^lam``.

    The kernels of ``phi^m`` grow with ``m`` and stop once two consecutive
    ones have equal colength.  The search is capped at
    ``ceil(lam / delta_min) + rank`` steps, ``delta_min`` being the least
    positive valuation of an entry of ``phi``.
    """
    lam = as_fraction(lam)
    if lam <= 0:
        raise ValueError("precision must be positive")
    C = R.slice(R.N)
    g = R.grading
    degs = sorted(C.gens)
    dmin = R.least_positive_valuation()
    total = C.total_rank()
    cap = (math.ceil(lam / dmin) if dmin is not None else 0) + total + 1
    phi_t = {k: R.phi.block(k).truncate(lam) for k in degs}
    colen = {k: None for k in degs}
    m = 0
    lattices = {}
    while True:
        if m > cap:
            raise UnsupportedInput(
                f"tail not supported: kernel chain of phi mod T^{lam} did not stabilize within {cap} steps")
        changed = False
        for k in degs:
            lat = _kernel_lattice(phi_t[k], m, lam)
            cl = lat.colength()
            if cl != colen[k]:
                changed = True
            colen[k] = cl
            lattices[k] = lat
        if not changed and m > 0:
            break
        m += 1
    stab = m
    Pi, Bi, phi, phi_inv = {}, {}, {}, {}
    for k in degs:
        lat = lattices[k]
        if any(0 < e < lam for e in lat.exps):
            raise InvariantViolation(f"degree {k}: stable kernel of phi is not a direct summand")
        rows = [i for i, e in enumerate(lat.exps) if e == lam]
        P = lat.P.submatrix(rows, range(C.rank(k))).truncate(lam)
        if not rows:
            continue
        power = mat_power(phi_t[k], stab, lam)
        S = right_inverse_mod(matmul(P, power, lam), lam)
        B = matmul(power, S, lam).truncate(lam)
        ph = mat_chain(P, phi_t[k], B, precision=lam).truncate(lam)
        try:
            ph_inv = inverse_mod(ph, lam)
        except ValueError:
            raise InvariantViolation(f"degree {k}: induced tail map is not bijective on the quotient") from None
        Pi[k], Bi[k], phi[k], phi_inv[k] = P, B, ph, ph_inv.truncate(lam)
    gens = {k: [f"m{k}_{i}" for i in range(P.nrows)] for k, P in Pi.items()}
    model_shell = GradedComplex(gens, {}, g)
    diff = {}
    for k in Pi:
        k1 = g.norm(k + 1)
        if k1 in Pi:
            diff[k] = mat_chain(Pi[k1], C.d(k), Bi[k], precision=lam).truncate(lam)
    model = GradedComplex(gens, diff, g)
    limits.check_terms(list(diff.values()) + list(Pi.values()) + list(Bi.values()), "colimit model")
    return ColimitModel(R, lam, model, Pi, Bi, phi, phi_inv, stab)


def induced_model_map(mor: RayMorphism, A: ColimitModel, B: ColimitModel) -> Dict[int, Mat]:
    """Chain-level map between colimit models induced by ``mor``.

    Uses slice ``L = max(N, N', L_mor)``: model vector ``y`` lifts to
    ``phi^{L-N} Bi y`` in ``C_L``, is mapped by ``f_L`` and projected.
    """
    if A.lam != B.lam:
        raise ValueError("models must share a precision")
    lam = A.lam
    L = max(A.N, B.N, mor.L)
    out = {}
    for k in A.complex.gens:
        if B.rank(k) == 0:
            continue
        fL = mor.fi(L).block(k)
        cols = []
        for t in range(A.rank(k)):
            e = [ZERO] * A.rank(k)
            e[t] = ONE
            v = A.lift(k, e)
            v = A.ray.push(A.N, L, k, v, lam)
            v = [x.truncate(lam) for x in fL.apply(v)]
            cols.append(B.from_slice(L, k, v))
        r = B.rank(k)
        out[k] = Mat._raw([[cols[t][i] for t in range(len(cols))] for i in range(r)], r, len(cols))
    return out
