"""Free graded cochain complexes over Lambda_{>=0}, graded maps, barcodes.

Differentials raise degree by one.  ``diff[k]`` is the matrix of
``d: C^k -> C^{k+1}`` (rows indexed by ``C^{k+1}``).  A Z/2-graded complex
lives in degrees 0 and 1 and all degree arithmetic goes through
:class:`Grading`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import ShapeError, ValidationError
from .linalg import Mat, kernel_mod, matmul, quotient_bars, snf
from .novikov import INF, ONE, ZERO, NovikovScalar, as_fraction


@dataclass(frozen=True)
class Grading:
    kind: str = "Z"

    def __post_init__(self):
        if self.kind not in ("Z", "Z2"):
            raise ValueError(f"grading must be 'Z' or 'Z2', got {self.kind!r}")

    def norm(self, k: int) -> int:
        return k % 2 if self.kind == "Z2" else k

    def sign(self, k: int) -> int:
        """(-1)^k."""
        return -1 if k % 2 else 1


Z = Grading("Z")
Z2 = Grading("Z2")


class GradedComplex:
    """A finite-rank free graded complex.

    ``gens`` maps degree -> generator labels; ``diff`` maps degree k to the
    matrix of ``d^k``.  Missing entries are zero.
    """

    def __init__(self, gens: Dict[int, Sequence[str]], diff: Optional[Dict[int, Mat]] = None,
                 grading: Grading = Z):
        self.grading = grading
        self.gens: Dict[int, Tuple[str, ...]] = {}
        for k, labels in gens.items():
            k = grading.norm(k)
            if labels:
                self.gens[k] = self.gens.get(k, ()) + tuple(labels)
        self.diff: Dict[int, Mat] = {}
        for k, m in (diff or {}).items():
            k = grading.norm(k)
            src, tgt = self.rank(k), self.rank(k + 1)
            if m.shape != (tgt, src):
                raise ShapeError(
                    f"differential from degree {k} has shape {m.shape}, expected ({tgt}, {src})"
                )
            if src and tgt and not m.is_zero():
                self.diff[k] = m

    # structure ------------------------------------------------------------
    def rank(self, k: int) -> int:
        return len(self.gens.get(self.grading.norm(k), ()))

    def degrees(self) -> List[int]:
        return sorted(self.gens)

    def d(self, k: int) -> Mat:
        k = self.grading.norm(k)
        m = self.diff.get(k)
        return m if m is not None else Mat.zeros(self.rank(k + 1), self.rank(k))

    def total_rank(self) -> int:
        return sum(len(v) for v in self.gens.values())

    def zero_vector(self, k: int) -> list:
        return [ZERO] * self.rank(k)

    def apply_d(self, k: int, vec: Sequence) -> list:
        return self.d(k).apply(list(vec))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedComplex):
            return NotImplemented
        return (self.grading == other.grading and self.gens == other.gens
                and {k: v for k, v in self.diff.items()} == {k: v for k, v in other.diff.items()})

    def __repr__(self) -> str:
        ranks = ", ".join(f"{k}:{len(v)}" for k, v in sorted(self.gens.items()))
        return f"GradedComplex({self.grading.kind}; ranks {{{ranks}}})"

    def same_shape(self, other: "GradedComplex") -> bool:
        return self.grading == other.grading and all(
            self.rank(k) == other.rank(k) for k in set(self.gens) | set(other.gens))

    def truncated(self, lam) -> "GradedComplex":
        return GradedComplex(self.gens, {k: m.truncate(lam) for k, m in self.diff.items()},
                             self.grading)

    def relabel(self, prefix: str) -> "GradedComplex":
        return GradedComplex({k: [f"{prefix}{g}" for g in v] for k, v in self.gens.items()},
                             self.diff, self.grading)

    def with_differential(self, diff: Dict[int, Mat]) -> "GradedComplex":
        return GradedComplex(self.gens, diff, self.grading)

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "grading": self.grading.kind,
            "degrees": [{"degree": k, "generators": list(v)} for k, v in sorted(self.gens.items())],
            "differential": [{"from_degree": k, "matrix": m.to_json()}
                             for k, m in sorted(self.diff.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GradedComplex":
        grading = Grading(data.get("grading", "Z"))
        gens = {}
        for entry in data.get("degrees", []):
            gens[grading.norm(int(entry["degree"]))] = [str(g) for g in entry["generators"]]
        tmp = cls(gens, {}, grading)
        diff = {}
        for i, entry in enumerate(data.get("differential", [])):
            k = grading.norm(int(entry["from_degree"]))
            try:
                diff[k] = Mat.from_json(entry["matrix"], tmp.rank(k + 1), tmp.rank(k))
            except (ValueError, TypeError) as exc:
                raise ShapeError(f"differential[{i}] (from_degree {k}): {exc}") from exc
        return cls(gens, diff, grading)


def zero_complex(grading: Grading = Z) -> GradedComplex:
    return GradedComplex({}, {}, grading)


def one_term(rank: int = 1, degree: int = 0, grading: Grading = Z, prefix: str = "e") -> GradedComplex:
    return GradedComplex({degree: [f"{prefix}{i}" for i in range(rank)]}, {}, grading)


def two_term(weight, degree: int = 0, grading: Grading = Z) -> GradedComplex:
    """``Lambda --T^weight--> Lambda`` from ``degree`` to ``degree + 1``."""
    w = NovikovScalar.coerce(weight) if isinstance(weight, (NovikovScalar, str)) else NovikovScalar.T(weight)
    return GradedComplex({degree: ["a"], degree + 1: ["b"]}, {degree: Mat([[w]])}, grading)


# ---------------------------------------------------------------------------
# validation


def validate(C: GradedComplex) -> bool:
    """Check shapes, ring membership and ``d^2 = 0`` exactly."""
    for k, m in C.diff.items():
        if m.shape != (C.rank(k + 1), C.rank(k)):
            raise ValidationError(f"degree {k}: differential shape {m.shape} mismatch", where=(k,))
        for i, row in enumerate(m.rows):
            for j, x in enumerate(row):
                if not x.in_ring():
                    raise ValidationError(
                        f"degree {k}: entry ({i}, {j}) = {x} has negative exponent", where=(k, i, j))
    for k in sorted(C.diff):
        nxt = C.grading.norm(k + 1)
        if nxt not in C.diff:
            continue
        sq = matmul(C.diff[nxt], C.diff[k])
        for i, row in enumerate(sq.rows):
            for j, x in enumerate(row):
                if x.terms:
                    raise ValidationError(
                        f"d^2 != 0: degree {k} -> {k + 2}, entry ({i}, {j}) = {x}",
                        where=(k, i, j))
    return True


# ---------------------------------------------------------------------------
# graded maps


class GradedMap:
    """A degree-``degree`` map of graded modules given by blocks per source degree.

    ``blocks[k]`` has shape ``(target.rank(k + degree), source.rank(k))``.
    Entries may carry negative exponents (field-valued maps); chain-level
    validators only demand exact identities.
    """

    def __init__(self, source: GradedComplex, target: GradedComplex, blocks: Dict[int, Mat],
                 degree: int = 0):
        if source.grading != target.grading:
            raise ShapeError("source and target gradings differ")
        self.source = source
        self.target = target
        self.degree = source.grading.norm(degree) if source.grading.kind == "Z2" else degree
        self.blocks: Dict[int, Mat] = {}
        for k, m in blocks.items():
            k = source.grading.norm(k)
            exp = (target.rank(k + degree), source.rank(k))
            if m.shape != exp:
                raise ShapeError(f"map block from degree {k} has shape {m.shape}, expected {exp}")
            if exp[0] and exp[1] and not m.is_zero():
                self.blocks[k] = m

    @property
    def grading(self) -> Grading:
        return self.source.grading

    def block(self, k: int) -> Mat:
        k = self.grading.norm(k)
        m = self.blocks.get(k)
        return m if m is not None else Mat.zeros(self.target.rank(k + self.degree), self.source.rank(k))

    def apply(self, k: int, vec: Sequence) -> list:
        return self.block(k).apply(list(vec))

    def is_zero(self) -> bool:
        return not self.blocks

    def in_ring(self) -> bool:
        return all(m.in_ring() for m in self.blocks.values())

    def _like(self, other: "GradedMap") -> None:
        if self.degree != other.degree or not self.source.same_shape(other.source) \
                or not self.target.same_shape(other.target):
            raise ShapeError("maps have different shapes or degrees")

    def __add__(self, other: "GradedMap") -> "GradedMap":
        self._like(other)
        keys = set(self.blocks) | set(other.blocks)
        return GradedMap(self.source, self.target,
                         {k: self.block(k) + other.block(k) for k in keys}, self.degree)

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        self._like(other)
        keys = set(self.blocks) | set(other.blocks)
        return GradedMap(self.source, self.target,
                         {k: self.block(k) - other.block(k) for k in keys}, self.degree)

    def __neg__(self) -> "GradedMap":
        return GradedMap(self.source, self.target, {k: -m for k, m in self.blocks.items()}, self.degree)

    def scale(self, c) -> "GradedMap":
        return GradedMap(self.source, self.target, {k: m.scale(c) for k, m in self.blocks.items()},
                         self.degree)

    def truncate(self, lam) -> "GradedMap":
        return GradedMap(self.source, self.target, {k: m.truncate(lam) for k, m in self.blocks.items()},
                         self.degree)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedMap):
            return NotImplemented
        if self.degree != other.degree:
            return False
        keys = set(self.blocks) | set(other.blocks)
        return all(self.block(k) == other.block(k) for k in keys)

    def __repr__(self) -> str:
        return f"GradedMap(degree={self.degree}, blocks={sorted(self.blocks)})"

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "blocks": [{"from_degree": k, "matrix": m.to_json()} for k, m in sorted(self.blocks.items())]}

    @classmethod
    def from_json(cls, data: dict, source: GradedComplex, target: GradedComplex) -> "GradedMap":
        deg = int(data.get("degree", 0))
        blocks = {}
        for i, entry in enumerate(data.get("blocks", [])):
            k = source.grading.norm(int(entry["from_degree"]))
            try:
                blocks[k] = Mat.from_json(entry["matrix"], target.rank(k + deg), source.rank(k))
            except (ValueError, TypeError) as exc:
                raise ShapeError(f"blocks[{i}] (from_degree {k}): {exc}") from exc
        return cls(source, target, blocks, deg)


ChainMap = GradedMap
Homotopy = GradedMap


def compose(g: GradedMap, f: GradedMap) -> GradedMap:
    """``g o f``."""
    if not f.target.same_shape(g.source):
        raise ShapeError("cannot compose: target of f differs from source of g")
    blocks = {}
    for k in f.blocks:
        gb = g.blocks.get(f.grading.norm(k + f.degree))
        if gb is not None:
            blocks[k] = matmul(gb, f.blocks[k])
    return GradedMap(f.source, g.target, blocks, f.degree + g.degree)


def identity_map(C: GradedComplex) -> GradedMap:
    return GradedMap(C, C, {k: Mat.identity(C.rank(k)) for k in C.gens}, 0)


def zero_map(C: GradedComplex, D: GradedComplex, degree: int = 0) -> GradedMap:
    return GradedMap(C, D, {}, degree)


def scalar_map(C: GradedComplex, c) -> GradedMap:
    c = NovikovScalar.coerce(c)
    return GradedMap(C, C, {k: Mat.identity(C.rank(k)).scale(c) for k in C.gens}, 0)


def differential_map(C: GradedComplex) -> GradedMap:
    return GradedMap(C, C, dict(C.diff), 1)


def commutator_with_d(h: GradedMap) -> GradedMap:
    """Graded commutator ``d h - (-1)^{|h|} h d``."""
    dh = compose(differential_map(h.target), h)
    hd = compose(h, differential_map(h.source))
    return dh - hd if h.degree % 2 == 0 else dh + hd


def validate_chain_map(f: GradedMap) -> bool:
    if f.degree != 0:
        raise ValidationError(f"chain map must have degree 0, got {f.degree}")
    defect = commutator_with_d(f)
    for k, m in sorted(defect.blocks.items()):
        for i, row in enumerate(m.rows):
            for j, x in enumerate(row):
                if x.terms:
                    raise ValidationError(
                        f"chain map fails to commute with d at degree {k}, entry ({i}, {j}) = {x}",
                        where=(k, i, j))
    return True


def validate_homotopy(f: GradedMap, g: GradedMap, h: GradedMap) -> bool:
    """``f - g = d h + h d`` exactly."""
    if h.degree != -1 and not (h.grading.kind == "Z2" and h.degree == 1):
        raise ValidationError(f"homotopy must have degree -1, got {h.degree}")
    defect = (f - g) - commutator_with_d(h)
    for k, m in sorted(defect.blocks.items()):
        for i, row in enumerate(m.rows):
            for j, x in enumerate(row):
                if x.terms:
                    raise ValidationError(
                        f"homotopy identity fails at degree {k}, entry ({i}, {j}) = {x}", where=(k, i, j))
    return True


# ---------------------------------------------------------------------------
# constructions


def shift(C: GradedComplex, k: int) -> GradedComplex:
    """``C[k]^j = C^{j+k}`` with differential ``(-1)^k d``."""
    g = C.grading
    s = g.sign(k)
    gens = {g.norm(j - k): list(v) for j, v in C.gens.items()}
    diff = {g.norm(j - k): (m if s > 0 else -m) for j, m in C.diff.items()}
    return GradedComplex(gens, diff, g)


def cone(f: GradedMap) -> GradedComplex:
    """``Cone(f)^k = C^{k+1} + C'^k`` with ``d(c, c') = (-dc, f c + d c')``."""
    C, D = f.source, f.target
    if f.degree != 0:
        raise ShapeError("cone needs a degree-0 chain map")
    g = C.grading
    degs = {g.norm(k - 1) for k in C.gens} | set(D.gens)
    gens = {k: [f"s:{x}" for x in C.gens.get(g.norm(k + 1), ())] + [f"t:{x}" for x in D.gens.get(k, ())]
            for k in degs}
    diff = {}
    for k in degs:
        top = [-C.d(k + 1), Mat.zeros(C.rank(k + 2), D.rank(k))]
        bot = [f.block(k + 1), D.d(k)]
        rows_top = [a + b for a, b in zip(top[0].rows, top[1].rows)]
        rows_bot = [a + b for a, b in zip(bot[0].rows, bot[1].rows)]
        ncols = C.rank(k + 1) + D.rank(k)
        diff[k] = Mat._raw(rows_top + rows_bot, len(rows_top) + len(rows_bot), ncols)
    return GradedComplex(gens, diff, g)


def _tensor_layout(C: GradedComplex, D: GradedComplex) -> Dict[int, List[Tuple[int, int, int]]]:
    """For each total degree: list of (p, q, offset) blocks in basis order."""
    g = C.grading
    layout: Dict[int, List[Tuple[int, int, int]]] = {}
    for p in sorted(C.gens):
        for q in sorted(D.gens):
            k = g.norm(p + q)
            blocks = layout.setdefault(k, [])
            off = sum(C.rank(pp) * D.rank(qq) for pp, qq, _ in blocks)
            blocks.append((p, q, off))
    return layout


def tensor(C: GradedComplex, D: GradedComplex) -> GradedComplex:
    """Tensor product with Koszul sign ``d(a b) = da b + (-1)^{|a|} a db``."""
    if C.grading != D.grading:
        raise ShapeError("cannot tensor complexes with different gradings")
    g = C.grading
    layout = _tensor_layout(C, D)
    gens = {k: [f"{a}*{b}" for p, q, _ in blocks for a in C.gens[p] for b in D.gens[q]]
            for k, blocks in layout.items()}
    out = GradedComplex(gens, {}, g)
    f_d = differential_map(C)
    g_d = differential_map(D)
    dC = tensor_maps(f_d, identity_map(D), out, out)
    dD = tensor_maps(identity_map(C), g_d, out, out)
    diff = {}
    for k in layout:
        m = dC.block(k) + dD.block(k)
        diff[k] = m
    return GradedComplex(gens, diff, g)


def tensor_maps(f: GradedMap, h: GradedMap, source: Optional[GradedComplex] = None,
                target: Optional[GradedComplex] = None) -> GradedMap:
    """``(f (x) h)(a (x) b) = (-1)^{|h| |a|} f(a) (x) h(b)``."""
    g = f.grading
    A, B = f.source, h.source
    A2, B2 = f.target, h.target
    src = source if source is not None else tensor(A, B)
    tgt = target if target is not None else tensor(A2, B2)
    src_layout = _tensor_layout(A, B)
    tgt_layout = _tensor_layout(A2, B2)
    tgt_offsets = {}
    for k, blocks in tgt_layout.items():
        for p, q, off in blocks:
            tgt_offsets[(p, q)] = off
    deg = f.degree + h.degree
    blocks_out: Dict[int, Mat] = {}
    for k, blocks in src_layout.items():
        tk = g.norm(k + deg)
        m = Mat.zeros(tgt.rank(tk), src.rank(k))
        for p, q, off in blocks:
            fp = f.blocks.get(p)
            hq = h.blocks.get(q)
            if fp is None or hq is None:
                continue
            p2, q2 = g.norm(p + f.degree), g.norm(q + h.degree)
            toff = tgt_offsets[(p2, q2)]
            sign = -1 if (h.degree * p) % 2 else 1
            nb, nb2 = B.rank(q), B2.rank(q2)
            for i2, frow in enumerate(fp.rows):
                for i, x in enumerate(frow):
                    if not x.terms:
                        continue
                    x = x if sign > 0 else -x
                    for j2, hrow in enumerate(hq.rows):
                        orow = m.rows[toff + i2 * nb2 + j2]
                        for j, y in enumerate(hrow):
                            if y.terms:
                                col = off + i * nb + j
                                orow[col] = orow[col] + x * y
        blocks_out[k] = m
    return GradedMap(src, tgt, blocks_out, deg)


def tensor_vectors(C: GradedComplex, D: GradedComplex, p: int, x: Sequence, q: int, y: Sequence,
                   precision=None) -> Tuple[int, list]:
    """Coordinates of ``x (x) y`` in ``tensor(C, D)``; returns (degree, vector)."""
    g = C.grading
    p, q = g.norm(p), g.norm(q)
    layout = _tensor_layout(C, D)
    k = g.norm(p + q)
    total = sum(C.rank(pp) * D.rank(qq) for pp, qq, _ in layout.get(k, []))
    out = [ZERO] * total
    for pp, qq, off in layout.get(k, []):
        if pp == p and qq == q:
            nb = D.rank(q)
            for i, a in enumerate(x):
                if not a.terms:
                    continue
                for j, b in enumerate(y):
                    if b.terms:
                        out[off + i * nb + j] = a.mul(b, precision)
    return k, out


# ---------------------------------------------------------------------------
# barcodes


@dataclass(frozen=True)
class Barcode:
    """Per degree: number of full (infinite, or ``>= precision``) bars and finite bar lengths.

    ``precision`` is ``None`` for exact homology over Lambda_{>=0}: finite
    bars are torsion exponents of ``H^k``.  With a finite precision the
    barcode describes ``H(C (x) Lambda_{>=0}/T^lam)`` as a sum of cyclic
    modules ``Lambda_{>=0}/T^x`` with ``x <= lam``; ``x = lam`` is a full bar.
    """

    entries: Tuple[Tuple[int, int, Tuple[Fraction, ...]], ...] = ()
    precision: Optional[Fraction] = None

    @classmethod
    def build(cls, data: Dict[int, Tuple[int, Iterable]], precision=None) -> "Barcode":
        prec = None if precision is None or precision == INF else as_fraction(precision)
        entries = []
        for k in sorted(data):
            full, finite = data[k]
            finite = tuple(sorted(as_fraction(x) for x in finite))
            if any(x <= 0 for x in finite):
                raise ValueError("bar lengths must be positive")
            if prec is not None and any(x >= prec for x in finite):
                raise ValueError("finite bars must be shorter than the precision")
            if full or finite:
                entries.append((k, int(full), finite))
        return cls(tuple(entries), prec)

    def as_dict(self) -> Dict[int, Tuple[int, Tuple[Fraction, ...]]]:
        return {k: (full, fin) for k, full, fin in self.entries}

    def is_empty(self) -> bool:
        return not self.entries

    def full_count(self, degree: Optional[int] = None) -> int:
        return sum(full for k, full, _ in self.entries if degree is None or k == degree)

    def finite_bars(self, degree: int) -> Tuple[Fraction, ...]:
        return self.as_dict().get(degree, (0, ()))[1]

    def has_full_bar(self) -> bool:
        return any(full for _, full, _ in self.entries)

    def longest_finite(self):
        return max((x for _, _, fin in self.entries for x in fin), default=Fraction(0))

    def clip(self, lam) -> "Barcode":
        """Barcode at a coarser precision: bars of length ``>= lam`` become full."""
        lam = as_fraction(lam)
        if self.precision is None:
            raise ValueError("clip applies to precision-stamped barcodes")
        if lam > self.precision:
            raise ValueError(f"cannot clip precision {self.precision} barcode at finer level {lam}")
        data = {}
        for k, full, fin in self.entries:
            data[k] = (full + sum(1 for x in fin if x >= lam), [x for x in fin if x < lam])
        return Barcode.build(data, lam)

    def to_json(self) -> dict:
        return {
            "precision": None if self.precision is None else str(self.precision),
            "degrees": [{"degree": k, "full": full, "finite": [str(x) for x in fin]}
                        for k, full, fin in self.entries],
        }

    def __str__(self) -> str:
        if not self.entries:
            return "(empty)"
        tag = "inf" if self.precision is None else f">={self.precision}"
        parts = []
        for k, full, fin in self.entries:
            bars = [tag] * full + [str(x) for x in fin]
            parts.append(f"H^{k}: " + ", ".join(bars))
        return "; ".join(parts)


def homology_barcode(C: GradedComplex, precision=None) -> Barcode:
    """Barcode of ``H(C)`` (exact) or of ``H(C (x) Lambda/T^lam)`` (with ``precision``).

    Both are read off from the Smith forms of the differentials: over the
    valuation ring (and its quotients) a free complex splits into pieces
    ``Lambda --T^e--> Lambda`` and free summands with zero differential.
    """
    prec = None if precision is None or precision == INF else as_fraction(precision)
    g = C.grading
    factors = {k: snf(C.d(k), prec, want_transforms=False).factors for k in C.gens}
    data: Dict[int, list] = {}

    def slot(k):
        return data.setdefault(g.norm(k), [0, []])

    for k in C.gens:
        r_out = len(factors.get(k, []))
        r_in = len(factors.get(g.norm(k - 1), []))
        free = C.rank(k) - r_out - r_in
        if free < 0:
            raise ValidationError(f"rank bookkeeping failed at degree {k}; is d^2 = 0?")
        slot(k)[0] += free
        for e in factors.get(k, []):
            if e > 0:
                slot(k + 1)[1].append(e)
                if prec is not None:
                    # kernel of T^e on Lambda/T^lam contributes a copy in degree k
                    slot(k)[1].append(e)
    return Barcode.build({k: (v[0], v[1]) for k, v in data.items()}, prec)


def homology_barcode_lattice(C: GradedComplex, lam) -> Barcode:
    """``H(C (x) Lambda/T^lam)`` computed as cycles/boundaries lattice quotients.

    Independent of the splitting argument used in :func:`homology_barcode`.
    """
    lam = as_fraction(lam)
    g = C.grading
    data = {}
    for k in C.gens:
        Zk = kernel_mod(C.d(k), lam)
        Bk = C.d(k - 1)
        bars = quotient_bars(Zk, Bk, lam)
        data[k] = (sum(1 for x in bars if x == lam), [x for x in bars if x < lam])
    return Barcode.build(data, lam)


def is_quasi_iso(f: GradedMap, lam=INF) -> bool:
    """Cone homology is free of infinite bars and of bars of length ``>= lam``."""
    bc = homology_barcode(cone(f))
    if bc.full_count():
        return False
    if lam is None or lam == INF:
        return True
    lam = as_fraction(lam)
    return all(x < lam for _, _, fin in bc.entries for x in fin)
