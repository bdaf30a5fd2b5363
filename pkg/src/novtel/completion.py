"""Homology of completed telescopes at finite precision and visibility verdicts.

For degreewise free complexes an element of the completed telescope has only
finitely many terms of valuation below ``lam``, so
``tel-hat (x) Lambda/T^lam = tel (x) Lambda/T^lam``.  Everything here is
therefore computed on colimit models modulo ``T^lam``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .complex import Barcode, GradedComplex, GradedMap, homology_barcode
from .errors import InvariantViolation, ShapeError, ValidationError
from .linalg import Lattice, Mat, kernel_mod, matmul, quotient_bars
from .novikov import INF, ONE, ZERO, NovikovScalar, as_fraction
from .ray import (ColimitModel, Ray, RayMorphism, colimit_mod, induced_model_map, telescope,
                  telescope_inclusion)


def _schedule(values) -> List[Fraction]:
    out = [as_fraction(x) for x in values]
    if not out:
        raise ValueError("empty precision schedule")
    if any(x <= 0 for x in out):
        raise ValueError("precisions must be positive")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError("precision schedule must be strictly increasing")
    return out


def truncated_homology(R: Ray, lam) -> Barcode:
    """Barcode of ``H(tel(R) (x) Lambda/T^lam)`` via the colimit model."""
    lam = as_fraction(lam)
    model = colimit_mod(R, lam)
    return homology_barcode(model.complex, lam)


# ---------------------------------------------------------------------------
# classes and lattices in a complex taken modulo T^lam


def _cols(vectors: Sequence[Sequence], n: int) -> Mat:
    vs = [list(v) for v in vectors]
    return Mat._raw([[v[i] for v in vs] for i in range(n)], n, len(vs))


def boundaries(C: GradedComplex, k: int) -> Mat:
    return C.d(k - 1)


def cycles(C: GradedComplex, k: int, lam) -> Mat:
    return kernel_mod(C.d(k), lam)


def is_cycle(C: GradedComplex, k: int, vec, lam) -> bool:
    lam = as_fraction(lam)
    return all(not x.truncate(lam).terms for x in C.apply_d(k, vec))


def class_order(C: GradedComplex, k: int, vec, lam) -> Fraction:
    """``mu`` with ``Lambda . [vec] = Lambda/T^mu`` in ``H^k(C (x) Lambda/T^lam)``.

    ``0`` means the class vanishes; ``lam`` means it is not killed by any
    ``T^mu`` with ``mu < lam``.
    """
    lam = as_fraction(lam)
    if not is_cycle(C, k, vec, lam):
        raise ValidationError(f"vector is not a cycle modulo T^{lam} in degree {k}")
    n = C.rank(k)
    B = boundaries(C, k)
    big = B.hstack(_cols([vec], n)) if n else B
    bars = quotient_bars(big, B, lam)
    return max(bars, default=Fraction(0))


def is_boundary(C: GradedComplex, k: int, vec, lam) -> bool:
    return Lattice.span(boundaries(C, k), lam).contains(vec)


def same_class(C: GradedComplex, k: int, x, y, lam) -> bool:
    return is_boundary(C, k, [a - b for a, b in zip(x, y)], lam)


@dataclass(frozen=True)
class HomologyClass:
    """A class in ``H^degree`` of a colimit model, stamped with its precision."""

    model: ColimitModel = field(compare=False, repr=False)
    degree: int
    vector: tuple

    @property
    def lam(self) -> Fraction:
        return self.model.lam

    def order(self) -> Fraction:
        return class_order(self.model.complex, self.degree, self.vector, self.lam)

    def is_zero(self) -> bool:
        return is_boundary(self.model.complex, self.degree, self.vector, self.lam)

    def is_torsion(self) -> bool:
        """Killed by some ``T^mu`` with ``mu < lam`` (includes the zero class)."""
        return self.order() < self.lam

    def equals(self, other: "HomologyClass") -> bool:
        if self.degree != other.degree or self.model.complex is not other.model.complex \
                and not self.model.complex == other.model.complex:
            raise ShapeError("classes live in different homologies")
        return same_class(self.model.complex, self.degree, self.vector, other.vector, self.lam)

    def scale(self, c) -> "HomologyClass":
        c = NovikovScalar.coerce(c)
        return HomologyClass(self.model, self.degree,
                             tuple(x.mul(c, self.lam) for x in self.vector))

    def __add__(self, other: "HomologyClass") -> "HomologyClass":
        return HomologyClass(self.model, self.degree,
                             tuple((a + b).truncate(self.lam) for a, b in zip(self.vector, other.vector)))

    def to_json(self) -> dict:
        return {"degree": self.degree, "precision": str(self.lam),
                "vector": [x.to_json() for x in self.vector], "order": str(self.order())}


def class_from_slice(model: ColimitModel, j: int, k: int, vec) -> HomologyClass:
    """Class of a cycle of ``C_j`` in the colimit model."""
    R = model.ray
    k = R.grading.norm(k)
    if not is_cycle(R.slice(j), k, vec, model.lam):
        raise ValidationError(f"representative in slice {j} is not a cycle modulo T^{model.lam}")
    return HomologyClass(model, k, tuple(model.from_slice(j, k, vec)))


def homology_generators(model: ColimitModel, k: int) -> List[HomologyClass]:
    """Cycle generators of the model in degree ``k`` (possibly redundant)."""
    Z = cycles(model.complex, k, model.lam)
    return [HomologyClass(model, k, tuple(x.truncate(model.lam) for x in Z.col(j)))
            for j in range(Z.ncols)]


# ---------------------------------------------------------------------------
# induced maps


class InducedMap:
    """Map of truncated homologies induced by a ray morphism through colimit models."""

    def __init__(self, mor: RayMorphism, lam, source: Optional[ColimitModel] = None,
                 target: Optional[ColimitModel] = None):
        lam = as_fraction(lam)
        self.morphism = mor
        self.lam = lam
        self.source = source or colimit_mod(mor.source, lam)
        self.target = target or colimit_mod(mor.target, lam)
        self.blocks = induced_model_map(mor, self.source, self.target)

    def block(self, k: int) -> Mat:
        b = self.blocks.get(k)
        return b if b is not None else Mat.zeros(self.target.rank(k), self.source.rank(k))

    def __call__(self, cls: HomologyClass) -> HomologyClass:
        if cls.model.ray is not self.source.ray and cls.model.complex != self.source.complex:
            raise ShapeError("class does not live in the source model")
        v = [x.truncate(self.lam) for x in self.block(cls.degree).apply(list(cls.vector))]
        return HomologyClass(self.target, cls.degree, tuple(v))

    def equals(self, other: "InducedMap") -> bool:
        """Equal on homology: differences of images of all cycles are boundaries."""
        if self.source.complex != other.source.complex or self.target.complex != other.target.complex:
            raise ShapeError("induced maps have different source or target models")
        for k in self.source.complex.gens:
            if self.target.rank(k) == 0:
                continue
            Z = cycles(self.source.complex, k, self.lam)
            D = (self.block(k) - other.block(k))
            img = matmul(D, Z, self.lam)
            lat = Lattice.span(boundaries(self.target.complex, k), self.lam)
            if not lat.contains_all(img):
                return False
        return True

    def is_scalar(self, c) -> bool:
        """Equal on homology to multiplication by ``c``."""
        c = NovikovScalar.coerce(c)
        for k in self.source.complex.gens:
            if self.source.complex != self.target.complex:
                raise ShapeError("scalar comparison needs equal source and target models")
            Z = cycles(self.source.complex, k, self.lam)
            D = self.block(k) - Mat.identity(self.source.rank(k)).scale(c)
            img = matmul(D, Z, self.lam)
            if not Lattice.span(boundaries(self.target.complex, k), self.lam).contains_all(img):
                return False
        return True

    def is_iso_over_field(self) -> bool:
        """After inverting ``T``: the cone of the model map has no full bar."""
        from .complex import cone
        cm = GradedMap(self.source.complex, self.target.complex, self.blocks)
        return not homology_barcode(cone(cm), self.lam).has_full_bar()


def induced_map(mor: RayMorphism, lam, source: Optional[ColimitModel] = None,
                target: Optional[ColimitModel] = None) -> InducedMap:
    return InducedMap(mor, lam, source, target)


# ---------------------------------------------------------------------------
# brute force


def _image_bars(A: GradedComplex, B: GradedComplex, inc: GradedMap, k: int, lam: Fraction):
    ZA = kernel_mod(A.d(k), lam)
    nb = B.rank(k)
    if nb == 0:
        return []
    img = matmul(inc.block(k), ZA, lam) if ZA.ncols else Mat.zeros(nb, 0)
    W = B.d(k - 1)
    return quotient_bars(img.hstack(W), W, lam)


def brute_force_telescope_homology(R: Ray, M: int, lam) -> Barcode:
    """Image of ``H(F^N) -> H(F^M)`` modulo ``T^lam`` from literal telescope matrices.

    ``F^N`` is the telescope through the last prefix slice.  The image equals
    the colimit homology once ``phi^(M-N)`` has reached its stable kernel
    modulo ``T^lam`` (e.g. ``M - N >= ceil(lam / delta)`` for a tail of
    valuation ``delta > 0``).  Test oracle only.
    """
    lam = as_fraction(lam)
    N = R.N
    if M < N:
        raise ValueError(f"M = {M} must be at least the prefix length {N}")
    A = telescope(R, N)
    B = telescope(R, M)
    inc = telescope_inclusion(R, N, M)
    data = {}
    for k in B.gens:
        bars = _image_bars(A, B, inc, k, lam)
        data[k] = (sum(1 for x in bars if x == lam), [x for x in bars if x < lam])
    return Barcode.build(data, lam)


# ---------------------------------------------------------------------------
# visibility


@dataclass
class VisibilityVerdict:
    schedule: List[Fraction]
    barcodes: List[Barcode]
    levels: List[str]
    verdict: str
    certificate: str
    heuristic: str = ""

    @property
    def certified(self) -> bool:
        return self.verdict.startswith("certified")

    @property
    def visible(self) -> bool:
        if self.certified:
            return self.verdict == "certified-visible"
        return self.levels[-1].startswith("visible")

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "certificate": self.certificate,
            "heuristic": self.heuristic,
            "levels": [{"lambda": str(l), "status": s, "barcode": b.to_json()}
                       for l, s, b in zip(self.schedule, self.levels, self.barcodes)],
        }


def check_monotone(barcodes: Sequence[Barcode]) -> None:
    for lo in barcodes:
        for hi in barcodes:
            if hi.precision > lo.precision and hi.clip(lo.precision) != lo:
                raise InvariantViolation(
                    f"clipping the lambda={hi.precision} barcode at {lo.precision} gives "
                    f"{hi.clip(lo.precision)}, expected {lo}")


def _stable(a: Barcode, b: Barcode) -> bool:
    strip = lambda bc: {k: (f, fin) for k, (f, fin) in bc.as_dict().items()}
    return strip(a) == strip(b)


def visibility(R: Ray, schedule) -> VisibilityVerdict:
    lams = _schedule(schedule)
    bcs = [truncated_homology(R, l) for l in lams]
    check_monotone(bcs)
    levels = [("visible@" if bc.has_full_bar() else "invisible@") + str(l) for l, bc in zip(lams, bcs)]
    kind = R.tail_kind()
    heuristic = ""
    if kind == "positive_shift":
        verdict = "certified-invisible"
        cert = (f"tail valuation {R.tail_delta()} > 0: the completed tail telescope is acyclic "
                "(its filtration quotients are cones of identities)")
    elif kind == "constant":
        free = homology_barcode(R.slice(R.N)).full_count()
        verdict = "certified-visible" if free else "certified-invisible"
        cert = (f"tail invertible over Lambda_>=0: the colimit is C_N, whose homology has "
                f"free rank {free}")
    else:
        top = lams[-1]
        verdict = levels[-1]
        cert = f"precision-stamped at lambda={top}; no certificate for this tail"
        b2, b4 = truncated_homology(R, 2 * top), truncated_homology(R, 4 * top)
        heuristic = ("stable (heuristic): identical barcodes at lambda=%s and %s" % (2 * top, 4 * top)
                     if _stable(b2, b4) else
                     "not stable (heuristic): barcodes differ at lambda=%s and %s" % (2 * top, 4 * top))
    return VisibilityVerdict(lams, bcs, levels, verdict, cert, heuristic)


# ---------------------------------------------------------------------------
# exactness


def _node_image(maps_in: Optional[GradedMap], B: GradedComplex, k: int, lam: Fraction) -> Mat:
    W = B.d(k - 1)
    if maps_in is None:
        return W
    A = maps_in.source
    ka = maps_in.grading.norm(k - maps_in.degree)
    ZA = kernel_mod(A.d(ka), lam)
    img = matmul(maps_in.block(ka), ZA, lam) if ZA.ncols else Mat.zeros(B.rank(k), 0)
    return img.hstack(W)


def _node_kernel(map_out: Optional[GradedMap], B: GradedComplex, k: int, lam: Fraction) -> Mat:
    ZB = kernel_mod(B.d(k), lam)
    W = B.d(k - 1)
    if map_out is None:
        return ZB.hstack(W)
    C = map_out.target
    kc = map_out.grading.norm(k + map_out.degree)
    g = matmul(map_out.block(k), ZB, lam)
    dC = C.d(kc - 1)
    combo = g.hstack(dC)
    if combo.nrows == 0:
        return ZB.hstack(W)
    ker = kernel_mod(combo, lam)
    a = ker.submatrix(range(ZB.ncols), range(ker.ncols))
    return matmul(ZB, a, lam).hstack(W)


def exactness_check(nodes: Sequence[GradedComplex], maps: Sequence[GradedMap], lam,
                    pad_with_zero: bool = True) -> bool:
    """Check ``im = ker`` on homology modulo ``T^lam`` at every node.

    ``maps[j]`` goes from ``nodes[j]`` to ``nodes[j+1]``; with
    ``pad_with_zero`` the sequence starts and ends with ``0``.  Raises
    :class:`ValidationError` naming the first failing node and degree.
    """
    lam = as_fraction(lam)
    if len(maps) != len(nodes) - 1:
        raise ShapeError("need one map between consecutive nodes")
    for j, B in enumerate(nodes):
        if not pad_with_zero and (j == 0 or j == len(nodes) - 1):
            continue
        fin = maps[j - 1] if j > 0 else None
        fout = maps[j] if j < len(maps) else None
        for k in B.gens:
            im = Lattice.span(_node_image(fin, B, k, lam), lam)
            ker = Lattice.span(_node_kernel(fout, B, k, lam), lam)
            if im.colength() != ker.colength() or not ker.contains_all(_node_image(fin, B, k, lam)):
                raise ValidationError(
                    f"not exact at node {j}, degree {k}: image colength {im.colength()}, "
                    f"kernel colength {ker.colength()}", where=(j, k))
    return True
