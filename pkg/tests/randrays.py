"""Random rays for property tests.

Slices are sums of elementary pieces, either a free ``Lambda`` in one degree
or a pair ``x -> T^e y``, disguised by elementary unipotent base changes.
Structure maps are chain maps between pieces, written in the same disguise.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Tuple

from novtel.complex import GradedComplex, GradedMap
from novtel.linalg import Mat, matmul
from novtel.novikov import ZERO, NovikovScalar
from novtel.ray import Ray

T = NovikovScalar.T


def rand_exp(rng: random.Random, lo=0, hi=4) -> Fraction:
    return Fraction(rng.randint(lo * 6, hi * 6), rng.choice([1, 2, 3, 6]))


# a piece is ("free", k) or ("pair", k, e): x in degree k, y in degree k + 1


def rand_pieces(rng: random.Random, max_gens: int = 3, degrees=(0, 1)) -> List[tuple]:
    pieces, used = [], 0
    target = rng.randint(1, max_gens)
    while used < target:
        k = rng.choice(degrees)
        if used + 2 <= target and rng.random() < 0.5:
            pieces.append(("pair", k, rand_exp(rng, 0, 3) + Fraction(1, 6) * rng.randint(0, 1)))
            used += 2
        else:
            pieces.append(("free", k))
            used += 1
    return pieces


def _layout(pieces):
    """Generator positions per degree: (piece index, role) -> (degree, row)."""
    gens, pos = {}, {}
    for n, p in enumerate(pieces):
        roles = [("x", p[1])] if p[0] == "free" else [("x", p[1]), ("y", p[1] + 1)]
        for role, k in roles:
            gens.setdefault(k, []).append(f"g{n}{role}")
            pos[(n, role)] = (k, len(gens[k]) - 1)
    return gens, pos


def std_complex(pieces) -> Tuple[GradedComplex, dict]:
    gens, pos = _layout(pieces)
    rows = {k: [[ZERO] * len(gens[k]) for _ in gens.get(k + 1, [])] for k in gens}
    for n, p in enumerate(pieces):
        if p[0] == "pair":
            k, i = pos[(n, "x")]
            _, j = pos[(n, "y")]
            rows[k][j][i] = T(p[2])
    diff = {k: Mat._raw(r, len(gens.get(k + 1, [])), len(gens[k])) for k, r in rows.items() if gens.get(k + 1)}
    return GradedComplex(gens, diff), pos


def std_map(rng, src_pieces, src_pos, tgt_pieces, tgt_pos, C, D, density=0.6, shift_floor=0) -> GradedMap:
    """A random chain map between standard forms."""
    blocks = {k: [[ZERO] * C.rank(k) for _ in range(D.rank(k))] for k in C.gens}

    def put(tgt, src, val):
        (k, i), (k2, j) = tgt_pos[tgt], src_pos[src]
        assert k == k2
        blocks[k][i][j] = blocks[k][i][j] + val

    for n, p in enumerate(src_pieces):
        for m, q in enumerate(tgt_pieces):
            if rng.random() > density and not (n == m):
                continue
            a = rand_exp(rng, 0, 2) + shift_floor
            if p[0] == "free" and q[0] == "free" and p[1] == q[1]:
                put((m, "x"), (n, "x"), T(a))
            elif p[0] == "free" and q[0] == "pair" and q[1] + 1 == p[1]:
                put((m, "y"), (n, "x"), T(a))
            elif p[0] == "pair" and q[0] == "free" and q[1] == p[1]:
                put((m, "x"), (n, "x"), T(a))
            elif p[0] == "pair" and q[0] == "pair" and p[1] == q[1]:
                # x -> T^a x', y -> T^b y' with a + e' = e + b
                e, e2 = p[2], q[2]
                b = a + e2 - e
                if b < 0:
                    a, b = a - b, Fraction(0)
                put((m, "x"), (n, "x"), T(a))
                put((m, "y"), (n, "y"), T(b))
    mats = {k: Mat._raw(r, D.rank(k), C.rank(k)) for k, r in blocks.items() if D.rank(k)}
    return GradedMap(C, D, mats)


def rand_unipotent(rng, n: int, steps: int = 2) -> Tuple[Mat, Mat]:
    P, Q = Mat.identity(n), Mat.identity(n)
    for _ in range(steps if n > 1 else 0):
        i, j = rng.sample(range(n), 2)
        t = T(rand_exp(rng, 0, 2)) * rng.choice([1, -1, 2])
        E = Mat.identity(n)
        E.rows[i][j] = t
        Einv = Mat.identity(n)
        Einv.rows[i][j] = -t
        P, Q = matmul(E, P), matmul(Q, Einv)
    return P, Q


def disguise(rng, C: GradedComplex):
    P, Q = {}, {}
    for k in C.gens:
        P[k], Q[k] = rand_unipotent(rng, C.rank(k))
    diff = {k: matmul(matmul(P[k + 1], m), Q[k]) for k, m in C.diff.items()}
    return GradedComplex(C.gens, diff), P, Q


def conj_map(f: GradedMap, C2, D2, Psrc, Ptgt) -> GradedMap:
    """``Ptgt f Psrc^{-1}`` with ``Psrc`` given as its inverse ``Q``."""
    blocks = {k: matmul(matmul(Ptgt[0][k], m), Psrc[1][k]) for k, m in f.blocks.items()}
    return GradedMap(C2, D2, blocks)


def random_ray(seed: int, max_slices: int = 4, max_gens: int = 3, tail: str = "any") -> Ray:
    """A random ray with a chain-level tail of the requested kind."""
    rng = random.Random(seed)
    N = rng.randint(1, max_slices)
    kind = rng.choice(["constant", "shift", "mixed"]) if tail == "any" else tail
    pieces = rand_pieces(rng, max_gens)
    slices, pos_list, std = [], [], []
    for _ in range(N):
        if rng.random() < 0.3:
            pieces = rand_pieces(rng, max_gens)
        C, pos = std_complex(pieces)
        std.append((pieces, pos, C))
    maps_std = []
    for i in range(N - 1):
        (p1, pos1, C1), (p2, pos2, C2) = std[i], std[i + 1]
        maps_std.append(std_map(rng, p1, pos1, p2, pos2, C1, C2))
    pN, posN, CN = std[-1]
    if kind == "constant":
        phi = std_map(rng, pN, posN, pN, posN, CN, CN, density=0.0, shift_floor=0)
        phi = GradedMap(CN, CN, {k: Mat.identity(CN.rank(k)) for k in CN.gens})
    elif kind == "shift":
        d = rand_exp(rng, 0, 1) + Fraction(1, 3)
        phi = GradedMap(CN, CN, {k: Mat.identity(CN.rank(k)).scale(T(d)) for k in CN.gens})
    else:
        # identity on some pieces, T^delta on others
        d = Fraction(rng.randint(1, 6), rng.choice([1, 2, 3]))
        blocks = {k: [[ZERO] * CN.rank(k) for _ in range(CN.rank(k))] for k in CN.gens}
        for n, p in enumerate(pN):
            s = T(d) if rng.random() < 0.5 else T(0)
            for role in (("x",) if p[0] == "free" else ("x", "y")):
                k, i = posN[(n, role)]
                blocks[k][i][i] = s
        phi = GradedMap(CN, CN, {k: Mat._raw(r, CN.rank(k), CN.rank(k)) for k, r in blocks.items()})
    # disguise every slice
    dis = [disguise(rng, C) for _, _, C in std]
    prefix = [x[0] for x in dis]
    maps = [conj_map(maps_std[i], prefix[i], prefix[i + 1], (dis[i][1], dis[i][2]), (dis[i + 1][1], None))
            for i in range(N - 1)]
    phi2 = conj_map(phi, prefix[-1], prefix[-1], (dis[-1][1], dis[-1][2]), (dis[-1][1], None))
    R = Ray(prefix, maps, phi2, f"random{seed}")
    R.validate()
    return R
