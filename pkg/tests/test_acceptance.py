"""Acceptance criteria 1-10, one PASS/FAIL line each.

Lines are collected in ``RESULTS`` and printed in the pytest terminal
summary; running this file directly prints them as well.
"""

import io
import json
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction as F
from pathlib import Path

from novtel.cli import run
from novtel.completion import (InducedMap, brute_force_telescope_homology, class_from_slice, homology_generators,
                               truncated_homology, visibility)
from novtel.complex import GradedComplex, GradedMap, tensor, validate_chain_map
from novtel.io import orbits_from, ray_from, read_json
from novtel.linalg import Mat
from novtel.neck import (apply_phi, build_neck, ellipsoid_orbits, eval_matching, eval_profile, index_bounded_check,
                         inner_difference, outer_difference, phi_extends, valuation_shifts)
from novtel.novikov import NovikovScalar as N
from novtel.ray import colimit_mod, compose, rank_one_ray, unit_ray
from novtel.unital import (check_realization, dga_realization, perturb_realization, product_on_classes, raise_,
                           unit_class, visibility_via_unit)

from randrays import random_ray

T = N.T
DATA = Path(__file__).resolve().parent.parent / "data"
RESULTS = {}


@contextmanager
def criterion(n: int, title: str, budget: float):
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        dt = time.perf_counter() - t0
        RESULTS[n] = f"criterion {n:2d} FAIL  {title}  ({dt:.2f}s): {type(exc).__name__}: {exc}"
        print(RESULTS[n])
        raise
    dt = time.perf_counter() - t0
    ok = dt < budget
    extra = f"  [{detail['note']}]" if "note" in detail else ""
    RESULTS[n] = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  ({dt:.2f}s < {budget:g}s){extra}"
    print(RESULTS[n])
    assert ok, f"criterion {n} exceeded its {budget}s budget ({dt:.2f}s)"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, json.loads(out.getvalue())


# ---------------------------------------------------------------------------


def test_criterion_01_unit_ray():
    with criterion(1, "U-ray: one full bar in degree 0 at lambda in {1, 10, 100}", 1):
        code, rep = cli("tel-homology", DATA / "u_ray.json", "--lambda", 1, "--lambda", 10, "--lambda", 100)
        assert code == 0
        assert [b["lambda"] for b in rep["barcodes"]] == ["1", "10", "100"]
        for b in rep["barcodes"]:
            assert b["barcode"]["degrees"] == [{"degree": 0, "finite": [], "full": 1}]
        for lam in (1, 10, 100):
            bc = truncated_homology(unit_ray(), lam)
            assert bc.full_count(0) == 1 and {k: list(b) for k, (_, b) in bc.as_dict().items()} == {0: []}


def test_criterion_02_adiabatic_vanishing():
    with criterion(2, "phi = T id: certified-invisible, empty barcodes, oracle agrees", 10):
        R = rank_one_ray([], 1)
        lams = (1, 5, 25)
        assert visibility(R, lams).verdict == "certified-invisible"
        for lam in lams:
            bc = truncated_homology(R, lam)
            assert bc.is_empty()
            code, rep = cli("oracle", DATA / "shift_ray.json", "--M", math.ceil(lam) + 2, "--lambda", lam)
            assert code == 0 and rep["levels"][0]["agree"] is True
            assert brute_force_telescope_homology(R, math.ceil(lam) + 2, lam).is_empty()


def _oracle_M(R, lam):
    d = R.least_positive_valuation()
    return R.N + 2 + (math.ceil(F(lam) / d) if d else 0) + sum(R.slice(R.N).rank(k) for k in R.slice(R.N).gens)


SEEDS = range(50)
LAMS = (2, 8)


def test_criterion_03_and_04_oracle_and_monotonicity():
    mono_fail = []
    with criterion(3, f"oracle equivalence on {len(SEEDS)} random rays at lambda in {LAMS}", 300) as info:
        kinds = {}
        for seed in SEEDS:
            R = random_ray(seed, max_slices=4, max_gens=3)
            kinds[R.tail_kind()] = kinds.get(R.tail_kind(), 0) + 1
            bars = []
            for lam in LAMS:
                bc = truncated_homology(R, lam)
                assert bc == brute_force_telescope_homology(R, _oracle_M(R, lam), lam), (seed, lam)
                bars.append(bc)
            if bars[1].clip(LAMS[0]) != bars[0]:
                mono_fail.append(seed)
        info["note"] = ", ".join(f"{k}: {v}" for k, v in sorted(kinds.items()))
    with criterion(4, "clipping the lambda=8 barcode at 2 gives the lambda=2 barcode", 300):
        assert not mono_fail, f"seeds {mono_fail}"


def dga_x(a):
    A = GradedComplex({-1: ["x"], 0: ["1"]}, {-1: Mat([[T(a)]])})
    mu = GradedMap(tensor(A, A), A, {0: Mat([[1]]), -1: Mat([[1, 1]])})
    validate_chain_map(mu)
    return A, mu


def dga_lambda():
    A = GradedComplex({0: ["1"]})
    return A, GradedMap(tensor(A, A), A, {0: Mat([[1]])})


def dga_dual_numbers():
    """``Lambda[e]/(e^2)`` in degree 0; tensor generators are ``1*1, 1*e, e*1, e*e``."""
    A = GradedComplex({0: ["1", "e"]})
    assert tensor(A, A).gens[0] == ("1*1", "1*e", "e*1", "e*e")
    return A, GradedMap(tensor(A, A), A, {0: Mat([[1, 0, 0, 0], [0, 1, 1, 0]])})


def _perturb(r):
    K = [GradedMap(r.C.slice(i), r.D.slice(i), {0: Mat([[T(1)]])}, -1) for i in range(1, r.C.N + 1)]
    return perturb_realization(r, K)


def dga_suite():
    return [
        ("Lambda, constant", dga_realization(*dga_lambda(), [1])),
        ("Lambda, shift 1", dga_realization(*dga_lambda(), [1], (), 1)),
        ("x: T^3, constant", dga_realization(*dga_x(3), [1])),
        ("x: T^3, w=(1)", dga_realization(*dga_x(3), [1], (1,), 0)),
        ("x: T^2, shift 1/2", dga_realization(*dga_x(2), [1], (F(1, 2),), F(1, 2))),
        ("x: T^5/2, w=(1,1/3)", dga_realization(*dga_x(F(5, 2)), [1], (1, F(1, 3)), 0)),
        ("x: T^3 perturbed", _perturb(dga_realization(*dga_x(3), [1], (1,), 0))),
        ("x: T^4 perturbed, shift", _perturb(dga_realization(*dga_x(4), [1], (2,), F(1, 3)))),
        ("dual numbers, constant", dga_realization(*dga_dual_numbers(), [1, 0])),
        ("dual numbers, w=(1/2)", dga_realization(*dga_dual_numbers(), [1, 0], (F(1, 2),), 0)),
    ]


def _coef(rng):
    return T(F(rng.randint(0, 12), rng.choice([1, 2, 3, 6]))) * rng.choice([1, -1, 2, 3])


def _random_classes(model, rng, count):
    """Random combinations of homology generators, or classes of random degree-0 slice cycles."""
    R = model.ray
    gens = [g for k in sorted(model.complex.gens) for g in homology_generators(model, k)]
    out = []
    for _ in range(count):
        if gens and rng.random() < 0.5:
            deg = rng.choice(sorted({g.degree for g in gens}))
            acc = None
            for g in (g for g in gens if g.degree == deg):
                y = g.scale(_coef(rng))
                acc = y if acc is None else acc + y
            out.append(acc)
        else:
            j = rng.randint(1, R.N)
            vec = [_coef(rng) for _ in range(R.slice(j).rank(0))]
            out.append(class_from_slice(model, j, 0, vec))
    return out


def test_criterion_05_unit_visibility():
    with criterion(5, "unit torsion <=> invisibility on 10 realizations; u . y = f(y) on 5 classes each", 60) as info:
        rng = random.Random(5)
        schedule = (1, 2, 4, 8)
        verdicts = []
        suite = dga_suite()
        assert len(suite) == 10
        for name, r in suite:
            check_realization(r.f, r.p, r.u, r.E)
            v = visibility_via_unit(r.f, r.p, r.u, r.E, schedule)
            vis = visibility(r.C, schedule)
            assert vis.certified and v.certified, name
            assert v.zero == (vis.verdict == "certified-invisible"), name
            verdicts.append(vis.verdict.split("-")[1])
            for lam in (2, 8):
                model = colimit_mod(r.C, lam)
                uc = unit_class(r.C, r.u, lam, model)
                Fm = InducedMap(r.f, lam, source=model)
                for y in _random_classes(model, rng, 5):
                    assert product_on_classes(r.p, uc, y, lam, Fm.target).equals(Fm(y)), (name, lam)
        info["note"] = f"{verdicts.count('visible')} visible, {verdicts.count('invisible')} invisible"
        assert 0 < verdicts.count("visible") < 10


def test_criterion_06_raised_level():
    with criterion(6, "raise(eps) acts as T^eps and raise(a) o raise(b) = raise(a+b)", 10):
        rays = [unit_ray(), rank_one_ray([1], 0)] + [random_ray(s, max_slices=3, max_gens=3, tail="constant")
                                                     for s in range(4)]
        for R in rays:
            for lam in (F(7, 2), 10):
                for eps in (F(1, 2), 1, 3):
                    assert InducedMap(raise_(R, eps), lam).is_scalar(T(eps)), (R.name, lam, eps)
                for a, b in ((F(1, 2), 1), (1, 3), (F(1, 2), 3)):
                    lhs = InducedMap(compose(raise_(R, a), raise_(R, b)), lam)
                    assert lhs.equals(InducedMap(raise_(R, a + b), lam))


def test_criterion_07_k_independence():
    with criterion(7, "end differences identical for K in {10, 10^3, 10^6}; displayed identities exact", 1):
        ends = set()
        for K in (10, 10 ** 3, 10 ** 6):
            p = build_neck(F(1, 2), 2, F(1, 10), F(1, 100), F(1, 1000), K)
            e = p.eps
            ends.add((inner_difference(p), outer_difference(p)))
            assert eval_profile(p, 1 + e) == K * e
            assert eval_matching(p, p.s_tilde * (1 + e)) == K * e
            assert eval_profile(p, 1 - p.alpha) == -p.delta - p.c * (p.alpha - e)
        assert len(ends) == 1


def test_criterion_08_fukaya_trick():
    with criterion(8, "Phi is a strict iso with valuation shift Delta(out) - Delta(in); extends at lambda 1, 10", 30):
        raw = read_json(DATA / "fukaya_ray.json")
        R = ray_from(raw, "fukaya_ray.json")
        orbits = orbits_from(raw["orbits"])
        kinds = {o.kind for o in orbits.values()}
        assert len(orbits) >= 6 and kinds == {"constant", "nonconstant"}
        neck = build_neck(F(1, 2), 2, F(1, 10), F(1, 100), F(1, 1000), 10, [1, 2, 3])
        res = apply_phi(R, neck, orbits)
        shifts = valuation_shifts(R, res)
        assert shifts and all(actual == expected for *_, actual, expected in shifts)
        stream = [(o.period, o.cz) for o in orbits.values() if o.kind == "nonconstant"]
        table = index_bounded_check(stream, 10, stream, 20)
        v = phi_extends(R, neck, orbits, 2, table, (1, 10))
        assert v.extends
        assert v.barcodes_agree == {"1": True, "10": True}
        for lam in (1, 10):
            assert truncated_homology(R, lam) == truncated_homology(res.ray, lam)


def test_criterion_09_ellipsoid_index_bounds():
    with criterion(9, "ellipsoid (1, 5/3, 9/7): per-index counts stable between caps 50 and 100", 10) as info:
        a = (1, F(5, 3), F(9, 7))
        lo, hi = ellipsoid_orbits(a, 50).orbits, ellipsoid_orbits(a, 100).orbits
        count = lambda orbits: {cz: sum(1 for o in orbits if o.cz == cz) for cz in {o.cz for o in orbits}}
        top = {}
        for o in hi:
            top[o.cz] = max(top.get(o.cz, 0), o.period)
        low_counts, high_counts = count(lo), count(hi)
        settled = [cz for cz, pmax in top.items() if pmax < 50]
        assert settled
        for cz in settled:
            assert low_counts.get(cz, 0) == high_counts[cz], cz
        assert index_bounded_check(lo, 50, hi, 100).bounded
        info["note"] = f"{len(settled)} index classes below 50"


def test_criterion_10_negative_controls():
    with criterion(10, "d^2 != 0, non-closed unit and unbounded stream rejected with nonzero exit", 1):
        code, rep = cli("validate", DATA / "bad_d2.json")
        assert code == 1 and rep["error_type"] == "ValidationError" and "d^2 != 0" in rep["error"]
        code, rep = cli("unit-check", DATA / "torsion_ray.json", DATA / "open_unit.json")
        assert code == 1 and "not closed" in rep["error"]
        code, rep = cli("index-check", DATA / "unbounded_stream.json", "--cap", 50, "--cap-high", 100)
        assert code == 1 and rep["status"] == "error"


if __name__ == "__main__":
    import sys
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion")]
    failed = 0
    for t in tests:
        try:
            t()
        except Exception:
            failed += 1
    sys.exit(1 if failed else 0)
