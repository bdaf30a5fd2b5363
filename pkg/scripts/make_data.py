"""Regenerate the sample inputs in data/ (run from the repository root)."""

from fractions import Fraction as F
from pathlib import Path

from novtel import unital
from novtel.complex import GradedComplex, GradedMap, tensor, two_term
from novtel.io import bundle_to_json, dump
from novtel.linalg import Mat
from novtel.novikov import NovikovScalar as N
from novtel.ray import Ray, constant_ray, rank_one_ray, unit_ray

T = N.T
OUT = Path("data")

NECK = {"alpha": "1/2", "s": "2", "epsilon": "1/10", "delta": "1/100", "c": "1/1000", "K": "10",
        "reeb_periods": ["1", "2", "3"]}


def write(name, obj):
    (OUT / name).write_text(dump(obj))


def rays():
    write("u_ray.json", unit_ray().to_json())
    write("shift_ray.json", rank_one_ray([], 1, name="shift").to_json())
    write("torsion_ray.json", constant_ray(two_term(3), "torsion").to_json())


def negative_controls():
    bad = constant_ray(two_term(3)).to_json()["prefix"][0]
    bad["degrees"].append({"degree": 2, "generators": ["c"]})
    bad["differential"].append({"from_degree": 1, "matrix": [["1"]]})
    write("bad_d2.json", bad)
    write("unbounded_stream.json", [[str(k), 3] for k in range(1, 101)])
    # not closed on the torsion ray, whose d sends its degree-0 generator to T^3
    write("open_unit.json", {"u": [["1"]]})


def dga_files():
    A = GradedComplex({-1: ["x"], 0: ["1"]}, {-1: Mat([[T(3)]])})
    mu = GradedMap(tensor(A, A), A, {0: Mat([[1]]), -1: Mat([[1, 1]])})
    r = unital.dga_realization(A, mu, [1], (1,), 0)
    write("dga_bundle.json", bundle_to_json(r.C, r.D, r.p, r.u, r.f, r.E, schedule=[2, 4]))
    write("dga_ray.json", r.C.to_json())
    write("dga_unit.json", r.u.to_json())


def neck_files():
    write("neck.json", {**NECK, "C": "1", "K_sweep": ["10", "1000", "1000000"]})
    write("neck_phi.json", {**NECK, "stream": [["1", 0], ["1", 1], ["2", 1]], "cap": "10", "cap_high": "20"})
    write("neck_phi_unbounded.json", {**NECK, "stream": [[str(k), 0] for k in range(1, 41)],
                                      "cap": "10", "cap_high": "40"})


def fukaya_ray():
    """Two-slice ray on seven orbit-labelled generators, constant and nonconstant."""
    C = GradedComplex({-1: ["v"], 0: ["x", "y", "a"], 1: ["z", "b", "w"]},
                      {-1: Mat([[0], [T(2)], [0]]),
                       0: Mat([[T(2), 0, T(5)], [0, 0, T(1)], [0, 0, 0]])})
    half = T(F(1, 2))
    c1 = GradedMap(C, C, {k: Mat.identity(C.rank(k)).scale(half) for k in C.gens})
    R = Ray([C, C], [c1], GradedMap(C, C, {k: Mat.identity(C.rank(k)) for k in C.gens}), "fukaya")
    orbits = {"v": {"kind": "constant", "region": "outer"},
              "x": {"kind": "constant", "region": "inner"},
              "y": {"kind": "constant", "region": "outer"},
              "z": {"kind": "constant", "region": "inner"},
              "a": {"kind": "nonconstant", "radius": "1", "period": "1", "cz": 0},
              "b": {"kind": "nonconstant", "radius": "1", "period": "1", "cz": 1},
              "w": {"kind": "nonconstant", "radius": "23/20", "period": "2", "cz": 1}}
    write("fukaya_ray.json", {**R.to_json(), "orbits": orbits})


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    rays()
    negative_controls()
    dga_files()
    neck_files()
    fukaya_ray()
