import random
from fractions import Fraction as F

import pytest

from novtel.complex import (Barcode, GradedComplex, GradedMap, Z2, cone, homology_barcode,
                            homology_barcode_lattice, identity_map, is_quasi_iso, one_term, scalar_map, shift,
                            tensor, tensor_maps, two_term, validate, validate_chain_map, zero_complex, zero_map)
from novtel.errors import ShapeError, ValidationError
from novtel.linalg import Mat
from novtel.novikov import NovikovScalar as N

from oracles import homology_by_minors, truncated_by_minors
from randrays import disguise, std_complex

T = N.T


def as_plain(bc: Barcode) -> dict:
    return {k: (f, sorted(b)) for k, (f, b) in bc.as_dict().items()}


def test_validate_accepts_and_rejects():
    assert validate(one_term(2))
    assert validate(two_term(F(1, 2)))
    bad = GradedComplex({0: ["a"], 1: ["b"], 2: ["c"]}, {0: Mat([[T(1)]]), 1: Mat([[1]])})
    with pytest.raises(ValidationError) as exc:
        validate(bad)
    assert "entry (0, 0)" in str(exc.value) and "T" in str(exc.value)


def test_shape_errors():
    with pytest.raises(ShapeError):
        GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[1, 1]])})


def test_two_term_homology():
    bc = homology_barcode(two_term(F(3, 2)))
    assert as_plain(bc) == {1: (0, [F(3, 2)])}


def test_zero_differential():
    C = GradedComplex({0: ["a", "b"], 1: ["c", "d", "e"]}, {})
    assert as_plain(homology_barcode(C)) == {0: (2, []), 1: (3, [])}


def three_term(seed):
    """Ranks 4, 5, 3 in degrees 0, 1, 2."""
    rng = random.Random(seed)
    pieces = [("pair", 0, F(rng.randint(0, 12), 4)), ("pair", 0, F(rng.randint(1, 12), 3)),
              ("pair", 1, F(rng.randint(1, 12), 6)), ("pair", 1, F(rng.randint(0, 6), 2)),
              ("free", 0), ("free", 0), ("free", 1), ("free", 2)]
    rng.shuffle(pieces)
    C, _ = std_complex(pieces)
    C, _, _ = disguise(rng, C)
    assert [C.rank(k) for k in (0, 1, 2)] == [4, 5, 3]
    return C


@pytest.mark.parametrize("seed", range(6))
def test_random_three_term_against_minors(seed):
    C = three_term(seed)
    validate(C)
    assert as_plain(homology_barcode(C)) == homology_by_minors(C)
    for lam in (F(1), F(2), F(7, 3)):
        assert as_plain(homology_barcode(C, lam)) == truncated_by_minors(C, lam)
        assert homology_barcode(C, lam) == homology_barcode_lattice(C, lam)


def test_cone_of_identity_is_acyclic():
    C = three_term(1)
    assert homology_barcode(cone(identity_map(C))).is_empty()


def test_cone_of_scalar():
    bc = homology_barcode(cone(scalar_map(one_term(), T(1))))
    assert as_plain(bc) == {0: (0, [F(1)])}


def test_shift_twice():
    C = three_term(2)
    assert shift(shift(C, 1), 1) == shift(C, 2)
    assert as_plain(homology_barcode(shift(C, 1))) == {k - 1: v for k, v in homology_by_minors(C).items()}


@pytest.mark.parametrize("a,b", [(1, 2), (F(1, 2), F(1, 3)), (3, 3)])
def test_kunneth(a, b):
    # H(A) = Lambda/T^a in degree 1; Tor term gives Lambda/T^min in degree 1, tensor in degree 2
    A, B = two_term(a), two_term(b)
    AB = tensor(A, B)
    validate(AB)
    m = min(F(a), F(b))
    assert as_plain(homology_barcode(AB)) == {1: (0, [m]), 2: (0, [m])}
    # over the field everything dies
    assert homology_barcode(AB).full_count() == 0


def test_koszul_sign_on_tensor_maps():
    A = two_term(1)
    h = GradedMap(A, A, {1: Mat([[1]])}, degree=-1)
    idm = identity_map(A)
    hh = tensor_maps(idm, h, tensor(A, A), tensor(A, A))
    # (id x h)(a x b) = (-1)^{|h||a|} a x h(b); for a in degree 1 the sign is -1
    AA = tensor(A, A)
    k = 2
    blk = hh.block(k)
    assert blk.rows[AA.gens[1].index("b*a")][0] == N.const(-1)


def test_z2_grading():
    C = GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[T(2)]]), 1: Mat([[0]])}, Z2)
    validate(C)
    assert as_plain(homology_barcode(C)) == {1: (0, [F(2)])}
    assert shift(C, 2) == C


def test_is_quasi_iso():
    C = one_term()
    assert is_quasi_iso(identity_map(C))
    f = scalar_map(C, T(1))
    assert is_quasi_iso(f, 2)          # cone bar 1 < lambda
    assert not is_quasi_iso(f, 1)      # lambda <= epsilon
    assert is_quasi_iso(f)             # over the field T is invertible
    A, B = two_term(0), two_term(0)
    assert is_quasi_iso(zero_map(A, B))


def test_chain_map_validation():
    A = two_term(1)
    bad = GradedMap(A, A, {0: Mat([[1]])})
    with pytest.raises(ValidationError):
        validate_chain_map(bad)


def test_barcode_clip_and_json():
    C = three_term(3)
    hi = homology_barcode(C, 8)
    assert hi.clip(2) == homology_barcode(C, 2)
    with pytest.raises(ValueError):
        homology_barcode(C).clip(1)
    assert GradedComplex.from_json(C.to_json()) == C
    assert hi.to_json()["precision"] == "8"


def test_empty_complex():
    assert homology_barcode(zero_complex()).is_empty()
