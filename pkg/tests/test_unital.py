from fractions import Fraction as F

import pytest

from novtel.completion import InducedMap, class_from_slice, homology_generators
from novtel.complex import GradedComplex, GradedMap, tensor, validate_chain_map
from novtel.errors import ShapeError, ValidationError
from novtel.linalg import Mat
from novtel.novikov import ZERO, NovikovScalar as N
from novtel.ray import (Ray, RayHomotopy, RayMorphism, colimit_mod, constant_ray, identity_morphism,
                        rank_one_ray, tensor_rays, unit_ray)
from novtel.unital import (UnitData, canonical_unit, check_realization, co_check, compose, dga_realization,
                           make_unit_homotopy, perturb_realization, unit_homotopy_tensor_id, whisker, product_on_classes, raise_, strictify_unit,
                           unit_class, unit_tensor_id, validate_unit, validate_unit_homotopy, visibility_via_unit)

T = N.T


def dga_x(a):
    """``A = <1, x>`` with ``dx = T^a 1``, ``x^2 = 0``."""
    A = GradedComplex({-1: ["x"], 0: ["1"]}, {-1: Mat([[T(a)]])})
    mu = GradedMap(tensor(A, A), A, {0: Mat([[1]]), -1: Mat([[1, 1]])})
    validate_chain_map(mu)
    return A, mu


def dga_lambda():
    A = GradedComplex({0: ["1"]})
    mu = GradedMap(tensor(A, A), A, {0: Mat([[1]])})
    return A, mu


def two_gen_ray():
    """``u, v`` in degree 0, ``w`` in degree -1 with ``dw = T(u - v)``; unit moved by a boundary."""
    A = GradedComplex({-1: ["w"], 0: ["u", "v"]}, {-1: Mat([[T(1)], [-T(1)]])})
    idm = GradedMap(A, A, {k: Mat.identity(A.rank(k)) for k in A.gens})
    R = Ray([A, A], [idm], idm, "two")
    u1 = [N.const(1), ZERO]
    u2 = [N.const(1) - T(1), T(1)]
    return R, UnitData(R, [u1, u2], [[N.const(1)]])


# ---------------------------------------------------------------------------
# unit data


def test_canonical_unit_validates():
    R = unit_ray()
    assert validate_unit(R, canonical_unit(R))


def test_two_generator_unit_with_primitive():
    R, u = two_gen_ray()
    assert validate_unit(R, u)
    bad = UnitData(R, u.u, [[ZERO]])
    with pytest.raises(ValidationError):
        validate_unit(R, bad)


def test_non_closed_unit_rejected():
    B = GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[T(1)]])})
    R = Ray([B], [], GradedMap(B, B, {0: Mat([[1]]), 1: Mat([[1]])}))
    with pytest.raises(ValidationError) as exc:
        validate_unit(R, UnitData(R, [[N.const(1)]]))
    assert exc.value.where[0] == 1


def test_shape_errors():
    R = unit_ray()
    with pytest.raises(ShapeError):
        UnitData(R, [[N.const(1), N.const(1)]])
    with pytest.raises(ShapeError):
        UnitData(R, [[N.const(1)]], tail_weight=-1)


def test_unit_json_roundtrip():
    R, u = two_gen_ray()
    u2 = UnitData.from_json(u.to_json(), R)
    assert u2.to_json() == u.to_json()


# ---------------------------------------------------------------------------
# strictification


@pytest.mark.parametrize("weights,tw", [((), 0), ((1,), F(1, 2)), ((1, 2), 1)])
def test_strictify_dga_units(weights, tw):
    A, mu = dga_x(3)
    r = dga_realization(A, mu, [1], weights, tw)
    us, H = strictify_unit(r.u)
    assert validate_unit(r.C, us)
    assert validate_unit_homotopy(H)
    assert all(all(x.is_zero() for x in p) for p in us.p)


def test_strictify_nontrivial_primitive():
    R, u = two_gen_ray()
    us, H = strictify_unit(u)
    assert validate_unit(R, us)
    assert validate_unit_homotopy(H)
    assert all(x.is_zero() for x in us.p[0])
    # strictified unit represents the same class
    for lam in (F(1, 2), 2, 5):
        m = colimit_mod(R, lam)
        assert unit_class(R, u, lam, m).equals(unit_class(R, us, lam, m))


def test_corrupted_unit_homotopy_rejected():
    R, u = two_gen_ray()
    us, H = strictify_unit(u)
    bad = make_unit_homotopy(u, us, [[T(1)] for _ in H.h])
    with pytest.raises(ValidationError):
        validate_unit_homotopy(bad)


# ---------------------------------------------------------------------------
# classes and products


@pytest.mark.parametrize("lam", [1, 4, 100])
def test_unit_class_on_unit_ray(lam):
    R = unit_ray()
    c = unit_class(R, canonical_unit(R), lam)
    assert c.order() == lam
    assert not c.is_zero()


def test_unit_class_on_shift_ray_is_zero():
    R = rank_one_ray([], 1)
    u = canonical_unit(R, tail_weight=1)
    for lam in (1, 3, 10):
        assert unit_class(R, u, lam).is_zero()


def test_unit_order_equals_longest_bar():
    A, mu = dga_x(3)
    r = dga_realization(A, mu, [1])
    orders = [unit_class(r.C, r.u, lam).order() for lam in (2, 3, F(7, 2), 4, 10)]
    assert orders == [2, 3, 3, 3, 3]


@pytest.mark.parametrize("weights,tw", [((), 0), ((1,), 0), ((F(1, 2),), F(1, 2))])
def test_product_with_unit_equals_f(weights, tw):
    A, mu = dga_x(3)
    r = dga_realization(A, mu, [1], weights, tw)
    for lam in (2, 5):
        m = colimit_mod(r.C, lam)
        uc = unit_class(r.C, r.u, lam, m)
        F_ = InducedMap(r.f, lam, source=m)
        for k in (0, -1):
            for y in homology_generators(m, k):
                assert product_on_classes(r.p, uc, y, lam).equals(F_(y))


def test_product_of_monomials():
    A, mu = dga_lambda()
    r = dga_realization(A, mu, [1], (), 0)
    lam = 10
    x = (r.C, 1, 0, [T(2)])
    y = (r.C, 1, 0, [T(F(3, 2))])
    m = colimit_mod(r.D, lam)
    out = product_on_classes(r.p, x, y, lam, m)
    assert out.equals(class_from_slice(m, 1, 0, [T(F(7, 2))]))


def test_product_independent_of_representative_slice():
    A, mu = dga_lambda()
    r = dga_realization(A, mu, [1], (1, 1), 0)
    lam = 10
    m = colimit_mod(r.D, lam)
    x1 = (r.C, 1, 0, [N.const(1)])
    x2 = (r.C, 2, 0, [T(1)])
    y = (r.C, 3, 0, [T(F(1, 2))])
    assert product_on_classes(r.p, x1, y, lam, m).equals(product_on_classes(r.p, x2, y, lam, m))


def test_product_precision_mismatch():
    A, mu = dga_lambda()
    r = dga_realization(A, mu, [1])
    c = unit_class(r.C, r.u, 2)
    with pytest.raises(ShapeError):
        product_on_classes(r.p, c, c, 3)


# ---------------------------------------------------------------------------
# realizations


@pytest.mark.parametrize("weights,tw", [((), 0), ((1,), F(1, 2)), ((), 1), ((2, 1), 0)])
def test_dga_realizations_check(weights, tw):
    A, mu = dga_x(3)
    r = dga_realization(A, mu, [1], weights, tw)
    H = check_realization(r.f, r.p, r.u, r.E)
    assert isinstance(H, RayHomotopy)


def _perturbed():
    A, mu = dga_x(3)
    r = dga_realization(A, mu, [1], (1,), 0)
    K = [GradedMap(r.C.slice(i), r.D.slice(i), {0: Mat([[T(1)]])}, -1) for i in (1, 2)]
    return perturb_realization(r, K)


def test_perturbed_realization_checks():
    r = _perturbed()
    check_realization(r.f, r.p, r.u, r.E)
    v = visibility_via_unit(r.f, r.p, r.u, r.E, [1, 5])
    assert v.zero is True
    assert v.unit_orders == [0, 2]


def test_corrupted_homotopy_rejected():
    r = _perturbed()
    bad = RayHomotopy(r.E.F, r.E.G, [k.scale(T(1)) for k in r.E.K], r.E.q)
    with pytest.raises(ValidationError):
        check_realization(r.f, r.p, r.u, bad)


def identification(Cp: Ray, C: Ray, left: bool = True) -> RayMorphism:
    """``U (x) C = C`` (or ``C' (x) U = C'``) as a strict morphism with identity blocks."""
    CC = tensor_rays(Cp, C)
    D = C if left else Cp
    f = [GradedMap(CC.slice(i), D.slice(i), {k: Mat.identity(D.slice(i).rank(k)) for k in D.slice(i).gens})
         for i in range(1, CC.N + 1)]
    return RayMorphism(CC, D, f, name="ident")


def three_term():
    B = GradedComplex({0: ["a"], 1: ["b"], 2: ["c"]}, {1: Mat([[T(1)]])})
    return constant_ray(B, "B")


def test_identification_realization():
    U, C = unit_ray(), three_term()
    p = identification(U, C)
    assert check_realization(identity_morphism(C), p, canonical_unit(U), None)


def test_corrupted_q_rejected():
    U, C = unit_ray(), three_term()
    p = identification(U, C)
    B = C.slice(1)
    ok = RayHomotopy(identity_morphism(C), identity_morphism(C), [], [GradedMap(B, B, {}, -2)])
    check_realization(identity_morphism(C), p, canonical_unit(U), ok)
    q = [GradedMap(B, B, {2: Mat([[T(1)]])}, -2)]
    bad = RayHomotopy(identity_morphism(C), identity_morphism(C), [], q)
    with pytest.raises(ValidationError):
        check_realization(identity_morphism(C), p, canonical_unit(U), bad)


def test_strictified_unit_realizes_same_map():
    R, u = two_gen_ray()
    U = unit_ray()
    p = identification(R, U, left=False)
    f = compose(p, unit_tensor_id(u, U, p.source))
    check_realization(f, p, u, None)
    us, H = strictify_unit(u)
    W = whisker(p, unit_homotopy_tensor_id(H, U, p.source))
    back = RayHomotopy(W.G, W.F, [-k for k in W.K], [-q for q in W.q])
    assert check_realization(f, p, us, back)


def test_wrong_f_rejected():
    A, mu = dga_x(3)
    r = dga_realization(A, mu, [1], (1,), 0)
    two = N.const(2)
    f2 = RayMorphism(r.C, r.D, [r.f.fi(i).scale(two) for i in (1, 2)],
                     [r.f.hi(i).scale(two) for i in (1, 2)], name="2f", tail_weight=r.f.tail_weight)
    with pytest.raises(ValidationError):
        check_realization(f2, r.p, r.u, None)


# ---------------------------------------------------------------------------
# visibility via the unit


def test_visibility_unit_ray():
    A, mu = dga_lambda()
    r = dga_realization(A, mu, [1])
    v = visibility_via_unit(r.f, r.p, r.u, r.E, [1, 2, 4])
    assert v.zero is False and v.certified
    assert v.visibility.verdict == "certified-visible"


def test_visibility_shift_ray():
    A, mu = dga_lambda()
    r = dga_realization(A, mu, [1], (), 1)
    v = visibility_via_unit(r.f, r.p, r.u, r.E, [1, 2, 4])
    assert v.zero is True and v.certified
    assert v.visibility.verdict == "certified-invisible"
    assert all(v.unit_torsion)


def test_visibility_torsion_unit():
    A, mu = dga_x(3)
    r = dga_realization(A, mu, [1])
    v = visibility_via_unit(r.f, r.p, r.u, r.E, [2, 4])
    assert v.unit_orders == [2, 3]
    assert v.unit_torsion == [False, True]
    assert v.zero is True
    assert v.visibility.verdict == "certified-invisible"
    assert v.to_json()["unit_zero"] is True


# ---------------------------------------------------------------------------
# raise and closed-open


def test_raise_is_scalar():
    U = unit_ray()
    I = InducedMap(raise_(U, 1), 3)
    assert I.is_scalar(T(1))
    assert not I.is_scalar(1)


def test_raise_composes():
    R, _ = two_gen_ray()
    lhs = InducedMap(compose(raise_(R, F(1, 2)), raise_(R, F(3, 2))), 5)
    assert lhs.equals(InducedMap(raise_(R, 2), 5))


def test_raise_rejects_zero():
    with pytest.raises(ValueError):
        raise_(unit_ray(), 0)


def test_co_check_identity():
    U = unit_ray()
    assert co_check(identity_morphism(U), canonical_unit(U), canonical_unit(U), 2)


def test_co_check_raise():
    U = unit_ray()
    closed = canonical_unit(U)
    opened = UnitData(U, [[T(1)]])
    assert co_check(raise_(U, 1), closed, opened, 4)
    with pytest.raises(ValidationError):
        co_check(raise_(U, 1), closed, canonical_unit(U), 4)
