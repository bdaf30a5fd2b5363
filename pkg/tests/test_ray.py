import random
from fractions import Fraction as F

import pytest

from novtel import ray as rays
from novtel.complex import (GradedComplex, GradedMap, commutator_with_d, compose as compose_maps, cone,
                            homology_barcode, identity_map, validate)
from novtel.errors import ShapeError, UnsupportedInput, ValidationError
from novtel.linalg import Mat
from novtel.novikov import ZERO, NovikovScalar as N
from novtel.ray import (Ray, RayHomotopy, RayMorphism, colimit_mod, comparison_map, constant_ray,
                        identity_morphism, rank_one_ray, scalar_morphism, strictify, telescope,
                        telescope_inclusion, tensor_morphisms, tensor_rays, unit_ray, validate_homotopy,
                        validate_morphism)

from randrays import random_ray

T = N.T


def plain(bc):
    return {k: (f, sorted(b)) for k, (f, b) in bc.as_dict().items()}


def test_unit_ray_telescope():
    U = unit_ray()
    assert plain(homology_barcode(telescope(U, 2))) == {0: (1, [])}
    assert telescope(U, 1) == GradedComplex({0: ["c1:1"]})


def test_telescope_golden_signs():
    U = unit_ray()
    F2 = telescope(U, 2)
    assert F2.gens == {-1: ("s1:1",), 0: ("c1:1", "c2:1")}
    assert F2.d(-1) == Mat([[1], [1]])
    pi = comparison_map(U, 2)
    assert pi.block(0) == Mat([[-1, 1]])
    # d(x[1]) = -(dx)[1] + x + c(x) on a two-term slice
    R = constant_ray(GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[T(2)]])}))
    F2 = telescope(R, 2)
    validate(F2)
    col = F2.gens[0].index("s1:b")
    d0 = F2.d(0)
    assert d0.rows[F2.gens[1].index("c1:b")][col] == 1
    assert d0.rows[F2.gens[1].index("c2:b")][col] == 1
    dm1 = F2.d(-1)
    assert dm1.rows[F2.gens[0].index("s1:b")][0] == -T(2)


def test_comparison_at_one_is_minus_identity():
    R = random_ray(3)
    pi = comparison_map(R, 1)
    for k in R.slice(1).gens:
        assert pi.block(k) == -Mat.identity(R.slice(1).rank(k))


def test_shift_ray_telescope():
    R = rank_one_ray([], 1)
    F3 = telescope(R, 3)
    assert plain(homology_barcode(F3)) == {0: (1, [])}
    # the class of C_1 reaches C_3 multiplied by T^2
    m = compose_maps(comparison_map(R, 3), telescope_inclusion(R, 1, 3)).block(0)
    assert m.rows[0][F3.gens[0].index("c1:x")] == -T(2)


@pytest.mark.parametrize("seed", range(8))
def test_strictification(seed):
    R = random_ray(seed, max_slices=2)
    S = strictify(R, 3)
    assert S.check_squares(R)
    for n, (Fn, pi) in enumerate(zip(S.slices, S.comparisons), start=1):
        validate(Fn)
        assert homology_barcode(cone(pi)).is_empty(), n


def test_colimit_models():
    R = constant_ray(GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[T(2)]])}))
    assert colimit_mod(R, 5).complex.rank(0) == 1
    S = rank_one_ray([], 1)
    for lam in (1, 5, F(5, 2)):
        assert colimit_mod(S, lam).complex.rank(0) == 0
    C = GradedComplex({0: ["x", "y"]})
    D = Ray([C], [], GradedMap(C, C, {0: Mat.diag([1, T(1)])}))
    model = colimit_mod(D, 3)
    assert model.complex.rank(0) == 1
    assert all(x.is_zero() for x in model.from_slice(1, 0, [N.const(0), N.const(1)]))
    assert not model.from_slice(1, 0, [N.const(1), N.const(0)])[0].is_zero()


def test_tensor_rays():
    U = unit_ray()
    R = random_ray(5)
    UR = tensor_rays(U, R)
    for i in range(1, R.N + 1):
        assert {k: len(v) for k, v in UR.slice(i).gens.items()} == {k: len(v) for k, v in R.slice(i).gens.items()}
        assert UR.slice(i).diff == R.slice(i).diff
    assert tensor_rays(U, U).slice(1).gens == {0: ("1*1",)}
    a, b = rank_one_ray([1], F(1, 2)), rank_one_ray([2], F(1, 3))
    ab = tensor_rays(a, b)
    assert ab.map(1).block(0) == Mat([[T(3)]])
    assert ab.phi.block(0) == Mat([[T(F(5, 6))]])


def test_morphisms():
    R = random_ray(7)
    idm = identity_morphism(R)
    assert validate_morphism(idm)
    two = scalar_morphism(R, T(1))
    comp = rays.compose(two, two)
    assert comp.strict and validate_morphism(comp)
    assert comp.fi(1) == identity_map(R.slice(1)).scale(T(2))


def test_corrupted_homotopy_component_fails_at_its_slice():
    # c_i = T id on a two-term slice; f_i = id for i <= 2 and T id after needs h
    A = GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[1]])})
    R = Ray([A, A, A], [identity_map(A)] * 2, identity_map(A))
    f = [identity_map(A)] * 3
    h_good = [None, GradedMap(A, A, {1: Mat([[-T(1)]])}, -1), None]
    fm = [identity_map(A), identity_map(A), identity_map(A).scale(1 + T(1))]
    # square 2: f_2 - f_3 = -T id = dh_2 + h_2 d with h_2(b) = -T a
    good = RayMorphism(R, R, fm, h_good)
    assert validate_morphism(good)
    bad = RayMorphism(R, R, fm, [None, GradedMap(A, A, {1: Mat([[T(1)]])}, -1), None])
    with pytest.raises(ValidationError) as exc:
        validate_morphism(bad)
    assert exc.value.where[0] == 2
    assert validate_morphism(RayMorphism(R, R, f))


def test_ray_homotopy():
    A = GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[T(1)]])})
    R = constant_ray(A)
    K = GradedMap(A, A, {1: Mat([[T(2)]])}, -1)
    f = identity_map(A)
    g = f - commutator_with_d(K)
    F_, G_ = RayMorphism(R, R, [f]), RayMorphism(R, R, [g])
    validate_morphism(G_)
    H = RayHomotopy(F_, G_, [K])
    # second identity: c'K_1 - K_2 c = 0 when K is constant and the maps are identities
    assert validate_homotopy(H)
    with pytest.raises(ValidationError):
        validate_homotopy(RayHomotopy(F_, G_, [K.scale(2)]))


def test_tensor_of_nonstrict_rejected():
    A = GradedComplex({0: ["a"], 1: ["b"]}, {0: Mat([[1]])})
    R = rank_one_ray([], 0)
    S = constant_ray(A)
    h = GradedMap(A, A, {1: Mat([[1]])}, -1)
    m = RayMorphism(S, S, [identity_map(A)], [h])
    with pytest.raises(UnsupportedInput):
        tensor_morphisms(m, identity_morphism(R))


def test_ray_shape_errors():
    C = GradedComplex({0: ["a"]})
    D = GradedComplex({0: ["a", "b"]})
    with pytest.raises(ShapeError):
        Ray([C, D], [], identity_map(D))
    with pytest.raises(ShapeError):
        Ray([C], [], identity_map(D))


@pytest.mark.parametrize("seed", range(5))
def test_json_round_trip(seed):
    R = random_ray(seed)
    S = Ray.from_json(R.to_json())
    assert S.N == R.N and all(S.slice(i) == R.slice(i) for i in range(1, R.N + 1))
    assert S.phi == R.phi and S.tail_kind() == R.tail_kind()


def test_lift_in_zero_model_degree():
    R = rank_one_ray([], 1)
    m = colimit_mod(R, 3)
    assert m.rank(0) == 0
    assert m.lift(0, []) == [ZERO]
