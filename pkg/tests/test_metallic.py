import math

import numpy as np
import pytest

from metallic_geom import expr as E
from metallic_geom.chart import EndoField, bracket_at, coordinate_fields, levi_civita, polynomial_fields
from metallic_geom.fixtures import GOLDEN, get
from metallic_geom.metallic import (
    TENSOR_KINDS, BranchError, MetallicParams, almost_product, assoc_tensor, deformation, deformation_suite,
    distribution_frame, jordan_tensor, nijenhuis, projectors, subtangent, validate,
)

SP, SM = (1 + math.sqrt(5)) / 2, (1 - math.sqrt(5)) / 2


def test_params():
    assert GOLDEN.disc == 5
    assert abs(GOLDEN.sigma_plus - SP) < 1e-15 and abs(GOLDEN.sigma_minus - SM) < 1e-15
    with pytest.raises(BranchError):
        GOLDEN.require_norden()
    with pytest.raises(BranchError):
        MetallicParams(1, -1).require_real()


def test_validate_f1():
    f = get("F1")
    rep = validate(f.g, f.J, f.params, f.samples())
    assert rep.ok and rep.metallic_residual < 1e-12 and rep.disc == 5


def test_validate_f7_is_indefinite():
    f = get("F7")
    rep = validate(f.g, f.J, f.params, f.samples(20))
    assert rep.metallic_residual < 1e-9 and rep.symmetry_residual < 1e-9
    assert rep.disc == -3 and rep.indefinite and rep.ok


def test_validate_wrong_q():
    f = get("F1")
    rep = validate(f.g, f.J, MetallicParams(1, 2), f.samples(5))
    assert abs(rep.metallic_residual - math.sqrt(2)) < 1e-12
    assert not rep.ok


def test_f1_projectors():
    pair = projectors(get("F1").J, GOLDEN, (0.2, 0.4))
    expected = [[0.2763932023, -0.4472135955], [-0.4472135955, 0.7236067977]]
    assert np.allclose(pair.P, expected, atol=1e-10)
    assert abs(np.trace(pair.P) - 1) < 1e-12
    res = pair.residuals()
    assert res["complementary"] == 0 and res["annihilating"] < 1e-12


def test_f6_radial_projector():
    pair = projectors(get("F6").J, GOLDEN, (1.0, 0, 0, 0))
    assert np.allclose(pair.Pp, np.diag([1.0, 0, 0, 0]), atol=1e-12)


def test_distribution_frames():
    fr = distribution_frame(get("F1").J, GOLDEN, (0, 0))
    d = fr.D[0].at((0, 0))
    assert abs(d[0] * 1 - d[1] * SM) < 1e-12          # parallel to (sigma-, 1)
    dp = fr.Dp[0].at((0, 0))
    assert abs(dp[0] * 1 - dp[1] * SP) < 1e-12
    fr3 = distribution_frame(get("F3").J, GOLDEN, (0, 0, 0))
    assert (fr3.rank_D, fr3.rank_Dp) == (2, 1)
    scalar = EndoField([[SP, 0], [0, SP]])
    frs = distribution_frame(scalar, GOLDEN, (0, 0))
    assert (frs.rank_D, frs.rank_Dp) == (0, 2)


@pytest.mark.parametrize("kind", TENSOR_KINDS)
def test_f1_tensors_vanish(kind):
    f = get("F1")
    pairs = [tuple(coordinate_fields(2))]
    if kind not in ("J_BRACKET", "JORDAN_BRACKET"):   # the brackets are not tensorial
        pairs.append(tuple(polynomial_fields(2, 2)))
    for X, Y in pairs:
        assert np.abs(assoc_tensor(kind, f.g, f.J, X, Y, (0.3, -0.6))).max() < 1e-12


def test_f3_nijenhuis_by_definition():
    f = get("F3")
    d1, _, d3 = coordinate_fields(3)
    pt = (0, 0, 0.2)
    J = f.J
    # N_J(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] + J^2[X,Y]; the J-term sign convention of nijenhuis() is opposite
    Jm = J.at(pt)
    brute = (bracket_at(J.apply(d1), J.apply(d3), pt) - Jm @ bracket_at(J.apply(d1), d3, pt)
             - Jm @ bracket_at(d1, J.apply(d3), pt) + Jm @ Jm @ bracket_at(d1, d3, pt))
    N = nijenhuis(J, d1, d3, pt)
    assert np.linalg.norm(N) > 0.1
    assert np.abs(N + brute).max() < 1e-9


def test_f2_nijenhuis_vanishes():
    f = get("F2")
    X, Y = polynomial_fields(2, 2, 4)
    for pt in f.samples(20):
        assert np.abs(nijenhuis(f.J, X, Y, pt)).max() < 1e-9


def test_f1_deformation_suite_is_zero():
    f = get("F1")
    X, Y = polynomial_fields(2, 2)
    s = deformation_suite(f.g, f.J, f.params, X, Y, (0.1, 0.2))
    for v in (s.H, s.Hp, s.L, s.Lp, s.K, s.Kp):
        assert np.abs(v).max() < 1e-12


def test_h_sum_sign_on_f3():
    f = get("F3")
    d1, _, d3 = coordinate_fields(3)
    pt = (0, 0, 0.3)
    s = deformation_suite(f.g, f.J, f.params, d1, d3, pt)
    HJ = assoc_tensor("DEFORMATION_HJ", f.g, f.J, d1, d3, pt)
    assert np.abs(s.H + s.Hp + HJ / 5).max() < 1e-9
    # generic fields separate the two signs
    X, Y = polynomial_fields(3, 2, 2)
    s = deformation_suite(f.g, f.J, f.params, X, Y, pt)
    HJ = assoc_tensor("DEFORMATION_HJ", f.g, f.J, X, Y, pt)
    assert np.abs(s.H + s.Hp + HJ / 5).max() < 1e-9
    assert np.abs(s.H + s.Hp - HJ / 5).max() > 1e-3


def test_f6_second_fundamental_component():
    f = get("F6")
    pt = (1.0, 0, 0, 0)
    fr = distribution_frame(f.J, GOLDEN, pt)
    X = fr.D[0]
    s = deformation_suite(f.g, f.J, f.params, X, X, pt)
    lc = levi_civita(f.g)
    P, Pp = fr.P, fr.Pp
    direct = Pp.at(pt) @ lc(P.apply(X), P.apply(X), pt)
    assert np.linalg.norm(s.K) > 0.1
    assert np.abs(s.K - direct).max() < 1e-9


def test_almost_product():
    f = get("F1")
    Jp = almost_product(f.J, GOLDEN).at((0, 0))
    assert np.allclose(Jp, -(2 * np.array([[1, 1], [1, 0]]) - np.eye(2)) / math.sqrt(5))
    assert np.abs(Jp @ Jp - np.eye(2)).max() < 1e-12
    assert np.allclose(Jp @ [SM, 1], [SM, 1])


def test_jp_nijenhuis_scaling_f3():
    f = get("F3")
    Jp = almost_product(f.J, GOLDEN)
    d1, _, d3 = coordinate_fields(3)
    for pt in f.samples(10):
        a, b = nijenhuis(f.J, d1, d3, pt), 1.25 * nijenhuis(Jp, d1, d3, pt)
        assert np.abs(a - b).max() < 1e-9


def test_subtangent():
    Jt = subtangent(EndoField([[1, 1], [0, 1]]), 2, -1).at((0,))
    assert np.allclose(Jt, [[0, 1], [0, 0]]) and not np.any(Jt @ Jt)
    assert not np.any(subtangent(EndoField([[1.5, 0], [0, 1.5]]), 3).at((0, 0)))
    with pytest.raises(BranchError):
        subtangent(get("F1").J, 1, 1)


def test_two_h_is_n_plus_m():
    f = get("F3")
    lc = levi_civita(f.g)
    X, Y = polynomial_fields(3, 2, 9)
    for pt in f.samples(10):
        lhs = 2 * deformation(lc, f.J, X, Y, pt)
        rhs = nijenhuis(f.J, X, Y, pt) + jordan_tensor(lc, f.J, X, Y, pt)
        assert np.abs(lhs - rhs).max() <= 1e-9 * max(1, np.abs(lhs).max())


def test_expr_fields_are_shared():
    assert E.coord(0) is E.coord(0)
