import mpmath
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from renormlab.dyncore import precision, real, tol
from renormlab.errors import (DegenerateCenter, DomainEscape, NotUnimodal,
                              TailBlowup)
from renormlab.germ import (Germ, eval_germ, fixed_point_residual,
                            germ_from_quadratic, grid_distance, jacobian,
                            make_germ, newton_fixed_point, renormalize,
                            spectrum, straighten, work_dps)

D = 50
# 4.669201609102990671853203820466... (superstable-ratio value, 30 digits)
DELTA = "4.66920160910299067185320382047"


def test_quadratic_representative():
    g = germ_from_quadratic(-1, dps=D)
    assert g.coeffs[:3] == (1, -1, 0) and g.N == 40
    g = germ_from_quadratic(-2, dps=D)
    assert eval_germ(g, eval_germ(g, 0)) == -1
    with pytest.raises(DegenerateCenter):
        germ_from_quadratic(0)


def test_eval_examples():
    g = make_germ([1, -1], dps=D)
    assert eval_germ(g, 0) == 1 and eval_germ(g, 1) == 0
    h = make_germ([1, "-1.5276", "0.1048"], dps=D)
    with precision(work_dps(D)):
        assert abs(eval_germ(h, "0.5") - mpfr("0.62465")) < mpfr("1e-60")
    with pytest.raises(DomainEscape):
        eval_germ(g, 2)


def test_make_germ_requires_normalization():
    with pytest.raises(ValueError):
        make_germ([2, -1])


def test_renormalize_keeps_normalization():
    g = germ_from_quadratic("-1.77", dps=D)
    h = renormalize(g, 3)
    assert h.coeffs[0] == 1 and h.N == g.N


def test_superstable_renormalization_is_degenerate():
    # f^2(0) = 0 at c = -1, so the rescaling a = f^2(0) vanishes
    with pytest.raises(DegenerateCenter):
        renormalize(germ_from_quadratic(-1, dps=D), 2)


def test_renormalize_near_superstable_straightens_near_zero():
    # the 2-cycle multiplier at c = -1.001 is -0.004; the matching fixed
    # point multiplier 1 - sqrt(1 - 4x) gives x = -0.002004
    g = renormalize(germ_from_quadratic("-1.001", dps=D), 2)
    with precision(D):
        assert abs(straighten(g) - mpfr("-0.002004")) < mpfr("1e-40")


def test_renormalize_period_three_matches_sigma():
    g = renormalize(germ_from_quadratic("-1.77", dps=D), 3)
    assert abs(straighten(g) - mpfr("-0.834038602227")) < 1e-11


def test_tail_blowup_is_reported():
    g = germ_from_quadratic("-1.77", dps=D)
    with pytest.raises(TailBlowup):
        renormalize(g, 3, tail_tol="1e-80")


def test_not_unimodal():
    g = make_germ([1, -1, 2], dps=D)
    with pytest.raises(NotUnimodal):
        straighten(g)


@settings(max_examples=20, deadline=None)
@given(st.floats(-2.0, 0.2).filter(lambda c: abs(c) > 1e-3))
def test_straighten_round_trip(c):
    with precision(D):
        cc = real(c)
        assert abs(straighten(germ_from_quadratic(cc, dps=D)) - cc) < mpfr("1e-8")


def test_fixed_germ_values(gstar):
    with precision(work_dps(D)):
        assert abs(gstar(mpfr(1)) - mpfr("-0.39953")) < mpfr("1e-5")
        assert abs(gstar.coeffs[1] - mpfr("-1.52763")) < mpfr("1e-5")
    assert fixed_point_residual(gstar, (2,)) < tol(D, 10)


def test_fixed_germ_is_two_periodic(gstar):
    assert fixed_point_residual(gstar, (2, 2)) < tol(D, 10)
    g = newton_fixed_point((2, 2), gstar)
    assert grid_distance(g, gstar) < tol(D, 10)


def test_fixed_germ_is_a_grid_fixed_point(gstar):
    assert grid_distance(renormalize(gstar, 2), gstar) < mpfr("1e-20")


def test_straighten_fixed_germ(gstar, c_feigenbaum):
    assert abs(straighten(gstar) - c_feigenbaum) < mpfr("1e-8")


def test_identity_word_jacobian(gstar):
    J = jacobian(gstar, ())
    with mpmath.workdps(work_dps(D)):
        assert mpmath.mnorm(J - mpmath.eye(gstar.N), 1) < mpmath.mpf("1e-60")
    S = spectrum(J, dps=D)
    assert S.expanding_count == 0 and len(S.flagged) == gstar.N


def test_top_eigenvalue_is_delta(gstar_jacobian):
    S = spectrum(gstar_jacobian, dps=D)
    assert S.expanding_count == 1
    assert abs(mpmath.re(S.top) - mpmath.mpf(DELTA)) < 1e-6
    assert S.gap < 1


def test_jacobian_step_robustness(gstar, gstar_jacobian):
    h = mpfr(10) ** (-(D // 3))
    J2 = jacobian(gstar, (2,), h=h / 10)
    with mpmath.workdps(work_dps(D)):
        diff = max(abs(gstar_jacobian[i, j] - J2[i, j])
                   for i in range(gstar.N) for j in range(gstar.N))
    assert diff < mpmath.mpf(10) ** (-(D // 3) + 2)


def test_germ_json_round_trip(gstar):
    h = Germ.from_json(gstar.to_json_full())
    assert h.N == gstar.N and h.dps == gstar.dps
    with precision(work_dps(D)):
        assert max(abs(a - b) for a, b in zip(h.coeffs, gstar.coeffs)) < \
            mpfr(10) ** (-work_dps(D) + 2)
