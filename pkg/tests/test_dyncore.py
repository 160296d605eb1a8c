import mpmath
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from renormlab.dyncore import (Kneading, aitken, continue_multiplier,
                               doubling_superstables, eval_orbit,
                               feigenbaum_estimates, find_attracting_cycle,
                               fixed_points, fmt, kneading, kneading_compare,
                               polish_superstable, precision, real,
                               solve_multiplier, straighten_orbit, superstable)
from renormlab.errors import IncomparablePrefix, MultipleRoots, NoRootInBracket

D = 50
# real root of c^3 + 2c^2 + c + 1 (P_c^3(0) = c(c^3 + 2c^2 + c + 1)), from mpmath
with mpmath.workdps(70):
    C3 = [r for r in mpmath.polyroots([1, 2, 1, 1], maxsteps=200, extraprec=200)
          if abs(mpmath.im(r)) < 1e-30][0].real
    C3 = mpmath.nstr(C3, 60)


def close(a, b, eps):
    with mpmath.workdps(70):
        return abs(mpmath.mpf(str(a)) - mpmath.mpf(str(b))) < mpmath.mpf(eps)


def test_orbit_of_minus_two():
    xs = eval_orbit(-2, 0, 3)
    assert [float(x) for x in xs] == [0.0, -2.0, 2.0, 2.0]


def test_orbit_keeps_precision():
    with precision(D):
        xs = eval_orbit("-1.4", "0.1", 5, D)
        assert all(x.precision >= 166 for x in xs)


def test_fixed_points_closed_form():
    fp = fixed_points(-2)
    assert fp.alpha == -1 and fp.beta == 2
    with precision(D):
        fp = fixed_points("-0.5")
        assert abs(fp.alpha - (1 - mpfr(3) ** 0.5) / 2) < mpfr("1e-48")


def test_attracting_fixed_point():
    cyc = find_attracting_cycle("-0.5")
    assert cyc.period == 1
    with precision(D):
        assert abs(cyc.multiplier - (1 - mpfr(3) ** 0.5)) < mpfr("1e-45")


def test_period_two_multiplier_is_exact():
    # the 2-cycle multiplier of x^2+c is 4(1+c)
    cyc = find_attracting_cycle("-1.1")
    assert cyc.period == 2
    with precision(D):
        assert abs(cyc.multiplier + mpfr("0.4")) < mpfr("1e-45")


def test_superstable_cycle_starts_at_zero():
    cyc = find_attracting_cycle(-1)
    assert cyc.period == 2 and cyc.points[0] == 0 and cyc.multiplier == 0


def test_no_attracting_cycle_at_minus_two():
    # the critical orbit lands on the repelling fixed point 2
    assert find_attracting_cycle(-2) is None


def test_escape_is_rejected():
    with pytest.raises(ValueError):
        find_attracting_cycle("0.3")


def test_kneading_words():
    assert kneading(-1).symbols == "LC"
    assert kneading(0).symbols == "C"
    assert kneading(-2, 8).symbols == "LRRRRRRR"


def test_kneading_compare_examples():
    assert kneading_compare(kneading(-2, 4), kneading(-1)) == 1
    assert kneading_compare(kneading("0.2", 8), kneading("-0.5", 8)) == -1


def test_kneading_order_reverses_parameter_order():
    assert kneading_compare(kneading("-1.9"), kneading("-1.5")) == 1
    assert kneading_compare(kneading("-1.5"), kneading("-1.9")) == -1
    assert kneading_compare(kneading("-1.1"), kneading("-1.1")) == 0


def test_terminated_prefix_is_incomparable():
    with pytest.raises(IncomparablePrefix):
        kneading_compare(Kneading("LR"), Kneading("LRC"))


def test_bad_word_rejected():
    with pytest.raises(ValueError):
        Kneading("LCLR")


@settings(max_examples=40, deadline=None)
@given(st.floats(-2.0, 0.25), st.floats(-2.0, 0.25))
def test_kneading_monotone(a, b):
    if a == b:
        return
    ka, kb = kneading(a, 64), kneading(b, 64)
    try:
        r = kneading_compare(ka, kb)
    except IncomparablePrefix:
        return
    if r != 0:
        assert (r > 0) == (a < b)


def test_superstable_period_three_matches_polynomial_root():
    with precision(D):
        r = superstable(3, (real("-1.8"), real("-1.7")), D)
    assert close(r, C3, "1e-48")


def test_superstable_errors():
    with precision(D):
        with pytest.raises(NoRootInBracket):
            superstable(3, (real("-1.5"), real("-1.4")), D)
        with pytest.raises(MultipleRoots):
            superstable(5, (real("-2"), real("0")), D)


def test_superstable_skips_lower_periods():
    # c=-1 is a root of P_c^4(0) but has period 2
    with precision(D):
        r = superstable(4, (real("-1.35"), real("-0.9")), D)
    assert close(r, "-1.3107026413368328836", "1e-18")


def test_tangency_by_multiplier_continuation():
    with precision(D):
        c, x = continue_multiplier(real(str(C3)), 3, 1, D)
        assert abs(c + mpfr("1.75")) < mpfr("1e-40")


def test_satellite_root_of_period_two():
    # 2-cycle multiplier 4(1+c) = -1 at c = -5/4
    with precision(D):
        r = solve_multiplier("-1.2", "0.2", 2, -1, D)
        assert r is not None and abs(r[0] + mpfr("1.25")) < mpfr("1e-40")


def test_polish_superstable_quadratic_convergence():
    with precision(D):
        r = polish_superstable(3, real("-1.754"), D)
    assert close(r, C3, "1e-48")


def test_doubling_superstables_and_ratios():
    with precision(D):
        cs = doubling_superstables(10, D)
        assert cs[0] == -1
        assert all(b < a for a, b in zip(cs, cs[1:]))
        d = feigenbaum_estimates(cs)
        acc = aitken(d)[-1]
    # delta = 4.669201609102990671853...; the raw level-10 ratio is 6.5e-6 off
    assert abs(d[-1] - mpfr("4.66920160910299")) > mpfr("1e-6")
    assert abs(acc - mpfr("4.66920160910299")) < mpfr("1e-6")


def _quad_orbit(c):
    c = real(c)

    def crit(K):
        x, out = mpfr(0), []
        for _ in range(K):
            x = x * x + c
            out.append(x)
        return out
    return crit


def _straightens_to_itself(c):
    with precision(D):
        cc = real(c)

        def f(x):
            return x * x + cc

        def df(x):
            return 2 * x
        r = straighten_orbit(_quad_orbit(c), 64, f, df, D)
        assert abs(r - cc) < mpfr("1e-9")


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.99, 0.24))
def test_straighten_quadratic_is_identity(c):
    _straightens_to_itself(c)


@pytest.mark.parametrize("c", ["-1.2499999", "-1.2500001", "-0.7500001"])
def test_straighten_next_to_neutral_cycles(c):
    # the critical orbit creeps towards a nearly neutral cycle
    _straightens_to_itself(c)


def test_fmt_is_decimal_string():
    with precision(D):
        s = fmt(real("-1.75"), 10)
    assert s == "-1.750000000e+0"
    assert fmt(0) == "0"
