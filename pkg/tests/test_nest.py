import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from renormlab.dyncore import eval_orbit, precision, real, superstable, tol
from renormlab.errors import AlphaNotRepelling, NotRenormalizable
from renormlab.nest import (build_principal_nest, cascades, detect_renorm,
                            essential_period, height, verify_renormalization)

D = 50


def golden_gap(x):
    with precision(D):
        return abs(x - (mpfr(5) ** 0.5 - 1) / 2)


@pytest.fixture(scope="module")
def c3():
    with precision(D):
        return superstable(3, (real("-1.8"), real("-1.7")), D)


def test_nest_at_minus_one():
    n = build_principal_nest(-1, dps=D)
    assert n.terminal.kind == "superstable" and n.terminal.period == 2
    assert golden_gap(n.levels[0].interval[1]) < 1e-45
    assert height(n) == 0 and cascades(n) == []


def test_nest_at_period_three_center(c3):
    n = build_principal_nest(c3, dps=D)
    assert n.terminal.kind == "superstable" and n.terminal.period == 3
    assert height(n) == 0


def test_nest_inside_period_three_window():
    n = build_principal_nest("-1.77", dps=D)
    t = n.terminal
    assert t.kind == "renormalizable" and t.period == 3
    with precision(D):
        a, b = t.interval
        assert a < 0 < b
        for x in (a, b, mpfr(0)):
            y = eval_orbit("-1.77", x, 3, D)[-1]
            assert a <= y <= b


def test_alpha_not_repelling():
    with pytest.raises(AlphaNotRepelling):
        build_principal_nest("-0.5", dps=D)


def test_detect_renorm_examples(c3):
    p, L = detect_renorm(-1, D)
    assert p == 2 and golden_gap(L[1]) < 1e-45
    assert detect_renorm("-0.5", D) is None
    assert detect_renorm(c3, D)[0] == 3
    assert detect_renorm("-1.3", D)[0] == 2


def test_non_renormalizable_sample_has_height():
    # just left of the doubling window's left end (a Misiurewicz point)
    c = "-1.544689013"
    n = build_principal_nest(c, dps=D)
    assert detect_renorm(c, D) is None
    assert height(n) >= 1
    assert n.terminal.kind == "nonrenormalizable"


def test_verify_renormalization_margin():
    t = build_principal_nest("-1.77", dps=D).terminal
    m = verify_renormalization("-1.77", 3, t.interval, D)
    assert m >= 10 * tol(D, 6)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2.0, -0.76))
def test_nest_invariants(c):
    with precision(D):
        n = build_principal_nest(real(c), dps=D)
        for lo, hi in (lv.interval for lv in n.levels):
            assert lo < 0 < hi
        hw = n.half_widths()
        assert all(b < a for a, b in zip(hw, hw[1:]))
        ts = [lv.return_time for lv in n.levels[1:]]
        assert all(b >= a for a, b in zip(ts, ts[1:]))
        assert height(n) <= len(n.levels)
        for k in cascades(n):
            assert k.kind == "Short" or k.length >= 3


@pytest.mark.parametrize("eps", ["1e-3", "1e-5"])
def test_cascades_beside_period_three_window(eps, windows3):
    J3 = [w for w in windows3 if w.period == 3][0]
    with precision(D):
        left = build_principal_nest(J3.c_minus - real(eps), dps=D)
        right = build_principal_nest(J3.c_plus + real(eps), dps=D)
    kl = [k.kind for k in cascades(left)]
    kr = [k.kind for k in cascades(right)]
    # past -2 on the left end, past the cusp on the right
    assert kl == ["UlamNeumann"]
    assert kr == ["SaddleNode"]
    assert cascades(right)[0].length > cascades(left)[0].length


def test_short_run_is_never_classified(c3):
    n = build_principal_nest("-1.77", dps=D)
    ks = cascades(n)
    assert ks and all(k.kind == "Short" for k in ks)
    assert [k.kind for k in cascades(n, cascade_min=2)] != ["Short"]


def test_essential_period_trivial_cases(c3):
    assert essential_period(-1, D) == 2
    assert essential_period(c3, D) == 3
    with pytest.raises(NotRenormalizable):
        essential_period("-1.6", D)


# superstable parameters just right of the -1.75 cusp: a saddle-node cascade
# of length N sits in the principal nest, and only 5 points of the
# period-(3N+2) orbit survive the elimination
CUSP_FAMILY = [
    (17, "-1.74333783293", 5),
    (20, "-1.74531962445", 6),
    (23, "-1.74652334330", 7),
]


@pytest.mark.parametrize("p,c0,length", CUSP_FAMILY)
def test_essential_period_near_cusp(p, c0, length):
    with precision(D):
        from renormlab.dyncore import polish_superstable
        c = polish_superstable(p, real(c0), D)
    assert detect_renorm(c, D)[0] == p
    ks = cascades(build_principal_nest(c, dps=D))
    assert (0, length, "SaddleNode") in [(k.start_level, k.length, k.kind) for k in ks]
    assert essential_period(c, D) == 5
