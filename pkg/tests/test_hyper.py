import mpmath
from gmpy2 import mpfr

from renormlab.dyncore import precision, tol
from renormlab.germ import (Germ, fixed_point_residual, jacobian, renormalize,
                            spectrum, straighten, work_dps)
from renormlab.hyper import (PushedGerm, convergence_rate, feigenbaum_delta,
                             feigenbaum_parameter, mean_transversal_multiplier,
                             pair_distances, periodic_germ, periodic_parameter,
                             sweep_summary, tower_centers, unstable_direction,
                             unstable_sweep)
from renormlab.hyper import _fit

D = 50
# accumulation point of the doubling superstables (independent long run:
# superstables through level 14, geometric extrapolation and Aitken)
C_F = "-1.401155189092050600526770"
DELTA = "4.66920160910299067185320382047"


def test_feigenbaum_oracles():
    with precision(D):
        assert abs(feigenbaum_parameter(dps=D) - mpfr(C_F)) < mpfr("1e-22")
        assert abs(feigenbaum_delta(10, D) - mpfr(DELTA)) < mpfr("1e-6")


def test_tower_reaches_feigenbaum_point():
    cs = tower_centers((2,), 64, D)
    with precision(D):
        assert cs[0] == -1 and abs(cs[1] - mpfr("-1.3107026413368328836")) < mpfr("1e-18")
        assert abs(periodic_parameter((2,), D, 400) - mpfr(C_F)) < mpfr("1e-8")


def test_contraction_towards_fixed_germ(c_feigenbaum):
    r = convergence_rate(c_feigenbaum, (2,), 12, 40, D)
    ds = r.distances
    assert all(d > 0 for d in ds)
    assert all(b < a for a, b in zip(ds[2:], ds[3:]))
    # the two-step zig-zag from the stable eigenvalues 0.16 and -0.12 leaves
    # R^2 below 0.99 on n in [2, 8]; over [2, 12] the fit settles
    assert r.fit_quality > mpfr("0.99") and r.fitted_rho < 1


def test_pair_trick_matches_single_orbit(c_feigenbaum):
    r = convergence_rate(c_feigenbaum, (2,), 8, 40, D)
    rho_pair, _ = _fit(pair_distances(c_feigenbaum, (2,), 8, 40, D))
    assert abs(rho_pair / r.fitted_rho - 1) < mpfr("0.1")


def test_fixed_germ_has_no_distance(gstar):
    r = convergence_rate(None, (2,), 4, 40, D, init=gstar)
    assert all(d < tol(D, 8) for d in r.distances)
    assert r.fitted_rho is None and r.fit_quality is None


def test_doubling_multiplier_is_delta():
    lam = mean_transversal_multiplier((2,), 40, D)
    with precision(D):
        assert abs(lam - mpfr(DELTA)) < mpfr("1e-6")
        assert abs(mean_transversal_multiplier((2, 2), 40, D) - lam) < mpfr("1e-6")


def test_period_three_germ_is_hyperbolic():
    g = periodic_germ((3,), 40, D)
    assert fixed_point_residual(g, (3,)) < tol(D, 10)
    S = spectrum(jacobian(g, (3,)), dps=D)
    assert S.expanding_count == 1
    # delta for the period-tripling fixed point is 55.247...
    assert abs(mpmath.re(S.top) - mpmath.mpf("55.2470265887")) < 1e-6


def test_word_shift_consistency():
    a = mean_transversal_multiplier((2, 3), 40, D)
    b = mean_transversal_multiplier((3, 2), 40, D)
    assert a > 1
    with precision(D):
        assert abs(a - b) / a < mpfr("1e-6")


def test_unstable_direction_certified():
    g, lam, e = unstable_direction((2,), 40, D)
    J = jacobian(g, (2,))
    with mpmath.workdps(work_dps(D)):
        v = mpmath.matrix([mpmath.mpf(str(x)) for x in e])
        r = mpmath.norm(J * v - mpmath.mpf(str(lam)) * v) / mpmath.norm(v)
        assert r < mpmath.mpf(10) ** (-(D // 2))
    assert e[1] > 0


def test_short_sweep_is_monotone(c_feigenbaum):
    leaf = unstable_sweep((2,), samples=4, pushes=1, dps=D)
    s = sweep_summary(leaf)
    assert s["monotone"] and s["escaped"] == 0
    at0 = [r for r in leaf if r.t == 0][0]
    assert abs(at0.straightened - c_feigenbaum) < mpfr("1e-6")
    ts = [r.t for r in leaf]
    assert ts == sorted(ts)


def test_pushed_germ_matches_truncated_renormalization():
    g, lam, e = unstable_direction((2,), 40, D)
    s = "3e-4"
    with precision(work_dps(D)):
        h = Germ(tuple(a + mpfr(s) * b for a, b in zip(g.coeffs, e)), g.rho, D)
        P = PushedGerm(h, 4)
        R = renormalize(renormalize(h, 2), 2)
        for x in ("0", "0.3", "-0.7", "1"):
            assert abs(P(mpfr(x)) - R(mpfr(x))) < mpfr("1e-20")
            assert abs(P.deriv(mpfr(x)) - R.deriv(mpfr(x))) < mpfr("1e-18")
        assert P.fold == R.fold == -1
        assert abs(straighten(P) - straighten(R)) < mpfr("1e-20")
