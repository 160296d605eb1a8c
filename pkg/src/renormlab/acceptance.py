"""The twelve acceptance checks as functions returning measured values and a
pass flag.  Used by ``renormlab report`` and by the acceptance tests."""
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
import mpmath
import numpy as np
from gmpy2 import mpfr

from .dyncore import DEFAULT_DPS, fmt, precision, real, tol
from .germ import (DEFAULT_N, fixed_point_residual, germ_from_quadratic,
                   jacobian, spectrum, straighten)
from .hyper import (convergence_rate, feigenbaum_delta, feigenbaum_parameter,
                    mean_transversal_multiplier, periodic_germ, sweep_summary,
                    unstable_sweep)
from .nest import (build_principal_nest, cascades, detect_renorm,
                   essential_period, verify_renormalization)
from .paramgeo import (doubling_chain, enumerate_level, enumerate_windows,
                       expansion_factor, level_measure, qs_distortion, sigma,
                       sigma_inverse)

D = DEFAULT_DPS
WORDS = [(2,), (3,), (4,), (2, 3)]
SEED = 20240601


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    values: dict = field(default_factory=dict)

    def line(self):
        return "criterion %2d %-28s %s" % (self.number, self.name,
                                            "PASS" if self.passed else "FAIL")

    def to_json(self):
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "values": self.values}


def _s(x, k=12):
    if x is None:
        return None
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(mpmath.re(x), k)
    return fmt(x, k)


@lru_cache(maxsize=None)
def _spec(word, N=DEFAULT_N):
    g = periodic_germ(word, N, D)
    return g, spectrum(jacobian(g, word), dps=D)


@lru_cache(maxsize=None)
def _windows(P):
    return enumerate_windows(P=P, dps=D)


def c1_feigenbaum():
    _, S = _spec((2,))
    oracle = feigenbaum_delta(10, D)
    with precision(D):
        top = real(mpmath.re(S.top))
        diff = abs(top - oracle)
    return Result(1, "feigenbaum cross-check", bool(diff < mpfr("1e-6")),
                  {"top": _s(top, 15), "oracle": _s(oracle, 15), "diff": _s(diff, 4)})


def c2_hyperbolicity():
    vals, ok = {}, True
    for w in WORDS:
        g, S = _spec(w)
        res = fixed_point_residual(g, w)
        lam = mean_transversal_multiplier(w, DEFAULT_N, D)
        _, S2 = _spec(w, DEFAULT_N + 10)
        rel = abs(mpmath.re(S2.top) - mpmath.re(S.top)) / abs(S.top)
        good = (res < tol(D, 10) and S.expanding_count == 1 and lam > 1
                and rel < mpmath.mpf("1e-6"))
        ok = ok and good
        vals["-".join(map(str, w))] = {"residual": _s(res, 4),
                                       "expanding_count": S.expanding_count,
                                       "multiplier": _s(lam), "top_change": _s(rel, 4)}
    return Result(2, "hyperbolicity structure", ok, vals)


def c3_contraction():
    r = convergence_rate(feigenbaum_parameter(dps=D), (2,), 8, DEFAULT_N, D)
    ds = r.distances
    dec = all(ds[n + 1] < ds[n] for n in range(2, len(ds) - 1))
    ok = dec and r.fit_quality is not None and r.fit_quality > mpfr("0.99") \
        and r.fitted_rho < 1
    return Result(3, "exponential contraction", bool(ok),
                  {"distances": [_s(d, 4) for d in ds], "decreasing": dec,
                   "fitted_rho": _s(r.fitted_rho, 6), "R2": _s(r.fit_quality, 6)})


def c4_window_geometry():
    with precision(D):
        ws = _windows(3)
        J2 = [w for w in ws if w.period == 2][0]
        J3 = [w for w in ws if w.period == 3][0]
        e2 = abs(J2.c_plus + mpfr("0.75"))
        e3 = abs(J3.c_plus + mpfr("1.75"))
        s0 = abs(sigma(-1, dps=D))
        cs = [J2.c_minus + J2.length * i / 101 for i in range(1, 101)]
        sv = [sigma(c, J2, D) for c in cs]
        mono = all(b > a for a, b in zip(sv, sv[1:]))
        sm = abs(sigma(J2.c_minus, J2, D) + 2)
    ok = e2 < mpfr("1e-12") and e3 < mpfr("1e-9") and s0 < mpfr("1e-9") and mono \
        and sm < mpfr("1e-6")
    return Result(4, "window geometry", bool(ok),
                  {"c_plus_2_err": _s(e2, 3), "c_plus_3_err": _s(e3, 3),
                   "sigma(-1)": _s(s0, 3), "monotone": mono,
                   "sigma(c_minus)+2": _s(sm, 3)})


def c5_round_trip(n=50):
    rng = np.random.default_rng(SEED)
    worst = mpfr(0)
    with precision(D):
        for u in rng.uniform(-2.0, 0.2, n):
            c = real(float(u))
            err = abs(straighten(germ_from_quadratic(c, dps=D)) - c)
            worst = max(worst, err)
    return Result(5, "round-trip straightening", bool(worst < mpfr("1e-8")),
                  {"samples": n, "worst": _s(worst, 4)})


def c6_cylinders():
    L1 = enumerate_level(1, 3, D)
    L2 = enumerate_level(2, 3, D)
    by_label = {w.label: w for w in L1}
    inside = all(by_label[w.word[0]].contains(w.c_minus)
                 and by_label[w.word[0]].contains(w.c_plus) for w in L2)
    s = sorted(L2, key=lambda w: w.c_minus)
    disjoint = all(a.c_plus < b.c_minus for a, b in zip(s, s[1:]))
    ok = len(L1) == 2 and len(L2) == 4 and inside and disjoint
    return Result(6, "shift-cylinder structure", bool(ok),
                  {"level1": len(L1), "level2": len(L2), "nested": inside,
                   "disjoint": disjoint})


def c7_measure():
    ms = [level_measure(n, 6, D) for n in (1, 2, 3)]
    dec = ms[0].total_length > ms[1].total_length > ms[2].total_length
    ch = doubling_chain(4, D)
    ratio = ch[3].length / ch[2].length
    inv = 1 / feigenbaum_delta(10, D)
    rel = abs(ratio - inv) / inv
    ok = dec and rel < mpfr("0.05")
    return Result(7, "measure decay", bool(ok),
                  {"m": [_s(m.total_length, 8) for m in ms],
                   "windows": [m.windows for m in ms],
                   "chain_ratio": _s(ratio, 8), "inverse_delta": _s(inv, 8),
                   "rel_err": _s(rel, 3)})


def c8_expansion():
    ws = sorted(_windows(6), key=lambda w: -w.length)
    with precision(D):
        coarse = [(mpfr(9) / 4) / w.length for w in ws]
    inc = all(b > a for a, b in zip(coarse, coarse[1:]))
    mins = {w.label: expansion_factor(w, dps=D)[0] for w in ws}
    ok = inc and all(v > 1 for v in mins.values())
    return Result(8, "branch expansion", bool(ok),
                  {"coarse_increasing": inc,
                   "min_derivative": {k: _s(v, 6) for k, v in mins.items()}})


def c9_quasisymmetry():
    ch = doubling_chain(3, D)
    vals = [qs_distortion(ch[n - 1], n, "0.05", 100, SEED, D).value for n in (1, 2, 3)]
    K1 = vals[0]
    ok = all(v >= 1 and gmpy2.is_finite(mpfr(v)) for v in vals) and \
        all(K1 / 2 <= v <= 2 * K1 for v in vals)
    return Result(9, "quasi-symmetry", bool(ok), {"K": [_s(v, 6) for v in vals]})


CASCADE_FREE = ["-1.1", "-1.3107", "-1.77", "-1.9408", "-1.48"]


def c10_essential_period():
    with precision(D):
        J3 = [w for w in _windows(3) if w.period == 3][0]
        plain = [-1, J3.c_star] + [real(c) for c in CASCADE_FREE]
        vals, ok1 = [], True
        for c in plain:
            p = detect_renorm(c, D)[0]
            n = build_principal_nest(c, dps=D)
            short = all(k.kind == "Short" or k.terminal for k in cascades(n))
            pe = essential_period(c, D)
            ok1 = ok1 and short and pe == p
            vals.append({"c": _s(c), "p": p, "p_e": pe, "cascade_free": short})
        near, ok2 = [], True
        for x in ("0.2499", "0.24", "0.2"):
            c = sigma_inverse(J3, x, D)
            p = detect_renorm(c, D)[0]
            n = build_principal_nest(c, dps=D)
            longest = max([k.length for k in cascades(n)] + [0])
            pe = essential_period(c, D)
            ok2 = ok2 and pe < p
            near.append({"x": x, "c": _s(c, 15), "p": p, "p_e": pe, "longest": longest})
        by_len = sorted(near, key=lambda r: r["longest"])
        mono = all(b["p_e"] <= a["p_e"] for a, b in zip(by_len, by_len[1:]))
    return Result(10, "essential period", bool(ok1 and ok2 and mono),
                  {"cascade_free": vals, "near_cusp": near, "monotone": mono})


def c11_nest_invariants(n=200):
    rng = np.random.default_rng(SEED)
    bad = []
    with precision(D):
        for u in rng.uniform(-2.0, -0.76, n):
            c = real(float(u))
            nest = build_principal_nest(c, dps=D)
            hw = nest.half_widths()
            if not all(b < a for a, b in zip(hw, hw[1:])):
                bad.append((_s(c), "nesting"))
            ts = [lv.return_time for lv in nest.levels[1:]]
            if not all(b >= a for a, b in zip(ts, ts[1:])):
                bad.append((_s(c), "return times"))
            t = nest.terminal
            if t.kind == "renormalizable":
                m = verify_renormalization(c, t.period, t.interval, D)
                if not m >= 10 * tol(D, 6):
                    bad.append((_s(c), "inclusion"))
        for w in _windows(4):
            ps = set()
            for i in range(1, 21):
                r = detect_renorm(w.c_minus + w.length * i / 21, D)
                ps.add(None if r is None else r[0])
            if ps != {w.period}:
                bad.append((w.label, "window period %s" % sorted(ps, key=str)))
    return Result(11, "nest invariants", not bad, {"samples": n, "failures": bad})


def c12_sweep():
    leaf = unstable_sweep((2,), dps=D)
    s = sweep_summary(leaf)
    cF = feigenbaum_parameter(dps=D)
    at0 = [r for r in leaf if r.t == 0][0]
    e0 = abs(at0.straightened - cF)
    cover = s["lo"] is not None and s["lo"] <= mpfr("-1.9") and s["hi"] >= 0
    ok = s["monotone"] and cover and e0 < mpfr("1e-6")
    return Result(12, "unstable sweep", bool(ok),
                  {"monotone": s["monotone"], "lo": _s(s["lo"], 8), "hi": _s(s["hi"], 8),
                   "escaped": s["escaped"], "samples": s["samples"], "chi0_err": _s(e0, 3)})


CHECKS = [c1_feigenbaum, c2_hyperbolicity, c3_contraction, c4_window_geometry,
          c5_round_trip, c6_cylinders, c7_measure, c8_expansion,
          c9_quasisymmetry, c10_essential_period, c11_nest_invariants, c12_sweep]


def run_all(only=None, verbose=False):
    out = []
    for i, fn in enumerate(CHECKS, 1):
        if only and i not in only:
            continue
        r = fn()
        if verbose:
            print(r.line(), flush=True)
        out.append(r)
    return out
