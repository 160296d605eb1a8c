"""Hyperbolicity diagnostics for renormalization: contraction towards the
fixed germ, transversal multipliers at periodic germs, and the straightened
unstable leaf of the doubling fixed point."""
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from gmpy2 import mpfr

from .dyncore import (DEFAULT_DPS, aitken, center_of_word,
                      doubling_superstables, feigenbaum_estimates, fmt,
                      precision, real, star_word, tol, to_mpmath)
from .errors import (DomainEscape, EigenvectorUncertified, RenormError,
                     StraighteningFailed)
from .germ import (DEFAULT_N, Germ, apply_word, eval_grid, germ_from_quadratic,
                   grid_distance, jacobian, newton_fixed_point,
                   spectrum, straighten, word_periods, work_dps)
from .paramgeo import enumerate_windows


def feigenbaum_parameter(levels=14, dps=DEFAULT_DPS):
    """c_F from the doubling superstables, extrapolated geometrically."""
    with precision(dps):
        cs = doubling_superstables(levels, dps)
        d = feigenbaum_estimates(cs)
        est = [c + (c - b) / (x - 1) for b, c, x in zip(cs[1:], cs[2:], d)]
        return aitken(est)[-1]


def feigenbaum_delta(levels=10, dps=DEFAULT_DPS):
    """Superstable-ratio estimate of delta through the given level, with one
    Aitken pass over the ratio sequence."""
    with precision(dps):
        return aitken(feigenbaum_estimates(doubling_superstables(levels, dps)))[-1]


# ---------------------------------------------------------------------------
# periodic germs

@lru_cache(maxsize=None)
def _level1(p, dps):
    ws = [w for w in enumerate_windows(P=p, dps=dps) if w.period == p]
    if len(ws) != 1:
        raise ValueError("period %d does not name a unique level-1 window" % p)
    return ws[0]


def tower_centers(word, max_period=400, dps=DEFAULT_DPS):
    """Superstable centers of the nested windows labelled by the word
    repeated, deepest last.  Each center is located by its tuned kneading
    word inside the first letter's window."""
    word = word_periods(word)
    with precision(dps):
        wins = [_level1(p, dps) for p in word]
        out = []
        k = 1
        while True:
            letters = [wins[i % len(wins)] for i in range(k)]
            P = 1
            for J in letters:
                P *= J.period
            if P > max_period and len(out) >= 3:
                return out
            w = letters[-1].label
            for J in reversed(letters[:-1]):
                w = star_word(J.label, w)
            out.append(center_of_word(w, letters[0].c_minus, letters[0].c_plus, dps))
            k += 1


def periodic_parameter(word, dps=DEFAULT_DPS, max_period=400):
    """Quadratic parameter whose renormalizations follow ``word`` forever:
    the limit of the tower centers, taken every full word and accelerated
    by one Aitken pass."""
    word = word_periods(word)
    L = len(word)
    cs = tower_centers(word, max_period, dps)
    with precision(dps):
        # centers after whole words converge geometrically
        full = cs[L - 1::L]
        if len(full) < 3:
            full = cs
        return aitken(full)[-1]


@lru_cache(maxsize=32)
def periodic_germ(word, N=DEFAULT_N, dps=DEFAULT_DPS, warm=2):
    """Newton-certified germ with R_word g = g."""
    word = word_periods(word)
    if word == (2,) * len(word):
        c = feigenbaum_parameter(dps=dps)
    else:
        c = periodic_parameter(word, dps)
    g = germ_from_quadratic(c, N=N, dps=dps)
    for _ in range(warm):
        g = apply_word(g, word, check=False)
    return newton_fixed_point(word, g)


def mean_transversal_multiplier(word, N=DEFAULT_N, dps=DEFAULT_DPS):
    """|top eigenvalue of D R_word at its periodic germ| ^ (1/len(word))."""
    word = word_periods(word)
    g = periodic_germ(word, N, dps)
    S = spectrum(jacobian(g, word), dps=dps)
    with mpmath.workdps(work_dps(dps)), precision(work_dps(dps)):
        return real(abs(S.top) ** (mpmath.mpf(1) / len(word)))


# ---------------------------------------------------------------------------
# contraction

@dataclass(frozen=True)
class ConvergenceReport:
    distances: tuple
    fitted_rho: object          # None when the fit is skipped
    fit_quality: object

    def rows(self, dps=DEFAULT_DPS):
        return [[str(n), fmt(d, dps)] for n, d in enumerate(self.distances)]

    def to_json(self, dps=DEFAULT_DPS):
        return {"distances": [fmt(d, dps) for d in self.distances],
                "fitted_rho": None if self.fitted_rho is None else fmt(self.fitted_rho, 12),
                "fit_quality": None if self.fit_quality is None else fmt(self.fit_quality, 12)}


def _fit(ds, start=2):
    n = np.arange(start, len(ds))
    y = np.array([float(mpmath.log10(to_mpmath(d))) for d in ds[start:]])
    if len(n) < 3:
        return None, None
    slope, icpt = np.polyfit(n, y, 1)
    resid = y - (slope * n + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 0.0
    return real(float(10.0 ** slope)), real(float(r2))


def convergence_rate(c, word=(2,), n_max=8, N=DEFAULT_N, dps=DEFAULT_DPS,
                     init=None):
    """Grid distances ||R^n f - g*|| for f = F_c (or ``init``), n=0..n_max,
    with a log-linear fit over n >= 2."""
    word = word_periods(word)
    gs = periodic_germ(word, N, dps)
    f = init if init is not None else germ_from_quadratic(c, N=N, dps=dps)
    grid = eval_grid(dps)
    ds = []
    with precision(work_dps(dps)):
        for n in range(n_max + 1):
            ds.append(grid_distance(f, gs, grid))
            if n < n_max:
                try:
                    f = apply_word(f, word, check=False)
                except DomainEscape as e:
                    raise DomainEscape("renormalization %d failed: %s" % (n + 1, e))
    floor = tol(dps, 8)
    if all(d < floor for d in ds):
        return ConvergenceReport(tuple(ds), None, None)
    rho, r2 = _fit(ds)
    return ConvergenceReport(tuple(ds), rho, r2)


def pair_distances(c, word=(2,), n_max=8, N=DEFAULT_N, dps=DEFAULT_DPS):
    """||R^n f - R^n g|| for f = F_c and g = R f (same stable set)."""
    word = word_periods(word)
    f = germ_from_quadratic(c, N=N, dps=dps)
    grid = eval_grid(dps)
    out = []
    with precision(work_dps(dps)):
        g = apply_word(f, word, check=False)
        for n in range(n_max + 1):
            out.append(grid_distance(f, g, grid))
            f, g = g, apply_word(g, word, check=False)
    return out


# ---------------------------------------------------------------------------
# unstable leaf

@dataclass(frozen=True)
class LeafSample:
    t: object
    germ: object
    straightened: object        # None for an escaped sample
    pushes: int = 0

    @property
    def escaped(self):
        return self.straightened is None

    def to_json(self, dps=DEFAULT_DPS):
        return {"t": fmt(self.t, dps), "pushes": self.pushes,
                "straightened": "Escaped" if self.escaped else fmt(self.straightened, dps)}


def unstable_direction(word=(2,), N=DEFAULT_N, dps=DEFAULT_DPS):
    """(g*, lambda, e_u): top eigenpair of D R_word at the periodic germ,
    certified by ||J e - lambda e|| < 10^(-dps/2) ||e||, refined by inverse
    iteration if needed."""
    word = word_periods(word)
    g = periodic_germ(word, N, dps)
    J = jacobian(g, word)
    S = spectrum(J, vectors=True, dps=dps)
    with mpmath.workdps(work_dps(dps)):
        lam = mpmath.re(S.top)
        e = mpmath.matrix([mpmath.re(v) for v in S.top_vector])
        bound = mpmath.mpf(10) ** (-(dps // 2))

        def resid(e):
            return mpmath.norm(J * e - lam * e) / mpmath.norm(e)
        for _ in range(5):
            if resid(e) < bound:
                break
            A = J - (lam * (1 + mpmath.mpf(10) ** (-(dps // 3)))) * mpmath.eye(J.rows)
            e = mpmath.lu_solve(A, e)
            e = e / mpmath.norm(e)
            lam = (e.T * (J * e))[0] / (e.T * e)[0]
        if resid(e) >= bound:
            raise EigenvectorUncertified("eigenvector residual %s"
                                         % mpmath.nstr(resid(e), 5))
        e = e / mpmath.norm(e)
        # orient so that the leaf parameter grows with the straightening
        if e[1] < 0:
            e = -e
        with precision(work_dps(dps)):
            return g, real(lam), [real(e[i]) for i in range(J.rows)]


def _doubling_margin(h):
    """Margin of the doubling restrictive interval [-a, a] of a normalized
    even germ, a the repelling fixed point where h decreases; -inf if none."""
    x = mpfr("0.5")
    for _ in range(200):
        dx = (h(x) - x) / (h.deriv(x) - 1)
        x -= dx
        if abs(dx) < tol(h.dps, 5):
            break
    if not 0 < x < 1 or h.deriv(x) >= -1:
        return mpfr("-inf")
    return x - abs(h(h(0)))


class PushedGerm:
    """R^k h realized without re-expansion: x -> h^m(A x) / A with m the
    product of the word periods over k pushes and A = h^m(0)."""

    def __init__(self, h, m):
        self.h, self.m, self.dps = h, m, h.dps
        with precision(work_dps(h.dps)):
            self.A = self._iterate(mpfr(0))

    def _iterate(self, x):
        for _ in range(self.m):
            x = self.h(x)
        return x

    def __call__(self, x):
        return self._iterate(self.A * x) / self.A

    def deriv(self, x):
        y = self.A * x
        d = mpfr(1)
        for _ in range(self.m):
            d *= self.h.deriv(y)
            y = self.h(y)
        return d

    @property
    def fold(self):
        # sign of the second derivative at the critical point
        x = mpfr(10) ** (-(self.dps // 6))
        return 1 if self(x) > self(mpfr(0)) else -1


def _leaf_point(g, e, s, word, k, dps):
    """R^k (g + s e) as a PushedGerm, or None when an intermediate germ is
    not renormalizable with the given word."""
    with precision(work_dps(dps)):
        h = Germ(tuple(a + s * b for a, b in zip(g.coeffs, e)), g.rho, dps)
        m = 1
        try:
            for _ in range(k):
                for p in word:
                    if p == 2 and _doubling_margin(PushedGerm(h, m) if m > 1 else h) < 0:
                        return None
                    m *= p
            return PushedGerm(h, m)
        except (DomainEscape, ZeroDivisionError):
            return None


def unstable_sweep(word=(2,), T="1e-4", samples=8, pushes=7, N=DEFAULT_N,
                   dps=DEFAULT_DPS, K_max=8192):
    """Samples of the unstable leaf through the periodic germ of ``word``.

    The local leaf g* + s e_u, |s| <= T, is pushed forward by R: the sample
    at global parameter t = lambda^k s is R^k(g* + s e_u), with s taken in
    the fundamental domain T/lambda <= |s| <= T for k >= 1.  R^k is applied
    by composition (see PushedGerm), so no truncation error builds up along
    the pushes.  Each sample is straightened; failures are tagged escaped."""
    word = word_periods(word)
    g, lam, e = unstable_direction(word, N, dps)
    with precision(work_dps(dps)):
        T = real(T)
        out = []
        # symmetric, with the fixed germ itself at t = 0
        local = [T * (2 * mpfr(i) / samples - 1) for i in range(samples + 1)]
        fund = [T / lam + (T - T / lam) * mpfr(i) / (samples // 2)
                for i in range(1, samples // 2 + 1)]
        for k in range(pushes + 1):
            ss = local if k == 0 else fund + [-s for s in fund]
            for s in ss:
                h = _leaf_point(g, e, s, word, k, dps)
                chi = None
                if h is not None:
                    try:
                        chi = straighten(h, K_max=K_max)
                    except (StraighteningFailed, RenormError):
                        chi = None
                out.append(LeafSample(s * lam ** k, h, chi, k))
        out.sort(key=lambda r: r.t)
        return out


def sweep_summary(leaf):
    vals = [r.straightened for r in leaf if not r.escaped]
    inc = all(b > a for a, b in zip(vals, vals[1:]))
    dec = all(b < a for a, b in zip(vals, vals[1:]))
    return {"samples": len(leaf), "escaped": sum(r.escaped for r in leaf),
            "monotone": inc or dec,
            "lo": min(vals) if vals else None, "hi": max(vals) if vals else None}
