"""Renormalization windows in [-2, 1/4], the map sigma and statistics built
on it (branch expansion, triple distortion of sigma^n, window measure, gaps).

sigma(c) straightens the return map P_c^p on the restrictive interval.  The
return map is used exactly (critical orbit sampled at multiples of p); no
interpolation is involved.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from gmpy2 import mpfr
import gmpy2

from .dyncore import (DEFAULT_DPS, _crit_and_dc, center_of_word, continue_multiplier,
                      fixed_points, fmt, kneading, polish_superstable, precision,
                      real, sign, solve_multiplier, star_word, straighten_orbit,
                      tol)
from .errors import (BisectionStalled, GridTooCoarse, Inconclusive,
                     NotRenormalizable, StraighteningFailed, RenormError)
from .nest import detect_renorm, renorm_margin, sign_prod

QUARTER = "0.25"


@dataclass(frozen=True)
class Window:
    period: int
    c_minus: object
    c_plus: object
    c_star: object
    label: str
    level: int = 1
    word: tuple = ()          # labels of the level-1 windows, outermost first
    parts: tuple = field(default=(), repr=False, compare=False)
    satellite: bool = False
    dps: int = DEFAULT_DPS

    @property
    def length(self):
        with precision(self.dps):
            return self.c_plus - self.c_minus

    @property
    def first(self):
        """The level-1 window this one starts with."""
        return self.parts[0] if self.parts else self

    def contains(self, c, slack=0):
        with precision(self.dps):
            return self.c_minus - slack <= real(c) <= self.c_plus + slack

    def row(self):
        d = self.dps
        return [str(self.level), str(self.period), self.label,
                fmt(self.c_minus, d), fmt(self.c_plus, d), fmt(self.c_star, d),
                fmt(self.length, d)]

    def to_json(self):
        keys = ["level", "period", "label", "c_minus", "c_plus", "c_star", "length"]
        d = dict(zip(keys, self.row()))
        d["level"], d["period"] = self.level, self.period
        d["word"] = list(self.word)
        return d


CSV_HEADER = ["level", "period", "label", "c_minus", "c_plus", "c_star", "length"]


def _signs(c, p):
    x = mpfr(0)
    out = []
    for _ in range(p - 1):
        x = x * x + c
        out.append(sign(x) or 1)
    return out


# ---------------------------------------------------------------------------
# sigma

def sigma_return(c, p, signs=None, dps=DEFAULT_DPS, K=64, xtol=None):
    """Straightening of the period-p return map of P_c at 0."""
    with precision(dps):
        c = real(c)
        if signs is None:
            signs = _signs(c, p)
        if p == 2:
            # the restrictive interval is [alpha, -alpha]; the pullback
            # iteration for its end point stalls as alpha turns neutral
            q = -fixed_points(c, dps).alpha
            margin = q - abs(c * c + c)
        else:
            margin, q = renorm_margin(c, p, signs, dps=dps)
        if q is None or margin < -tol(dps, 6):
            raise NotRenormalizable("no invariant period-%d interval at c" % p)
        s = sign_prod(signs)

        def G(x):
            for _ in range(p):
                x = x * x + c
            return x

        def dG(x):
            d = mpfr(1)
            for _ in range(p):
                d *= 2 * x
                x = x * x + c
            return d

        def f(x):
            return s * G(s * x)

        def df(x):
            return dG(s * x)

        def crit(K):
            out = []
            x = mpfr(0)
            for _ in range(K):
                x = G(x)
                out.append(s * x)
            return out

        try:
            return straighten_orbit(crit, K, f, df, dps=dps, scale=q, xtol=xtol)
        except RenormError as e:
            raise StraighteningFailed(str(e))


def sigma(c, window=None, dps=DEFAULT_DPS, K=64):
    """sigma(c) in [-2, 1/4).  With ``window`` the period (of its first
    level-1 part) is taken from it; otherwise it is detected."""
    with precision(dps):
        c = real(c)
        if window is not None:
            J = window.first
            if not J.contains(c, tol(dps, 10)):
                raise NotRenormalizable("c outside the window")
            return sigma_return(c, J.period, dps=dps, K=K)
        r = detect_renorm(c, dps)
        if r is None:
            raise NotRenormalizable("c is not renormalizable")
        return sigma_return(c, r[0], dps=dps, K=K)


def sigma_n(c, window, n, dps=DEFAULT_DPS):
    """n-fold composition along the level-1 parts of ``window``."""
    with precision(dps):
        x = real(c)
        for k in range(n):
            x = sigma_return(x, window.parts[k].period, dps=dps)
        return x


def _illinois(f, a, fa, b, fb, xtol, maxit=200):
    """Root of a monotone f on [a, b] with fa, fb of opposite signs."""
    side = 0
    for _ in range(maxit):
        if abs(b - a) <= xtol:
            break
        c = (a * fb - b * fa) / (fb - fa)
        # guard against slow one-sided convergence
        if not (min(a, b) < c < max(a, b)) or side in (3, -3):
            c = (a + b) / 2
            side = 0
        fc = f(c)
        if fc == 0:
            return c
        if (fc > 0) == (fb > 0):
            b, fb = c, fc
            fa = fa / 2 if side < 0 else fa
            side = side - 1 if side <= 0 else -1
        else:
            a, fa = c, fc
            fb = fb / 2 if side > 0 else fb
            side = side + 1 if side >= 0 else 1
    return (a + b) / 2


def cardioid_multiplier(x):
    """Multiplier of the attracting fixed point of P_x, x in [-3/4, 1/4]."""
    return 1 - gmpy2.sqrt(1 - 4 * x)


def sigma_inverse(window, x, dps=DEFAULT_DPS, xtol=None):
    """c in a level-1 window with sigma(c) = x.

    Inside [-3/4, 1/4] the straightened map has an attracting fixed point,
    so the preimage is where the window's period-p cycle has the same
    multiplier (continuation from the center).  Elsewhere it is found by
    safeguarded regula falsi on the monotone sigma."""
    with precision(dps):
        x = real(x)
        J = window
        if x <= -2:
            return J.c_minus
        if x >= mpfr(1) / 4:
            return J.c_plus
        if x >= mpfr(-3) / 4:
            return continue_multiplier(J.c_star, J.period, cardioid_multiplier(x), dps)[0]
        xtol = tol(dps, dps // 2 + 5) if xtol is None else xtol
        p = J.period

        def f(c):
            return sigma_return(c, p, dps=dps) - x
        a, b = J.c_minus, J.c_plus
        fa, fb = mpfr(-2) - x, mpfr(1) / 4 - x
        # tighten the right end with the known cardioid part
        b2 = continue_multiplier(J.c_star, p, -1, dps)[0]
        if b2 > a:
            b, fb = b2, mpfr(-3) / 4 - x
        return _illinois(f, a, fa, b, fb, xtol)


def level_inverse(window, x, dps=DEFAULT_DPS):
    """c in a window of any level with sigma^level(c) = x, for x in the
    main cardioid [-3/4, 1/4)."""
    with precision(dps):
        x = real(x)
        if x < mpfr(-3) / 4 or x >= mpfr(1) / 4:
            raise ValueError("x must lie in [-3/4, 1/4)")
        return continue_multiplier(window.c_star, window.period,
                                   cardioid_multiplier(x), dps)[0]


# ---------------------------------------------------------------------------
# windows

def root_endpoint(c_star, period, satellite, dps=DEFAULT_DPS):
    """Endpoint where the window's cycle is born: the period-P cycle has
    multiplier 1 (primitive) or the period P/2 cycle has multiplier -1
    (satellite)."""
    with precision(dps):
        if satellite:
            if period == 2:
                return mpfr(-3) / 4
            c, q = real(c_star), period // 2
            # the half-period cycle sits between 0 and P^q(0) at the center
            x = _crit_and_dc(c, q)[0] / 2
            for _ in range(100):
                y, d = x, mpfr(1)
                for _ in range(q):
                    d *= 2 * y
                    y = y * y + c
                dx = (y - x) / (d - 1)
                x -= dx
                if abs(dx) <= tol(dps, 4):
                    break
            mu0 = d
            for k in range(1, 9):
                r = solve_multiplier(c, x, q, mu0 + (-1 - mu0) * mpfr(k) / 8, dps)
                if r is None:
                    raise Inconclusive("satellite root continuation failed")
                c, x = r
            return c
        return continue_multiplier(c_star, period, 1, dps)[0]


def minus_endpoint(c_star, period, c_plus, dps=DEFAULT_DPS, xtol=None):
    """Left endpoint: where the critical value of the period-P return map
    reaches the boundary of the restrictive interval (margin crosses 0)."""
    with precision(dps):
        c_star = real(c_star)
        signs = _signs(c_star, period)
        xtol = tol(dps, 10) if xtol is None else xtol
        state = {"q": renorm_margin(c_star, period, signs, dps=dps)[1]}

        def m(c):
            mg, q = renorm_margin(c, period, signs, q_seed=state["q"], dps=dps)
            return mg, q

        h = abs(real(c_plus) - c_star) * mpfr("0.01")
        inside, f_in = c_star, m(c_star)[0]
        for _ in range(400):
            c = c_star - h
            mg, q = m(c)
            if mg < 0:
                outside, f_out = c, mg
                break
            inside, f_in = c, mg
            state["q"] = q
            h *= mpfr("1.5")
        else:
            raise BisectionStalled("no escape found left of the center")
        # bisect where the margin is -inf, regula falsi where it is finite
        for _ in range(400):
            if inside - outside <= xtol:
                # the window is closed: keep the renormalizable side
                return inside
            if gmpy2.is_finite(f_out):
                c = (outside * f_in - inside * f_out) / (f_in - f_out)
                if not (outside < c < inside):
                    c = (inside + outside) / 2
                # keep brackets shrinking on both sides
                w = inside - outside
                c = min(max(c, outside + w / 64), inside - w / 64)
            else:
                c = (inside + outside) / 2
            mg, q = m(c)
            if mg >= 0:
                inside, f_in = c, mg
                state["q"] = q
            else:
                outside, f_out = c, mg
        raise BisectionStalled("c_minus not resolved to %s" % fmt(xtol, 3))


def window_endpoints(c_star, p, dps=DEFAULT_DPS, satellite=None, level=1,
                     word=None, parts=()):
    with precision(dps):
        c_star = real(c_star)
        if satellite is None:
            satellite = level == 1 and p == 2
        c_plus = root_endpoint(c_star, p, satellite, dps)
        c_minus = minus_endpoint(c_star, p, c_plus, dps)
        label = kneading(c_star, p, dps).symbols
        w = Window(p, c_minus, c_plus, c_star, label, level,
                   word or (label,), parts, satellite, dps)
        if not parts:
            w = Window(p, c_minus, c_plus, c_star, label, level,
                       word or (label,), (w,), satellite, dps)
            object.__setattr__(w, "parts", (w,))
        return w


def _roots(p, a, b, dps, n0=None, budget=2 ** 20):
    """Primitive roots of c -> P_c^p(0) in [a, b] by grid scan with
    refinement until the sign-change count is stable."""
    n = n0 or min(2 ** (2 * p + 2), 2 ** 16)
    prev = None
    while True:
        cs = [a + (b - a) * i / n for i in range(n + 1)]
        vals = [_crit_and_dc(c, p)[0] for c in cs]
        br = []
        for i in range(n):
            if vals[i] == 0:
                br.append((cs[i], cs[i]))
            elif vals[i] * vals[i + 1] < 0:
                br.append((cs[i], cs[i + 1]))
        if vals[n] == 0:
            br.append((cs[n], cs[n]))
        if prev is not None and len(br) == prev:
            break
        prev = len(br)
        n *= 2
        if n > budget:
            raise GridTooCoarse("sign changes of period %d not resolved" % p)
    out = []
    t = tol(dps, 6)
    for lo, hi in br:
        flo = _crit_and_dc(lo, p)[0]
        for _ in range(200):
            if hi - lo <= tol(dps, 25):
                break
            mid = (lo + hi) / 2
            fm = _crit_and_dc(mid, p)[0]
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        r = polish_superstable(p, (lo + hi) / 2, dps)
        if any(abs(_crit_and_dc(r, d)[0]) <= t for d in range(1, p) if p % d == 0):
            continue
        out.append(r)
    return out


def enumerate_windows(interval=(-2, QUARTER), P=4, dps=DEFAULT_DPS):
    """Maximal windows of period 2..P whose centers lie in the interval."""
    with precision(dps):
        a, b = real(interval[0]), real(interval[1])
        if not a < b:
            return []
        wins = []
        for p in range(2, P + 1):
            for r in _roots(p, a, b, dps):
                if any(w.contains(r) for w in wins):
                    continue
                wins.append(window_endpoints(r, p, dps))
        return sorted(wins, key=lambda w: w.c_star)


@lru_cache(maxsize=64)
def _level(n, P, dps):
    if n == 1:
        return tuple(enumerate_windows((-2, QUARTER), P, dps))
    base = _level(1, P, dps)
    prev = _level(n - 1, P, dps)
    out = []
    with precision(dps):
        for J in base:
            for W in prev:
                out.append(nested_window(J, W, dps))
    return tuple(sorted(out, key=lambda w: w.c_star))


def nested_window(J, W, dps=DEFAULT_DPS):
    """The copy of W inside the level-1 window J.  The center has the tuned
    kneading word of the two labels; the endpoints follow from the same cycle
    and margin conditions used at level 1."""
    with precision(dps):
        P = J.period * W.period
        c_star = center_of_word(star_word(J.label, W.label), J.c_minus, J.c_plus, dps)
        if not J.contains(c_star):
            raise Inconclusive("nested center fell outside its parent window")
        # sigma straightens poorly next to parabolic and escape parameters,
        # so both endpoints use the full-period conditions of level 1
        c_plus = root_endpoint(c_star, P, W.satellite, dps)
        c_minus = minus_endpoint(c_star, P, c_plus, dps)
        label = kneading(c_star, P, dps).symbols
        return Window(P, c_minus, c_plus, c_star, label, W.level + 1,
                      (J.label,) + W.word, (J,) + W.parts, W.satellite, dps)


def enumerate_level(n, P, dps=DEFAULT_DPS):
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(_level(n, P, dps))


# ---------------------------------------------------------------------------
# statistics

def expansion_factor(J, points=50, dps=DEFAULT_DPS):
    """(min |sigma'| over an interior grid, coarse ratio (9/4)/|J|)."""
    with precision(dps):
        L = J.length
        h = L * mpfr("1e-6")
        best = None
        for i in range(1, points + 1):
            c = J.c_minus + L * i / (points + 1)
            d = abs(sigma_n(c + h, J, 1, dps) - sigma_n(c - h, J, 1, dps)) / (2 * h)
            best = d if best is None else min(best, d)
        return best, (mpfr(9) / 4) / L


@dataclass(frozen=True)
class DistortionReport:
    label: str
    n: int
    epsilon: object
    value: object
    triples: int

    def to_json(self, dps=DEFAULT_DPS):
        return {"label": self.label, "n": self.n, "epsilon": fmt(self.epsilon, dps),
                "value": fmt(self.value, dps), "triples": self.triples}


def truncated(J, n, eps, dps=DEFAULT_DPS):
    """J(eps) = (sigma^n)^{-1}[-2, 1/4 - eps] for a level-n window J."""
    with precision(dps):
        if J.level != n:
            raise ValueError("window level must equal n")
        x = mpfr(1) / 4 - real(eps)
        if x <= -2:
            return None
        if x < mpfr(-3) / 4:
            raise ValueError("epsilon must be at most 1")
        return J.c_minus, level_inverse(J, x, dps)


def triple_distortion(J, n, a, t, dps=DEFAULT_DPS):
    with precision(dps):
        a, t = real(a), real(t)
        s0 = sigma_n(a - t, J, n, dps)
        s1 = sigma_n(a, J, n, dps)
        s2 = sigma_n(a + t, J, n, dps)
        r = abs(s2 - s1) / abs(s1 - s0)
        return max(r, 1 / r)


def qs_distortion(J, n, eps="0.05", triples=100, seed=0, dps=DEFAULT_DPS):
    """Max over random symmetric triples in J(eps) of the ratio of sigma^n
    increments (or its reciprocal).  Triples are drawn in coordinates
    normalized to J(eps), so the same seed gives comparable samples on
    windows of different levels."""
    with precision(dps):
        lo, hi = truncated(J, n, eps, dps)
        rng = np.random.default_rng(seed)
        u = rng.uniform(0.02, 0.98, triples)
        tau = rng.uniform(0.05, 0.95, triples)
        L = hi - lo
        worst = mpfr(1)
        for ui, ti in zip(u, tau):
            a = lo + L * real(float(ui))
            t = min(a - lo, hi - a) * real(float(ti))
            worst = max(worst, triple_distortion(J, n, a, t, dps))
        return DistortionReport(J.label, n, real(eps), worst, triples)


@dataclass(frozen=True)
class MeasureReport:
    level: int
    cutoff: int
    windows: int
    total_length: object
    ratio: object

    def to_json(self, dps=DEFAULT_DPS):
        return {"level": self.level, "cutoff": self.cutoff, "windows": self.windows,
                "total_length": fmt(self.total_length, dps),
                "ratio": None if self.ratio is None else fmt(self.ratio, dps)}


def level_measure(n, P, dps=DEFAULT_DPS):
    with precision(dps):
        ws = enumerate_level(n, P, dps)
        m = sum((w.length for w in ws), mpfr(0))
        ratio = None
        if n > 1:
            prev = sum((w.length for w in enumerate_level(n - 1, P, dps)), mpfr(0))
            ratio = m / prev
        return MeasureReport(n, P, len(ws), m, ratio)


def doubling_chain(n, dps=DEFAULT_DPS):
    """Nested doubling windows of levels 1..n."""
    return [enumerate_level(k, 2, dps)[0] for k in range(1, n + 1)]


def gap_ratio(J, eps="0.05", dps=DEFAULT_DPS):
    """Share of J mapped by sigma into (-3/4, 1/4 - eps)."""
    with precision(dps):
        x = mpfr(1) / 4 - real(eps)
        if x <= mpfr(-3) / 4:
            return mpfr(0)
        a = continue_multiplier(J.c_star, J.period, -1, dps)[0]
        b = level_inverse(J, x, dps)
        return (b - a) / J.length
