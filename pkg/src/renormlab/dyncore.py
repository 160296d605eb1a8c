"""Real quadratic dynamics P_c(x) = x^2 + c at arbitrary precision.

Scalars are ``gmpy2.mpfr`` values (MPFR, correctly rounded).  Every public
function takes a ``dps`` argument (decimal digits, default 50) and works
inside a local gmpy2 context of matching binary precision, so nothing here
touches global state.
"""
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath
from gmpy2 import mpfr

from .errors import (DomainEscape, Inconclusive, IncomparablePrefix,
                     KneadingTooShort, MultipleRoots, NoRealFixedPoint,
                     NoRootInBracket, OverflowEscape)

DEFAULT_DPS = 50
ESCAPE_RADIUS = 10**6


def bits_for(dps):
    return int(math.ceil(dps * math.log2(10))) + 8


@contextmanager
def precision(dps):
    """Run a block with gmpy2 working precision of ``dps`` decimal digits."""
    with gmpy2.context(gmpy2.get_context(), precision=bits_for(dps)) as ctx:
        yield ctx


def real(x):
    """Convert int, str, float, Fraction, mpmath or gmpy2 numbers to mpfr
    at the current context precision."""
    if isinstance(x, type(mpfr(0))):
        return +x
    if isinstance(x, float):
        return mpfr(repr(x))
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / x.denominator
    if isinstance(x, mpmath.mpf):
        sgn, man, exp, _ = x._mpf_
        if not man:
            return mpfr(str(x)) if x != 0 else mpfr(0)
        v = gmpy2.mul_2exp(mpfr(int(man)), int(exp))
        return -v if sgn else v
    return mpfr(x)


def to_mpmath(x):
    """Exact conversion of an mpfr value to an mpmath mpf."""
    if not isinstance(x, type(mpfr(0))):
        x = real(x)
    if x == 0:
        return mpmath.mpf(0)
    man, exp = x.as_mantissa_exp()
    return mpmath.mpf((int(man), int(exp)))


def tol(dps, k):
    """The tolerance 10^(k - dps)."""
    return mpfr(10) ** (k - dps)


def fmt(x, dps=DEFAULT_DPS):
    """Decimal string with ``dps`` significant digits (the artifact format)."""
    if not isinstance(x, type(mpfr(0))):
        with precision(dps):
            x = real(x)
    if x == 0:
        return "0"
    if not gmpy2.is_finite(x):
        return str(x)
    man, exp, _ = x.digits(10, dps)
    neg = man.startswith("-")
    man = man.lstrip("-")
    return "%s%s.%se%+d" % ("-" if neg else "", man[0], man[1:], exp - 1)


def sign(x):
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# orbits, fixed points, cycles

@dataclass(frozen=True)
class FixedPoints:
    alpha: object
    beta: object


@dataclass(frozen=True)
class Cycle:
    period: int
    points: tuple
    multiplier: object


def eval_orbit(c, x0, n, dps=DEFAULT_DPS):
    """[x0, P_c(x0), ..., P_c^n(x0)]; OverflowEscape if |x| exceeds 10^6."""
    if n < 0:
        raise ValueError("n must be >= 0")
    with precision(dps):
        c = real(c)
        x = real(x0)
        orbit = [x]
        for _ in range(n):
            x = x * x + c
            if abs(x) > ESCAPE_RADIUS:
                raise OverflowEscape("orbit escaped", orbit)
            orbit.append(x)
        return orbit


def fixed_points(c, dps=DEFAULT_DPS):
    with precision(dps):
        c = real(c)
        disc = 1 - 4 * c
        if disc < 0:
            raise NoRealFixedPoint("c > 1/4 has no real fixed point")
        r = gmpy2.sqrt(disc)
        return FixedPoints((1 - r) / 2, (1 + r) / 2)


def _cycle_newton(f, df, x, q, eps, maxit=80):
    """Newton for f^q(x) = x. Returns (x, residual) or None."""
    try:
        return _cycle_newton_steps(f, df, x, q, eps, maxit)
    except (DomainEscape, OverflowEscape):
        # a step left the map's domain
        return None


def _cycle_newton_steps(f, df, x, q, eps, maxit):
    for _ in range(maxit):
        y, d = x, mpfr(1)
        for _ in range(q):
            d *= df(y)
            y = f(y)
        den = d - 1
        if den == 0 or not gmpy2.is_finite(y):
            return None
        step = (y - x) / den
        x = x - step
        if abs(x) > ESCAPE_RADIUS:
            return None
        if abs(step) <= eps * (1 + abs(x)):
            break
    y = x
    for _ in range(q):
        y = f(y)
    return x, abs(y - x)


def settle_cycle(f, df, x0, p_max, budget, dps, scale=1, landed=False,
                 close="1e-4"):
    """Follow the orbit of x0 under f until it settles on an attracting cycle
    of period <= p_max.  Returns (points, multiplier) or None when the budget
    runs out.  ``f`` and ``df`` act on mpfr values in the caller's context.

    With ``landed`` a repelling cycle the orbit sits on exactly (a
    preperiodic critical point) is returned as well.  ``close`` (relative to
    ``scale``) is how near two returns must be before Newton is tried.
    """
    eps = tol(dps, 2)
    res_ok = tol(dps, 4) * scale
    close = real(close) * scale
    hist = [x0]
    x = x0
    chunk = max(4 * p_max, 16)
    tried = set()
    n = 0
    while n < budget:
        for _ in range(chunk):
            x = f(x)
            if abs(x) > ESCAPE_RADIUS * scale:
                return None
            hist.append(x)
        n += chunk
        hist = hist[-(2 * p_max + 2):]
        for q in range(1, p_max + 1):
            if abs(hist[-1] - hist[-1 - q]) >= close:
                continue
            # a second close return filters chance recurrences
            if abs(hist[-1 - q] - hist[-1 - 2 * q]) >= close:
                continue
            key = (q, n)
            if key in tried:
                continue
            tried.add(key)
            r = _cycle_newton(f, df, hist[-1], q, eps)
            if r is None or r[1] > res_ok:
                continue
            y = r[0]
            pts = [y]
            for _ in range(q - 1):
                pts.append(f(pts[-1]))
            # minimal period: no proper divisor closes up
            minimal = True
            for d in range(1, q):
                if q % d == 0 and abs(pts[d] - pts[0]) < tol(dps, 10) * scale:
                    minimal = False
                    break
            if not minimal:
                continue
            lam = mpfr(1)
            for p in pts:
                lam *= df(p)
            if abs(lam) < 1:
                return pts, lam
            if landed and abs(hist[-1] - hist[-1 - q]) < tol(dps, 10) * scale:
                return pts, lam
            # a repelling cycle shadowed by the orbit; keep looking
    return None


def find_attracting_cycle(c, p_max=64, tol_=None, dps=DEFAULT_DPS, budget=None):
    """Attracting cycle of P_c found from the critical orbit.

    Returns a Cycle, or None when the critical orbit settles on something
    that is not attracting within tolerance.  Raises Inconclusive when the
    orbit does not settle within the budget (default 10 * p_max * dps).
    """
    if budget is None:
        budget = 10 * p_max * dps
    with precision(dps):
        c = real(c)
        t = tol(dps, 6) if tol_ is None else real(tol_)
        if c > mpfr(1) / 4 or c < -2:
            raise ValueError("c must lie in [-2, 1/4]")
        if c == 0:
            return Cycle(1, (mpfr(0),), mpfr(0))
        r = settle_cycle(lambda x: x * x + c, lambda x: 2 * x, mpfr(0),
                         p_max, budget, dps, landed=True)
        if r is None:
            raise Inconclusive("critical orbit did not settle within %d iterations"
                               % budget)
        pts, lam = r
        if abs(lam) >= 1 - t:
            return None
        # start the cycle at the point closest to the critical point
        k = min(range(len(pts)), key=lambda i: abs(pts[i]))
        pts = pts[k:] + pts[:k]
        return Cycle(len(pts), tuple(pts), lam)


# ---------------------------------------------------------------------------
# kneading theory

_VAL = {"L": -1, "C": 0, "R": 1}


@dataclass(frozen=True)
class Kneading:
    """Itinerary of the critical value; ``C`` only as the final symbol."""
    symbols: str

    def __post_init__(self):
        s = self.symbols
        if any(ch not in "LCR" for ch in s) or "C" in s[:-1]:
            raise ValueError("bad kneading word %r" % s)

    @property
    def key(self):
        """Parity-signed word; larger lexicographically means larger
        kneading (smaller parameter)."""
        out = []
        eps = 1
        for ch in self.symbols:
            out.append(-eps * _VAL[ch])
            if ch == "L":
                eps = -eps
        return tuple(out)

    @property
    def terminated(self):
        return self.symbols.endswith("C")

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return " ".join(self.symbols)


def symbols_of(values, t, flip=False):
    """L/R/C word of a sequence of points; stops at the first C."""
    out = []
    for x in values:
        if abs(x) <= t:
            out.append("C")
            break
        out.append("L" if (x < 0) != flip else "R")
    return "".join(out)


def kneading(c, K=64, dps=DEFAULT_DPS):
    with precision(dps):
        c = real(c)
        t = tol(dps, 6)
        x = c
        out = []
        for _ in range(K):
            if abs(x) <= t:
                out.append("C")
                break
            out.append("L" if x < 0 else "R")
            x = x * x + c
        return Kneading("".join(out))


def kneading_compare(a, b):
    """1 if a > b, -1 if a < b, 0 if equal, in the unimodal order."""
    ka, kb = a.key, b.key
    for u, v in zip(ka, kb):
        if u != v:
            return 1 if u > v else -1
    if len(ka) == len(kb):
        return 0
    if a.terminated or b.terminated:
        raise IncomparablePrefix("one word is a terminated prefix of the other")
    return 0


# ---------------------------------------------------------------------------
# superstable parameters

def _crit_and_dc(c, p):
    """P_c^p(0) and its c-derivative."""
    x, d = mpfr(0), mpfr(0)
    for _ in range(p):
        d = 2 * x * d + 1
        x = x * x + c
    return x, d


def _divisors(p):
    return [d for d in range(1, p) if p % d == 0]


def polish_superstable(p, c0, dps=DEFAULT_DPS, maxit=100):
    """Newton on c -> P_c^p(0) from a good guess."""
    with precision(dps):
        c = real(c0)
        eps = tol(dps, 2)
        for _ in range(maxit):
            x, d = _crit_and_dc(c, p)
            if d == 0:
                break
            step = x / d
            c -= step
            if abs(step) <= eps:
                break
        return c


def superstable(p, bracket, dps=DEFAULT_DPS, grid=None):
    """Unique primitive root of c -> P_c^p(0) inside ``bracket``."""
    with precision(dps):
        a, b = real(bracket[0]), real(bracket[1])
        n = grid or max(64, 8 * p)
        cs = [a + (b - a) * i / n for i in range(n + 1)]
        vals = [_crit_and_dc(c, p)[0] for c in cs]
        t = tol(dps, 6)

        def primitive(c):
            return all(abs(_crit_and_dc(c, d)[0]) > t for d in _divisors(p))

        brackets = []
        for i in range(n):
            if vals[i] == 0:
                brackets.append((cs[i], cs[i]))
            elif vals[i] * vals[i + 1] < 0:
                brackets.append((cs[i], cs[i + 1]))
        if vals[n] == 0:
            brackets.append((cs[n], cs[n]))
        roots = []
        for lo, hi in brackets:
            flo = _crit_and_dc(lo, p)[0]
            for _ in range(60):
                if hi - lo <= tol(dps, 20) * (1 + abs(lo)):
                    break
                mid = (lo + hi) / 2
                fm = _crit_and_dc(mid, p)[0]
                if fm == 0:
                    lo = hi = mid
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            r = polish_superstable(p, (lo + hi) / 2, dps)
            if primitive(r) and all(abs(r - s) > t for s in roots):
                roots.append(r)
        if not roots:
            raise NoRootInBracket("no primitive period-%d root in bracket" % p)
        if len(roots) > 1:
            raise MultipleRoots("%d primitive period-%d roots in bracket"
                                % (len(roots), p))
        return roots[0]


# ---------------------------------------------------------------------------
# cycles with prescribed multiplier (parameter continuation)

def _cycle_jet(c, x, q):
    """Forward jets of P_c^q at x: value, d/dx, d/dc, d2/dx2, d2/dxdc."""
    D, E, S, M = mpfr(1), mpfr(0), mpfr(0), mpfr(0)
    for _ in range(q):
        S = 2 * D * D + 2 * x * S
        M = 2 * D * E + 2 * x * M
        D, E = 2 * x * D, 2 * x * E + 1
        x = x * x + c
    return x, D, E, S, M


def solve_multiplier(c0, x0, q, mu, dps=DEFAULT_DPS, maxit=60):
    """Solve P_c^q(x) = x, (P_c^q)'(x) = mu for (c, x) by 2D Newton.

    Returns (c, x) or None if Newton fails to converge.  Long cycles are
    ill-conditioned, so the iteration carries 20 guard digits.
    """
    with precision(dps + 20):
        c, x, mu = real(c0), real(x0), real(mu)
        eps = tol(dps, 4)
        for _ in range(maxit):
            y, D, E, S, M = _cycle_jet(c, x, q)
            f1, f2 = y - x, D - mu
            a11, a12, a21, a22 = D - 1, E, S, M
            det = a11 * a22 - a12 * a21
            if det == 0 or not gmpy2.is_finite(det):
                return None
            dx = (f1 * a22 - f2 * a12) / det
            dc = (a11 * f2 - a21 * f1) / det
            x -= dx
            c -= dc
            if abs(c) > 3 or abs(x) > 3:
                return None
            if abs(dx) + abs(dc) <= eps:
                y, D, _, _, _ = _cycle_jet(c, x, q)
                if abs(y - x) < tol(dps, 8) and abs(D - mu) < tol(dps, 8):
                    with precision(dps):
                        return +c, +x
        return None


def continue_multiplier(c_star, q, mu, dps=DEFAULT_DPS, steps=None):
    """Follow the q-cycle through 0 at the superstable parameter c_star until
    its multiplier equals mu.  Returns (c, x)."""
    if steps is None:
        steps = [mpfr(k) / 8 for k in range(1, 9)]
    with precision(dps):
        c, x = real(c_star), mpfr(0)
        mu = real(mu)
        # the cycle point at 0 is a degenerate seed for d/dx; shift to x=P(0)
        x = c
        for s in steps:
            r = solve_multiplier(c, x, q, mu * s, dps)
            if r is None:
                # finer substeps
                ok = False
                for sub in range(1, 5):
                    r = solve_multiplier(c, x, q, mu * s * sub / 4, dps)
                    if r is None:
                        break
                    c, x = r
                    ok = sub == 4
                if not ok:
                    raise Inconclusive("multiplier continuation failed at %s"
                                       % fmt(mu * s, 10))
            else:
                c, x = r
        return c, x


def doubling_superstables(n, dps=DEFAULT_DPS):
    """Superstable parameters of periods 2, 4, ..., 2^n on the real
    period-doubling route.  Each is Newton-polished from the geometric
    extrapolation of the previous two."""
    with precision(dps):
        cs = [mpfr(-1), superstable(4, (mpfr("-1.4"), mpfr("-1.25")), dps)]
        while len(cs) < n:
            k = len(cs) + 1
            d = (cs[-2] - cs[-1]) if len(cs) < 3 else \
                (cs[-3] - cs[-2]) / (cs[-2] - cs[-1])
            guess = cs[-1] - (cs[-2] - cs[-1]) / (d if len(cs) >= 3 else mpfr("4.67"))
            cs.append(polish_superstable(2 ** k, guess, dps))
        return cs[:n]


def feigenbaum_estimates(cs):
    """Ratios (c_{n-1} - c_{n-2}) / (c_n - c_{n-1}) of successive gaps."""
    return [(cs[i - 1] - cs[i - 2]) / (cs[i] - cs[i - 1]) for i in range(2, len(cs))]


def aitken(seq):
    """One Aitken delta-squared pass."""
    out = []
    for a, b, c in zip(seq, seq[1:], seq[2:]):
        den = c - 2 * b + a
        out.append(c if den == 0 else c - (c - b) ** 2 / den)
    return out


# ---------------------------------------------------------------------------
# straightening by kneading bisection

def _compare_to_quadratic(word, cp, t):
    """Compare a target word with the kneading of P_cp, symbol by symbol.
    1 if the target is larger (its parameter is smaller than cp), -1 if
    smaller, 0 if the words agree on the target's length."""
    x = cp
    eps = 1
    for ch in word:
        if abs(x) <= t:
            sym = "C"
        else:
            sym = "L" if x < 0 else "R"
        if sym != ch:
            return 1 if -eps * _VAL[ch] > -eps * _VAL[sym] else -1
        if sym == "C":
            return 0
        if sym == "L":
            eps = -eps
        x = x * x + cp
    return 0


def straighten_orbit(crit_values, K=64, f=None, df=None, dps=DEFAULT_DPS,
                     scale=1, K_max=8192, xtol=None, accept=None,
                     cycle_budget=20000):
    """Quadratic parameter c' in [-2, 1/4] with the same kneading as a
    unimodal map with a minimum at 0.

    ``crit_values(K)`` returns the first K points f(0), f^2(0), ... of the
    map's critical orbit.  Bisection on c' uses kneading monotonicity.  When
    the bisection stalls on an equal word, a map with an attracting cycle is
    matched by its multiplier (``f``, ``df`` needed); otherwise K is doubled
    up to ``K_max``.
    """
    with precision(dps):
        t_map = tol(dps, 6) * scale
        t_quad = tol(dps, 6)
        xtol = tol(dps, dps // 2) if xtol is None else real(xtol)
        accept = mpfr("1e-6") if accept is None else real(accept)
        pts = crit_values(K)
        word = symbols_of(pts, t_map)
        lo, hi = mpfr(-2), mpfr(1) / 4
        cycle_tried = False
        while hi - lo > xtol:
            mid = (lo + hi) / 2
            r = _compare_to_quadratic(word, mid, t_quad)
            if r > 0:
                hi = mid
            elif r < 0:
                lo = mid
            elif word.endswith("C"):
                cs = polish_superstable(len(word), mid, dps)
                return cs if lo <= cs <= hi else mid
            else:
                if f is not None and not cycle_tried:
                    cycle_tried = True
                    def long_word(n):
                        return word if n <= len(word) else \
                            symbols_of(crit_values(n), t_map)
                    cp = _match_cycle(f, df, long_word, pts[-1], lo, hi, dps,
                                      scale, cycle_budget)
                    if cp is not None:
                        return cp
                if K < K_max:
                    K *= 2
                    pts = crit_values(K)
                    word = symbols_of(pts, t_map)
                    continue
                if hi - lo < accept:
                    return mid
                raise KneadingTooShort("kneading words agree on [%s, %s] at K=%d"
                                       % (fmt(lo, 12), fmt(hi, 12), K))
        return (lo + hi) / 2


def _bisect_word(word, lo, hi, dps, xtol):
    """Parameter in [lo, hi] with kneading ``word`` (a C-terminated word)."""
    t_quad = tol(dps, 6)
    while hi - lo > xtol:
        mid = (lo + hi) / 2
        r = _compare_to_quadratic(word, mid, t_quad)
        if r > 0:
            hi = mid
        elif r < 0:
            lo = mid
        else:
            return mid
    return (lo + hi) / 2



def star_word(a, b):
    """Kneading word of the center of the copy of b's window tuned into a's.
    Each non-terminal symbol of b is preceded by a's prefix and flipped
    when that prefix has an odd number of L's (orientation reversing)."""
    head = a[:-1]
    flip = head.count("L") % 2 == 1
    out = []
    for ch in b[:-1]:
        out.append(head)
        out.append({"L": "R", "R": "L"}[ch] if flip else ch)
    return "".join(out) + head + "C"


def center_of_word(word, lo, hi, dps=DEFAULT_DPS):
    """Superstable parameter in [lo, hi] with the C-terminated kneading word:
    bisection on the kneading order, then Newton at the full period."""
    with precision(dps):
        lo, hi = real(lo), real(hi)
        c0 = _bisect_word(word, lo, hi, dps, (hi - lo) * mpfr("1e-20"))
        return polish_superstable(len(word), c0, dps)

MATCH_PERIOD_MAX = 1024


def _match_cycle(f, df, long_word, x0, lo, hi, dps, scale, budget):
    """c' whose attracting cycle has the target's period and multiplier.

    The component is located through its center, whose kneading is the
    target word cut at the period and terminated by C; ``long_word(n)``
    returns the target word with at least n symbols."""
    # long periods occur deep inside the satellite cascades of small copies
    r = settle_cycle(f, df, x0, MATCH_PERIOD_MAX, budget, dps, scale)
    if r is None:
        # next to a parabolic parameter the orbit creeps in like n^(-1/2)
        # and never gets close; Newton still converges from a loose start,
        # and an attracting cycle found this way is the one attracting the
        # critical orbit (negative Schwarzian: there is at most one)
        r = settle_cycle(f, df, x0, 64, 2048, dps, scale, close="1e-1")
    if r is None:
        return None
    pts, lam = r
    q = len(pts)
    word = long_word(q)
    if q > len(word):
        return None
    center_word = word[:q - 1] + "C"
    cs = _bisect_word(center_word, lo, hi, dps, tol(dps, 20))
    cs = polish_superstable(q, cs, dps)
    if abs(_crit_and_dc(cs, q)[0]) > tol(dps, 6):
        return None
    try:
        cp, _ = continue_multiplier(cs, q, lam, dps)
    except Inconclusive:
        return None
    slack = tol(dps, 10)
    if not (lo - slack <= cp <= hi + slack):
        return None
    return cp
