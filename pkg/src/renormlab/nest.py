"""Real principal nest of P_c around the critical point.

V^0 = (alpha, -alpha).  V^{n+1} is the component containing 0 of the
pullback of V^n by P_c^t, t the first return time of 0 to V^n.  All levels
are symmetric intervals (-u_n, u_n), so a level is stored by its half
width.  Pullbacks are computed backwards along the recorded branch signs of
the critical orbit: one monotone square root per step, the last one folding.
"""
from dataclasses import dataclass, field
from typing import Optional

import gmpy2
from gmpy2 import mpfr

from .dyncore import DEFAULT_DPS, fixed_points, fmt, precision, real, sign, tol
from .errors import AlphaNotRepelling, Inconclusive, ReturnBudgetExceeded

CASCADE_MIN = 3
RETURN_BUDGET = 20000


@dataclass(frozen=True)
class NestLevel:
    index: int
    interval: tuple
    return_time: int
    central: Optional[bool]
    # largest solution of g(q) = s*q on the central branch, if any
    q: object = None
    margin: object = None


@dataclass(frozen=True)
class Terminal:
    kind: str   # renormalizable | nonrenormalizable | escaped | superstable
    period: Optional[int] = None
    interval: Optional[tuple] = None
    reason: str = ""


@dataclass
class Nest:
    c: object
    levels: list
    terminal: Terminal
    orbit: list = field(repr=False, default_factory=list)
    dps: int = DEFAULT_DPS

    def half_widths(self):
        return [lv.interval[1] for lv in self.levels]

    def level_of(self, x):
        """Deepest level index whose interval contains x, or -1."""
        k = -1
        for lv in self.levels:
            if abs(x) < lv.interval[1]:
                k = lv.index
            else:
                break
        return k

    def to_json(self):
        d = self.dps
        t = self.terminal
        term = {"kind": t.kind}
        if t.period is not None:
            term["period"] = t.period
        if t.interval is not None:
            term["interval"] = [fmt(t.interval[0], d), fmt(t.interval[1], d)]
        if t.reason:
            term["reason"] = t.reason
        return {
            "c": fmt(self.c, d),
            "levels": [{"index": lv.index,
                        "interval": [fmt(lv.interval[0], d), fmt(lv.interval[1], d)],
                        "return_time": lv.return_time,
                        "central": lv.central} for lv in self.levels],
            "height": height(self),
            "terminal": term,
        }


@dataclass(frozen=True)
class Cascade:
    start_level: int
    length: int
    kind: str   # SaddleNode | UlamNeumann | Short
    landing_depths: tuple = ()
    terminal: bool = False
    return_time: int = 0


class _Orbit:
    """Lazily extended critical orbit 0, c, c^2+c, ..."""

    def __init__(self, c):
        self.c = c
        self.pts = [mpfr(0)]

    def __getitem__(self, k):
        pts, c = self.pts, self.c
        while len(pts) <= k:
            x = pts[-1]
            pts.append(x * x + c)
        return pts[k]


# ---------------------------------------------------------------------------
# pullbacks and restrictive intervals

def _pullback(c, signs, e):
    """x >= 0 with P^t(x) = e, following branch signs of orbit points 1..t-1.
    None if e is outside the range of that branch."""
    y = e
    for s in reversed(signs):
        d = y - c
        if d < 0:
            return None
        y = gmpy2.sqrt(d) if s > 0 else -gmpy2.sqrt(d)
    d = y - c
    if d < 0:
        return None
    return gmpy2.sqrt(d)


def _return_jet(c, x, t):
    d = mpfr(1)
    for _ in range(t):
        d *= 2 * x
        x = x * x + c
    return x, d


def restrictive_point(c, signs, u0, dps, maxit=400):
    """Largest q in (0, u0] with g(q) = s*q, g = P_c^t on the central branch,
    s the branch orientation.  Returns (q, |g'(q)|) or None."""
    t = len(signs) + 1
    s = 1
    for v in signs:
        s *= v
    eps = tol(dps, 4)
    q = u0
    for _ in range(maxit):
        nq = _pullback(c, signs, s * q)
        if nq is None:
            return None
        if abs(nq - q) < eps * (1 + q):
            q = nq
            break
        q = nq
    # Newton polish on g(x) - s*x
    for _ in range(40):
        gx, dg = _return_jet(c, q, t)
        den = dg - s
        if den == 0:
            break
        step = (gx - s * q) / den
        q -= step
        if abs(step) < tol(dps, 2):
            break
    gx, dg = _return_jet(c, q, t)
    if q <= 0 or abs(gx - s * q) > tol(dps, 6):
        return None
    return q, abs(dg)


def renorm_margin(c, p, signs=None, q_seed=None, dps=DEFAULT_DPS):
    """Invariance margin of the period-p restrictive interval.

    Returns (margin, q) with margin = q - |P_c^p(0)| when the boundary
    fixed point q exists and is repelling, and (-inf, None) otherwise.
    ``signs`` are the branch signs of P_c^k(0), k=1..p-1 (taken from c's own
    orbit when omitted)."""
    with precision(dps):
        c = real(c)
        orb = _Orbit(c)
        if signs is None:
            signs = [sign(orb[k]) or 1 for k in range(1, p)]
        s = sign_prod(signs)
        q0 = 2 * real(q_seed) if q_seed is not None else mpfr(2)
        for _ in range(400):
            if _pullback(c, signs, s * q0) is not None:
                break
            q0 *= mpfr("0.9")
        r = restrictive_point(c, signs, q0, dps)
        if r is None or r[1] <= 1:
            return mpfr("-inf"), None
        q = r[0]
        return q - abs(orb[p]), q


def sign_prod(signs):
    s = 1
    for v in signs:
        s *= v
    return s


def immediate_doubling(c, dps=DEFAULT_DPS):
    """Margin of P_c^2([alpha, -alpha]) inside [alpha, -alpha] (positive means
    inside); None when alpha is not repelling."""
    with precision(dps):
        c = real(c)
        if c >= mpfr(-3) / 4:
            return None
        a = fixed_points(c, dps).alpha
        return -a - abs(c * c + c)


# ---------------------------------------------------------------------------
# nest construction

def build_principal_nest(c, depth_max=64, dps=DEFAULT_DPS, budget=RETURN_BUDGET,
                         strict_budget=False):
    with precision(dps):
        c = real(c)
        if c >= mpfr(-3) / 4:
            raise AlphaNotRepelling("alpha is not repelling for c >= -3/4")
        t_ok = tol(dps, 6)
        band = 10 * t_ok
        alpha = fixed_points(c, dps).alpha
        u = -alpha
        orb = _Orbit(c)
        levels = [NestLevel(0, (-u, u), 0, None)]

        def done(term):
            return Nest(c, levels, term, orb.pts, dps)

        last = 0
        for n in range(depth_max):
            # first return of 0 to V^n
            k = max(last, 1)
            t = None
            while k <= budget:
                if abs(orb[k]) < u:
                    t = k
                    break
                k += 1
            if t is None:
                tail = orb.pts[-64:]
                if any(abs(tail[-1] - tail[-1 - q]) <= t_ok for q in range(1, 32)):
                    return done(Terminal("escaped", reason="critical orbit settles outside V^%d" % n))
                if strict_budget:
                    raise ReturnBudgetExceeded("no return to V^%d within %d steps" % (n, budget))
                return done(Terminal("nonrenormalizable", reason="return budget"))
            if abs(orb[t]) <= t_ok:
                L = None
                if n == 0 and t == 2:
                    L = (alpha, -alpha)
                else:
                    signs = [sign(orb[j]) for j in range(1, t)]
                    r = restrictive_point(c, signs, u, dps)
                    if r is not None:
                        L = (-r[0], r[0])
                return done(Terminal("superstable", t, L))
            if n == 0:
                m = immediate_doubling(c, dps)
                if abs(m) <= band:
                    raise Inconclusive("immediate doubling margin inside tolerance band")
                if m > 0:
                    return done(Terminal("renormalizable", 2, (alpha, -alpha)))
            signs = [sign(orb[j]) for j in range(1, t)]
            s = sign_prod(signs)
            nu = _pullback(c, signs, s * u)
            if nu is None or nu >= u:
                return done(Terminal("nonrenormalizable", reason="degenerate pullback"))
            if nu < tol(dps, 10):
                return done(Terminal("nonrenormalizable", reason="precision floor"))
            central = abs(orb[t]) < nu
            q = margin = None
            if central:
                r = restrictive_point(c, signs, nu, dps)
                if r is not None and r[1] > 1:
                    q = r[0]
                    margin = q - abs(orb[t])
            levels.append(NestLevel(n + 1, (-nu, nu), t, central, q, margin))
            if margin is not None:
                if abs(margin) <= band:
                    raise Inconclusive("invariance margin inside tolerance band")
                if margin > 0:
                    return done(Terminal("renormalizable", t, (-q, q)))
            u, last = nu, t
            if u < tol(dps, 10):
                return done(Terminal("nonrenormalizable", reason="precision floor"))
        return done(Terminal("nonrenormalizable", reason="depth limit"))


def detect_renorm(c, dps=DEFAULT_DPS, depth_max=64):
    """(p, L) for the smallest renormalization period, or None.

    None means no renormalization with period below the return budget
    (and nest depth below ``depth_max``) exists."""
    with precision(dps):
        c = real(c)
        if c < -2 or c > mpfr(1) / 4:
            raise ValueError("c must lie in [-2, 1/4]")
        if c >= mpfr(-3) / 4:
            return None
        nest = build_principal_nest(c, depth_max, dps)
        t = nest.terminal
        if t.kind == "renormalizable":
            return t.period, t.interval
        if t.kind == "superstable":
            if t.interval is None:
                raise Inconclusive("superstable without restrictive interval")
            return t.period, t.interval
        # a period-p renormalization shows up after at most p steps, so an
        # exhausted return budget still rules out every period below it
        return None


def height(nest):
    return sum(1 for lv in nest.levels[1:] if not lv.central)


def verify_renormalization(c, p, L, dps=DEFAULT_DPS):
    """Interval check: P^p(L) inside L and P^k(int L) disjoint from int L for
    0<k<p.  Returns the inclusion margin (positive means strict).

    L is bounded by a periodic point, so one image endpoint lands back on
    the boundary; a side that agrees with the boundary to tolerance is
    taken as pinned and the margin is measured on the other side."""
    with precision(dps):
        c = real(c)
        a, b = real(L[0]), real(L[1])
        lo, hi = a, b
        for k in range(1, p + 1):
            if lo <= 0 <= hi:
                nlo = c
            else:
                nlo = min(lo * lo, hi * hi) + c
            nhi = max(lo * lo, hi * hi) + c
            lo, hi = nlo, nhi
            if k < p and lo < b and hi > a:
                # overlapping interiors are allowed only at a shared endpoint
                if min(hi, b) - max(lo, a) > tol(dps, 6):
                    return mpfr("-inf")
        gaps = [lo - a, b - hi]
        t = tol(dps, 6)
        if min(gaps) < -t:
            return min(gaps)
        free = [g for g in gaps if g > t]
        return min(free) if free else min(gaps)


# ---------------------------------------------------------------------------
# cascades and essential period

def _runs(nest):
    runs = []
    cur = None
    for lv in nest.levels[1:]:
        if lv.central:
            if cur is None:
                cur = [lv.index, lv.index]
            else:
                cur[1] = lv.index
        else:
            if cur is not None:
                runs.append(tuple(cur))
            cur = None
    if cur is not None:
        runs.append(tuple(cur))
    return runs


def classify_cascade(nest, m, N, cascade_min=CASCADE_MIN):
    """Kind of the cascade starting at level m with length N.

    A terminal cascade is classified by straightening the return map; a
    finite cascade escapes, and its return map straightens outside
    [-2, 1/4]: past the cusp when the boundary fixed point has disappeared
    (SaddleNode), past -2 when the critical value escapes over it
    (UlamNeumann)."""
    if N < cascade_min:
        return "Short"
    lv = nest.levels[m + 1]
    term = nest.terminal
    last = nest.levels[-1].index
    if term.kind in ("renormalizable", "superstable") and m + N - 1 >= last:
        from .paramgeo import sigma_return
        cp = sigma_return(nest.c, lv.return_time, dps=nest.dps)
        return "UlamNeumann" if cp < -1 else "SaddleNode"
    if lv.q is None:
        return "SaddleNode"
    return "UlamNeumann" if lv.margin < 0 else "SaddleNode"


def cascades(nest, cascade_min=CASCADE_MIN, span=None):
    """Maximal runs of central levels with landing depths of the recorded
    critical orbit (first ``span`` points, default 3 * return time sum)."""
    out = []
    with precision(nest.dps):
        orb = _Orbit(nest.c)
        orb.pts = list(nest.orbit)
        last = nest.levels[-1].index
        for s, e in _runs(nest):
            m, N = s - 1, e - s + 2
            terminal = nest.terminal.kind in ("renormalizable", "superstable") and e == last
            kind = classify_cascade(nest, m, N, cascade_min)
            t = nest.levels[m + 1].return_time
            depths = landing_depths(nest, m, N, orb, span)
            out.append(Cascade(m, N, kind, tuple(depths), terminal, t))
    return out


def _level_capped(nest, x, m, N):
    k = nest.level_of(x)
    return min(k, m + N)


def landing_depths(nest, m, N, orb=None, span=None):
    """d(z) = min(k-m, m+N-k) for z in the critical orbit lying in
    V^m minus V^{m+1}, where g_{m+1} z lands in V^k minus V^{k+1}."""
    if orb is None:
        orb = _Orbit(nest.c)
    t = nest.levels[m + 1].return_time
    if span is None:
        span = 3 * max(sum(lv.return_time for lv in nest.levels), t)
    u_m = nest.levels[m].interval[1]
    u_m1 = nest.levels[m + 1].interval[1] if m + 1 < len(nest.levels) else 0
    out = []
    for j in range(span):
        z = orb[j]
        if not (u_m1 <= abs(z) < u_m):
            continue
        w = orb[j + t]
        if abs(w) >= u_m:
            continue
        k = _level_capped(nest, w, m, N)
        out.append(min(k - m, m + N - k))
    return out


def essential_period(c, dps=DEFAULT_DPS, cascade_min=CASCADE_MIN, depth_max=64):
    """Number of critical-orbit points 0..p-1 left after eliminating those
    whose next landing in a saddle-node cascade is on a neglectable level."""
    with precision(dps):
        c = real(c)
        r = detect_renorm(c, dps, depth_max)
        if r is None:
            from .errors import NotRenormalizable
            raise NotRenormalizable("c is not renormalizable")
        p = r[0]
        if c >= mpfr(-3) / 4:
            return p
        nest = build_principal_nest(c, depth_max, dps)
        orb = _Orbit(c)
        orb.pts = list(nest.orbit)
        removed = set()
        for cas in cascades(nest, cascade_min, span=2 * p):
            if cas.terminal or cas.kind != "SaddleNode":
                continue
            m, N = cas.start_level, cas.length
            d_m = max(cas.landing_depths) if cas.landing_depths else 0
            u_m = nest.levels[m].interval[1]
            for n in range(p):
                # first landing of f^n(0) in V^m
                j = n
                while abs(orb[j]) >= u_m and j < n + 4 * p:
                    j += 1
                if abs(orb[j]) >= u_m:
                    continue
                i = _level_capped(nest, orb[j], m, N) - m
                if d_m < i < N - d_m:
                    removed.add(n)
        return p - len(removed)
