"""Even analytic germs f(x) = v(x^2), v(0) = 1, and the renormalization
operator R_p f(x) = f^p(a x) / a with a = f^p(0).

Coefficients are held at ``dps + GUARD`` digits.  Recovering v from samples
means solving a Vandermonde system on [0, 1] whose condition number is
around 1e31 at N = 40, so without guard digits Newton stalls near 1e-23.
"""
import json
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import mpmath
from gmpy2 import mpfr

from .dyncore import (DEFAULT_DPS, fmt, precision, real, straighten_orbit,
                      to_mpmath, tol)
from .errors import (DegenerateCenter, DomainEscape, EigSolverFailure,
                     NewtonDiverged, NotUnimodal, OverflowEscape,
                     StraighteningFailed, TailBlowup)

GUARD = 40
DEFAULT_N = 40
DEFAULT_RHO = "1.6"
GRID_POINTS = 64


def work_dps(dps):
    return dps + GUARD


def tail_bound(dps):
    """Default tail certificate threshold 10^(10 - dps/2).

    The stricter 10^(10 - dps) is not reachable at N = 40 with rho = 1.6:
    the doubling fixed germ has |v_39| rho^78 near 4e-23.
    """
    return mpfr(10) ** (10 - dps // 2)


@dataclass(frozen=True)
class Germ:
    coeffs: tuple
    rho: object
    dps: int = DEFAULT_DPS

    @property
    def N(self):
        return len(self.coeffs)

    @property
    def fold(self):
        """+1 if f has a minimum at 0, -1 for a maximum."""
        return 1 if self.coeffs[1] > 0 else -1

    def __call__(self, x):
        if abs(x) > self.rho:
            raise DomainEscape("|x| > rho_dom")
        y = x * x
        acc = self.coeffs[-1]
        for v in reversed(self.coeffs[:-1]):
            acc = acc * y + v
        return acc

    def deriv(self, x):
        y = x * x
        n = len(self.coeffs)
        acc = (n - 1) * self.coeffs[-1]
        for k in range(n - 2, 0, -1):
            acc = acc * y + k * self.coeffs[k]
        return 2 * x * acc

    def tail_certificate(self):
        with precision(work_dps(self.dps)):
            return abs(self.coeffs[-1]) * self.rho ** (2 * (self.N - 1))

    def to_json(self, extra=None):
        d = {"N": self.N, "rho": fmt(self.rho, self.dps),
             "coeffs": [fmt(v, self.dps) for v in self.coeffs]}
        if extra:
            d.update(extra)
        return d

    def to_json_full(self):
        """All internal digits; used by the cache."""
        w = work_dps(self.dps)
        return {"N": self.N, "rho": fmt(self.rho, w), "dps": self.dps,
                "coeffs": [fmt(v, w) for v in self.coeffs]}

    @classmethod
    def from_json(cls, d, dps=None):
        dps = dps or d.get("dps", DEFAULT_DPS)
        with precision(work_dps(dps)):
            coeffs = tuple(mpfr(s) for s in d["coeffs"])
            return cls(coeffs, mpfr(d["rho"]), dps)

    def dumps(self):
        return json.dumps(self.to_json(), indent=1)


def make_germ(coeffs, rho=DEFAULT_RHO, dps=DEFAULT_DPS, N=None):
    with precision(work_dps(dps)):
        cs = [real(v) for v in coeffs]
        if N is not None:
            cs = (cs + [mpfr(0)] * N)[:N]
        if cs[0] != 1:
            raise ValueError("germ must satisfy v_0 = 1")
        return Germ(tuple(cs), real(rho), dps)


def germ_from_quadratic(c, N=DEFAULT_N, rho=DEFAULT_RHO, dps=DEFAULT_DPS):
    """F(x) = 1 + c x^2, the conjugate of P_c by z -> z / c."""
    with precision(work_dps(dps)):
        c = real(c)
        if c == 0:
            raise DegenerateCenter("c = 0 has no representative with f(0) = 1")
        return make_germ([1, c], rho, dps, N)


def eval_germ(g, x):
    with precision(work_dps(g.dps)):
        return g(real(x))


# ---------------------------------------------------------------------------
# interpolation

@lru_cache(maxsize=16)
def _nodes_and_inverse(N, wdps):
    """Chebyshev-Lobatto nodes on y in (0, 1] (0 excluded) and the inverse of
    the Vandermonde matrix for w, where v(y) = 1 + y w(y)."""
    with mpmath.workdps(wdps):
        n = N - 1
        ys = [(1 - mpmath.cos(mpmath.pi * j / n)) / 2 for j in range(1, N)]
        V = mpmath.matrix(n, n)
        for i, y in enumerate(ys):
            for k in range(n):
                V[i, k] = y ** k
        Vi = mpmath.inverse(V)
        with precision(wdps):
            ys_f = tuple(real(y) for y in ys)
            Vi_f = tuple(tuple(real(Vi[i, k]) for k in range(n)) for i in range(n))
        return ys_f, Vi_f


def eval_grid(dps=DEFAULT_DPS, n=GRID_POINTS):
    with precision(work_dps(dps)):
        return [mpfr(-1) + mpfr(2) * i / (n - 1) for i in range(n)]


def grid_distance(f, g, grid=None):
    dps = f.dps
    grid = grid or eval_grid(dps)
    with precision(work_dps(dps)):
        return max(abs(f(x) - g(x)) for x in grid)


def check_unimodal(g, n=32):
    """v'(y) keeps one sign on (0, 1]."""
    with precision(work_dps(g.dps)):
        s = None
        for i in range(1, n + 1):
            y = mpfr(i) / n
            acc = mpfr(0)
            for k in range(g.N - 1, 0, -1):
                acc = acc * y + k * g.coeffs[k]
            sg = acc > 0
            if s is None:
                s = sg
            elif sg != s or acc == 0:
                raise NotUnimodal("v' changes sign on (0, 1]")


def _coeffs_R(coeffs, rho, p, N, wdps):
    """Coefficient vector of R_p for a raw coefficient tuple."""
    g = Germ(tuple(coeffs), rho)
    ys, Vi = _nodes_and_inverse(N, wdps)
    x = mpfr(0)
    for _ in range(p):
        x = g(x)
    a = x
    if a == 0:
        raise DegenerateCenter("f^p(0) = 0: superstable germ, R undefined")
    rhs = []
    for y in ys:
        x = a * gmpy2.sqrt(y)
        for _ in range(p):
            x = g(x)
        rhs.append((x / a - 1) / y)
    out = [mpfr(1)]
    for row in Vi:
        acc = mpfr(0)
        for vik, r in zip(row, rhs):
            acc += vik * r
        out.append(acc)
    return out


def renormalize(g, p, N=None, check=True, tail_tol=None):
    """R_p g, re-expanded at N (default g.N) coefficients."""
    N = N or g.N
    wdps = work_dps(g.dps)
    with precision(wdps):
        out = _coeffs_R(g.coeffs, g.rho, p, N, wdps)
        h = Germ(tuple(out), g.rho, g.dps)
        if check:
            bound = tail_bound(g.dps) if tail_tol is None else real(tail_tol)
            cert = h.tail_certificate()
            if cert >= bound:
                raise TailBlowup("tail certificate %s exceeds %s"
                                 % (fmt(cert, 6), fmt(bound, 6)))
            check_unimodal(h)
        return h


def apply_word(g, word, **kw):
    for p in word:
        g = renormalize(g, p, **kw)
    return g


def word_periods(word):
    """Accept ints, window objects or labels with a ``period`` attribute."""
    return tuple(int(getattr(m, "period", m)) for m in word)


# ---------------------------------------------------------------------------
# straightening

def straighten(g, K=64, K_max=8192, xtol=None):
    """Quadratic parameter with the kneading of g (after flipping a germ
    with a maximum at 0 to the minimum-at-0 convention).  Anything with
    ``__call__``, ``deriv``, ``fold`` and ``dps`` is accepted; only series
    germs get the unimodality check."""
    if isinstance(g, Germ):
        check_unimodal(g)
    wdps = work_dps(g.dps)
    with precision(wdps):
        s = g.fold

        def h(x):
            return s * g(x)

        def dh(x):
            return s * g.deriv(x)

        def crit(K):
            x = mpfr(0)
            out = []
            for _ in range(K):
                x = h(x)
                out.append(x)
            return out

        try:
            return straighten_orbit(crit, K, h, dh, dps=g.dps, K_max=K_max,
                                    xtol=xtol)
        except (DomainEscape, OverflowEscape) as e:
            raise StraighteningFailed("critical orbit left the domain: %s" % e)


# ---------------------------------------------------------------------------
# Newton for periodic points of R

def _coeff_map(word, rho, N, wdps):
    def F(v):
        for p in word:
            v = _coeffs_R(v, rho, p, N, wdps)
        return v
    return F


def jacobian(g, word, h=None):
    """Central-difference Jacobian (N x N, mpmath matrix) of v -> R_w(v)."""
    word = word_periods(word)
    N = g.N
    wdps = work_dps(g.dps)
    with precision(wdps):
        h = mpfr(10) ** (-(g.dps // 3)) if h is None else real(h)
        F = _coeff_map(word, g.rho, N, wdps)
        with mpmath.workdps(wdps):
            J = mpmath.matrix(N, N)
            hm = to_mpmath(h)
            for j in range(N):
                vp = list(g.coeffs)
                vm = list(g.coeffs)
                vp[j] += h
                vm[j] -= h
                try:
                    fp, fm = F(vp), F(vm)
                except DomainEscape as e:
                    raise DomainEscape("column %d: %s" % (j, e), column=j)
                for i in range(N):
                    J[i, j] = (to_mpmath(fp[i]) - to_mpmath(fm[i])) / (2 * hm)
            return J


def newton_fixed_point(word, init, maxit=50, verbose=False):
    """Germ g with R_w g = g on the evaluation grid to 10^(10 - dps)."""
    word = word_periods(word)
    g = init
    N, dps = g.N, g.dps
    wdps = work_dps(dps)
    target = tol(dps, 10)
    F = _coeff_map(word, g.rho, N, wdps)
    grid = eval_grid(dps)
    best = None
    with precision(wdps):
        for it in range(maxit):
            Rg = Germ(tuple(F(list(g.coeffs))), g.rho, dps)
            res = grid_distance(Rg, g, grid)
            if verbose:
                print("newton", it, fmt(res, 5))
            if res < target:
                return g
            if best is not None and res > 10 * best and it > 3:
                raise NewtonDiverged("residual grew to %s" % fmt(res, 5))
            best = res if best is None else min(best, res)
            J = jacobian(g, word)
            with mpmath.workdps(wdps):
                A = J[1:, 1:] - mpmath.eye(N - 1)
                b = mpmath.matrix([to_mpmath(Rg.coeffs[i] - g.coeffs[i])
                                   for i in range(1, N)])
                dx = mpmath.lu_solve(A, b)
                new = [mpfr(1)] + [g.coeffs[i] - real(dx[i - 1]) for i in range(1, N)]
            g = Germ(tuple(new), g.rho, dps)
    raise NewtonDiverged("residual not below %s after %d iterations"
                         % (fmt(target, 3), maxit))


def fixed_point_residual(g, word):
    word = word_periods(word)
    wdps = work_dps(g.dps)
    with precision(wdps):
        Rg = Germ(tuple(_coeff_map(word, g.rho, g.N, wdps)(list(g.coeffs))),
                  g.rho, g.dps)
        return grid_distance(Rg, g)


# ---------------------------------------------------------------------------
# spectrum

@dataclass(frozen=True)
class SpectrumReport:
    N: int
    eigenvalues: tuple          # mpmath mpc, sorted by decreasing modulus
    expanding_count: int
    top: object
    gap: object
    flagged: tuple = ()         # eigenvalues within the margin of |z| = 1
    top_vector: object = None   # right eigenvector of the top eigenvalue

    def to_json(self, dps=DEFAULT_DPS, k=None):
        ev = self.eigenvalues if k is None else self.eigenvalues[:k]

        def cs(z):
            z = mpmath.mpc(z)
            return [mpmath.nstr(z.real, dps), mpmath.nstr(z.imag, dps)]
        return {"N": self.N, "expanding_count": self.expanding_count,
                "top": mpmath.nstr(mpmath.re(self.top), dps),
                "gap": mpmath.nstr(self.gap, dps),
                "flagged": [cs(z) for z in self.flagged],
                "eigenvalues": [cs(z) for z in ev]}


def spectrum(J, margin=mpmath.mpf("1e-6"), vectors=False, dps=DEFAULT_DPS):
    """Dense eigen-decomposition of J sorted by modulus (computed at
    dps + GUARD digits, the precision the Jacobian was built at)."""
    with mpmath.workdps(work_dps(dps)):
        try:
            if vectors:
                E, ER = mpmath.eig(J, right=True)
            else:
                E = mpmath.eig(J, right=False)
        except Exception as e:   # mpmath raises plain errors on non-convergence
            raise EigSolverFailure(str(e))
        order = sorted(range(len(E)), key=lambda i: -abs(E[i]))
        ev = tuple(E[i] for i in order)
        expanding = sum(1 for z in ev if abs(z) > 1 + margin)
        flagged = tuple(z for z in ev if abs(abs(z) - 1) <= margin)
        gap = abs(ev[1]) if len(ev) > 1 else mpmath.mpf(0)
        vec = ER[:, order[0]] if vectors else None
        return SpectrumReport(J.rows, ev, expanding, ev[0], gap, flagged, vec)
