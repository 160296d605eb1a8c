"""Command-line entry point: ``renormlab <command> [options]``.

Every numeric result is written as a decimal string.  Expensive objects
(fixed-point germs, window tables) are cached as JSON under the cache
directory, keyed by the operation, its arguments, D, N and the code
version.
"""
import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, fields
from datetime import datetime, timezone

from . import __version__
from .dyncore import fmt, precision, real
from .errors import RenormError

DEFAULT_CACHE = os.path.join(os.path.expanduser("~"), ".cache", "renormlab")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    dps: int = 50
    order: int = 40
    kneading: int = 64
    cascade_min: int = 3
    return_budget: int = 20000
    depth_max: int = 64
    cache_dir: str = ""
    format: str = "json"
    use_cache: bool = True

    def validate(self):
        if self.order >= 30 and self.dps < 30:
            raise ConfigError("precision must be at least 30 digits when N >= 30")
        for k in ("dps", "order", "kneading", "cascade_min", "return_budget", "depth_max"):
            if getattr(self, k) <= 0:
                raise ConfigError("%s must be positive" % k)
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        return self


def load_config(path=None, overrides=None):
    cfg = Config(cache_dir=os.environ.get("RENORMLAB_CACHE", DEFAULT_CACHE))
    if path:
        with open(path) as fh:
            data = json.load(fh)
        names = {f.name for f in fields(Config)}
        for k, v in data.items():
            if k not in names:
                raise ConfigError("unknown config key %r" % k)
            setattr(cfg, k, v)
    for k, v in (overrides or {}).items():
        if v is not None:
            setattr(cfg, k, v)
    if os.environ.get("RENORMLAB_CACHE"):
        cfg.cache_dir = os.environ["RENORMLAB_CACHE"]
    return cfg.validate()


# ---------------------------------------------------------------------------
# cache

def cache_key(op, args, cfg):
    return {"op": op, "args": args, "D": cfg.dps, "N": cfg.order,
            "code_version": __version__}


def _cache_path(cache_dir, namespace, key):
    h = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()
    return os.path.join(cache_dir, namespace, h + ".json")


def cache_get(cache_dir, namespace, key):
    path = _cache_path(cache_dir, namespace, key)
    if not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            entry = json.load(fh)
        if entry["key"] != key:
            return None
        return entry["payload"]
    except (OSError, ValueError, KeyError, TypeError):
        warnings.warn("ignoring corrupt cache entry %s" % path)
        return None


def cache_put(cache_dir, namespace, key, payload):
    path = _cache_path(cache_dir, namespace, key)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    entry = {"key": key, "payload": payload, "code_version": key.get("code_version"),
             "created_at": datetime.now(timezone.utc).isoformat()}
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(entry, fh, sort_keys=True)
    os.replace(tmp, path)


def cached(cfg, namespace, args, compute):
    """compute() -> JSON payload, memoized on disk."""
    key = cache_key(namespace, args, cfg)
    if cfg.use_cache:
        hit = cache_get(cfg.cache_dir, namespace, key)
        if hit is not None:
            return hit
    payload = compute()
    if cfg.use_cache:
        cache_put(cfg.cache_dir, namespace, key, payload)
    return payload


# ---------------------------------------------------------------------------
# output

def emit(result, cfg, out=None):
    """result: dict (JSON) or (header, rows) (CSV, also valid as JSON)."""
    if isinstance(result, tuple):
        header, rows = result
        if cfg.format == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
            text = buf.getvalue()
        else:
            text = json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    else:
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _word(s):
    return tuple(int(t) for t in str(s).replace("-", ",").split(",") if t)


def _fixpoint(cfg, word):
    from .germ import Germ
    from .hyper import periodic_germ

    def compute():
        g = periodic_germ(word, cfg.order, cfg.dps)
        return g.to_json_full()
    return Germ.from_json(cached(cfg, "fixpoint", list(word), compute), cfg.dps)


def _windows(cfg, level, cutoff):
    from .paramgeo import CSV_HEADER, enumerate_level

    def compute():
        return [w.row() for w in enumerate_level(level, cutoff, cfg.dps)]
    return CSV_HEADER, cached(cfg, "windows", [level, cutoff], compute)


# ---------------------------------------------------------------------------
# commands

def cmd_orbit(a, cfg):
    from .dyncore import eval_orbit
    xs = eval_orbit(a.c, a.x0, a.n, cfg.dps)
    return ["k", "x"], [[str(k), fmt(x, cfg.dps)] for k, x in enumerate(xs)]


def cmd_cycle(a, cfg):
    from .dyncore import find_attracting_cycle
    cyc = find_attracting_cycle(a.c, p_max=a.pmax, dps=cfg.dps)
    if cyc is None:
        return {"c": a.c, "cycle": None}
    return {"c": a.c, "cycle": {"period": cyc.period,
                                "points": [fmt(x, cfg.dps) for x in cyc.points],
                                "multiplier": fmt(cyc.multiplier, cfg.dps)}}


def cmd_knead(a, cfg):
    from .dyncore import kneading
    return {"c": a.c, "kneading": kneading(a.c, a.length or cfg.kneading, cfg.dps).symbols}


def cmd_superstable(a, cfg):
    from .dyncore import superstable

    def compute():
        with precision(cfg.dps):
            r = superstable(a.period, (real(a.bracket[0]), real(a.bracket[1])), cfg.dps)
            return fmt(r, cfg.dps)
    return {"period": a.period, "c": cached(cfg, "superstable",
                                           [a.period] + list(a.bracket), compute)}


def cmd_nest(a, cfg):
    from .nest import build_principal_nest
    n = build_principal_nest(a.c, depth_max=cfg.depth_max, dps=cfg.dps,
                             budget=cfg.return_budget)
    return n.to_json()


def cmd_essper(a, cfg):
    from .nest import detect_renorm, essential_period
    r = detect_renorm(a.c, cfg.dps, cfg.depth_max)
    if r is None:
        from .errors import NotRenormalizable
        raise NotRenormalizable("c is not renormalizable")
    return {"c": a.c, "period": r[0],
            "essential_period": essential_period(a.c, cfg.dps, cfg.cascade_min,
                                                 cfg.depth_max)}


def cmd_windows(a, cfg):
    return _windows(cfg, a.level, a.cutoff)


def cmd_sigma(a, cfg):
    from .paramgeo import sigma, sigma_return
    if a.period:
        v = sigma_return(a.c, a.period, dps=cfg.dps, K=cfg.kneading)
    else:
        v = sigma(a.c, dps=cfg.dps, K=cfg.kneading)
    return {"c": a.c, "sigma": fmt(v, cfg.dps)}


def cmd_renorm(a, cfg):
    from .germ import apply_word, germ_from_quadratic, straighten
    g = germ_from_quadratic(a.c, N=cfg.order, dps=cfg.dps)
    g = apply_word(g, [a.period] * a.times)
    return g.to_json({"straightened": fmt(straighten(g), cfg.dps)})


def cmd_fixpoint(a, cfg):
    from .germ import fixed_point_residual
    w = _word(a.word)
    g = _fixpoint(cfg, w)
    return g.to_json({"word": list(w),
                      "residual": fmt(fixed_point_residual(g, w), 6)})


def cmd_spectrum(a, cfg):
    from .germ import jacobian, spectrum
    w = _word(a.word)
    g = _fixpoint(cfg, w)
    return spectrum(jacobian(g, w), dps=cfg.dps).to_json(k=a.k)


def cmd_multiplier(a, cfg):
    import mpmath
    from .germ import jacobian, spectrum, work_dps
    w = _word(a.word)
    g = _fixpoint(cfg, w)
    S = spectrum(jacobian(g, w), dps=cfg.dps)
    with mpmath.workdps(work_dps(cfg.dps)):
        lam = abs(S.top) ** (mpmath.mpf(1) / len(w))
    return {"word": list(w), "multiplier": mpmath.nstr(lam, cfg.dps)}


def cmd_converge(a, cfg):
    from .hyper import convergence_rate, feigenbaum_parameter
    c = a.c if a.c is not None else feigenbaum_parameter(dps=cfg.dps)
    r = convergence_rate(c, _word(a.word), a.nmax, cfg.order, cfg.dps)
    if cfg.format == "csv":
        return ["n", "d_n"], r.rows(cfg.dps)
    return r.to_json(cfg.dps)


def cmd_sweep(a, cfg):
    from .hyper import unstable_sweep
    leaf = unstable_sweep(_word(a.word), a.T, a.samples, a.pushes, cfg.order, cfg.dps)
    rows = [[fmt(r.t, cfg.dps), str(r.pushes),
             "Escaped" if r.escaped else fmt(r.straightened, cfg.dps)] for r in leaf]
    return ["t", "pushes", "straightened"], rows


def cmd_measure(a, cfg):
    from .paramgeo import level_measure
    return level_measure(a.level, a.cutoff, cfg.dps).to_json(cfg.dps)


def _window_by_label(cfg, level, cutoff, label):
    from .paramgeo import enumerate_level
    ws = enumerate_level(level, cutoff, cfg.dps)
    if label is None:
        # the doubling window of that level
        ws = [w for w in ws if set(w.word) == {"LC"}]
    else:
        ws = [w for w in ws if w.label == label or "*".join(w.word) == label]
    if len(ws) != 1:
        raise SystemExit("no unique window matches %r at level %d" % (label, level))
    return ws[0]


def cmd_distortion(a, cfg):
    from .paramgeo import qs_distortion
    J = _window_by_label(cfg, a.level, a.cutoff, a.window)
    return qs_distortion(J, a.level, a.eps, a.triples, a.seed, cfg.dps).to_json(cfg.dps)


def cmd_gaps(a, cfg):
    from .paramgeo import enumerate_windows, gap_ratio
    rows = []
    for w in enumerate_windows(P=a.cutoff, dps=cfg.dps):
        rows.append([w.label, str(w.period), fmt(gap_ratio(w, a.eps, cfg.dps), cfg.dps)])
    return ["label", "period", "gap_ratio"], rows


def cmd_report(a, cfg):
    from .acceptance import run_all
    res = run_all(only=a.only)
    return {"criteria": [r.to_json() for r in res],
            "passed": sum(r.passed for r in res), "total": len(res)}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--dps", type=int, help="precision in decimal digits (D)")
    common.add_argument("--order", type=int, help="series order N")
    common.add_argument("--kneading", type=int, help="kneading length K")
    common.add_argument("--cascade-min", dest="cascade_min", type=int)
    common.add_argument("--return-budget", dest="return_budget", type=int)
    common.add_argument("--depth-max", dest="depth_max", type=int)
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--no-cache", dest="use_cache", action="store_const", const=False)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--out", help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="renormlab", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.set_defaults(fn=fn)
        return s

    s = add("orbit", cmd_orbit, "critical or arbitrary orbit of x^2 + c")
    s.add_argument("--c", required=True)
    s.add_argument("--x0", default="0")
    s.add_argument("--n", type=int, default=16)
    s = add("cycle", cmd_cycle, "attracting cycle of x^2 + c")
    s.add_argument("--c", required=True)
    s.add_argument("--pmax", type=int, default=64)
    s = add("knead", cmd_knead, "kneading word of the critical orbit")
    s.add_argument("--c", required=True)
    s.add_argument("--length", type=int)
    s = add("superstable", cmd_superstable, "superstable parameter in a bracket")
    s.add_argument("--period", type=int, required=True)
    s.add_argument("--bracket", nargs=2, required=True)
    s = add("nest", cmd_nest, "principal nest")
    s.add_argument("--c", required=True)
    s = add("essper", cmd_essper, "renormalization period and essential period")
    s.add_argument("--c", required=True)
    s = add("windows", cmd_windows, "renormalization windows of a level")
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--cutoff", type=int, required=True)
    s = add("sigma", cmd_sigma, "straightened renormalization of x^2 + c")
    s.add_argument("--c", required=True)
    s.add_argument("--period", type=int)
    s = add("renorm", cmd_renorm, "renormalize the germ of x^2 + c")
    s.add_argument("--c", required=True)
    s.add_argument("--period", type=int, required=True)
    s.add_argument("--times", type=int, default=1)
    s = add("fixpoint", cmd_fixpoint, "periodic germ of renormalization")
    s.add_argument("--word", required=True, help="periods, e.g. 2 or 2,3")
    s = add("spectrum", cmd_spectrum, "spectrum of the truncated derivative")
    s.add_argument("--word", required=True)
    s.add_argument("--k", type=int, default=6, help="eigenvalues to list")
    s = add("multiplier", cmd_multiplier, "mean transversal multiplier")
    s.add_argument("--word", required=True)
    s = add("converge", cmd_converge, "distances of R^n F_c to the fixed germ")
    s.add_argument("--c", help="parameter (default: Feigenbaum point)")
    s.add_argument("--word", default="2")
    s.add_argument("--nmax", type=int, default=8)
    s = add("sweep", cmd_sweep, "straightened unstable leaf")
    s.add_argument("--word", default="2")
    s.add_argument("--T", default="1e-4")
    s.add_argument("--samples", type=int, default=8)
    s.add_argument("--pushes", type=int, default=7)
    s = add("measure", cmd_measure, "total length of level-n windows")
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--cutoff", type=int, required=True)
    s = add("distortion", cmd_distortion, "triple distortion of sigma^n")
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--cutoff", type=int, default=2)
    s.add_argument("--window", help="window label (default: doubling)")
    s.add_argument("--eps", default="0.05")
    s.add_argument("--triples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s = add("gaps", cmd_gaps, "gap ratios of level-1 windows")
    s.add_argument("--cutoff", type=int, required=True)
    s.add_argument("--eps", default="0.05")
    s = add("report", cmd_report, "run the acceptance checks")
    s.add_argument("--only", type=int, nargs="*", help="criterion numbers")
    return p


def run_command(argv=None):
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        cfg = load_config(a.config, {k: getattr(a, k, None)
                                     for k in [f.name for f in fields(Config)]})
    except (ConfigError, OSError, ValueError) as e:
        print("renormlab: config error: %s" % e, file=sys.stderr)
        return 2
    try:
        result = a.fn(a, cfg)
        emit(result, cfg, a.out)
    except RenormError as e:
        print("renormlab: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 2
    except Exception as e:   # internal failure
        print("renormlab: internal error: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
