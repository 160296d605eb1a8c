"""Straightened unstable leaf of the doubling fixed germ (CSV: t, chi)."""
from renormlab.dyncore import fmt
from renormlab.hyper import sweep_summary, unstable_sweep

leaf = unstable_sweep((2,), samples=8, pushes=7, dps=50)
print("t,pushes,chi")
for r in leaf:
    print("%s,%d,%s" % (fmt(r.t, 10), r.pushes,
                        "Escaped" if r.escaped else fmt(r.straightened, 12)))
s = sweep_summary(leaf)
print("# monotone=%s span=[%s, %s] escaped=%d"
      % (s["monotone"], fmt(s["lo"], 8), fmt(s["hi"], 8), s["escaped"]))
