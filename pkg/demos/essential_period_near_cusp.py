"""Superstable parameters just right of the period-3 saddle-node at -1.75.

The period-(3N+2) orbit spends N steps creeping through the ghost of the
period-3 cycle.  The principal nest shows a saddle-node cascade of length N
and eliminating the points in its middle leaves essential period 5."""
from renormlab.dyncore import fmt, polish_superstable, precision, real
from renormlab.nest import build_principal_nest, cascades, essential_period

D = 50
SEEDS = {17: "-1.74333783293", 20: "-1.74531962445", 23: "-1.74652334330",
         26: "-1.74731072097", 29: "-1.74785495813"}

print("%4s %22s %8s %5s" % ("p", "c", "cascade", "p_e"))
for p, c0 in SEEDS.items():
    with precision(D):
        c = polish_superstable(p, real(c0), D)
    ks = [k for k in cascades(build_principal_nest(c, dps=D)) if k.kind == "SaddleNode"]
    print("%4d %22s %8d %5d" % (p, fmt(c, 16), max(k.length for k in ks),
                               essential_period(c, D)))
