"""Doubling fixed germ: delta from the superstable ratios and from the
spectrum of the truncated derivative of R."""
import mpmath

from renormlab.dyncore import fmt
from renormlab.germ import jacobian, spectrum
from renormlab.hyper import feigenbaum_delta, feigenbaum_parameter, periodic_germ

D = 50

g = periodic_germ((2,), 40, D)
S = spectrum(jacobian(g, (2,)), dps=D)
print("c_F           ", fmt(feigenbaum_parameter(dps=D), 25))
print("delta (ratios)", fmt(feigenbaum_delta(10, D), 15))
print("delta (DR)    ", mpmath.nstr(mpmath.re(S.top), 15))
print("g*(1)         ", fmt(g(1), 15))
print("leading eigenvalues:")
for ev in S.eigenvalues[:5]:
    print("   ", mpmath.nstr(ev, 10))
