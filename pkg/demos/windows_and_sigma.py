"""Level-1 windows up to period 5 and the graph of sigma on the doubling
window, written as CSV for plotting."""
import csv
import sys

from renormlab.dyncore import fmt
from renormlab.paramgeo import CSV_HEADER, enumerate_windows, sigma

D = 50

ws = enumerate_windows(P=5, dps=D)
w = csv.writer(sys.stdout)
w.writerow(CSV_HEADER)
for J in sorted(ws, key=lambda J: J.c_minus):
    w.writerow(J.row())

J2 = [J for J in ws if J.period == 2][0]
print()
w.writerow(["c", "sigma"])
for i in range(1, 40):
    c = J2.c_minus + J2.length * i / 40
    w.writerow([fmt(c, 12), fmt(sigma(c, J2, D), 12)])
