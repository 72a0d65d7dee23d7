"""Distributions of q-ordered q-uniform variables.

Run with ``python3 demos/order_statistics.py``.
"""
import numpy as np

from qorderstats import orderstat as O
from qorderstats.qcore import QParam

qp = QParam(0.5)
nu = 4

# Densities integrate to one against the Jackson measure.
for k in range(1, nu + 1):
    mass = O.total_mass_univariate(O.OrderStatSpec(nu, k), qp, O.Which.KTH)
    print(f"k={k}: total mass {mass.value:.15f} (tail bound {mass.tail_bound:.1e})")
print("(min, max) joint mass:", O.total_mass_joint_minmax(O.OrderStatSpec(nu), qp).value)
print("full ordered joint mass:", O.total_mass_full(O.OrderStatSpec(nu), qp).value)

# The CDF is a probability on the lattice t q^n, where the measure lives.
# Between lattice points the polynomial can leave [0, 1].
s = O.OrderStatSpec(2)
lattice = [qp.q**n for n in range(6)]
print("MIN CDF, nu=2, on lattice:", [round(O.unif_ord_cdf(s, qp, "min", y), 4) for y in lattice])
print("MIN CDF, nu=2, at y=0.75:", O.unif_ord_cdf(s, qp, "min", 0.75))

# The generic formulas take one CDF per variable; fed q-uniform CDFs they
# reproduce the closed forms.
fam = O.quniform_family(5, 1.0, qp)
ys = np.linspace(0, 1, 7)
gap = max(abs(O.ord_cdf_generic(fam, "kth", y, 3) - O.unif_ord_cdf(O.OrderStatSpec(5, 3), qp, "kth", y)) for y in ys)
print("generic vs closed form, 3rd of 5:", gap)

# As q -> 1 the densities approach the classical ones, slowest near y = t.
for q in (0.9, 0.99, 0.999):
    qq = QParam(q)
    row = [O.unif_ord_pdf(O.OrderStatSpec(5, 1), qq, "kth", y) / O.classical_order_pdf(5, 1, y) - 1
           for y in (0.2, 0.5, 0.8)]
    print(f"q={q}: relative gap of the MIN density at y=0.2, 0.5, 0.8:", np.round(row, 4))
