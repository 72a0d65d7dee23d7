"""Gaussian-binomial identities, checked two ways.

Run with ``python3 demos/identities_tour.py``.
"""
from qorderstats.qcore import QParam, q_binomial, q_multinomial
from qorderstats.qidentity import (
    Interpretation, Variant, check_multinomial_inversion_oracle, check_multinomial_partition_sum,
    check_vandermonde_identity, count_ordered_set_partitions, subset_weight_histogram,
)

qp = QParam(0.5)

# The q-binomial counts k-subsets of {1..n} by the weight sum(m) - C(k+1, 2).
hist = subset_weight_histogram(5, 2)
print("weights of 2-subsets of {1..5}:", dict(sorted(hist.items())))
print("sum of q^weight =", sum(c * qp.q**e for e, c in hist.items()), " [5 choose 2]_q =", q_binomial(5, 2, qp))

# The alternating Vandermonde sum cancels badly in floating point,
# so the checks evaluate both sides in exact rationals.
for exact in (True, False):
    c = check_vandermonde_identity(8, 5, QParam(0.25), Variant.Q, exact=exact)
    print(f"Vandermonde n=8 y=5 q=0.25 exact={exact}: lhs={c.lhs:.6g} rhs={c.rhs:.6g} passed={c.passed}")

# Ordered set partitions: the Fubini numbers.
print("ordered set partitions of {1..n}:", [count_ordered_set_partitions(n) for n in range(7)])

# Weighting blocks by positions among the elements still unchosen reproduces
# the q-multinomial; weighting by the original labels does not.
for interp in Interpretation:
    c = check_multinomial_partition_sum(3, [1, 1], qp, interp)
    print(f"{interp.value:8s} partition sum = {c.lhs}  vs  q-multinomial {c.rhs}")

# Multiset permutations counted by inversions give the same polynomial.
c = check_multinomial_inversion_oracle(6, [2, 1, 2], qp)
print("inversion generating function:", c.lhs, " q-multinomial:", q_multinomial(6, [2, 1, 2], qp))
