"""Independent two-sided checks of the Gaussian-binomial identities.

Enumeration oracles build integer exponent histograms (q-polynomials) and
evaluate them at the exact binary value of q.  With ``exact=True`` (the
default) both sides of every identity are evaluated in rational arithmetic:
the alternating Vandermonde and product sums have terms as large as
q**(-n*(y+n)), which binary64 cannot cancel to a useful relative accuracy.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterator, Sequence

from .errors import QDomainError, SizeError
from .qcore import Base, QParam, as_qparam, qbinom, qmultinom, qnum
from .report import IdentityCheck

SUBSET_CAP = 20
VANDERMONDE_CAP = 30
PRODUCT_CAP = 30
PARTITION_CAP = 10
INVERSION_CAP = 9

DEFAULT_TOL = 1e-10


class Variant(enum.Enum):
    Q = "q"
    QINV = "qinv"


class Interpretation(enum.Enum):
    NESTED = "nested"
    LITERAL = "literal"


def _q(qp: QParam, exact: bool):
    return Fraction(qp.q) if exact else qp.q


def _poly_eval(hist: Counter, q):
    """Evaluate sum_e hist[e] * q**e; exponents may be negative."""
    out = q * 0
    for e, c in hist.items():
        out += c * q**e
    return out


def _check(name, lhs, rhs, tol, params, atol=None, asserted=True):
    # errors are formed before rounding, so exact inputs give exact errors
    if atol is None:
        atol = tol
    diff = abs(lhs - rhs)
    if rhs != 0:
        rel = diff / abs(rhs)
    elif lhs != 0:
        rel = diff / abs(lhs)
    else:
        rel = diff
    passed = rel <= tol or ((lhs == 0 or rhs == 0) and diff <= atol)
    return IdentityCheck(name, float(lhs), float(rhs), float(diff), float(rel), bool(passed),
                         float(tol), "rel", dict(params), asserted)


# ---------------------------------------------------------------------------
# k-subsets

def subset_weight_histogram(n: int, k: int) -> Counter:
    """Exponents m_1 + ... + m_k - C(k+1, 2) over k-subsets of {1..n}."""
    base = k * (k + 1) // 2
    return Counter(sum(c) - base for c in combinations(range(1, n + 1), k))


def check_subset_weight_sum(n: int, k: int, qp, *, exact: bool = True, tol: float = DEFAULT_TOL) -> IdentityCheck:
    qp = as_qparam(qp)
    if not 0 <= k <= n:
        raise QDomainError(f"need 0 <= k <= n, got n={n}, k={k}")
    if n > SUBSET_CAP:
        raise SizeError(f"subset enumeration is capped at n={SUBSET_CAP}")
    q = _q(qp, exact)
    lhs = _poly_eval(subset_weight_histogram(n, k), q)
    rhs = qbinom(n, k, q)
    return _check("subset_weight_sum", lhs, rhs, tol, {"n": n, "k": k, "q": qp.q})


# ---------------------------------------------------------------------------
# q-Vandermonde corollaries and the q^{-1} product formula

def vandermonde_sides(n: int, y: int, q, variant: Variant):
    terms = []
    for k in range(n + 1):
        if variant is Variant.Q:
            expo = k * (k + 1) // 2 - n * (y + k)
        else:
            expo = k * (k + 1) // 2 + n * y
        terms.append((-1) ** k * qbinom(n, k, q) * q**expo * qnum(y, q) / qnum(y + k, q))
    lhs = sum(terms[1:], terms[0])
    base = Base.NORMAL if variant is Variant.Q else Base.INVERSE
    rhs = 1 / qbinom(y + n, n, q, base)
    return lhs, rhs


def check_vandermonde_identity(n: int, y: int, qp, variant: Variant = Variant.Q, *,
                               exact: bool = True, tol: float = DEFAULT_TOL) -> IdentityCheck:
    qp = as_qparam(qp)
    variant = Variant(variant)
    if not 0 <= n <= VANDERMONDE_CAP:
        raise SizeError(f"need 0 <= n <= {VANDERMONDE_CAP}, got {n}")
    if y < 1:
        raise QDomainError(f"need y >= 1, got {y}")
    lhs, rhs = vandermonde_sides(n, y, _q(qp, exact), variant)
    return _check(f"vandermonde_{variant.value}", lhs, rhs, tol,
                  {"n": n, "y": y, "q": qp.q, "variant": variant.value})


def qbinom_product_sides(n: int, t, q):
    lhs = q * 0 + 1
    for i in range(1, n + 1):
        lhs *= 1 - t / q ** (i - 1)
    rhs = q * 0
    for k in range(n + 1):
        rhs += (-1) ** k * qbinom(n, k, q) * t**k / q ** (k * (k - 1) // 2 + k * (n - k))
    return lhs, rhs


def check_qbinom_product(n: int, t: float, qp, *, exact: bool = True, tol: float = 1e-9,
                         atol: float = 1e-12) -> IdentityCheck:
    qp = as_qparam(qp)
    if not 0 <= n <= PRODUCT_CAP:
        raise SizeError(f"need 0 <= n <= {PRODUCT_CAP}, got {n}")
    tt = Fraction(t) if exact else float(t)
    lhs, rhs = qbinom_product_sides(n, tt, _q(qp, exact))
    return _check("qbinom_product", lhs, rhs, tol, {"n": n, "t": float(t), "q": qp.q}, atol=atol)


# ---------------------------------------------------------------------------
# ordered set partitions

@dataclass(frozen=True)
class OrderedSetPartition:
    blocks: tuple[frozenset, ...]

    def __post_init__(self):
        seen: set = set()
        for b in self.blocks:
            if not b:
                raise QDomainError("ordered set partitions have no empty blocks")
            if seen & b:
                raise QDomainError("blocks must be pairwise disjoint")
            seen |= b
        if seen != set(range(1, len(seen) + 1)):
            raise QDomainError("blocks must cover {1..n}")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)


def _nonempty_subsets(items: tuple) -> Iterator[tuple]:
    for size in range(1, len(items) + 1):
        yield from combinations(items, size)


def ordered_set_partitions(n: int) -> Iterator[OrderedSetPartition]:
    """Every ordered set partition of {1..n}; n = 0 yields the empty partition."""
    if n > PARTITION_CAP:
        raise SizeError(f"partition enumeration is capped at n={PARTITION_CAP}")

    def rec(rest: tuple):
        if not rest:
            yield ()
            return
        for first in _nonempty_subsets(rest):
            remaining = tuple(x for x in rest if x not in first)
            for tail in rec(remaining):
                yield (frozenset(first),) + tail

    for blocks in rec(tuple(range(1, n + 1))):
        yield OrderedSetPartition(blocks)


def count_ordered_set_partitions(n: int) -> int:
    """Fubini number F_n, counted by enumerating the first block of every sequence.

    Subproblems on the remaining elements depend only on how many remain, so
    their counts are shared.
    """
    if n < 0:
        raise QDomainError("n must be >= 0")
    if n > PARTITION_CAP:
        raise SizeError(f"partition enumeration is capped at n={PARTITION_CAP}")

    @lru_cache(maxsize=None)
    def count(m: int) -> int:
        if m == 0:
            return 1
        items = tuple(range(m))
        return sum(count(m - len(first)) for first in _nonempty_subsets(items))

    return count(n)


def partition_weight_histogram(n: int, parts: Sequence[int], interpretation: Interpretation) -> Counter:
    """Exponent histogram of sum_j (positions of A_j) - C(k_j + 1, 2) over
    ordered choices of disjoint blocks A_1..A_r of sizes ``parts``.

    NESTED relabels the not-yet-chosen elements to 1..m before each block;
    LITERAL uses the original element values.
    """
    hist: Counter = Counter()

    def rec(j: int, remaining: tuple, expo: int):
        if j == len(parts):
            hist[expo] += 1
            return
        k = parts[j]
        base = k * (k + 1) // 2
        for pos in combinations(range(len(remaining)), k):
            if interpretation is Interpretation.NESTED:
                weight = sum(p + 1 for p in pos) - base
            else:
                weight = sum(remaining[p] for p in pos) - base
            chosen = set(pos)
            rest = tuple(x for i, x in enumerate(remaining) if i not in chosen)
            rec(j + 1, rest, expo + weight)

    rec(0, tuple(range(1, n + 1)), 0)
    return hist


def _check_parts(n, parts, cap):
    parts = [int(p) for p in parts]
    if any(p < 0 for p in parts) or sum(parts) > n:
        raise QDomainError(f"parts {parts} must be >= 0 and sum to at most n={n}")
    if n > cap:
        raise SizeError(f"enumeration is capped at n={cap}")
    return parts


def check_multinomial_partition_sum(n: int, parts: Sequence[int], qp,
                                    interpretation: Interpretation = Interpretation.NESTED, *,
                                    exact: bool = True, tol: float = DEFAULT_TOL) -> IdentityCheck:
    """Weighted ordered-partition sum against the q-multinomial.

    Only the NESTED reading is asserted; LITERAL is computed and reported
    with ``asserted=False``.
    """
    qp = as_qparam(qp)
    interpretation = Interpretation(interpretation)
    parts = _check_parts(n, parts, PARTITION_CAP)
    q = _q(qp, exact)
    lhs = _poly_eval(partition_weight_histogram(n, parts, interpretation), q)
    rhs = qmultinom(n, parts, q)
    return _check(f"multinomial_partition_{interpretation.value}", lhs, rhs, tol,
                  {"n": n, "parts": list(parts), "q": qp.q},
                  asserted=interpretation is Interpretation.NESTED)


# ---------------------------------------------------------------------------
# multiset permutations and inversions

def multiset_permutations(counts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct words with letter i appearing counts[i] times, in lexicographic order."""
    word = [i for i, c in enumerate(counts) for _ in range(c)]
    n = len(word)
    while True:
        yield tuple(word)
        i = n - 2
        while i >= 0 and word[i] >= word[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while word[j] <= word[i]:
            j -= 1
        word[i], word[j] = word[j], word[i]
        word[i + 1:] = reversed(word[i + 1:])


def inversions(word: Sequence[int]) -> int:
    return sum(1 for i in range(len(word)) for j in range(i + 1, len(word)) if word[i] > word[j])


def inversion_histogram(counts: Sequence[int]) -> Counter:
    return Counter(inversions(w) for w in multiset_permutations(counts))


def check_multinomial_inversion_oracle(n: int, parts: Sequence[int], qp, *, exact: bool = True,
                                       tol: float = DEFAULT_TOL) -> IdentityCheck:
    qp = as_qparam(qp)
    parts = _check_parts(n, parts, INVERSION_CAP)
    counts = list(parts) + [n - sum(parts)]
    q = _q(qp, exact)
    lhs = _poly_eval(inversion_histogram(counts), q)
    rhs = qmultinom(n, parts, q)
    return _check("multinomial_inversions", lhs, rhs, tol, {"n": n, "parts": list(parts), "q": qp.q})


def compositions(n: int, max_parts: int) -> Iterator[tuple[int, ...]]:
    """Compositions of n into at most ``max_parts`` positive parts (n = 0 gives ())."""
    if n == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(1, n + 1):
        for rest in compositions(n - first, max_parts - 1):
            yield (first,) + rest
