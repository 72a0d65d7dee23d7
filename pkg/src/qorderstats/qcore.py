"""q-arithmetic, q-special functions, the q-difference operator and Jackson integration.

Everything here is binary64. The lowercase kernels ``qnum``, ``qfact``,
``qbinom`` and ``qmultinom`` are field-generic: they accept a raw ``q`` of any
type supporting ``+ - * /`` and integer powers, so the identity checks can run
them on :class:`fractions.Fraction` values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericError, QDomainError, UnsupportedRegionError

INFINITE = math.inf

DEFAULT_EPS = 1e-15
DEFAULT_MAX_TERMS = 400


class Base(enum.Enum):
    NORMAL = "normal"
    INVERSE = "inverse"


@dataclass(frozen=True)
class QParam:
    """Deformation parameter ``0 < q < 1`` with the truncation policy used by
    every infinite sum or product.

    ``eps`` is the relative term threshold and ``max_terms`` the hard cap on
    truncation depth.
    """

    q: float
    eps: float = DEFAULT_EPS
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self):
        q = self.q
        if isinstance(q, bool) or not isinstance(q, (int, float, np.floating)):
            raise QDomainError(f"q must be a real number, got {q!r}")
        if not math.isfinite(q) or not 0.0 < q < 1.0:
            raise QDomainError(f"q must lie in (0, 1), got {q!r}")
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise QDomainError(f"eps must be positive, got {self.eps!r}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise QDomainError(f"max_terms must be a positive integer, got {self.max_terms!r}")
        object.__setattr__(self, "q", float(q))
        object.__setattr__(self, "max_terms", int(self.max_terms))


def as_qparam(qp) -> QParam:
    if isinstance(qp, QParam):
        return qp
    return QParam(qp)


@dataclass(frozen=True)
class TruncationBound:
    """A computed value together with a bound on the mass it omits."""

    value: float
    tail_bound: float = 0.0

    def __post_init__(self):
        if not (self.tail_bound >= 0 and math.isfinite(self.tail_bound)):
            raise NumericError(f"tail bound must be finite and >= 0, got {self.tail_bound!r}")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class QGrid:
    """Division points ``base * q**n`` for ``n = 0..depth``."""

    base: float
    depth: int
    qp: QParam
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.base) and self.base > 0):
            raise QDomainError(f"grid base must be positive, got {self.base!r}")
        if self.depth < 0:
            raise QDomainError("grid depth must be >= 0")
        pts = self.base * self.qp.q ** np.arange(self.depth + 1, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


# ---------------------------------------------------------------------------
# field-generic kernels

def _check_n(n):
    if int(n) != n or n < 0:
        raise QDomainError(f"expected a non-negative integer, got {n!r}")
    return int(n)


def qnum(n: int, q):
    """[n]_q = (1 - q**n) / (1 - q) for any q != 1."""
    n = _check_n(n)
    if n == 0:
        return q * 0
    return (1 - q**n) / (1 - q)


def qfact(n: int, q):
    n = _check_n(n)
    out = q * 0 + 1
    for i in range(1, n + 1):
        out = out * qnum(i, q)
    return out


def qbinom(n: int, k: int, q, base: Base = Base.NORMAL):
    """Gaussian binomial; zero outside ``0 <= k <= n``."""
    n = _check_n(n)
    if k < 0 or k > n:
        return q * 0
    val = qfact(n, q) / (qfact(k, q) * qfact(n - k, q))
    if base is Base.INVERSE:
        val = val / q ** (k * (n - k))
    return val


def qmultinom(n: int, parts: Sequence[int], q, base: Base = Base.NORMAL):
    n = _check_n(n)
    parts = [int(p) for p in parts]
    if any(p < 0 for p in parts):
        raise QDomainError(f"multinomial parts must be >= 0, got {parts}")
    rest = n - sum(parts)
    if rest < 0:
        raise QDomainError(f"parts {parts} sum past n={n}")
    den = qfact(rest, q)
    for p in parts:
        den = den * qfact(p, q)
    val = qfact(n, q) / den
    if base is Base.INVERSE:
        expo, remaining = 0, n
        for p in parts:
            remaining -= p
            expo += p * remaining
        val = val / q**expo
    return val


# ---------------------------------------------------------------------------
# QParam API

def q_number(n: int, qp, base: Base = Base.NORMAL) -> float:
    """[n]_q, or [n]_{1/q} when ``base`` is INVERSE."""
    q = as_qparam(qp).q
    if base is Base.INVERSE:
        q = 1.0 / q
    return float(qnum(n, q))


def q_factorial(n: int, qp) -> float:
    return float(qfact(n, as_qparam(qp).q))


def q_binomial(n: int, k: int, qp, base: Base = Base.NORMAL) -> float:
    return float(qbinom(n, k, as_qparam(qp).q, base))


def q_multinomial(n: int, parts: Sequence[int], qp, base: Base = Base.NORMAL) -> float:
    return float(qmultinom(n, parts, as_qparam(qp).q, base))


def _log_tail(x_abs: float, q: float) -> float:
    # |sum log(1 - x_j)| for x_j = x q^j, j >= 0, bounded by sum |x_j| / (1 - |x_0|)
    if x_abs >= 1.0:
        raise NumericError("truncated product tail does not converge within max_terms")
    return (x_abs / (1.0 - q)) / (1.0 - x_abs)


def q_shifted_factorial(a: float, n, qp) -> TruncationBound:
    """(a; q)_n for finite ``n`` or ``n = INFINITE``."""
    qp = as_qparam(qp)
    q = qp.q
    if not math.isfinite(a):
        raise QDomainError(f"a must be finite, got {a!r}")
    if n != INFINITE:
        n = _check_n(n)
        out = 1.0
        for k in range(n):
            out *= 1.0 - a * q**k
        return TruncationBound(out)

    out = 1.0
    threshold = qp.eps * (1.0 - q)
    for k in range(qp.max_terms):
        x = a * q**k
        if abs(x) < threshold:
            break
        out *= 1.0 - x
    else:
        x = a * q**qp.max_terms
    if not math.isfinite(out):
        raise NumericError("non-finite q-shifted factorial")
    tail = abs(out) * math.expm1(_log_tail(abs(x), q))
    return TruncationBound(out, tail)


def q_exponential(z: float, qp) -> TruncationBound:
    """e_q(z) = prod_{i>=1} 1 / (1 - (1-q) z q**(i-1)).

    Positive ``z`` must satisfy ``z < 1/(1-q)``; every ``z <= 0`` is accepted.
    """
    qp = as_qparam(qp)
    q = qp.q
    if not math.isfinite(z):
        raise QDomainError(f"z must be finite, got {z!r}")
    if z > 0 and z >= 1.0 / (1.0 - q):
        raise QDomainError(f"e_q(z) needs z < 1/(1-q) = {1.0 / (1.0 - q)}, got {z}")
    prod = q_shifted_factorial((1.0 - q) * z, INFINITE, qp)
    val = 1.0 / prod.value
    rel = prod.tail_bound / abs(prod.value)
    if rel >= 1.0:
        raise NumericError("e_q truncation error exceeds its value")
    return TruncationBound(val, abs(val) * rel / (1.0 - rel))


def q_derivative(f: Callable[[float], float], x: float, qp) -> float:
    """d_q f(x) = (f(x) - f(qx)) / ((1 - q) x); undefined at x = 0."""
    q = as_qparam(qp).q
    if x == 0:
        raise QDomainError("the q-derivative is undefined at x = 0")
    return (f(x) - f(q * x)) / ((1.0 - q) * x)


# ---------------------------------------------------------------------------
# Jackson / Fermat integration

def _fermat(f, b: float, qp: QParam):
    """Sum over n of b (q^n - q^{n+1}) f(b q^n); ``f`` returns (value, tail)."""
    if b == 0:
        return 0.0, 0.0
    q = qp.q
    total = 0.0
    inner_tail = 0.0
    term = 0.0
    for n in range(qp.max_terms):
        w = b * (1.0 - q) * q**n
        val, tail = f(b * q**n)
        term = w * val
        total += term
        inner_tail += abs(w) * tail
        if not math.isfinite(total):
            raise NumericError(f"non-finite partial sum at term {n}")
        if abs(term) < qp.eps * abs(total):
            break
    # geometric continuation of the last term
    return total, inner_tail + abs(term) * q / (1.0 - q)


def _scalar(f):
    return lambda x: (f(x), 0.0)


def _fermat_infinite(f, qp: QParam):
    q = qp.q
    N = max(qp.max_terms // 2, 1)
    terms = [(1.0 - q) * q**n * f(q**n) for n in range(-N, N + 1)]
    total = math.fsum(terms)
    if not math.isfinite(total):
        raise NumericError("non-finite sum in the [0, inf) q-integral")

    def tail(last, prev):
        if last == 0:
            return 0.0
        ratio = abs(last) / abs(prev) if prev != 0 else math.inf
        if ratio >= 1.0:
            raise NumericError("the [0, inf) q-integral does not converge at this depth")
        return abs(last) * ratio / (1.0 - ratio)

    return TruncationBound(total, tail(terms[0], terms[1]) + tail(terms[-1], terms[-2]))


def q_integrate(f: Callable[[float], float], a: float, b, qp) -> TruncationBound:
    """Jackson integral of ``f`` over ``[a, b]``; ``b`` may be INFINITE."""
    qp = as_qparam(qp)
    if not (math.isfinite(a) and a >= 0):
        raise QDomainError(f"lower limit must be finite and >= 0, got {a!r}")
    if b == INFINITE:
        upper = _fermat_infinite(f, qp)
    else:
        if not math.isfinite(b) or b < a:
            raise QDomainError(f"need 0 <= a <= b, got a={a}, b={b}")
        if a == b:
            return TruncationBound(0.0)
        val, tail = _fermat(_scalar(f), b, qp)
        upper = TruncationBound(val, tail)
    if a == 0:
        return upper
    lo, lo_tail = _fermat(_scalar(f), a, qp)
    return TruncationBound(upper.value - lo, upper.tail_bound + lo_tail)


# ---------------------------------------------------------------------------
# nested regions

@dataclass(frozen=True)
class Scaled:
    """A limit equal to ``factor`` times the variable at position ``var``."""

    factor: float
    var: int


@dataclass(frozen=True)
class Limit:
    upper: float | Scaled
    lower: float | Scaled = 0.0


@dataclass(frozen=True)
class NestedRegion:
    """Integration limits for each argument of the integrand, in argument order."""

    limits: tuple[Limit, ...]

    def __post_init__(self):
        object.__setattr__(self, "limits", tuple(self.limits))
        if not self.limits:
            raise UnsupportedRegionError("a region needs at least one variable")
        d = len(self.limits)
        for lim in self.limits:
            for bound in (lim.lower, lim.upper):
                if isinstance(bound, Scaled):
                    if not 0 <= bound.var < d:
                        raise UnsupportedRegionError(f"limit refers to unknown variable {bound.var}")
                    if not (math.isfinite(bound.factor) and bound.factor >= 0):
                        raise UnsupportedRegionError("scale factors must be finite and >= 0")
                elif not (isinstance(bound, (int, float)) and math.isfinite(bound) and bound >= 0):
                    raise UnsupportedRegionError(f"unsupported limit {bound!r}")

    @property
    def dim(self) -> int:
        return len(self.limits)

    def order(self) -> list[int]:
        """Outermost-first evaluation order; raises on circular references."""
        placed: list[int] = []
        pending = list(range(self.dim))
        while pending:
            ready = [
                i for i in pending
                if all(not isinstance(b, Scaled) or b.var in placed
                       for b in (self.limits[i].lower, self.limits[i].upper))
            ]
            if not ready:
                raise UnsupportedRegionError("limits refer to each other circularly")
            placed.extend(ready[:1])
            pending.remove(ready[0])
        return placed

    def chain(self):
        """``(top, factors)`` if this is a chain region, else None.

        A chain has variable 0 on ``[0, top]`` and variable j on
        ``[0, factors[j-1] * y_{j-1}]``.
        """
        first = self.limits[0]
        if isinstance(first.upper, Scaled) or first.lower != 0:
            return None
        factors = []
        for j, lim in enumerate(self.limits[1:], start=1):
            if lim.lower != 0 or not isinstance(lim.upper, Scaled) or lim.upper.var != j - 1:
                return None
            factors.append(lim.upper.factor)
        return float(first.upper), factors


def chain_region(top: float, factors: Sequence[float]) -> NestedRegion:
    """y0 in [0, top], y_j in [0, factors[j-1] * y_{j-1}]."""
    lims = [Limit(top)] + [Limit(Scaled(c, j)) for j, c in enumerate(factors)]
    return NestedRegion(tuple(lims))


@dataclass(frozen=True)
class ProductIntegrand:
    """Integrand ``prod_j factors[j](y_j)``; enables the lattice fast path on chains."""

    factors: tuple[Callable[[float], float], ...]

    def __call__(self, *ys):
        out = 1.0
        for g, y in zip(self.factors, ys):
            out *= g(y)
        return out


def _resolve(bound, values):
    if isinstance(bound, Scaled):
        return bound.factor * values[bound.var]
    return float(bound)


def _nested_recursive(f, region: NestedRegion, qp: QParam) -> TruncationBound:
    order = region.order()
    values = [0.0] * region.dim

    def level(depth):
        idx = order[depth]
        lim = region.limits[idx]
        lo, hi = _resolve(lim.lower, values), _resolve(lim.upper, values)
        if lo > hi:
            raise QDomainError(f"empty-orientation limits [{lo}, {hi}] for variable {idx}")

        def g(x):
            values[idx] = x
            if depth + 1 == len(order):
                return f(*values), 0.0
            return level(depth + 1)

        if lo == hi:
            return 0.0, 0.0
        val, tail = _fermat(g, hi, qp)
        if lo > 0:
            lval, ltail = _fermat(g, lo, qp)
            val, tail = val - lval, tail + ltail
        return val, tail

    val, tail = level(0)
    return TruncationBound(val, tail)


def _nested_chain_lattice(f: ProductIntegrand, top: float, factors, qp: QParam) -> TruncationBound:
    # every lattice point of a chain is y_j = top * C_j * q**M_j with
    # 0 <= M_0 <= M_1 <= ... so the sum collapses to cumulative sums over M
    q = qp.q
    M = np.arange(qp.max_terms, dtype=float)
    scale = top
    acc = None
    for j, g in enumerate(f.factors):
        if j > 0:
            scale *= factors[j - 1]
        ys = scale * q**M
        w = (1.0 - q) * ys * np.array([g(y) for y in ys], dtype=float)
        acc = w if acc is None else w * np.cumsum(acc)
    if not np.all(np.isfinite(acc)):
        raise NumericError("non-finite value in the chain lattice sum")
    total = math.fsum(acc)
    tail = abs(acc[-1]) * q / (1.0 - q)
    return TruncationBound(total, tail)


def q_integrate_nested(f, region: NestedRegion, qp) -> TruncationBound:
    """Iterated Jackson integral of ``f(*ys)`` over ``region``.

    Each limit is a constant or a non-negative multiple of another variable.
    The result's tail bound accumulates the per-level truncation estimates.
    """
    qp = as_qparam(qp)
    if not isinstance(region, NestedRegion):
        raise UnsupportedRegionError(f"expected a NestedRegion, got {type(region).__name__}")
    chain = region.chain()
    if isinstance(f, ProductIntegrand) and chain is not None and len(f.factors) == region.dim:
        top, factors = chain
        if top == 0 or any(c == 0 for c in factors):
            return TruncationBound(0.0)
        return _nested_chain_lattice(f, top, factors, qp)
    return _nested_recursive(f, region, qp)
