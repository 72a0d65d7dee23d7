"""The q-uniform law and the distributions of q-ordered random variables.

Two families of formulas live here.  The generic ones take an arbitrary
:class:`CdfFamily` (one distribution function per non-ordered variable, each
on its own support ``[0, q**(i-1) t]``).  The closed forms are the
specialisations to q-uniform parents; they are polynomials in ``y`` (and
``z``) and are evaluated without division by ``z``.

Joint formulas accept a ``mode``:

* ``"check"`` (default) raises :class:`QDomainError` outside the stated
  region ``0 <= y < c*z <= c*t``;
* ``"masked"`` returns 0 outside the closed region ``y <= c*z``.  The Jackson
  sum over ``[0, c*z]`` starts at its upper endpoint, so the harness needs
  the boundary;
* ``"raw"`` evaluates the polynomial anywhere.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import QDomainError, SizeError
from .qcore import (
    Base, Limit, NestedRegion, ProductIntegrand, QParam, Scaled, TruncationBound,
    as_qparam, chain_region, q_binomial, q_derivative, q_factorial, q_integrate,
    q_integrate_nested, q_multinomial, q_number,
)
from .report import IdentityCheck, VerificationReport

KTH_CAP = 12
JOINT_KR_CAP = 9
_SLACK = 1e-12


class Which(enum.Enum):
    MAX = "max"
    MIN = "min"
    KTH = "kth"


class Kind(enum.Enum):
    CDF = "cdf"
    PDF = "pdf"


class Mode(enum.Enum):
    CHECK = "check"
    MASKED = "masked"
    RAW = "raw"


class Interpretation(enum.Enum):
    NESTED = "nested"
    LITERAL = "literal"


def _prod(values) -> float:
    out = 1.0
    for v in values:
        out *= v
    return out


# ---------------------------------------------------------------------------
# q-uniform law

@dataclass(frozen=True)
class QUniform:
    beta: float
    qp: QParam

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise QDomainError(f"beta must be positive and finite, got {self.beta!r}")
        object.__setattr__(self, "qp", as_qparam(self.qp))


def quniform_pdf(x: float, d: QUniform) -> float:
    return 1.0 / d.beta if 0.0 <= x <= d.beta else 0.0


def quniform_cdf(x: float, d: QUniform) -> float:
    return min(max(x / d.beta, 0.0), 1.0)


def quniform_moment(r: int, d: QUniform) -> float:
    """r-th q-moment beta**r / [r+1]_q."""
    if int(r) != r or r < 0:
        raise QDomainError(f"moment order must be a non-negative integer, got {r!r}")
    return d.beta**r / q_number(int(r) + 1, d.qp)


def quniform_variance(d: QUniform) -> float:
    q = d.qp.q
    return d.beta**2 * q / ((1 + q + q * q) * (1 + q) ** 2)


def quniform_sample(d: QUniform, rng: np.random.Generator, size=None):
    """Draws from the Fermat measure: atom (1-q) q**n at beta q**n."""
    q = d.qp.q
    n = rng.geometric(1.0 - q, size=size) - 1
    return d.beta * q**n


def pit_check(d: QUniform, probe_ys: Sequence[float], tol: float = 1e-12) -> VerificationReport:
    """F_Y(y) = F_X(F_X^{-1}(y)) = y for Y = F_X(X)."""
    worst = None
    for y in probe_ys:
        if not 0.0 <= y <= 1.0:
            raise QDomainError(f"probability-integral probes must lie in [0, 1], got {y}")
        got = quniform_cdf(d.beta * y, d)
        err = abs(got - y)
        if worst is None or err > worst[0]:
            worst = (err, got, y)
    report = VerificationReport(meta={"check": "pit", "beta": d.beta, "q": d.qp.q})
    if worst is not None:
        report.checks.append(IdentityCheck.absolute("pit", worst[1], worst[2], tol,
                                                    {"beta": d.beta, "q": d.qp.q, "probes": len(probe_ys)}))
    return report


# ---------------------------------------------------------------------------
# supports and CDF families

@dataclass(frozen=True)
class SupportPartition:
    """R_j = (q^j t, q^(j-1) t] for j < nu and R_nu = [0, q^(nu-1) t]."""

    t: float
    nu: int
    qp: QParam

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t > 0):
            raise QDomainError(f"t must be positive, got {self.t!r}")
        if self.nu < 1:
            raise QDomainError(f"nu must be >= 1, got {self.nu}")
        object.__setattr__(self, "qp", as_qparam(self.qp))

    @property
    def intervals(self) -> list[tuple[float, float]]:
        q, t = self.qp.q, self.t
        out = [(q**j * t, q ** (j - 1) * t) for j in range(1, self.nu)]
        out.append((0.0, q ** (self.nu - 1) * t))
        return out

    def interval_of(self, y: float) -> int:
        """Index j with y in R_j."""
        if not 0.0 <= y <= self.t:
            raise QDomainError(f"{y} lies outside [0, {self.t}]")
        for j, (lo, hi) in enumerate(self.intervals[:-1], start=1):
            if lo < y <= hi:
                return j
        return self.nu

    def support(self, i: int) -> tuple[float, float]:
        """R_{Y_i} = [0, q^(i-1) t]."""
        return 0.0, self.qp.q ** (i - 1) * self.t


@dataclass(frozen=True)
class CdfFamily:
    nu: int
    cdfs: tuple[Callable[[float], float], ...]
    supports: SupportPartition

    def __post_init__(self):
        object.__setattr__(self, "cdfs", tuple(self.cdfs))
        if len(self.cdfs) != self.nu or self.supports.nu != self.nu:
            raise QDomainError("a family needs exactly nu distribution functions")

    @property
    def qp(self) -> QParam:
        return self.supports.qp

    @property
    def t(self) -> float:
        return self.supports.t

    def validate(self, n_probe: int = 64, atol: float = 1e-12) -> None:
        """Raise unless every F_i is nondecreasing on its support with F(0)=0, F(top)=1."""
        for i, F in enumerate(self.cdfs, start=1):
            _, top = self.supports.support(i)
            grid = np.linspace(0.0, top, n_probe)
            vals = np.array([F(x) for x in grid])
            if abs(vals[0]) > atol or abs(vals[-1] - 1.0) > atol:
                raise QDomainError(f"F_{i} must run from 0 to 1 on its support")
            if np.any(np.diff(vals) < -atol):
                raise QDomainError(f"F_{i} decreases on its support")


def quniform_family(nu: int, t: float, qp, clamp: bool = False) -> CdfFamily:
    """F_i(x) = x / (q^(i-1) t).

    With ``clamp=False`` the linear form is continued past the support, as
    the q-uniform substitution in the closed forms does; the generic formulas then
    agree with the closed forms at every y.  Clamped families agree on the
    lattice points t q^n only.
    """
    qp = as_qparam(qp)
    q = qp.q

    def make(i):
        top = q ** (i - 1) * t
        if clamp:
            return lambda x: min(max(x / top, 0.0), 1.0)
        return lambda x: max(x / top, 0.0)

    return CdfFamily(nu, tuple(make(i) for i in range(1, nu + 1)), SupportPartition(t, nu, qp))


@dataclass(frozen=True)
class OrderStatSpec:
    nu: int
    k: int = 1
    r: int | None = None
    t: float = 1.0

    def __post_init__(self):
        if int(self.nu) != self.nu or self.nu < 1:
            raise QDomainError(f"nu must be a positive integer, got {self.nu!r}")
        if not 1 <= self.k <= self.nu:
            raise QDomainError(f"need 1 <= k <= nu, got k={self.k}, nu={self.nu}")
        if self.r is not None and not self.k < self.r <= self.nu:
            raise QDomainError(f"need k < r <= nu, got k={self.k}, r={self.r}, nu={self.nu}")
        if not (math.isfinite(self.t) and self.t > 0):
            raise QDomainError(f"t must be positive, got {self.t!r}")


@dataclass(frozen=True)
class QOrderedPoint:
    ys: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ys", tuple(float(y) for y in self.ys))
        if not self.ys or not all(math.isfinite(y) for y in self.ys):
            raise QDomainError("a q-ordered point needs finite coordinates")


def support_check(point: QOrderedPoint, t: float, qp) -> bool:
    """0 <= y1 < q y2 < y2 < ... < q y_nu < y_nu <= t, strictly as written."""
    q = as_qparam(qp).q
    ys = point.ys
    if ys[0] < 0 or ys[-1] > t:
        return False
    for lo, hi in zip(ys, ys[1:]):
        if not (lo < q * hi < hi):
            return False
    return True


def _check_y(y, t):
    if not 0.0 <= y <= t * (1 + _SLACK):
        raise QDomainError(f"y={y} lies outside [0, {t}]")


# ---------------------------------------------------------------------------
# generic forms over any CDF family

def ord_cdf_generic(fam: CdfFamily, which, y: float, k: int | None = None) -> float:
    which = Which(which)
    _check_y(y, fam.t)
    q, nu, F = fam.qp.q, fam.nu, fam.cdfs
    if which is Which.MAX:
        return _prod(F[i](q**i * y) for i in range(nu))
    if which is Which.MIN:
        return 1.0 - _prod(1.0 - F[i](y) for i in range(nu))
    if k is None or not 1 <= k <= nu:
        raise QDomainError(f"KTH needs 1 <= k <= nu, got k={k}")
    if nu > KTH_CAP:
        raise SizeError(f"KTH enumeration is capped at nu={KTH_CAP}")
    total = 0.0
    labels = range(1, nu + 1)
    for r in range(k, nu + 1):
        for chosen in combinations(labels, r):
            rest = [i for i in labels if i not in chosen]
            term = _prod(F[i - 1](q ** (j - 1) * y) for j, i in enumerate(chosen, start=1))
            term *= _prod(1.0 - F[i - 1](q ** (i - (m - r)) * y) for m, i in enumerate(rest, start=r + 1))
            total += term
    return total


def _check_joint(y, z, t, c, strict=True):
    if not (0.0 <= y and 0.0 <= z <= t * (1 + _SLACK)):
        raise QDomainError(f"(y, z) = ({y}, {z}) lies outside [0, {t}]^2")
    bad = y >= c * z if strict else y > c * z * (1 + _SLACK)
    if bad:
        raise QDomainError(f"need y < {c} z, got y={y}, z={z}")


def joint_minmax_cdf_generic(fam: CdfFamily, y: float, z: float) -> float:
    q, nu, F = fam.qp.q, fam.nu, fam.cdfs
    _check_joint(y, z, fam.t, q ** (nu - 1))
    top = _prod(F[i](q**i * z) for i in range(nu))
    return top - _prod(F[i](q**i * z) - F[i](y) for i in range(nu))


def joint_kr_cdf_generic(fam: CdfFamily, k: int, r: int, y: float, z: float,
                         interpretation=Interpretation.NESTED) -> float:
    """Triple sum over disjoint blocks (at most y, in (y, z], above z).

    NESTED chooses the middle block among the variables left after the first
    block, relabelled 1..nu-s, and shifts each middle argument by
    q**(label - relabel); LITERAL uses the original labels throughout.
    """
    interpretation = Interpretation(interpretation)
    q, nu, F = fam.qp.q, fam.nu, fam.cdfs
    if not 1 <= k < r <= nu:
        raise QDomainError(f"need 1 <= k < r <= nu, got k={k}, r={r}, nu={nu}")
    if nu > JOINT_KR_CAP:
        raise SizeError(f"joint (k, r) enumeration is capped at nu={JOINT_KR_CAP}")
    _check_joint(y, z, fam.t, q ** (r - k))
    labels = list(range(1, nu + 1))
    total = 0.0
    for j in range(r, nu + 1):
        for s in range(k, j + 1):
            for low in combinations(labels, s):
                rest = [i for i in labels if i not in low]
                t_low = _prod(F[i - 1](q ** (n - 1) * y) for n, i in enumerate(low, start=1))
                for pos in combinations(range(len(rest)), j - s):
                    mid = [rest[p] for p in pos]
                    if interpretation is Interpretation.NESTED:
                        shifts = [i - (p + 1) for i, p in zip(mid, pos)]
                    else:
                        shifts = [0] * len(mid)
                    t_mid = _prod(
                        F[i - 1](q ** (n - 1 + sh) * z) - F[i - 1](q**sh * y)
                        for n, (i, sh) in enumerate(zip(mid, shifts), start=1)
                    )
                    high = [i for i in rest if i not in mid]
                    t_high = _prod(1.0 - F[i - 1](q ** (i - (n - j)) * z)
                                   for n, i in enumerate(high, start=j + 1))
                    total += t_low * t_mid * t_high
    return total


# ---------------------------------------------------------------------------
# q-uniform closed forms

def _upper_prod(y, t, q, count):
    # prod_{i=1}^{count} (1 - y / (q^(i-1) t))
    return _prod(1.0 - y / (q ** (i - 1) * t) for i in range(1, count + 1))


def kth_pdf_prefactor(nu: int, k: int, qp) -> float:
    """q^(-k(nu-k)) [nu]_q! / ([k-1]_q! [nu-k]_q!)."""
    q = as_qparam(qp).q
    return q_factorial(nu, qp) / (q_factorial(k - 1, qp) * q_factorial(nu - k, qp)) / q ** (k * (nu - k))


def kth_pdf_prefactor_powers(nu: int, k: int, qp) -> float:
    """Same prefactor written as [nu]_q! q^C(nu-k,2) / ([k-1]_q! [nu-k]_q! q^(C(nu,2) - C(k,2)))."""
    q = as_qparam(qp).q
    c2 = lambda m: m * (m - 1) // 2
    num = q_factorial(nu, qp) * q ** c2(nu - k)
    return num / (q_factorial(k - 1, qp) * q_factorial(nu - k, qp) * q ** (c2(nu) - c2(k)))


def unif_ord_cdf(spec: OrderStatSpec, qp, which, y: float, mode=Mode.CHECK) -> float:
    qp, which, mode = as_qparam(qp), Which(which), Mode(mode)
    q, nu, t = qp.q, spec.nu, spec.t
    if mode is Mode.CHECK:
        _check_y(y, t)
    if which is Which.MAX:
        return (y / t) ** nu
    if which is Which.MIN:
        return 1.0 - _upper_prod(y, t, q, nu)
    total = 0.0
    for r in range(spec.k, nu + 1):
        total += q_binomial(nu, r, qp, Base.INVERSE) * (y / t) ** r * _upper_prod(y, t, q, nu - r)
    return total


def unif_ord_pdf(spec: OrderStatSpec, qp, which, y: float, mode=Mode.CHECK) -> float:
    qp, which, mode = as_qparam(qp), Which(which), Mode(mode)
    q, nu, t = qp.q, spec.nu, spec.t
    if mode is Mode.CHECK:
        _check_y(y, t)
    if mode is Mode.MASKED and not 0.0 <= y <= t * (1 + _SLACK):
        return 0.0
    if which is Which.MAX:
        return q_number(nu, qp) * y ** (nu - 1) / t**nu
    if which is Which.MIN:
        return q_number(nu, qp) / (q ** (nu - 1) * t) * _upper_prod(y, t, q, nu - 1)
    k = spec.k
    return kth_pdf_prefactor(nu, k, qp) * y ** (k - 1) / t**k * _upper_prod(y, t, q, nu - k)


def _joint_gate(y, z, t, c, mode) -> bool:
    """True if the formula should be evaluated; raises in check mode."""
    if mode is Mode.CHECK:
        _check_joint(y, z, t, c)
    elif mode is Mode.MASKED:
        return 0.0 <= y <= c * z * (1 + _SLACK) and 0.0 <= z <= t * (1 + _SLACK)
    return True


def unif_joint_minmax(spec: OrderStatSpec, qp, kind, y: float, z: float, mode=Mode.CHECK) -> float:
    qp, kind, mode = as_qparam(qp), Kind(kind), Mode(mode)
    q, nu, t = qp.q, spec.nu, spec.t
    if kind is Kind.PDF and nu < 2:
        raise QDomainError("the (min, max) joint density needs nu >= 2")
    if not _joint_gate(y, z, t, q ** (nu - 1), mode):
        return 0.0
    if kind is Kind.CDF:
        # (z/t)^nu prod (1 - y/(q^(i-1) z)) = prod (z - y/q^(i-1)) / t^nu
        return (z / t) ** nu - _prod((z - y / q ** (i - 1)) / t for i in range(1, nu + 1))
    pre = q_number(nu, qp) * q_number(nu - 1, qp) / q ** (nu - 1) / t**nu
    return pre * _prod(z - y / q**i for i in range(1, nu - 1))


def unif_joint_kr(spec: OrderStatSpec, qp, kind, y: float, z: float, mode=Mode.CHECK) -> float:
    qp, kind, mode = as_qparam(qp), Kind(kind), Mode(mode)
    if spec.r is None:
        raise QDomainError("the (k, r) joint needs spec.r")
    q, nu, k, r, t = qp.q, spec.nu, spec.k, spec.r, spec.t
    if not _joint_gate(y, z, t, q ** (r - k), mode):
        return 0.0
    if kind is Kind.CDF:
        total = 0.0
        for j in range(r, nu + 1):
            upper = _upper_prod(z, t, q, nu - j)
            for s in range(k, j + 1):
                coef = q_multinomial(nu, [s, j - s], qp, Base.INVERSE)
                mid = _prod((z - y / q ** (i - 1)) / t for i in range(1, j - s + 1))
                total += coef * (y / t) ** s * mid * upper
        return total
    pre = (q_factorial(nu, qp)
           / (q_factorial(k - 1, qp) * q_factorial(r - k - 1, qp) * q_factorial(nu - r, qp))
           / q ** (r * (nu - r) + k * (r - k)))
    return (pre * y ** (k - 1) / t**r
            * _prod(z - y / q**i for i in range(1, r - k))
            * _upper_prod(z, t, q, nu - r))


def unif_joint_full_pdf(spec: OrderStatSpec, qp, point: QOrderedPoint, check: bool = False) -> float:
    """[nu]_q! / (q^C(nu,2) t^nu) on the q-ordered support.

    With ``check=True`` points failing :func:`support_check` give 0.
    """
    qp = as_qparam(qp)
    if not isinstance(point, QOrderedPoint):
        point = QOrderedPoint(tuple(point))
    if len(point.ys) != spec.nu:
        raise QDomainError(f"expected {spec.nu} coordinates, got {len(point.ys)}")
    if check and not support_check(point, spec.t, qp):
        return 0.0
    return full_joint_constant(spec.nu, spec.t, qp)


def full_joint_constant(nu: int, t: float, qp) -> float:
    qp = as_qparam(qp)
    return q_factorial(nu, qp) / (qp.q ** (nu * (nu - 1) // 2) * t**nu)


def classical_order_pdf(nu: int, k: int, y: float, t: float = 1.0) -> float:
    """Density of the k-th order statistic of nu iid uniforms on [0, t]."""
    c = math.factorial(nu) / (math.factorial(k - 1) * math.factorial(nu - k))
    return c * y ** (k - 1) * (t - y) ** (nu - k) / t**nu


# ---------------------------------------------------------------------------
# total masses (normalization)

def total_mass_univariate(spec: OrderStatSpec, qp, which) -> TruncationBound:
    qp = as_qparam(qp)
    return q_integrate(lambda y: unif_ord_pdf(spec, qp, which, y, Mode.MASKED), 0.0, spec.t, qp)


def _joint_region(spec, c):
    # argument order (y, z): z in [0, t], y in [0, c z]
    return NestedRegion((Limit(Scaled(c, 1)), Limit(spec.t)))


def total_mass_joint_minmax(spec: OrderStatSpec, qp) -> TruncationBound:
    qp = as_qparam(qp)
    region = _joint_region(spec, qp.q ** (spec.nu - 1))
    return q_integrate_nested(lambda y, z: unif_joint_minmax(spec, qp, Kind.PDF, y, z, Mode.MASKED),
                              region, qp)


def total_mass_joint_kr(spec: OrderStatSpec, qp) -> TruncationBound:
    qp = as_qparam(qp)
    region = _joint_region(spec, qp.q ** (spec.r - spec.k))
    return q_integrate_nested(lambda y, z: unif_joint_kr(spec, qp, Kind.PDF, y, z, Mode.MASKED),
                              region, qp)


def full_joint_region(spec: OrderStatSpec, qp) -> NestedRegion:
    """Chain y_nu in [0, t], y_{j} in [0, q y_{j+1}], in argument order y_nu, ..., y_1."""
    qp = as_qparam(qp)
    return chain_region(spec.t, [qp.q] * (spec.nu - 1))


def total_mass_full(spec: OrderStatSpec, qp, lattice: bool = True) -> TruncationBound:
    """Mass of the full ordered joint density over the nested chain.

    ``lattice=True`` uses the cumulative-sum fast path; ``False`` forces the
    plain iterated sums (only practical for small nu).
    """
    qp = as_qparam(qp)
    c = full_joint_constant(spec.nu, spec.t, qp)
    region = full_joint_region(spec, qp)
    if lattice:
        f = ProductIntegrand((lambda _y: c,) + (lambda _y: 1.0,) * (spec.nu - 1))
    else:
        f = lambda *ys: unif_joint_full_pdf(spec, qp, QOrderedPoint(tuple(reversed(ys))))
    return q_integrate_nested(f, region, qp)


# ---------------------------------------------------------------------------
# d_q F = f consistency

def _rel_scale_check(name, pairs, tol, params):
    """Worst probe of (q-difference, density) pairs.

    Errors are relative to the density, except that a vanishing density is
    compared absolutely against tol times the largest density seen.
    """
    scale = max((abs(b) for _, b in pairs), default=0.0) or 1.0
    worst, worst_pair = -1.0, (0.0, 0.0)
    for a, b in pairs:
        err = abs(a - b) / (abs(b) if b != 0 else scale)
        if err > worst:
            worst, worst_pair = err, (a, b)
    a, b = worst_pair
    abs_err = abs(a - b)
    return IdentityCheck(name, a, b, abs_err, worst, bool(worst <= tol), tol, "rel",
                         dict(params, probes=len(pairs)))


def dq_consistency_check(cdf: Callable[[float], float], pdf: Callable[[float], float],
                         probes: Sequence[float], qp, tol: float = 1e-10,
                         name: str = "dq_consistency", params: dict | None = None) -> VerificationReport:
    qp = as_qparam(qp)
    pairs = []
    for y in probes:
        if y <= 0:
            raise QDomainError(f"q-derivative probes must be > 0, got {y}")
        pairs.append((q_derivative(cdf, y, qp), pdf(y)))
    report = VerificationReport(meta={"check": name, "q": qp.q})
    report.checks.append(_rel_scale_check(name, pairs, tol, dict(params or {}, q=qp.q)))
    return report


def dq_mixed_consistency_check(cdf2: Callable[[float, float], float], pdf2: Callable[[float, float], float],
                               probes: Sequence[tuple[float, float]], qp, tol: float = 1e-10,
                               name: str = "dq_mixed_consistency", params: dict | None = None) -> VerificationReport:
    """Mixed q-difference (d_q z)(d_q y) F against the joint density."""
    qp = as_qparam(qp)
    q = qp.q
    pairs = []
    for y, z in probes:
        if y <= 0 or z <= 0:
            raise QDomainError("mixed q-derivative probes need y, z > 0")
        num = cdf2(y, z) - cdf2(q * y, z) - cdf2(y, q * z) + cdf2(q * y, q * z)
        pairs.append((num / ((1 - q) ** 2 * y * z), pdf2(y, z)))
    report = VerificationReport(meta={"check": name, "q": q})
    report.checks.append(_rel_scale_check(name, pairs, tol, dict(params or {}, q=q)))
    return report


def joint_kr_marginal_report(spec: OrderStatSpec, qp, zs: Sequence[float]) -> VerificationReport:
    """Exploratory: integrate the (k, r) density over y and compare with the
    r-th univariate density at z.  Reported, never asserted."""
    qp = as_qparam(qp)
    c = qp.q ** (spec.r - spec.k)
    report = VerificationReport(meta={"check": "kr_marginal", "asserted": False})
    for z in zs:
        inner = q_integrate(lambda y: unif_joint_kr(spec, qp, Kind.PDF, y, z, Mode.RAW), 0.0, c * z, qp)
        target = unif_ord_pdf(OrderStatSpec(spec.nu, spec.r, None, spec.t), qp, Which.KTH, z)
        report.checks.append(IdentityCheck.relative(
            "kr_marginal", inner.value, target, 1e-10,
            {"nu": spec.nu, "k": spec.k, "r": spec.r, "z": z}, asserted=False))
    return report
