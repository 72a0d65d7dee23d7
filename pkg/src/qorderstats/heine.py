"""The Heine process: one Bernoulli arrival per geometric time interval.

Interval k is (q^k t, q^(k-1) t], of length (1-q) q^(k-1) t.  An arrival
occurs there with probability a_k / (1 + a_k), a_k = lam (1-q) q^(k-1) t,
independently across intervals.  Only the first ``depth`` intervals are
simulated; the mass of arrivals below depth is bounded by lam t q^depth.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientAcceptanceError, QDomainError, SizeError
from .qcore import QParam, TruncationBound, as_qparam, q_exponential, q_factorial
from .report import IdentityCheck, VerificationReport

DEFAULT_DEPTH = 80
CHUNK = 100_000
MIN_ACCEPTED = 100


@dataclass(frozen=True)
class HeineParams:
    lam: float
    t: float
    qp: QParam
    depth: int = DEFAULT_DEPTH

    def __post_init__(self):
        for name in ("lam", "t"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise QDomainError(f"{name} must be positive and finite, got {v!r}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise QDomainError(f"depth must be a positive integer, got {self.depth!r}")
        object.__setattr__(self, "qp", as_qparam(self.qp))
        object.__setattr__(self, "depth", int(self.depth))

    @property
    def q(self) -> float:
        return self.qp.q

    def interval(self, k: int) -> tuple[float, float]:
        """(q^k t, q^(k-1) t]."""
        return self.q**k * self.t, self.q ** (k - 1) * self.t

    def interval_length(self, k: int) -> float:
        return (1.0 - self.q) * self.q ** (k - 1) * self.t


def depth_for_tail(lam_t: float, q: float, tol: float = 1e-12) -> int:
    """Smallest depth D with lam t q^D < tol."""
    if lam_t < tol:
        return 1
    return max(1, math.floor(math.log(tol / lam_t) / math.log(q)) + 1)


def arrival_tail_mass(hp: HeineParams) -> float:
    """Upper bound on P(some arrival in intervals beyond depth).

    1 - prod_{k>D}(1 - p_k) <= sum_{k>D} a_k = lam t q^D.
    """
    return min(1.0, hp.lam * hp.t * hp.q**hp.depth)


@dataclass(frozen=True)
class ArrivalRecord:
    arrivals: np.ndarray
    tail_mass: float

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.arrivals))


def interval_arrival_prob(k: int, hp: HeineParams) -> float:
    if k < 1:
        raise QDomainError(f"interval index must be >= 1, got {k}")
    a = hp.lam * hp.interval_length(k)
    return a / (1.0 + a)


def _interval_probs(hp: HeineParams) -> np.ndarray:
    a = hp.lam * (1.0 - hp.q) * hp.t * hp.q ** np.arange(hp.depth, dtype=float)
    return a / (1.0 + a)


def heine_pmf(k: int, hp: HeineParams) -> TruncationBound:
    """e_q(-lam t) q^C(k,2) (lam t)^k / [k]_q!."""
    if int(k) != k or k < 0:
        raise QDomainError(f"k must be a non-negative integer, got {k!r}")
    k = int(k)
    lt = hp.lam * hp.t
    e = q_exponential(-lt, hp.qp)
    factor = hp.q ** (k * (k - 1) // 2) * lt**k / q_factorial(k, hp.qp)
    return TruncationBound(e.value * factor, e.tail_bound * factor)


def pmf_oracle_dp(hp: HeineParams, kmax: int) -> np.ndarray:
    """Poisson-binomial law of the arrival count over intervals 1..depth.

    Entry k is P(k arrivals among the simulated intervals) for k <= kmax.
    The omitted mass below depth is :func:`arrival_tail_mass`.
    """
    if kmax < 0:
        raise QDomainError("kmax must be >= 0")
    dist = np.zeros(hp.depth + 1)
    dist[0] = 1.0
    for j, p in enumerate(_interval_probs(hp), start=1):
        dist[1:j + 1] = dist[1:j + 1] * (1.0 - p) + dist[:j] * p
        dist[0] *= 1.0 - p
    out = np.zeros(kmax + 1)
    n = min(kmax, hp.depth) + 1
    out[:n] = dist[:n]
    return out


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return np.random.default_rng(rng)


def simulate(hp: HeineParams, rng) -> ArrivalRecord:
    rng = _as_rng(rng)
    arrivals = rng.random(hp.depth) < _interval_probs(hp)
    return ArrivalRecord(arrivals, arrival_tail_mass(hp))


@dataclass
class BatchStats:
    """Sufficient statistics of a batch of simulated records.

    ``config_hits[nu]`` is (records with count nu, of those with arrivals
    exactly in intervals 1..nu).
    """

    trials: int
    count_hist: np.ndarray
    interval_hits: np.ndarray
    config_hits: dict[int, tuple[int, int]]

    def merge(self, other: "BatchStats") -> "BatchStats":
        hits = {nu: (a + other.config_hits[nu][0], b + other.config_hits[nu][1])
                for nu, (a, b) in self.config_hits.items()}
        return BatchStats(self.trials + other.trials, self.count_hist + other.count_hist,
                          self.interval_hits + other.interval_hits, hits)


def _chunk_stats(hp: HeineParams, n: int, seed_seq: np.random.SeedSequence, nus) -> BatchStats:
    rng = np.random.default_rng(seed_seq)
    rec = rng.random((n, hp.depth)) < _interval_probs(hp)
    counts = rec.sum(axis=1)
    hist = np.bincount(counts, minlength=hp.depth + 1)
    hits = {}
    for nu in nus:
        acc = counts == nu
        hits[nu] = (int(acc.sum()), int((acc & rec[:, :nu].all(axis=1)).sum()))
    return BatchStats(n, hist, rec.sum(axis=0), hits)


def simulate_batch(hp: HeineParams, trials: int, seed: int, nus=(), workers: int | None = None) -> BatchStats:
    """Simulate ``trials`` records in fixed-size chunks.

    Chunk i draws from the i-th child of ``SeedSequence(seed)``, so the
    result depends only on (seed, trials), never on ``workers``.
    """
    if trials < 1:
        raise QDomainError("trials must be >= 1")
    nus = tuple(nus)
    if any(nu >= hp.depth or nu < 1 for nu in nus):
        raise SizeError("conditioning sizes must satisfy 1 <= nu < depth")
    sizes = [CHUNK] * (trials // CHUNK) + ([trials % CHUNK] if trials % CHUNK else [])
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    if workers and workers > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_chunk_stats, [hp] * len(sizes), sizes, seqs, [nus] * len(sizes)))
    else:
        parts = [_chunk_stats(hp, n, s, nus) for n, s in zip(sizes, seqs)]
    out = parts[0]
    for p in parts[1:]:
        out = out.merge(p)
    return out


def conditional_config_probability(nu: int, hp: HeineParams) -> float:
    """P(one arrival in each interval 1..nu, none below q^nu t | X(t) = nu).

    The no-arrival factor over k > nu is e_q(-lam q^nu t), taken exactly
    rather than truncated at depth.
    """
    if nu < 1:
        raise QDomainError(f"nu must be >= 1, got {nu}")
    if nu >= hp.depth:
        raise SizeError(f"nu={nu} needs depth > nu, got depth {hp.depth}")
    p = _interval_probs(hp)[:nu]
    empty_below = q_exponential(-hp.lam * hp.q**nu * hp.t, hp.qp).value
    return float(np.prod(p)) * empty_below / heine_pmf(nu, hp).value


def config_box_measure(nu: int, hp: HeineParams) -> float:
    """prod_{j<nu} (1-q) q^j t, the volume of the configuration event."""
    return math.prod(hp.interval_length(k) for k in range(1, nu + 1))


def conditional_density_value(nu: int, hp: HeineParams) -> float:
    """[nu]_q! / (q^C(nu,2) t^nu)."""
    if nu < 1:
        raise QDomainError(f"nu must be >= 1, got {nu}")
    return q_factorial(nu, hp.qp) / (hp.q ** (nu * (nu - 1) // 2) * hp.t**nu)


def _sigma_check(name, emp, p, n, params, sigmas=4.0):
    se = math.sqrt(p * (1.0 - p) / n) if n else math.inf
    return IdentityCheck.absolute(name, emp, p, sigmas * se, dict(params, n=n, se=se))


def conditional_mc_check(nu: int, hp: HeineParams, trials: int, seed: int,
                         stats: BatchStats | None = None, workers: int | None = None) -> VerificationReport:
    """Rejection-sample records with count nu; compare the configuration
    frequency with :func:`conditional_config_probability` at 4 standard errors."""
    if trials < 10_000:
        raise QDomainError("the conditional Monte Carlo check needs trials >= 10^4")
    if stats is None or nu not in stats.config_hits:
        stats = simulate_batch(hp, trials, seed, nus=(nu,), workers=workers)
    accepted, hits = stats.config_hits[nu]
    if accepted < MIN_ACCEPTED:
        raise InsufficientAcceptanceError(f"only {accepted} records had {nu} arrivals")
    exact = conditional_config_probability(nu, hp)
    params = {"nu": nu, "lam": hp.lam, "t": hp.t, "q": hp.q, "trials": stats.trials,
              "accepted": accepted}
    report = VerificationReport(meta={"check": "conditional_mc", "seed": seed})
    report.checks.append(_sigma_check("conditional_mc", hits / accepted, exact, accepted, params))
    return report


def pmf_mc_check(hp: HeineParams, trials: int, seed: int, kmax: int = 6,
                 stats: BatchStats | None = None, workers: int | None = None) -> VerificationReport:
    """Empirical count frequencies against :func:`heine_pmf` at 4 standard errors."""
    if stats is None:
        stats = simulate_batch(hp, trials, seed, workers=workers)
    report = VerificationReport(meta={"check": "pmf_mc", "seed": seed})
    for k in range(kmax + 1):
        report.checks.append(_sigma_check(
            "heine_pmf_mc", stats.count_hist[k] / stats.trials, heine_pmf(k, hp).value, stats.trials,
            {"k": k, "lam": hp.lam, "t": hp.t, "q": hp.q}))
    return report


def interval_mc_check(hp: HeineParams, trials: int, seed: int, kmax: int = 8,
                      stats: BatchStats | None = None, workers: int | None = None) -> VerificationReport:
    """Per-interval arrival frequencies against :func:`interval_arrival_prob`."""
    if stats is None:
        stats = simulate_batch(hp, trials, seed, workers=workers)
    report = VerificationReport(meta={"check": "interval_mc", "seed": seed})
    for k in range(1, kmax + 1):
        report.checks.append(_sigma_check(
            "heine_interval_mc", stats.interval_hits[k - 1] / stats.trials, interval_arrival_prob(k, hp),
            stats.trials, {"k": k, "lam": hp.lam, "t": hp.t, "q": hp.q}))
    return report
