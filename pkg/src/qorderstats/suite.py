"""The acceptance criteria as functions returning verification reports.

Each ``criterion_N`` is self-contained and deterministic for a given seed.
:func:`run_all` concatenates them, tagging every check with its criterion.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from . import heine as H
from . import orderstat as O
from .qcore import QParam, as_qparam, q_integrate, q_multinomial
from .qidentity import (
    Variant, check_multinomial_inversion_oracle, check_multinomial_partition_sum,
    check_qbinom_product, check_subset_weight_sum, check_vandermonde_identity,
    compositions, count_ordered_set_partitions,
)
from .report import IdentityCheck, VerificationReport

IDENTITY_QS = (0.25, 0.5, 0.75, 0.9)
PRODUCT_TS = (-1.0, -0.3, 0.0, 0.7, 1.0)
HEINE_GRID = [(lt, q) for lt in (0.5, 1.0, 2.0) for q in (0.25, 0.5, 0.9)]
FUBINI = (1, 1, 3, 13, 75, 541)

TITLES = {
    1: "identity suite (subsets, Vandermonde, q^-1 product)",
    2: "q-multinomial oracles and Fubini counts",
    3: "densities integrate to one",
    4: "q-difference of each CDF equals its density",
    5: "generic formulas specialise to the closed forms",
    6: "q-uniform moments, variance and sampler",
    7: "Heine pmf against DP oracle, sum and Monte Carlo",
    8: "conditional waiting-time configuration",
    9: "classical limit as q -> 1",
}


def _report(checks, **meta) -> VerificationReport:
    return VerificationReport(list(checks), meta)


def criterion_1(**_) -> VerificationReport:
    checks = []
    for q in IDENTITY_QS:
        qp = QParam(q)
        for n in range(9):
            for k in range(n + 1):
                checks.append(check_subset_weight_sum(n, k, qp, tol=1e-9))
            for y in range(1, 6):
                for variant in Variant:
                    checks.append(check_vandermonde_identity(n, y, qp, variant, tol=1e-9))
            for t in PRODUCT_TS:
                checks.append(check_qbinom_product(n, t, qp, tol=1e-9, atol=1e-12))
    return _report(checks)


def criterion_2(**_) -> VerificationReport:
    checks = []
    for q in IDENTITY_QS:
        qp = QParam(q)
        for n in range(8):
            for parts in compositions(n, 4):
                checks.append(check_multinomial_partition_sum(n, parts, qp, tol=1e-10))
                checks.append(check_multinomial_inversion_oracle(n, parts, qp, tol=1e-10))
    for n, want in enumerate(FUBINI):
        got = count_ordered_set_partitions(n)
        checks.append(IdentityCheck.absolute("fubini_count", got, want, 0.0, {"n": n}))
    return _report(checks)


def criterion_3(q: float = 0.5, **_) -> VerificationReport:
    qp = as_qparam(q)
    tol = 1e-8
    checks = []

    def add(name, mass, params):
        checks.append(IdentityCheck.absolute(name, mass.value, 1.0, tol,
                                             dict(params, q=qp.q, tail=mass.tail_bound)))

    for nu in range(1, 7):
        for which in (O.Which.MAX, O.Which.MIN):
            add(f"mass_{which.value}", O.total_mass_univariate(O.OrderStatSpec(nu), qp, which), {"nu": nu})
        for k in range(1, nu + 1):
            add("mass_kth", O.total_mass_univariate(O.OrderStatSpec(nu, k), qp, O.Which.KTH),
                {"nu": nu, "k": k})
    for nu in range(2, 6):
        add("mass_minmax", O.total_mass_joint_minmax(O.OrderStatSpec(nu), qp), {"nu": nu})
        for k in range(1, nu):
            for r in range(k + 1, nu + 1):
                add("mass_kr", O.total_mass_joint_kr(O.OrderStatSpec(nu, k, r), qp),
                    {"nu": nu, "k": k, "r": r})
    for nu in range(1, 6):
        add("mass_full", O.total_mass_full(O.OrderStatSpec(nu), qp), {"nu": nu})
    return _report(checks)


def _joint_probes(spec, c, n_side=10):
    # strictly inside y < c z, z <= t
    return [(float(u * c * z), float(z))
            for z in np.linspace(spec.t / n_side, spec.t, n_side)
            for u in np.linspace(0.05, 0.95, n_side)]


def criterion_4(q: float = 0.5, **_) -> VerificationReport:
    qp = as_qparam(q)
    tol = 1e-10
    out = VerificationReport()
    t = 1.0
    probes = [t * i / 100 for i in range(1, 101)]
    for nu in range(1, 7):
        cases = [(O.OrderStatSpec(nu), O.Which.MAX), (O.OrderStatSpec(nu), O.Which.MIN)]
        cases += [(O.OrderStatSpec(nu, k), O.Which.KTH) for k in range(1, nu + 1)]
        for spec, which in cases:
            rep = O.dq_consistency_check(
                lambda y, s=spec, w=which: O.unif_ord_cdf(s, qp, w, y),
                lambda y, s=spec, w=which: O.unif_ord_pdf(s, qp, w, y),
                probes, qp, tol, name=f"dq_{which.value}", params={"nu": nu, "k": spec.k})
            out.extend(rep.checks)
    raw = O.Mode.RAW
    for nu in range(2, 7):
        spec = O.OrderStatSpec(nu, t=t)
        rep = O.dq_mixed_consistency_check(
            lambda y, z, s=spec: O.unif_joint_minmax(s, qp, O.Kind.CDF, y, z, raw),
            lambda y, z, s=spec: O.unif_joint_minmax(s, qp, O.Kind.PDF, y, z, raw),
            _joint_probes(spec, qp.q ** (nu - 1)), qp, tol, name="dq_minmax", params={"nu": nu})
        out.extend(rep.checks)
        for k in range(1, nu):
            for r in range(k + 1, nu + 1):
                spec = O.OrderStatSpec(nu, k, r, t)
                rep = O.dq_mixed_consistency_check(
                    lambda y, z, s=spec: O.unif_joint_kr(s, qp, O.Kind.CDF, y, z, raw),
                    lambda y, z, s=spec: O.unif_joint_kr(s, qp, O.Kind.PDF, y, z, raw),
                    _joint_probes(spec, qp.q ** (r - k)), qp, tol, name="dq_kr",
                    params={"nu": nu, "k": k, "r": r})
                out.extend(rep.checks)
    return out


def criterion_5(q: float = 0.5, **_) -> VerificationReport:
    qp = as_qparam(q)
    t = 1.0
    checks = []
    ys = [t * i / 49 for i in range(50)]

    def rel(name, a, b, tol, params):
        # atol only applies when one side is exactly zero
        checks.append(IdentityCheck.relative(name, a, b, tol, params, atol=1e-14))

    for nu in range(1, 7):
        fam = O.quniform_family(nu, t, qp)
        for y in ys:
            for which in (O.Which.MAX, O.Which.MIN):
                rel(f"generic_{which.value}", O.ord_cdf_generic(fam, which, y),
                    O.unif_ord_cdf(O.OrderStatSpec(nu, t=t), qp, which, y), 1e-10, {"nu": nu, "y": y})
            for k in range(1, nu + 1):
                rel("generic_kth", O.ord_cdf_generic(fam, O.Which.KTH, y, k),
                    O.unif_ord_cdf(O.OrderStatSpec(nu, k, t=t), qp, O.Which.KTH, y), 1e-10,
                    {"nu": nu, "k": k, "y": y})
        if nu < 2:
            continue
        for y, z in _joint_probes(O.OrderStatSpec(nu, t=t), qp.q ** (nu - 1), 7)[:50]:
            rel("generic_minmax", O.joint_minmax_cdf_generic(fam, y, z),
                O.unif_joint_minmax(O.OrderStatSpec(nu, t=t), qp, O.Kind.CDF, y, z), 1e-10,
                {"nu": nu, "y": y, "z": z})
        for k in range(1, nu):
            for r in range(k + 1, nu + 1):
                spec = O.OrderStatSpec(nu, k, r, t)
                for y, z in _joint_probes(spec, qp.q ** (r - k), 7)[:50]:
                    rel("generic_kr", O.joint_kr_cdf_generic(fam, k, r, y, z),
                        O.unif_joint_kr(spec, qp, O.Kind.CDF, y, z), 1e-10,
                        {"nu": nu, "k": k, "r": r, "y": y, "z": z})

    # cross-consistency of the closed forms
    for nu in range(1, 7):
        s1, sn = O.OrderStatSpec(nu, 1, t=t), O.OrderStatSpec(nu, nu, t=t)
        base = O.OrderStatSpec(nu, t=t)
        for y in ys:
            for fn, kind in ((O.unif_ord_cdf, "cdf"), (O.unif_ord_pdf, "pdf")):
                rel(f"kth1_is_min_{kind}", fn(s1, qp, O.Which.KTH, y), fn(base, qp, O.Which.MIN, y),
                    1e-12, {"nu": nu, "y": y})
                rel(f"kthnu_is_max_{kind}", fn(sn, qp, O.Which.KTH, y), fn(base, qp, O.Which.MAX, y),
                    1e-12, {"nu": nu, "y": y})
        if nu < 2:
            continue
        spec = O.OrderStatSpec(nu, 1, nu, t)
        for y, z in _joint_probes(spec, qp.q ** (nu - 1), 7)[:50]:
            for kind in O.Kind:
                rel(f"kr_1nu_is_minmax_{kind.value}", O.unif_joint_kr(spec, qp, kind, y, z),
                    O.unif_joint_minmax(spec, qp, kind, y, z), 1e-12, {"nu": nu, "y": y, "z": z})
    spec2 = O.OrderStatSpec(2, 1, 2, t)
    for y, z in _joint_probes(spec2, qp.q, 7)[:50]:
        rel("kr_12_is_full_constant", O.unif_joint_kr(spec2, qp, O.Kind.PDF, y, z),
            O.unif_joint_full_pdf(spec2, qp, O.QOrderedPoint((y, z))), 1e-12, {"y": y, "z": z})
    return _report(checks)


def criterion_6(q: float = 0.5, seed: int = 0, trials: int = 10**6, **_) -> VerificationReport:
    qp = as_qparam(q)
    checks = []
    for beta in (1.0, 2.5):
        d = O.QUniform(beta, qp)
        for r in range(7):
            direct = q_integrate(lambda x: x**r * O.quniform_pdf(x, d), 0.0, beta, qp).value
            checks.append(IdentityCheck.relative("quniform_moment", O.quniform_moment(r, d), direct,
                                                 1e-10, {"r": r, "beta": beta, "q": qp.q}))
        m1, m2 = O.quniform_moment(1, d), O.quniform_moment(2, d)
        checks.append(IdentityCheck.relative("quniform_variance", O.quniform_variance(d), m2 - m1**2,
                                             1e-12, {"beta": beta, "q": qp.q}))
    d = O.QUniform(1.0, qp)
    xs = O.quniform_sample(d, np.random.default_rng(seed), trials)
    se = math.sqrt(O.quniform_variance(d) / trials)
    checks.append(IdentityCheck.absolute("quniform_sampler_mean", float(xs.mean()), O.quniform_moment(1, d),
                                         4 * se, {"trials": trials, "seed": seed, "se": se, "q": qp.q}))
    return _report(checks)


def criterion_7(seed: int = 0, trials: int = 10**6, workers=None, **_) -> VerificationReport:
    checks = []
    for lt, q in HEINE_GRID:
        qp = QParam(q)
        hp = H.HeineParams(lt, 1.0, qp, depth=H.depth_for_tail(lt, q, 1e-12))
        dp = H.pmf_oracle_dp(hp, 20)
        for k in range(21):
            checks.append(IdentityCheck.absolute("heine_pmf_vs_dp", H.heine_pmf(k, hp).value, dp[k], 1e-8,
                                                 {"k": k, "lam_t": lt, "q": q, "depth": hp.depth}))
        total, k = 0.0, 0
        while True:
            term = H.heine_pmf(k, hp).value
            total += term
            if k > 1 and term < 1e-16:
                break
            k += 1
        checks.append(IdentityCheck.absolute("heine_pmf_sum", total, 1.0, 1e-10, {"lam_t": lt, "q": q, "kmax": k}))
    hp = H.HeineParams(1.0, 1.0, QParam(0.5))
    stats = H.simulate_batch(hp, trials, seed, workers=workers)
    checks += H.pmf_mc_check(hp, trials, seed, 6, stats=stats).checks
    checks += H.interval_mc_check(hp, trials, seed, 8, stats=stats).checks
    return _report(checks)


def criterion_8(q: float = 0.5, seed: int = 0, trials: int = 10**6, workers=None, **_) -> VerificationReport:
    checks = []
    settings = [(lam, t, qq) for qq in sorted({0.25, 0.5, 0.9, as_qparam(q).q})
                for lam, t in ((0.3, 1.0), (1.0, 1.0), (2.0, 0.7), (5.0, 2.0))]
    for nu in range(1, 6):
        ref = {}
        for lam, t, qq in settings:
            hp = H.HeineParams(lam, t, QParam(qq))
            got = H.conditional_config_probability(nu, hp)
            target = q_multinomial(nu, [1] * nu, hp.qp) * (1 - qq) ** nu
            params = {"nu": nu, "lam": lam, "t": t, "q": qq}
            checks.append(IdentityCheck.absolute("config_probability", got, target, 1e-8, params))
            box = H.conditional_density_value(nu, hp) * H.config_box_measure(nu, hp)
            checks.append(IdentityCheck.absolute("density_times_box", box, got, 1e-10, params))
            const = O.full_joint_constant(nu, t, hp.qp)
            checks.append(IdentityCheck.relative("density_is_full_joint", H.conditional_density_value(nu, hp),
                                                 const, 1e-12, params))
            if qq in ref:
                checks.append(IdentityCheck.absolute("config_invariance", got, ref[qq], 1e-10, params))
            else:
                ref[qq] = got
    hp = H.HeineParams(1.0, 1.0, as_qparam(q))
    stats = H.simulate_batch(hp, trials, seed + 1, nus=(1, 2, 3), workers=workers)
    for nu in (1, 2, 3):
        checks += H.conditional_mc_check(nu, hp, trials, seed + 1, stats=stats).checks
    return _report(checks)


def criterion_9(**_) -> VerificationReport:
    qp = QParam(0.999)
    t = 1.0
    checks = []
    for nu in range(1, 6):
        for k in range(1, nu + 1):
            for u in (0.2, 0.5, 0.8):
                got = O.unif_ord_pdf(O.OrderStatSpec(nu, k, t=t), qp, O.Which.KTH, u * t)
                want = O.classical_order_pdf(nu, k, u * t, t)
                checks.append(IdentityCheck.relative("classical_limit", got, want, 0.02,
                                                     {"nu": nu, "k": k, "y": u * t, "q": qp.q}))
    return _report(checks)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def run_all(q: float = 0.5, seed: int = 0, trials: int = 10**6, workers=None, only=None) -> VerificationReport:
    out = VerificationReport(meta={"q": q, "seed": seed, "trials": trials})
    for n, fn in CRITERIA.items():
        if only and n not in only:
            continue
        rep = fn(q=q, seed=seed, trials=trials, workers=workers)
        out.extend(replace(c, params=dict(c.params, criterion=n)) for c in rep.checks)
    return out
