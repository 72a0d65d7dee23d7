import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qorderstats import orderstat as O
from qorderstats.errors import QDomainError, SizeError
from qorderstats.qcore import QParam, q_integrate

QP = QParam(0.5)
MAX, MIN, KTH = O.Which.MAX, O.Which.MIN, O.Which.KTH
CDF, PDF = O.Kind.CDF, O.Kind.PDF


def spec(nu, k=1, r=None, t=1.0):
    return O.OrderStatSpec(nu, k, r, t)


# q-uniform law

def test_quniform_density_and_cdf():
    d = O.QUniform(2.0, QP)
    assert O.quniform_pdf(1.0, d) == 0.5
    assert O.quniform_pdf(-1.0, d) == 0
    assert O.quniform_pdf(2.0, d) == 0.5
    d1 = O.QUniform(1.0, QP)
    assert O.quniform_cdf(0.0, d1) == 0
    assert O.quniform_cdf(0.25, d1) == 0.25
    assert O.quniform_cdf(3.0, d1) == 1
    with pytest.raises(QDomainError):
        O.QUniform(0.0, QP)


def test_quniform_cdf_is_q_integral_of_density():
    d = O.QUniform(1.0, QP)
    for x in (0.25, 0.5, 1.0):
        assert q_integrate(lambda u: O.quniform_pdf(u, d), 0.0, x, QP).value == pytest.approx(x, rel=1e-14)


def test_quniform_moments():
    d = O.QUniform(1.0, QP)
    assert O.quniform_moment(0, d) == 1
    assert O.quniform_moment(1, d) == pytest.approx(2 / 3)
    assert O.quniform_variance(d) == pytest.approx(0.5 / (1.75 * 2.25), rel=1e-15)
    assert O.quniform_variance(d) == pytest.approx(0.126984, abs=1e-6)
    with pytest.raises(QDomainError):
        O.quniform_moment(-1, d)


@pytest.mark.parametrize("q", [0.25, 0.5, 0.9])
def test_quniform_moments_by_integration(q):
    d = O.QUniform(1.7, QParam(q))
    for r in range(7):
        direct = q_integrate(lambda x: x**r / d.beta, 0.0, d.beta, d.qp).value
        assert O.quniform_moment(r, d) == pytest.approx(direct, rel=1e-10)


def test_quniform_sampler_support_and_atoms():
    d = O.QUniform(3.0, QP)
    xs = O.quniform_sample(d, np.random.default_rng(3), 20_000)
    n = np.log(xs / d.beta) / np.log(QP.q)
    assert np.allclose(n, np.round(n), atol=1e-9) and np.all(n >= -1e-12)
    small = O.QUniform(1.0, QParam(0.01))
    ys = O.quniform_sample(small, np.random.default_rng(4), 20_000)
    assert abs(np.mean(ys == 1.0) - 0.99) < 4 * math.sqrt(0.99 * 0.01 / 20_000)


def test_quniform_sampler_mean():
    d = O.QUniform(1.0, QP)
    n = 10**6
    xs = O.quniform_sample(d, np.random.default_rng(11), n)
    se = math.sqrt(O.quniform_variance(d) / n)
    assert abs(xs.mean() - 2 / 3) < 4 * se


def test_quniform_sampler_is_reproducible():
    d = O.QUniform(1.0, QP)
    a = O.quniform_sample(d, np.random.default_rng(5), 100)
    b = O.quniform_sample(d, np.random.default_rng(5), 100)
    assert np.array_equal(a, b)


def test_pit_check():
    d = O.QUniform(2.5, QParam(0.3))
    rep = O.pit_check(d, [0.0, 0.37, 1.0, 0.999])
    assert rep.ok and rep.checks[0].abs_err <= 1e-12
    with pytest.raises(QDomainError):
        O.pit_check(d, [1.5])


# supports and families

def test_support_partition():
    sp = O.SupportPartition(1.0, 3, QP)
    assert sp.intervals == [(0.5, 1.0), (0.25, 0.5), (0.0, 0.25)]
    assert sp.interval_of(1.0) == 1 and sp.interval_of(0.5) == 2 and sp.interval_of(0.0) == 3
    assert sp.support(3) == (0.0, 0.25)
    with pytest.raises(QDomainError):
        sp.interval_of(1.5)


def test_cdf_family_validation():
    O.quniform_family(4, 1.0, QP, clamp=True).validate()
    O.quniform_family(4, 1.0, QP).validate()
    bad = O.CdfFamily(1, (lambda x: 0.5 * x,), O.SupportPartition(1.0, 1, QP))
    with pytest.raises(QDomainError):
        bad.validate()
    with pytest.raises(QDomainError):
        O.CdfFamily(2, (lambda x: x,), O.SupportPartition(1.0, 2, QP))


def test_order_stat_spec_validation():
    with pytest.raises(QDomainError):
        spec(3, 4)
    with pytest.raises(QDomainError):
        spec(3, 2, 2)
    with pytest.raises(QDomainError):
        spec(0)
    with pytest.raises(QDomainError):
        O.QOrderedPoint((0.1, math.nan))


def test_support_check():
    assert O.support_check(O.QOrderedPoint((0.4,)), 1.0, QP)
    assert O.support_check(O.QOrderedPoint((0.1, 0.3)), 1.0, QP)
    assert not O.support_check(O.QOrderedPoint((0.2, 0.3)), 1.0, QP)
    # ties fail: 0.15 == q * 0.3
    assert not O.support_check(O.QOrderedPoint((0.15, 0.3)), 1.0, QP)
    assert not O.support_check(O.QOrderedPoint((0.1, 1.2)), 1.0, QP)


# univariate closed forms

def test_univariate_examples():
    assert O.unif_ord_cdf(spec(2), QP, MAX, 0.5) == 0.25
    assert O.unif_ord_cdf(spec(2), QP, MIN, 0.25) == 0.625
    assert O.unif_ord_cdf(spec(2, 2), QP, KTH, 0.3) == pytest.approx(0.09, rel=1e-14)
    assert O.unif_ord_pdf(spec(2), QP, MAX, 0.5) == 0.75
    assert O.unif_ord_pdf(spec(2), QP, MIN, 0.5) == 1.5
    for y in np.linspace(0, 1, 20):
        assert O.unif_ord_pdf(spec(2, 1), QP, KTH, y) == pytest.approx(3 * (1 - y), abs=1e-15)
    with pytest.raises(QDomainError):
        O.unif_ord_cdf(spec(2), QP, MAX, 1.5)


@pytest.mark.parametrize("nu,k", [(n, k) for n in range(1, 9) for k in range(1, n + 1)])
def test_kth_prefactor_forms_agree(nu, k):
    assert O.kth_pdf_prefactor(nu, k, QP) == pytest.approx(O.kth_pdf_prefactor_powers(nu, k, QP), rel=1e-13)


def test_generic_examples():
    fam = O.quniform_family(3, 1.0, QP)
    assert O.ord_cdf_generic(fam, MAX, 0.5) == pytest.approx(0.125, rel=1e-15)
    fam2 = O.quniform_family(2, 1.0, QP)
    assert O.ord_cdf_generic(fam2, KTH, 0.25, k=1) == pytest.approx(0.625, rel=1e-15)
    one = O.quniform_family(1, 1.0, QP)
    for w in O.Which:
        assert O.ord_cdf_generic(one, w, 0.3, k=1) == pytest.approx(0.3)


@pytest.mark.parametrize("nu", range(1, 9))
def test_generic_univariate_specialises(nu):
    fam = O.quniform_family(nu, 2.0, QP)
    for y in np.linspace(0, 2.0, 50):
        for w in (MAX, MIN):
            a, b = O.ord_cdf_generic(fam, w, y), O.unif_ord_cdf(spec(nu, t=2.0), QP, w, y)
            assert a == pytest.approx(b, rel=1e-10, abs=1e-12)
        for k in range(1, nu + 1):
            a = O.ord_cdf_generic(fam, KTH, y, k)
            b = O.unif_ord_cdf(spec(nu, k, t=2.0), QP, KTH, y)
            assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_clamped_family_agrees_on_lattice_only():
    fam = O.quniform_family(3, 1.0, QP, clamp=True)
    for n in range(30):
        y = QP.q**n
        for k in range(1, 4):
            assert O.ord_cdf_generic(fam, KTH, y, k) == pytest.approx(
                O.unif_ord_cdf(spec(3, k), QP, KTH, y), abs=1e-15)
    # off the lattice the clamped MIN is the true CDF of a minimum, the closed form is not
    assert O.ord_cdf_generic(fam, MIN, 0.8) == 1.0
    assert O.unif_ord_cdf(spec(2), QP, MIN, 0.8) == pytest.approx(1.12)


def test_kth_cap():
    fam = O.quniform_family(13, 1.0, QP)
    with pytest.raises(SizeError):
        O.ord_cdf_generic(fam, KTH, 0.5, k=3)
    with pytest.raises(QDomainError):
        O.ord_cdf_generic(O.quniform_family(3, 1.0, QP), KTH, 0.5, k=4)


@pytest.mark.parametrize("nu", range(1, 7))
def test_univariate_cdfs_monotone_on_lattice(nu):
    ys = sorted(QP.q**n for n in range(60))
    for k in range(1, nu + 1):
        F = [O.unif_ord_cdf(spec(nu, k), QP, KTH, y) for y in ys]
        assert np.all(np.diff(F) >= -1e-15)
        assert F[-1] == pytest.approx(1.0)


def test_min_cdf_not_monotone_between_lattice_points():
    # 3y - 2y^2 peaks at y = 3/4 and exceeds 1 there
    F = lambda y: O.unif_ord_cdf(spec(2), QP, MIN, y)
    assert F(0.75) == pytest.approx(1.125)
    assert F(0.9) < F(0.75)


# joint closed forms

def test_joint_minmax_examples():
    fam = O.quniform_family(2, 1.0, QP)
    assert O.joint_minmax_cdf_generic(fam, 0.1, 0.8) == pytest.approx(0.22, rel=1e-14)
    assert O.unif_joint_minmax(spec(2), QP, CDF, 0.1, 0.8) == pytest.approx(0.22, rel=1e-14)
    assert O.unif_joint_minmax(spec(2), QP, PDF, 0.1, 0.8) == 3.0
    assert O.unif_joint_minmax(spec(3), QP, PDF, 0.05, 0.8) == pytest.approx(7.35, rel=1e-14)
    # at y = 0 both products coincide: P(min <= 0, max <= z) = 0
    assert O.unif_joint_minmax(spec(3), QP, CDF, 0.0, 0.6) == pytest.approx(0, abs=1e-15)
    assert O.joint_minmax_cdf_generic(O.quniform_family(3, 1.0, QP), 0.0, 0.6) == pytest.approx(0, abs=1e-15)
    with pytest.raises(QDomainError):
        O.unif_joint_minmax(spec(2), QP, CDF, 0.4, 0.8)
    with pytest.raises(QDomainError):
        O.joint_minmax_cdf_generic(fam, 0.4, 0.8)
    with pytest.raises(QDomainError):
        O.unif_joint_minmax(spec(1), QP, PDF, 0.0, 0.5)


def test_joint_modes():
    s = spec(3)
    assert O.unif_joint_minmax(s, QP, PDF, 0.3, 0.8, mode="masked") == 0
    assert O.unif_joint_minmax(s, QP, PDF, 0.2, 0.8, mode="masked") > 0  # closed boundary y = q^2 z
    assert O.unif_joint_minmax(s, QP, PDF, 0.3, 0.8, mode="raw") != 0
    with pytest.raises(QDomainError):
        O.unif_joint_minmax(s, QP, PDF, 0.2, 0.8)


def test_joint_kr_examples():
    fam = O.quniform_family(2, 1.0, QP)
    assert O.joint_kr_cdf_generic(fam, 1, 2, 0.1, 0.8) == pytest.approx(0.22, rel=1e-14)
    assert O.unif_joint_kr(spec(2, 1, 2), QP, PDF, 0.1, 0.8) == 3.0
    with pytest.raises(QDomainError):
        O.unif_joint_kr(spec(4, 1, 3), QP, CDF, 0.3, 0.8)
    with pytest.raises(QDomainError):
        O.joint_kr_cdf_generic(O.quniform_family(4, 1.0, QP), 1, 3, 0.3, 0.8)
    with pytest.raises(SizeError):
        O.joint_kr_cdf_generic(O.quniform_family(10, 1.0, QP), 1, 2, 0.0, 0.5)
    with pytest.raises(QDomainError):
        O.unif_joint_kr(spec(3), QP, CDF, 0.1, 0.5)


def test_joint_kr_literal_reading_is_reported_not_used():
    fam = O.quniform_family(2, 1.0, QP)
    lit = O.joint_kr_cdf_generic(fam, 1, 2, 0.1, 0.8, O.Interpretation.LITERAL)
    assert lit == pytest.approx(0.29, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(nu=st.integers(2, 6), data=st.data())
def test_generic_kr_specialises(nu, data):
    k = data.draw(st.integers(1, nu - 1))
    r = data.draw(st.integers(k + 1, nu))
    z = data.draw(st.floats(0.01, 1.0))
    u = data.draw(st.floats(0.0, 0.999))
    y = u * QP.q ** (r - k) * z
    fam = O.quniform_family(nu, 1.0, QP)
    a = O.joint_kr_cdf_generic(fam, k, r, y, z)
    b = O.unif_joint_kr(spec(nu, k, r), QP, CDF, y, z)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("nu", range(2, 7))
def test_kr_one_nu_is_minmax(nu):
    s = spec(nu, 1, nu)
    for z in np.linspace(0.05, 1, 5):
        for u in np.linspace(0, 0.99, 4):
            y = u * QP.q ** (nu - 1) * z
            for kind in O.Kind:
                assert O.unif_joint_kr(s, QP, kind, y, z) == pytest.approx(
                    O.unif_joint_minmax(s, QP, kind, y, z), rel=1e-12, abs=1e-15)


def test_full_joint_values():
    assert O.unif_joint_full_pdf(spec(2), QP, O.QOrderedPoint((0.1, 0.3))) == 3.0
    assert O.unif_joint_full_pdf(spec(1, t=2.0), QP, (0.5,)) == 0.5
    assert O.unif_joint_full_pdf(spec(3), QP, (0.01, 0.1, 0.3)) == 21.0
    assert O.unif_joint_full_pdf(spec(2), QP, (0.2, 0.3), check=True) == 0
    with pytest.raises(QDomainError):
        O.unif_joint_full_pdf(spec(2), QP, (0.1,))


# normalization

@pytest.mark.parametrize("q", [0.25, 0.5, 0.9])
def test_univariate_normalization(q):
    qp = QParam(q)
    for nu in range(1, 7):
        assert O.total_mass_univariate(spec(nu), qp, MAX).value == pytest.approx(1, abs=1e-8)
        assert O.total_mass_univariate(spec(nu), qp, MIN).value == pytest.approx(1, abs=1e-8)
        for k in range(1, nu + 1):
            assert O.total_mass_univariate(spec(nu, k), qp, KTH).value == pytest.approx(1, abs=1e-8)


@pytest.mark.parametrize("q", [0.3, 0.5])
def test_joint_normalization(q):
    qp = QParam(q)
    for nu in range(2, 6):
        assert O.total_mass_joint_minmax(spec(nu, t=2.0), qp).value == pytest.approx(1, abs=1e-8)
        for k in range(1, nu):
            for r in range(k + 1, nu + 1):
                assert O.total_mass_joint_kr(spec(nu, k, r, 2.0), qp).value == pytest.approx(1, abs=1e-8)


def test_full_joint_normalization_two_routes():
    qp = QParam(0.5, max_terms=60)
    for nu in range(1, 4):
        fast = O.total_mass_full(spec(nu), qp).value
        slow = O.total_mass_full(spec(nu), qp, lattice=False).value
        assert fast == pytest.approx(1, abs=1e-8) and slow == pytest.approx(fast, rel=1e-12)
    for nu in range(4, 8):
        assert O.total_mass_full(spec(nu), QP).value == pytest.approx(1, abs=1e-8)


# q-difference consistency

def test_dq_consistency_quniform():
    d = O.QUniform(2.0, QP)
    rep = O.dq_consistency_check(lambda y: O.quniform_cdf(y, d), lambda y: O.quniform_pdf(y, d),
                                 [0.1 * i for i in range(1, 21)], QP)
    assert rep.ok and rep.checks[0].rel_err < 1e-14


@pytest.mark.parametrize("s,which", [(spec(3), MAX), (spec(5, 3), KTH), (spec(4), MIN)])
def test_dq_consistency_examples(s, which):
    rep = O.dq_consistency_check(lambda y: O.unif_ord_cdf(s, QP, which, y),
                                 lambda y: O.unif_ord_pdf(s, QP, which, y),
                                 [i / 100 for i in range(1, 101)], QP)
    assert rep.ok


def test_dq_consistency_detects_wrong_density():
    s = spec(3)
    rep = O.dq_consistency_check(lambda y: O.unif_ord_cdf(s, QP, MAX, y),
                                 lambda y: 3 * y * y, [0.2, 0.5], QP)
    assert not rep.ok
    with pytest.raises(QDomainError):
        O.dq_consistency_check(lambda y: y, lambda y: 1.0, [0.0], QP)


def test_dq_mixed_consistency_joint():
    s = spec(5, 2, 4)
    probes = [(u * 0.25 * z, z) for z in (0.2, 0.6, 1.0) for u in (0.1, 0.5, 0.9)]
    rep = O.dq_mixed_consistency_check(lambda y, z: O.unif_joint_kr(s, QP, CDF, y, z, "raw"),
                                       lambda y, z: O.unif_joint_kr(s, QP, PDF, y, z, "raw"), probes, QP)
    assert rep.ok


def test_kr_marginal_report_is_exploratory():
    rep = O.joint_kr_marginal_report(spec(4, 1, 3), QP, [0.5, 0.8])
    assert all(not c.asserted for c in rep.checks) and rep.ok


# classical limit

def test_classical_limit_interior():
    qp = QParam(0.999)
    for nu in range(1, 6):
        for k in range(1, nu + 1):
            for u in (0.2, 0.5):
                got = O.unif_ord_pdf(spec(nu, k), qp, KTH, u)
                assert got == pytest.approx(O.classical_order_pdf(nu, k, u), rel=0.02)


def test_classical_limit_worst_point():
    # the factors 1 - y/q^(i-1) amplify the deformation near y = t
    qp = QParam(0.999)
    got = O.unif_ord_pdf(spec(5, 1), qp, KTH, 0.8)
    rel = abs(got - O.classical_order_pdf(5, 1, 0.8)) / O.classical_order_pdf(5, 1, 0.8)
    assert rel == pytest.approx(0.0219077, abs=1e-6)


def test_classical_limit_improves_with_q():
    errs = []
    for q in (0.99, 0.999, 0.9999):
        got = O.unif_ord_pdf(spec(5, 1), QParam(q), KTH, 0.8)
        errs.append(abs(got / O.classical_order_pdf(5, 1, 0.8) - 1))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 0.003
