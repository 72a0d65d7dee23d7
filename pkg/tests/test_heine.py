import math

import numpy as np
import pytest

from qorderstats import heine as H
from qorderstats.errors import InsufficientAcceptanceError, QDomainError, SizeError
from qorderstats.orderstat import full_joint_constant
from qorderstats.qcore import QParam, q_factorial

HP = H.HeineParams(1.0, 1.0, QParam(0.5))
SETTINGS = [(lam, t, q) for q in (0.25, 0.5, 0.9) for lam, t in ((0.3, 1.0), (1.0, 1.0), (2.0, 0.7), (5.0, 2.0))]


def test_params_validation():
    for bad in (dict(lam=0.0, t=1.0), dict(lam=1.0, t=-1.0), dict(lam=math.inf, t=1.0)):
        with pytest.raises(QDomainError):
            H.HeineParams(qp=QParam(0.5), **bad)
    with pytest.raises(QDomainError):
        H.HeineParams(1.0, 1.0, QParam(0.5), depth=0)
    assert HP.interval_length(1) == 0.5 and HP.interval(2) == (0.25, 0.5)


def test_interval_probability():
    assert H.interval_arrival_prob(1, HP) == pytest.approx(1 / 3, rel=1e-15)
    ps = [H.interval_arrival_prob(k, HP) for k in range(1, 60)]
    assert all(a > b for a, b in zip(ps, ps[1:])) and ps[-1] < 1e-16
    assert H.interval_arrival_prob(1, H.HeineParams(1e-300, 1.0, QParam(0.5))) < 1e-299
    with pytest.raises(QDomainError):
        H.interval_arrival_prob(0, HP)


def test_pmf_examples():
    p0 = H.heine_pmf(0, HP)
    assert p0.value == pytest.approx(0.41942244179510786, rel=1e-14)
    assert p0.value == pytest.approx(0.41937, abs=1e-4)
    assert H.heine_pmf(0, H.HeineParams(1e-12, 1.0, QParam(0.5))).value == pytest.approx(1.0, abs=1e-11)
    with pytest.raises(QDomainError):
        H.heine_pmf(-1, HP)


@pytest.mark.parametrize("lt", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("q", [0.25, 0.5, 0.9])
def test_pmf_sums_to_one(lt, q):
    hp = H.HeineParams(lt, 1.0, QParam(q))
    assert math.fsum(H.heine_pmf(k, hp).value for k in range(200)) == pytest.approx(1.0, abs=1e-10)


def test_dp_oracle_small_cases():
    one = H.HeineParams(1.0, 1.0, QParam(0.5), depth=1)
    assert H.pmf_oracle_dp(one, 2).tolist() == pytest.approx([2 / 3, 1 / 3, 0.0])
    dp = H.pmf_oracle_dp(H.HeineParams(1.0, 1.0, QParam(0.5), depth=60), 60)
    assert dp[0] == pytest.approx(0.41942244179510786, rel=1e-13)
    assert dp.sum() == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("lt", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("q", [0.25, 0.5, 0.9])
def test_pmf_matches_dp(lt, q):
    hp = H.HeineParams(lt, 1.0, QParam(q), depth=H.depth_for_tail(lt, q))
    assert H.arrival_tail_mass(hp) < 1e-12
    dp = H.pmf_oracle_dp(hp, 20)
    cf = np.array([H.heine_pmf(k, hp).value for k in range(21)])
    assert np.max(np.abs(dp - cf)) <= 1e-8


@pytest.mark.parametrize("lt", [0.5, 1.0, 2.0])
def test_default_depth_gap_is_within_reported_bound(lt):
    # at q = 0.9 depth 80 leaves mass lam t q^80 ~ 1e-4 unsimulated
    hp = H.HeineParams(lt, 1.0, QParam(0.9))
    dp = H.pmf_oracle_dp(hp, 20)
    cf = np.array([H.heine_pmf(k, hp).value for k in range(21)])
    gap = np.max(np.abs(dp - cf))
    assert gap > 1e-8
    assert gap <= H.arrival_tail_mass(hp)


def test_simulate_record():
    rec = H.simulate(HP, np.random.default_rng(0))
    assert rec.arrivals.shape == (HP.depth,) and rec.count == int(rec.arrivals.sum())
    assert 0 <= rec.tail_mass <= 1
    empty = H.simulate(H.HeineParams(1e-300, 1.0, QParam(0.5)), 7)
    assert empty.count == 0
    with pytest.raises(ValueError):
        H.simulate(HP, None)


def test_batch_is_deterministic_and_worker_independent():
    a = H.simulate_batch(HP, 250_000, 9, nus=(1, 2))
    b = H.simulate_batch(HP, 250_000, 9, nus=(1, 2), workers=2)
    assert np.array_equal(a.count_hist, b.count_hist)
    assert np.array_equal(a.interval_hits, b.interval_hits)
    assert a.config_hits == b.config_hits and a.trials == 250_000
    with pytest.raises(SizeError):
        H.simulate_batch(HP, 10, 1, nus=(80,))


def test_monte_carlo_pmf_and_intervals():
    stats = H.simulate_batch(HP, 10**6, 2024)
    assert H.pmf_mc_check(HP, 10**6, 2024, 6, stats=stats).ok
    rep = H.interval_mc_check(HP, 10**6, 2024, 8, stats=stats)
    assert rep.ok and rep.checks[0].rhs == pytest.approx(1 / 3)


@pytest.mark.parametrize("lam,t,q", SETTINGS)
def test_config_probability_closed_form(lam, t, q):
    hp = H.HeineParams(lam, t, QParam(q))
    for nu in range(1, 6):
        got = H.conditional_config_probability(nu, hp)
        assert got == pytest.approx(q_factorial(nu, hp.qp) * (1 - q) ** nu, abs=1e-8)
        box = H.conditional_density_value(nu, hp) * H.config_box_measure(nu, hp)
        assert box == pytest.approx(got, abs=1e-10)


def test_config_probability_examples_and_invariance():
    for lam, t, q in SETTINGS:
        assert H.conditional_config_probability(1, H.HeineParams(lam, t, QParam(q))) == pytest.approx(1 - q, rel=1e-13)
    assert H.conditional_config_probability(2, HP) == pytest.approx(0.375, rel=1e-14)
    a = H.conditional_config_probability(3, H.HeineParams(0.3, 1.0, QParam(0.5)))
    b = H.conditional_config_probability(3, H.HeineParams(2.0, 4.0, QParam(0.5)))
    assert abs(a - b) <= 1e-10
    with pytest.raises(SizeError):
        H.conditional_config_probability(5, H.HeineParams(1.0, 1.0, QParam(0.5), depth=5))
    with pytest.raises(QDomainError):
        H.conditional_config_probability(0, HP)


def test_conditional_density_values():
    assert H.conditional_density_value(1, HP) == 1
    assert H.conditional_density_value(2, HP) == 3.0
    assert H.conditional_density_value(3, HP) == 21.0
    for nu in range(1, 7):
        hp = H.HeineParams(1.3, 2.5, QParam(0.7))
        assert H.conditional_density_value(nu, hp) == pytest.approx(full_joint_constant(nu, 2.5, hp.qp), rel=1e-15)


@pytest.mark.parametrize("nu", [1, 2, 3])
def test_conditional_monte_carlo(nu):
    rep = H.conditional_mc_check(nu, HP, 10**6, 77)
    assert rep.ok and rep.checks[0].params["accepted"] >= 100


def test_conditional_monte_carlo_high_intensity():
    hp = H.HeineParams(5.0, 1.0, QParam(0.5))
    rep = H.conditional_mc_check(1, hp, 200_000, 5)
    assert rep.ok and rep.checks[0].params["accepted"] > 0


def test_conditional_monte_carlo_too_few_records():
    hp = H.HeineParams(0.01, 1.0, QParam(0.5))
    with pytest.raises(InsufficientAcceptanceError):
        H.conditional_mc_check(3, hp, 10_000, 1)
    with pytest.raises(QDomainError):
        H.conditional_mc_check(1, HP, 100, 1)
