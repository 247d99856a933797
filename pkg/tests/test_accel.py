import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcprox.accel import (BetaSchedule, ThetaState, beta_contract,
                          beta_restart, theta_next)

GOLDEN = 1.618033988749895
THETA3 = 2.193527085331054


def test_fresh_state_yields_exactly_one_in_both_modes():
    for mode in ("coupled", "classical"):
        s = ThetaState(mode=mode)
        assert theta_next(s, 0.0, 0.5) == 1.0


def test_coupled_golden_step():
    s = ThetaState(theta_prev=1.0, theta=1.0, t_prev=1.0)
    assert theta_next(s, 1.0, 1.0) == pytest.approx(GOLDEN, rel=1e-15)


def test_classical_ignores_step_ratio():
    s = ThetaState(theta=GOLDEN, t_prev=1.0, mode="classical")
    a = theta_next(s, 1.0, 1.0)
    b = theta_next(s, 1.0, 0.125)
    assert a == b == pytest.approx(THETA3, rel=1e-15)


def test_coupled_identity_holds():
    s = ThetaState(theta=GOLDEN, t_prev=2.0)
    for t_cur in (0.5, 1.0, 2.0, 8.0):
        th = theta_next(s, 2.0, t_cur)
        residual = th * th - th - (2.0 / t_cur) * GOLDEN * GOLDEN
        assert abs(residual) < 1e-12 * max(1.0, th * th)


def test_theta_next_validation():
    s = ThetaState()
    with pytest.raises(ValueError):
        theta_next(s, 1.0, 0.0)
    with pytest.raises(ValueError):
        theta_next(s, -1.0, 1.0)
    with pytest.raises(ValueError):
        ThetaState(mode="bogus")


def test_beta_contract_frozen_value():
    s = ThetaState(theta_prev=1.0, theta=GOLDEN, t_prev=1.0)
    beta = beta_contract(s, 0.99, 1.0, 1.0)
    assert beta == pytest.approx(0.27893598987406765, rel=1e-14)
    # the state advanced and committed
    assert s.theta_prev == pytest.approx(GOLDEN, rel=1e-15)
    assert s.theta == pytest.approx(THETA3, rel=1e-15)


def test_beta_contract_validation():
    s = ThetaState()
    with pytest.raises(ValueError):
        beta_contract(s, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        beta_contract(s, 0.5, 0.0, 1.0)


def test_beta_restart_fixed_period():
    s = ThetaState(theta_prev=GOLDEN, theta=THETA3, t_prev=1.0)
    z = np.zeros(2)
    beta, restarted = beta_restart(s, 199, 200, False, z, z, z)
    assert beta == pytest.approx((GOLDEN - 1.0) / THETA3, rel=1e-15)
    assert not restarted
    beta, restarted = beta_restart(s, 200, 200, False, z, z, z)
    assert restarted
    assert s.theta == 1.0 and s.theta_prev == 1.0


def test_beta_restart_legacy_divisibility():
    # the flipped test fires whenever the counter divides the period
    z = np.zeros(1)
    s = ThetaState(theta_prev=GOLDEN, theta=THETA3)
    _, restarted = beta_restart(s, 5, 200, False, z, z, z, legacy_divisibility=True)
    assert restarted
    s = ThetaState(theta_prev=GOLDEN, theta=THETA3)
    _, restarted = beta_restart(s, 3, 200, False, z, z, z, legacy_divisibility=True)
    assert not restarted


def test_beta_restart_adaptive_trigger():
    s = ThetaState(theta_prev=GOLDEN, theta=THETA3)
    x_prev = np.zeros(2)
    x_k = np.array([1.0, 0.0])
    y_aligned = np.array([0.5, 0.0])   # y behind x: momentum still helping
    _, restarted = beta_restart(s, 7, 1000, True, x_k, x_prev, y_aligned)
    assert not restarted
    y_over = np.array([2.0, 0.0])      # overshoot: inner product positive
    _, restarted = beta_restart(s, 7, 1000, True, x_k, x_prev, y_over)
    assert restarted


def test_schedule_none_family():
    sched = BetaSchedule(family="none")
    assert sched.propose(0.3) == (0.0, 1.0)
    sched.commit(1.0, 0.3)
    assert not sched.finish_iteration(1, np.zeros(1), np.zeros(1), np.zeros(1))
    assert sched.propose(0.001) == (0.0, 1.0)


def test_plain_schedule_first_two_weights_are_zero():
    sched = BetaSchedule(family="plain")
    betas = []
    for _ in range(3):
        beta, th = sched.propose(0.25)
        sched.commit(th, 0.25)
        betas.append(beta)
    assert betas[0] == 0.0
    assert betas[1] == 0.0
    assert betas[2] == pytest.approx(0.28175352512532087, rel=1e-14)


def test_restart_schedule_resets_weight_to_zero():
    sched = BetaSchedule(family="fixed-restart", T2=3)
    z = np.zeros(1)
    betas = []
    for k in range(1, 6):
        beta, th = sched.propose(1.0)
        sched.commit(th, 1.0)
        sched.finish_iteration(k, z, z, z)
        betas.append(beta)
    # reset at k=3 makes the k=4 weight zero again, then momentum rebuilds
    assert betas[3] == 0.0
    assert betas[2] > 0.0
    assert betas[4] == pytest.approx(0.28175352512532087, rel=1e-14)


def test_schedule_validation():
    with pytest.raises(ValueError):
        BetaSchedule(family="bogus")
    with pytest.raises(ValueError):
        BetaSchedule(family="contract", delta=1.5)
    with pytest.raises(ValueError):
        BetaSchedule(family="fixed-restart", T2=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=2, max_size=12))
def test_momentum_factor_stays_in_unit_interval(steps):
    # even when the step grows and beta itself can exceed one, the combined
    # factor (1 - 1/theta_k) (1 - 1/theta_{k-1})^2 stays inside [0, 1)
    sched = BetaSchedule(family="plain")
    thetas = [1.0]
    for t in steps:
        _, th = sched.propose(t)
        sched.commit(th, t)
        thetas.append(th)
    for prev, cur in zip(thetas, thetas[1:]):
        alpha = (1.0 - 1.0 / cur) * (1.0 - 1.0 / prev) ** 2
        assert 0.0 <= alpha < 1.0
        assert cur >= 1.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=0.5, max_value=1.0), min_size=2, max_size=12))
def test_beta_in_unit_interval_for_nonincreasing_steps(factors):
    # multiplying by factors <= 1 keeps t nonincreasing, the regime where the
    # plain weight is provably inside [0, 1)
    sched = BetaSchedule(family="plain")
    t = 1.0
    for fac in factors:
        t *= fac
        beta, th = sched.propose(t)
        sched.commit(th, t)
        assert 0.0 <= beta < 1.0
