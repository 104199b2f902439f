import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchsolve.errors import InputError
from sketchsolve.schedules import (
    MomentumSchedule,
    averaging_steps,
    eta_function,
    eta_sequence,
    schedule_step,
)


def _take(schedule, n):
    it = schedule.steps()
    return [next(it) for _ in range(n)]


def test_none_and_constant():
    assert schedule_step(MomentumSchedule("none"), 5) == (1.0, 0.0)
    assert schedule_step(MomentumSchedule("none", step_size=0.5), 0) == (0.5, 0.0)
    for k in (0, 1, 17):
        assert schedule_step(MomentumSchedule("constant"), k) == (1.0, 0.5)


def test_heuristic_start_and_limit():
    sched = MomentumSchedule("heuristic", eta=0.5)
    assert schedule_step(sched, 0) == (1.0, 0.0)
    betas = [s.beta for s in _take(sched, 200)]
    assert all(b2 >= b1 for b1, b2 in zip(betas, betas[1:]))
    assert betas[-1] == 0.5
    # below the cap the raw formula is used: k/(k+3) for eta = 1/2
    assert betas[1] == pytest.approx(1 / 4)
    assert betas[2] == pytest.approx(2 / 5)


def test_theoretical_constant_eta_closed_form():
    eta = 0.5
    for k, step in enumerate(_take(MomentumSchedule("theoretical", eta=eta), 50)):
        assert step.zeta == pytest.approx(k * (1 - eta), abs=1e-12)
        assert step.gamma == pytest.approx(eta / ((k + 1) * (1 - eta) + 1), abs=1e-14)
        assert step.beta == pytest.approx(1 - (2 - eta) / ((k + 1) * (1 - eta) + 1), abs=1e-14)


def test_eta_one_gives_plain_steps():
    for step in _take(MomentumSchedule("theoretical", eta=1.0), 20):
        assert step.zeta == 0.0 and step.gamma == 1.0 and step.beta == 0.0


def test_increasing_switches_on_previous_beta():
    steps = _take(MomentumSchedule("theoretical_increasing"), 400)
    etas = [s.eta for s in steps]
    assert etas[0] == 0.995
    assert 1.0 in etas
    # eta_k is chosen from beta_{k-2}, the momentum of the step before the previous one
    for k in range(2, 400):
        assert etas[k] == (0.995 if steps[k - 2].beta < 0.5 else 1.0)


@settings(max_examples=40, deadline=None)
@given(etas=st.lists(st.floats(0.01, 1.0), min_size=3, max_size=30))
def test_schedule_invariants_nonincreasing_eta(etas):
    # beta_k < 1 needs zeta_k < zeta_{k+1} + 1, guaranteed when eta does not increase
    etas = sorted(etas, reverse=True)
    it = averaging_steps(eta_function(etas + [etas[-1]]))
    for _ in range(len(etas)):
        step = next(it)
        assert 0.0 < step.gamma <= 1.0
        assert 0.0 <= step.beta < 1.0


@pytest.mark.parametrize("variant", ["none", "constant", "theoretical", "theoretical_increasing", "heuristic"])
def test_named_variants_stay_in_range(variant):
    for step in _take(MomentumSchedule(variant), 5000):
        assert 0.0 < step.gamma <= 1.0
        assert 0.0 <= step.beta < 1.0


def test_zeta_recursion_identity():
    etas = np.random.default_rng(0).uniform(0.1, 1.0, 40)
    steps = [next(it) for it in [averaging_steps(eta_function(etas))] for _ in range(39)]
    for k, s in enumerate(steps):
        # eta_k (1 + zeta_k - eta_k) = eta_{k+1} zeta_{k+1}
        assert etas[k] * (1 + s.zeta - etas[k]) == pytest.approx(etas[k + 1] * s.zeta_next, rel=1e-12)


def test_validation():
    with pytest.raises(InputError):
        MomentumSchedule("fancy")
    with pytest.raises(InputError):
        MomentumSchedule("heuristic", eta=1.0)
    with pytest.raises(InputError):
        next(MomentumSchedule("theoretical", eta=0.0).steps())
    with pytest.raises(InputError):
        schedule_step(MomentumSchedule("none"), -1)
    it = averaging_steps(eta_function([0.5, 0.5]))
    next(it)
    with pytest.raises(InputError):
        next(it)


def test_eta_sequence_and_callable():
    sched = MomentumSchedule("theoretical", eta=lambda k: 0.5 if k % 2 else 0.9)
    np.testing.assert_allclose(eta_sequence(sched, 4), [0.9, 0.5, 0.9, 0.5])
