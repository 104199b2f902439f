"""Step-size and momentum schedules ``(gamma_k, beta_k)``.

The theoretical family is parametrized by a sequence ``eta_k`` in ``(0, 1]``
through the iterate-averaging weights

    zeta_0 = 0,   zeta_k = (1 / eta_k) * sum_{t<k} eta_t (1 - eta_t),
    gamma_k = eta_k / (zeta_{k+1} + 1),   beta_k = zeta_k / (zeta_{k+1} + 1).

Variants
--------
none
    ``gamma = step_size``, ``beta = 0``.
constant
    ``gamma = 1``, ``beta = 0.5``.
theoretical
    the family above for a constant ``eta`` or a user-given sequence.
theoretical_increasing
    the family above with ``eta_k = 0.995`` while the momentum is below 0.5
    and ``eta_k = 1`` otherwise. ``zeta_{k+1}`` needs ``eta_{k+1}`` before
    ``beta_k`` is known, so the switch is evaluated on the previous step's
    ``beta``.
heuristic
    ``gamma = 1`` and ``beta_k = min(1 - (2 - eta) / ((k + 1)(1 - eta) + 1), beta)``.
    The uncapped expression starts at 0 but tends to 1, and heavy ball with
    ``gamma = 1`` and ``beta`` near 1 diverges; the cap (default 0.5) keeps the
    intended behaviour of momentum growing from 0 to 0.5.
"""

from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from .errors import InputError

VARIANTS = ("none", "constant", "theoretical", "theoretical_increasing", "heuristic")

EtaSpec = Union[float, Sequence[float], Callable[[int], float]]


class MomentumStep(NamedTuple):
    gamma: float
    beta: float
    eta: float
    zeta: float
    zeta_next: float


@dataclass(frozen=True)
class MomentumSchedule:
    """Momentum schedule description.

    Parameters
    ----------
    variant : str
        One of ``none``, ``constant``, ``theoretical``,
        ``theoretical_increasing``, ``heuristic``.
    eta : float, sequence or callable
        ``eta`` parameter. A constant for ``heuristic``; a constant, a
        sequence indexed by ``k`` or a callable ``k -> eta_k`` for
        ``theoretical``.
    beta : float
        Momentum of the ``constant`` variant and cap of the ``heuristic`` one.
    switch_low, switch_high : float
        The two ``eta`` values of ``theoretical_increasing``.
    switch_beta : float
        Momentum threshold of ``theoretical_increasing``.
    step_size : float
        Step size of the ``none`` variant.
    """

    variant: str = "none"
    eta: EtaSpec = 0.5
    beta: float = 0.5
    switch_low: float = 0.995
    switch_high: float = 1.0
    switch_beta: float = 0.5
    step_size: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown momentum variant {self.variant!r}; expected one of {VARIANTS}")
        if self.variant == "heuristic":
            eta = float(self.eta)
            if not 0.0 <= eta < 1.0:
                raise InputError(f"heuristic eta must lie in [0, 1), got {eta}")
        if self.variant == "none" and not 0.0 < self.step_size <= 1.0:
            raise InputError(f"step size must lie in (0, 1], got {self.step_size}")
        if self.variant in ("constant", "heuristic") and not 0.0 <= self.beta < 1.0:
            raise InputError(f"constant momentum must lie in [0, 1), got {self.beta}")

    def steps(self) -> Iterator[MomentumStep]:
        """Infinite iterator over ``MomentumStep`` tuples for ``k = 0, 1, ...``."""
        if self.variant == "none":
            return _repeat(MomentumStep(self.step_size, 0.0, self.step_size, 0.0, 0.0))
        if self.variant == "constant":
            return _repeat(MomentumStep(1.0, self.beta, 1.0, 0.0, 0.0))
        if self.variant == "heuristic":
            return _heuristic_steps(float(self.eta), self.beta)
        if self.variant == "theoretical":
            return averaging_steps(eta_function(self.eta))
        return _increasing_steps(self.switch_low, self.switch_high, self.switch_beta)


def _repeat(step):
    while True:
        yield step


def _heuristic_steps(eta, cap):
    k = 0
    while True:
        beta = min(1.0 - (2.0 - eta) / ((k + 1) * (1.0 - eta) + 1.0), cap)
        yield MomentumStep(1.0, beta, 1.0, 0.0, 0.0)
        k += 1


def eta_function(eta):
    """Normalize a constant, sequence or callable into ``k -> eta_k``."""
    if callable(eta):
        fn = eta
    elif np.ndim(eta) == 0:
        value = float(eta)
        fn = lambda k: value  # noqa: E731
    else:
        seq = np.asarray(eta, dtype=np.float64)

        def fn(k):
            if k >= seq.size:
                raise InputError(f"eta sequence has {seq.size} entries, step {k} requested")
            return float(seq[k])

    def checked(k):
        value = float(fn(k))
        if not 0.0 < value <= 1.0:
            raise InputError(f"eta_{k} = {value} outside (0, 1]")
        return value

    return checked


def averaging_steps(eta_of):
    """Yield the theoretical ``(gamma_k, beta_k)`` for a sequence ``eta_of(k)``."""
    k = 0
    eta = eta_of(0)
    zeta = 0.0
    total = 0.0  # sum_{t<=k} eta_t (1 - eta_t)
    while True:
        total += eta * (1.0 - eta)
        eta_next = eta_of(k + 1)
        zeta_next = total / eta_next
        yield MomentumStep(eta / (zeta_next + 1.0), zeta / (zeta_next + 1.0), eta, zeta, zeta_next)
        eta, zeta = eta_next, zeta_next
        k += 1


def _increasing_steps(low, high, threshold):
    beta_prev = 0.0
    eta = low
    zeta = 0.0
    total = 0.0
    while True:
        total += eta * (1.0 - eta)
        eta_next = low if beta_prev < threshold else high
        zeta_next = total / eta_next
        beta = zeta / (zeta_next + 1.0)
        yield MomentumStep(eta / (zeta_next + 1.0), beta, eta, zeta, zeta_next)
        eta, zeta, beta_prev = eta_next, zeta_next, beta


def schedule_step(schedule, k):
    """``(gamma_k, beta_k)`` of ``schedule`` at iteration ``k``."""
    if k < 0:
        raise InputError("iteration index must be non-negative")
    for i, step in enumerate(schedule.steps()):
        if i == k:
            return step.gamma, step.beta


def eta_sequence(schedule, n):
    """First ``n`` values ``eta_0, ..., eta_{n-1}`` used by a theoretical schedule."""
    out = []
    for step in schedule.steps():
        if len(out) == n:
            break
        out.append(step.eta)
    return np.array(out)
