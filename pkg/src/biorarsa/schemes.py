"""One-bit feedback phase-alignment schemes.

All four schemes share one probing primitive: the transmitters apply a
candidate phase vector, the receiver measures the magnitude and broadcasts
a single bit saying whether it beat the best magnitude seen so far.  Every
probe costs one transmission.

    one_bit                random perturbation, keep it if it helps
    reverse_tracking       on failure also try the negated perturbation
    reverse_tracking_swim  ... and keep re-applying a successful direction
    biorarsa               ... and rescale the stepsize every hold window
                           by the average swim length (floored at alpha)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from biorarsa.model import (
    ChannelRealization,
    FeedbackState,
    feedback_bit,
    magnitude,
    optimal_magnitude,
)

DEFAULT_CAP_PER_TRANSMITTER = 500


class SchemeKind(str, enum.Enum):
    ONE_BIT = "one_bit"
    REVERSE_TRACKING = "reverse_tracking"
    REVERSE_TRACKING_SWIM = "reverse_tracking_swim"
    BIORARSA = "biorarsa"

    def __str__(self) -> str:
        return self.value


class SearchTerminated(Exception):
    """Raised from inside a step when the trial has to stop."""


class TargetReached(SearchTerminated):
    pass


class TransmissionCapReached(SearchTerminated):
    pass


@dataclass(frozen=True)
class SchemeParams:
    """Tuning knobs shared by all schemes (angles in radians).

    ``max_transmissions=None`` means 500 transmissions per transmitter.
    """

    delta0: float = float(np.deg2rad(3.0))
    hold_length: int = 5
    max_swim: int = 5
    alpha: float = 0.5
    c_stop: float = 0.75
    max_transmissions: int | None = None

    def __post_init__(self):
        if not (self.delta0 > 0 and np.isfinite(self.delta0)):
            raise ValueError("delta0 must be a positive finite angle")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 < self.c_stop < 1:
            raise ValueError("c_stop must lie in (0, 1)")
        if self.hold_length < 1:
            raise ValueError("hold_length must be >= 1")
        if self.max_swim < 1:
            raise ValueError("max_swim must be >= 1")
        if self.max_transmissions is not None and self.max_transmissions < 0:
            raise ValueError("max_transmissions must be non-negative")

    def cap_for(self, n_transmitters: int) -> int:
        if self.max_transmissions is not None:
            return self.max_transmissions
        return DEFAULT_CAP_PER_TRANSMITTER * n_transmitters


@dataclass
class SchemeState:
    """Mutable search state confined to a single trial."""

    phases: np.ndarray
    stepsize: float
    feedback: FeedbackState
    params: SchemeParams
    iteration: int = 0
    transmissions: int = 0
    swim_history: list[int] = field(default_factory=list)
    target: float | None = None
    max_transmissions: int | None = None
    record: bool = True
    # trial logs
    probe_magnitudes: list[float] = field(default_factory=list, repr=False)
    swim_lengths: list[int] = field(default_factory=list, repr=False)
    iteration_costs: list[int] = field(default_factory=list, repr=False)
    stepsize_trace: list[tuple[int, float]] = field(default_factory=list, repr=False)

    @classmethod
    def start(
        cls,
        channel: ChannelRealization,
        phases,
        params: SchemeParams,
        *,
        target: float | None = None,
        max_transmissions: int | None = None,
        record: bool = True,
    ) -> "SchemeState":
        feedback = FeedbackState.initial(channel, phases)
        return cls(
            phases=feedback.best_phases.copy(),
            stepsize=params.delta0,
            feedback=feedback,
            params=params,
            target=target,
            max_transmissions=max_transmissions,
            record=record,
            stepsize_trace=[(0, params.delta0)],
        )


def perturb(state: SchemeState, rng: np.random.Generator) -> np.ndarray:
    """Draw a perturbation uniform on the hypercube [-stepsize, stepsize]^N."""
    if not state.stepsize > 0:
        raise ValueError("stepsize must be positive")
    return rng.uniform(-state.stepsize, state.stepsize, size=state.phases.size)


def stepsize_update(current: float, swim_window, alpha: float, hold_length: int) -> float:
    """Rescale the stepsize by the mean absolute swim length, never below alpha."""
    window = np.abs(np.asarray(swim_window, dtype=float))
    if window.size == 0:
        raise ValueError("swim window is empty")
    if window.size != hold_length:
        raise ValueError(f"swim window has {window.size} entries, expected {hold_length}")
    return current * max(alpha, float(window.sum()) / hold_length)


def _probe(state: SchemeState, channel: ChannelRealization, candidate: np.ndarray) -> int:
    if state.max_transmissions is not None and state.transmissions >= state.max_transmissions:
        raise TransmissionCapReached(state.transmissions)
    mag = magnitude(channel, candidate)
    state.transmissions += 1
    if state.record:
        state.probe_magnitudes.append(mag)
    bit = feedback_bit(state.feedback, mag)
    if bit:
        state.feedback.accept(mag, candidate)
        state.phases = candidate
    if state.target is not None and mag >= state.target:
        raise TargetReached(state.transmissions)
    return bit


def _iterate(state, channel, rng, delta, *, reverse, swim, adapt):
    if delta is None:
        delta = perturb(state, rng)
    else:
        delta = np.asarray(delta, dtype=float).reshape(state.phases.shape)
    start = state.transmissions
    beta = 0
    completed = False
    try:
        base = state.phases
        if _probe(state, channel, base + delta):
            beta = 1
        elif reverse:
            delta = -delta
            if _probe(state, channel, base + delta):
                beta = 1
        if beta and swim:
            # guard before transmitting: a swim capped on a success costs nothing extra
            while beta < state.params.max_swim and _probe(state, channel, state.phases + delta):
                beta += 1
        completed = True
    finally:
        cost = state.transmissions - start
        if cost:
            state.iteration_costs.append(cost)
        if completed:
            state.iteration += 1
            state.swim_lengths.append(beta)
            if adapt:
                _hold_window(state, beta)
    return state


def _hold_window(state: SchemeState, beta: int) -> None:
    params = state.params
    state.swim_history.append(beta)
    if len(state.swim_history) == params.hold_length:
        state.stepsize = stepsize_update(
            state.stepsize, state.swim_history, params.alpha, params.hold_length
        )
        state.swim_history.clear()
        state.stepsize_trace.append((len(state.stepsize_trace), state.stepsize))


def step_one_bit(state, channel, rng, *, delta=None):
    """One transmission: keep the perturbation iff the feedback bit is 1."""
    return _iterate(state, channel, rng, delta, reverse=False, swim=False, adapt=False)


def step_reverse_tracking(state, channel, rng, *, delta=None, reverse=True):
    """Try ``delta``; if rejected, try ``-delta``.  Stepsize stays fixed.

    ``reverse=False`` skips the second probe, which reduces the scheme to
    :func:`step_one_bit`.
    """
    return _iterate(state, channel, rng, delta, reverse=reverse, swim=False, adapt=False)


def step_reverse_tracking_swim(state, channel, rng, *, delta=None):
    """Reverse tracking plus greedy swimming along the accepted direction."""
    return _iterate(state, channel, rng, delta, reverse=True, swim=True, adapt=False)


def step_biorarsa(state, channel, rng, *, delta=None, adapt=True):
    """One BioRARSA iteration.

    Perturb, fall back to the reversed perturbation, swim along whichever
    direction was accepted (at most ``max_swim`` accepted moves), and after
    every ``hold_length`` iterations rescale the stepsize by the window's
    mean swim length, floored at ``alpha``.
    """
    return _iterate(state, channel, rng, delta, reverse=True, swim=True, adapt=adapt)


STEPPERS = {
    SchemeKind.ONE_BIT: step_one_bit,
    SchemeKind.REVERSE_TRACKING: step_reverse_tracking,
    SchemeKind.REVERSE_TRACKING_SWIM: step_reverse_tracking_swim,
    SchemeKind.BIORARSA: step_biorarsa,
}


@dataclass
class TrialRecord:
    kind: SchemeKind
    transmissions: int
    converged: bool
    target_magnitude: float
    initial_magnitude: float
    probe_magnitudes: np.ndarray = field(repr=False)
    stepsize_trace: list[tuple[int, float]] = field(repr=False)
    swim_lengths: list[int] = field(repr=False)
    iteration_costs: list[int] = field(repr=False)
    final_phases: np.ndarray = field(repr=False)
    final_magnitude: float = 0.0

    @property
    def magnitude_trajectory(self) -> list[tuple[int, float]]:
        """(transmission index, received magnitude); index 0 is the initial point."""
        pairs = [(0, self.initial_magnitude)]
        pairs.extend((i + 1, float(m)) for i, m in enumerate(self.probe_magnitudes))
        return pairs

    @property
    def best_so_far(self) -> np.ndarray:
        mags = np.concatenate([[self.initial_magnitude], self.probe_magnitudes])
        return np.maximum.accumulate(mags)


def run_trial(
    kind,
    channel: ChannelRealization,
    params: SchemeParams,
    rng_seed=None,
    *,
    initial_phases=None,
    record: bool = True,
) -> TrialRecord:
    """Run one scheme from a random start until the stopping target or the cap.

    The target is ``c_stop * optimal_magnitude(channel)`` and is checked after
    every transmission.  ``initial_phases`` overrides the uniform [0, 2*pi)
    starting draw (the rng is then used for perturbations only).
    """
    kind = SchemeKind(kind)
    step = STEPPERS[kind]
    rng = np.random.default_rng(rng_seed)
    if initial_phases is None:
        initial_phases = rng.uniform(0.0, 2 * np.pi, size=channel.n_transmitters)
    target = params.c_stop * optimal_magnitude(channel)
    state = SchemeState.start(
        channel,
        initial_phases,
        params,
        target=target,
        max_transmissions=params.cap_for(channel.n_transmitters),
        record=record,
    )
    initial_magnitude = state.feedback.best_magnitude
    converged = initial_magnitude >= target
    if not converged:
        try:
            while True:
                step(state, channel, rng)
        except TargetReached:
            converged = True
        except TransmissionCapReached:
            converged = False
    return TrialRecord(
        kind=kind,
        transmissions=state.transmissions,
        converged=converged,
        target_magnitude=target,
        initial_magnitude=initial_magnitude,
        probe_magnitudes=np.asarray(state.probe_magnitudes, dtype=float),
        stepsize_trace=state.stepsize_trace,
        swim_lengths=state.swim_lengths,
        iteration_costs=state.iteration_costs,
        final_phases=state.feedback.best_phases.copy(),
        final_magnitude=state.feedback.best_magnitude,
    )
