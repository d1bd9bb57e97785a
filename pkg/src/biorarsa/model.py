"""Channel and received-signal model.

Each transmitter i reaches the receiver through a flat-fading gain
``a_i * exp(j * phi_i)``.  With unit beamforming amplitude the noiseless
received magnitude for total phases ``theta`` is

    sqrt(P) * |sum_i a_i * exp(j * theta_i)|

Phases are kept unwrapped; the magnitude is 2*pi periodic per component.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AMPLITUDE_MODELS = ("rayleigh", "unit")


class DimensionError(ValueError):
    """Phase vector length does not match the channel."""


@dataclass(frozen=True)
class ChannelRealization:
    gains: np.ndarray
    channel_phases: np.ndarray
    power: float = 1.0

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=float).reshape(-1)
        phases = np.asarray(self.channel_phases, dtype=float).reshape(-1)
        if gains.size < 1:
            raise ValueError("channel needs at least one transmitter")
        if gains.shape != phases.shape:
            raise DimensionError(
                f"gains ({gains.size}) and channel_phases ({phases.size}) differ in length"
            )
        if np.any(gains < 0) or not np.all(np.isfinite(gains)):
            raise ValueError("gains must be finite and non-negative")
        if not self.power > 0:
            raise ValueError("power must be positive")
        gains.setflags(write=False)
        phases.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "channel_phases", phases)
        object.__setattr__(self, "power", float(self.power))

    @property
    def n_transmitters(self) -> int:
        return self.gains.size

    @property
    def amplitude(self) -> float:
        """Signal amplitude sqrt(P)."""
        return float(np.sqrt(self.power))


def _as_phases(channel: ChannelRealization, phases) -> np.ndarray:
    thetas = np.asarray(phases, dtype=float).reshape(-1)
    if thetas.size != channel.n_transmitters:
        raise DimensionError(
            f"expected {channel.n_transmitters} phases, got {thetas.size}"
        )
    return thetas


def magnitude(channel: ChannelRealization, phases) -> float:
    """Received magnitude for total phases ``phases`` (radians)."""
    thetas = _as_phases(channel, phases)
    return channel.amplitude * float(abs(np.dot(channel.gains, np.exp(1j * thetas))))


def optimal_magnitude(channel: ChannelRealization) -> float:
    """Magnitude at perfect alignment, sqrt(P) * sum(a_i)."""
    return channel.amplitude * float(channel.gains.sum())


@dataclass
class FeedbackState:
    """Receiver-side record of the best magnitude observed so far."""

    best_magnitude: float
    best_phases: np.ndarray = field(repr=False)

    @classmethod
    def initial(cls, channel: ChannelRealization, phases) -> "FeedbackState":
        thetas = _as_phases(channel, phases).copy()
        return cls(magnitude(channel, thetas), thetas)

    def accept(self, candidate_magnitude: float, phases) -> None:
        if candidate_magnitude < self.best_magnitude:
            raise ValueError("best magnitude must not decrease")
        self.best_magnitude = float(candidate_magnitude)
        self.best_phases = np.array(phases, dtype=float)


def feedback_bit(state: FeedbackState, candidate_magnitude: float) -> int:
    """One-bit feedback: 1 iff the candidate strictly beats the best so far."""
    if candidate_magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    return int(candidate_magnitude > state.best_magnitude)


def generate_channel(
    n_transmitters: int,
    power: float = 1.0,
    amplitude_model: str = "rayleigh",
    rng_seed=None,
) -> ChannelRealization:
    """Draw a random flat-fading channel.

    Phases are i.i.d. uniform on [0, 2*pi).  ``rayleigh`` gains are the modulus
    of a standard complex Gaussian (unit total variance); ``unit`` fixes every
    gain to 1.  ``rng_seed`` may be an int, a SeedSequence or a Generator.
    """
    if n_transmitters < 1:
        raise ValueError("n_transmitters must be >= 1")
    if not power > 0:
        raise ValueError("power must be positive")
    if amplitude_model not in AMPLITUDE_MODELS:
        raise ValueError(f"unknown amplitude model {amplitude_model!r}")
    rng = np.random.default_rng(rng_seed)
    phases = rng.uniform(0.0, 2 * np.pi, size=n_transmitters)
    if amplitude_model == "unit":
        gains = np.ones(n_transmitters)
    else:
        z = rng.normal(scale=np.sqrt(0.5), size=(n_transmitters, 2))
        gains = np.hypot(z[:, 0], z[:, 1])
    return ChannelRealization(gains, phases, power)
