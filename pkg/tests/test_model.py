import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biorarsa.model import (
    ChannelRealization,
    DimensionError,
    FeedbackState,
    feedback_bit,
    generate_channel,
    magnitude,
    optimal_magnitude,
)


def unit_channel(n, power=1.0):
    return ChannelRealization(np.ones(n), np.zeros(n), power)


class TestMagnitude:
    def test_aligned(self):
        assert magnitude(unit_channel(2), [0.0, 0.0]) == pytest.approx(2.0)

    def test_cancellation(self):
        assert magnitude(unit_channel(2), [0.0, math.pi]) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal_phasors(self):
        ch = ChannelRealization([3.0, 4.0], [0.0, 0.0], 1.0)
        assert magnitude(ch, [0.0, math.pi / 2]) == pytest.approx(5.0, rel=1e-15)

    def test_power_scales_by_sqrt(self):
        assert magnitude(unit_channel(2, power=9.0), [0.0, 0.0]) == pytest.approx(6.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            magnitude(unit_channel(3), [0.0, 0.0])


@pytest.mark.parametrize(
    "gains, power, expected",
    [([1, 2, 3], 1.0, 6.0), ([1], 4.0, 2.0), ([0.5, 0.5], 1.0, 1.0)],
)
def test_optimal_magnitude(gains, power, expected):
    ch = ChannelRealization(gains, np.zeros(len(gains)), power)
    assert optimal_magnitude(ch) == pytest.approx(expected)


class TestChannelValidation:
    def test_negative_gain(self):
        with pytest.raises(ValueError):
            ChannelRealization([1.0, -0.1], [0.0, 0.0])

    def test_power_must_be_positive(self):
        with pytest.raises(ValueError):
            ChannelRealization([1.0], [0.0], 0.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            ChannelRealization([1.0, 1.0], [0.0])

    def test_empty(self):
        with pytest.raises(ValueError):
            ChannelRealization([], [])

    def test_immutable_arrays(self):
        ch = unit_channel(3)
        with pytest.raises(ValueError):
            ch.gains[0] = 2.0


class TestFeedbackBit:
    @pytest.mark.parametrize("candidate, bit", [(5.1, 1), (5.0, 0), (4.9, 0)])
    def test_strict_comparison(self, candidate, bit):
        state = FeedbackState(5.0, np.zeros(2))
        assert feedback_bit(state, candidate) == bit

    def test_negative_candidate(self):
        with pytest.raises(ValueError):
            feedback_bit(FeedbackState(1.0, np.zeros(1)), -1.0)

    def test_accept_rejects_decrease(self):
        state = FeedbackState(5.0, np.zeros(2))
        with pytest.raises(ValueError):
            state.accept(4.0, np.ones(2))


class TestGenerateChannel:
    def test_unit_model(self):
        ch = generate_channel(3, 1.0, "unit", 7)
        np.testing.assert_array_equal(ch.gains, [1.0, 1.0, 1.0])
        assert np.all((ch.channel_phases >= 0) & (ch.channel_phases < 2 * np.pi))

    def test_reproducible(self):
        a = generate_channel(50, 1.0, "rayleigh", 3)
        b = generate_channel(50, 1.0, "rayleigh", 3)
        assert a.gains.tobytes() == b.gains.tobytes()
        assert a.channel_phases.tobytes() == b.channel_phases.tobytes()

    def test_unit_phases_reproducible(self):
        a = generate_channel(3, 1.0, "unit", 7)
        b = generate_channel(3, 1.0, "unit", 7)
        assert a.channel_phases.tobytes() == b.channel_phases.tobytes()

    def test_rayleigh_mean(self):
        # |CN(0,1)| is Rayleigh with sigma^2 = 1/2, mean sqrt(pi)/2
        ch = generate_channel(1000, 1.0, "rayleigh", 1)
        expected = math.sqrt(math.pi) / 2
        assert abs(ch.gains.mean() - expected) < 0.05 * expected

    def test_rayleigh_second_moment(self):
        ch = generate_channel(20000, 1.0, "rayleigh", 2)
        assert np.mean(ch.gains**2) == pytest.approx(1.0, rel=0.03)

    def test_zero_transmitters(self):
        with pytest.raises(ValueError):
            generate_channel(0, 1.0, "unit", 0)

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            generate_channel(2, 1.0, "rician", 0)


phase_vectors = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.0, 5.0), min_size=n, max_size=n),
        st.lists(st.floats(-50.0, 50.0), min_size=n, max_size=n),
    )
)


class TestMagnitudeProperties:
    @settings(max_examples=200, deadline=None)
    @given(phase_vectors, st.floats(0.01, 100.0))
    def test_upper_bound(self, data, power):
        gains, thetas = data
        ch = ChannelRealization(gains, np.zeros(len(gains)), power)
        assert magnitude(ch, thetas) <= optimal_magnitude(ch) * (1 + 1e-12)

    @settings(max_examples=200, deadline=None)
    @given(phase_vectors, st.floats(-100.0, 100.0))
    def test_common_phase_invariance(self, data, shift):
        gains, thetas = data
        ch = ChannelRealization(gains, np.zeros(len(gains)))
        base = magnitude(ch, thetas)
        shifted = magnitude(ch, np.asarray(thetas) + shift)
        assert shifted == pytest.approx(base, rel=1e-12, abs=1e-12 * optimal_magnitude(ch))

    @settings(max_examples=200, deadline=None)
    @given(phase_vectors, st.data())
    def test_periodic_per_component(self, data, draw):
        gains, thetas = data
        ch = ChannelRealization(gains, np.zeros(len(gains)))
        i = draw.draw(st.integers(0, len(gains) - 1))
        k = draw.draw(st.integers(-3, 3))
        moved = np.array(thetas)
        moved[i] += 2 * np.pi * k
        assert magnitude(ch, moved) == pytest.approx(
            magnitude(ch, thetas), rel=1e-12, abs=1e-12 * optimal_magnitude(ch)
        )

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 10), st.floats(-20.0, 20.0))
    def test_equality_at_alignment(self, n, common):
        ch = generate_channel(n, 2.0, "rayleigh", n)
        thetas = np.full(n, common) + 2 * np.pi * np.arange(n)
        assert magnitude(ch, thetas) == pytest.approx(optimal_magnitude(ch), rel=1e-12)

    def test_strictly_below_optimum_when_misaligned(self):
        ch = ChannelRealization([1.0, 2.0, 0.5], np.zeros(3))
        assert magnitude(ch, [0.0, 0.0, 1e-3]) < optimal_magnitude(ch)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=50))
    def test_best_magnitude_nondecreasing(self, candidates):
        state = FeedbackState(0.0, np.zeros(1))
        history = [state.best_magnitude]
        for c in candidates:
            if feedback_bit(state, c):
                state.accept(c, np.zeros(1))
            history.append(state.best_magnitude)
        assert all(b >= a for a, b in zip(history, history[1:]))
