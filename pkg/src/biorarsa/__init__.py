"""Adaptive distributed beamforming with one-bit feedback.

Library surface: the received-magnitude model, four phase-alignment schemes
(one-bit, reverse tracking, reverse tracking with swim, BioRARSA) and a
seeded Monte Carlo harness.
"""

from biorarsa.model import (
    ChannelRealization,
    DimensionError,
    FeedbackState,
    feedback_bit,
    generate_channel,
    magnitude,
    optimal_magnitude,
)
from biorarsa.schemes import (
    SchemeKind,
    SchemeParams,
    SchemeState,
    SearchTerminated,
    TargetReached,
    TransmissionCapReached,
    TrialRecord,
    perturb,
    run_trial,
    step_biorarsa,
    step_one_bit,
    step_reverse_tracking,
    step_reverse_tracking_swim,
    stepsize_update,
)
from biorarsa.harness import (
    AggregateStats,
    CellStats,
    ExperimentGrid,
    gain_percent,
    linear_fit,
    robustness_spread,
    run_grid,
)

__all__ = [
    "AggregateStats",
    "CellStats",
    "ChannelRealization",
    "DimensionError",
    "ExperimentGrid",
    "FeedbackState",
    "SchemeKind",
    "SchemeParams",
    "SchemeState",
    "SearchTerminated",
    "TargetReached",
    "TransmissionCapReached",
    "TrialRecord",
    "feedback_bit",
    "gain_percent",
    "generate_channel",
    "linear_fit",
    "magnitude",
    "optimal_magnitude",
    "perturb",
    "robustness_spread",
    "run_grid",
    "run_trial",
    "step_biorarsa",
    "step_one_bit",
    "step_reverse_tracking",
    "step_reverse_tracking_swim",
    "stepsize_update",
]
