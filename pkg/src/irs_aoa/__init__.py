"""IRS-assisted AOA estimation with temporal-domain MUSIC.

Users reach a multi-antenna base station only through a reflecting surface.
Repetition-coded transmissions plus a periodic surface reflection schedule
turn the single-antenna received stream into block snapshots whose response
is a virtual steering vector of the surface, so subspace estimators recover
the user-to-surface angles.
"""

from .geometry import (
    ArrayGeometry,
    Position2D,
    aoa_from_positions,
    canonical_angle,
    distance,
    steering_vector,
)
from .channel import ChannelRealization, PathLossModel, irs_bs_channel, path_loss, user_irs_channel
from .synthesis import (
    BlockObservations,
    Schedule,
    expand_stream,
    extract_blocks,
    generate_irs_patterns,
    generate_messages,
    make_schedule,
    observe,
    snr_to_noise_power,
    synthesize_bs_signal,
)
from .estimator import (
    ConditionViolation,
    EstimationResult,
    SpectrumResult,
    VirtualManifold,
    capon_spectrum,
    condition_diagnostics,
    estimate_aoas,
    find_peaks,
    music_spectrum,
    noise_subspace,
    sample_covariance,
    virtual_steering,
)
from .harness import (
    ExperimentReport,
    ScenarioConfig,
    TrialOutcome,
    calibrate_snr,
    draw_scenario,
    emit_report,
    match_estimates,
    run_montecarlo,
    run_spectrum,
)

__version__ = "0.1.0"
