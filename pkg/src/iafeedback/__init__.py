"""Interference alignment under partial CSI feedback in MIMO cellular downlink."""

from .network import NetworkConfig, draw_channels, validate_config
from .feedback import (
    EffectiveCsiSet,
    FeedbackProfile,
    a_dim,
    apply_filter,
    csi_submatrix,
    feedback_dimension,
    fixed_outer_precoders,
    grassmann_tuple,
)
from .feasibility import (
    FeasibilityVerdict,
    FlowNetwork,
    check_necessary_enum,
    check_necessary_flow,
    check_sufficient,
    max_flow,
)
from .profile_opt import (
    GreedyResult,
    ProfileBounds,
    asymptotic_ratio,
    d_lower_bound,
    full_cdi_ratio,
    g_one,
    greedy_profile,
    profile_bounds,
)
from .transceiver import (
    ReducedSolution,
    TransceiverSet,
    ailm_solve,
    leakage,
    reconstruct,
    solve_with_restarts,
    verify_ia,
)
from .quantize import (
    Codebook,
    QuantizedCsi,
    build_codebook,
    expected_distortion,
    quantize_feedback,
    quantize_matrix,
)
from .evaluate import (
    ThroughputSample,
    baseline_profile,
    dof_slope,
    leakage_bound,
    residual_interference,
    run_baseline,
    simulate_profile,
    throughput_limited,
    throughput_lower_bound,
    throughput_perfect,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
