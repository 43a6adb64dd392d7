"""Incompatibility robustness of quantum channels along dynamical maps."""

from .channels import (
    Channel,
    ConstantMap,
    DynamicalMap,
    Povm,
    amplitude_damping_choi,
    amplitude_damping_map,
    apply,
    channel_from_json,
    channel_to_json,
    completely_depolarizing,
    compose,
    depolarizing_choi,
    depolarizing_map,
    dual_apply,
    eternal_choi,
    eternal_map,
    identity_channel,
    identity_map,
    projective_povm,
    pushforward_povm,
)
from .linalg import (
    hermitian_eig,
    kron,
    partial_trace,
    trace_distance,
    trace_norm,
)
from .robustness import (
    NoiseClass,
    RobustnessResult,
    SweepRecord,
    dynamical_map_robustness,
    feasibility_q,
    measurement_robustness,
    robustness,
    sweep,
)
from .sdp import SdpProblem, SdpSolution, real_embed, solve
from .witness import (
    CurvePoint,
    IndivisibilityReport,
    blp_curve,
    cp_indivisibility_measure,
    indivisibility_from_curve,
    rising_segments,
    teleport_fidelity,
)

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "ConstantMap",
    "CurvePoint",
    "DynamicalMap",
    "IndivisibilityReport",
    "NoiseClass",
    "Povm",
    "RobustnessResult",
    "SdpProblem",
    "SdpSolution",
    "SweepRecord",
    "amplitude_damping_choi",
    "amplitude_damping_map",
    "apply",
    "blp_curve",
    "channel_from_json",
    "channel_to_json",
    "completely_depolarizing",
    "compose",
    "cp_indivisibility_measure",
    "depolarizing_choi",
    "depolarizing_map",
    "dual_apply",
    "dynamical_map_robustness",
    "eternal_choi",
    "eternal_map",
    "feasibility_q",
    "hermitian_eig",
    "indivisibility_from_curve",
    "identity_channel",
    "identity_map",
    "kron",
    "measurement_robustness",
    "partial_trace",
    "projective_povm",
    "pushforward_povm",
    "real_embed",
    "rising_segments",
    "robustness",
    "solve",
    "sweep",
    "teleport_fidelity",
    "trace_distance",
    "trace_norm",
]
