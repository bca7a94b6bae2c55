"""Finite-alphabet capacity-distortion-cost toolkit for ISAC channels."""

from .model import (Alphabet, ChannelSpec, ConditionalDistribution,
                    Distribution, SourceSpec, build_binary_isac_channel,
                    build_binary_source, load_channel, marginal_input,
                    save_channel, validate_channel)
from .estimators import (EstimatorTable, PosteriorTable, comm_estimator,
                         expected_sensing_distortion, posterior,
                         sensing_estimator)
from .solver import (ConstraintSet, SolverResult, TradeoffCurve,
                     capacity_distortion_cost, capacity_unconstrained,
                     rate_distortion, saturation_distortion, sensing_floor,
                     sweep_curve)
from .binary import (BinaryParams, closed_form_C, closed_form_R,
                     encoder_operating_point, figure_curves,
                     find_intersection, h_b, in_rd_region, parametric_oracle)
from .simulate import (Codebook, CodingConfig, JsccConfig, SimulationReport,
                       generate_codebook, run_channel_coding_trial,
                       run_symbolwise_jscc, transmit, typicality_decode)

__all__ = [
    "Alphabet", "ChannelSpec", "ConditionalDistribution", "Distribution",
    "SourceSpec", "build_binary_isac_channel", "build_binary_source",
    "load_channel", "marginal_input", "save_channel", "validate_channel",
    "EstimatorTable", "PosteriorTable", "comm_estimator",
    "expected_sensing_distortion", "posterior", "sensing_estimator",
    "ConstraintSet", "SolverResult", "TradeoffCurve",
    "capacity_distortion_cost", "capacity_unconstrained", "rate_distortion",
    "saturation_distortion", "sensing_floor", "sweep_curve",
    "BinaryParams", "closed_form_C", "closed_form_R",
    "encoder_operating_point", "figure_curves", "find_intersection",
    "h_b", "in_rd_region", "parametric_oracle",
    "Codebook", "CodingConfig", "JsccConfig", "SimulationReport",
    "generate_codebook", "run_channel_coding_trial", "run_symbolwise_jscc",
    "transmit", "typicality_decode",
]
