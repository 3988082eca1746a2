"""unionscope: bounded-round randomized set-union estimation over biased
oracles, plus exact counting and random generation of lattice points in
high-dimensional balls."""

from .ball_union import ball_oracle, ball_oracle_list, estimate_ball_union
from .coverage import coverage_ratio_bound, greedy_max_coverage, xi_choice
from .estimator import UnionEstimate, approximate_union, estimate_s, thickness
from .lattice_count import (
    BallSpec,
    FreeBall,
    ball_volume,
    count_lattice_points,
    hybrid_count,
    make_ball,
    parse_lambda,
    residual_set,
)
from .lattice_sample import (
    SamplerConfig,
    build_partition,
    nearest_lattice_point,
    sample_big_ball,
    sample_big_ball_lattice_center,
    sample_small_ball,
)
from .oracle import BiasSpec, OracleList, make_biased_explicit_set, random_choice
from .rng import RandomStream
from .rounds import RoundHarness, RoundRequest
from .schedule import ParameterSchedule, build_schedule, round_bound, stage_count

__version__ = "0.1.0"
SCHEMA_VERSION = "unionscope/1"

__all__ = [
    "BallSpec",
    "BiasSpec",
    "FreeBall",
    "OracleList",
    "ParameterSchedule",
    "RandomStream",
    "RoundHarness",
    "RoundRequest",
    "SamplerConfig",
    "UnionEstimate",
    "approximate_union",
    "ball_oracle",
    "ball_oracle_list",
    "ball_volume",
    "build_partition",
    "build_schedule",
    "count_lattice_points",
    "coverage_ratio_bound",
    "estimate_ball_union",
    "estimate_s",
    "greedy_max_coverage",
    "hybrid_count",
    "make_ball",
    "make_biased_explicit_set",
    "nearest_lattice_point",
    "parse_lambda",
    "random_choice",
    "residual_set",
    "round_bound",
    "sample_big_ball",
    "sample_big_ball_lattice_center",
    "sample_small_ball",
    "stage_count",
    "thickness",
    "xi_choice",
]
