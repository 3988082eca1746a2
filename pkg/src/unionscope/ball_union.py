"""Lattice-ball instances as set oracles, and union estimation over them.

A ball qualifies as an oracle if its radius clears the volume-approximation
floor 2 d^(3/2)/beta (any center) or its center has the structured
i + j*lambda form (exact DP count).  The small branch publishes the exact
count and samples exactly uniformly (zero bias); the large branch publishes
the rounded ball volume and samples through the rejection sampler, whose
per-point bias is alpha' = 2 alpha/(1 - alpha).  Membership is always the
exact squared-distance test.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Union

from .estimator import UnionEstimate, approximate_union
from .lattice_count import (
    BallSpec,
    FreeBall,
    LatticeError,
    count_lattice_points,
    CountTable,
    point_in_ball,
    volume_radius_floor,
    ball_volume,
)
from .lattice_sample import BigBallSampler, SamplerConfig, SmallBallSampler
from .oracle import BiasSpec, OracleList, SetOracle
from .rng import RandomStream
from .rounds import RoundHarness
from .schedule import build_schedule

Ball = Union[BallSpec, FreeBall]


class BallOracleError(LatticeError):
    pass


class BallOracle(SetOracle):
    """SetOracle over the lattice points of one ball."""

    def __init__(self, ball: Ball, alpha: float, beta: float):
        self.ball = ball
        self.alpha = alpha
        self.beta = beta
        d = ball.dim
        radius = math.sqrt(float(ball.r2)) if isinstance(ball, BallSpec) else ball.radius
        floor = volume_radius_floor(d, beta)
        structured = isinstance(ball, BallSpec)

        if radius <= floor:
            if not structured:
                raise BallOracleError(
                    f"ball is not admissible: radius {radius} <= {floor} and the "
                    "center is not in i + j*lambda form; enlarge the radius past "
                    f"{floor} or supply a structured center"
                )
            self.mode = "exact"
            self._table = CountTable()
            self.exact_count = count_lattice_points(ball, table=self._table)
            if self.exact_count < 1:
                raise BallOracleError("ball contains no lattice point")
            self._sampler = SmallBallSampler(ball, table=self._table)
            self.alpha_effective = 0.0
            self.beta_effective = 0.0
            size = self.exact_count
        else:
            if not (0.0 < alpha < 1.0):
                raise BallOracleError("large-branch oracle needs alpha in (0, 1)")
            if radius <= 2.0 * d**1.5 / alpha:
                raise BallOracleError(
                    f"radius {radius} below the sampler floor {2.0 * d ** 1.5 / alpha}; "
                    "decrease alpha or enlarge the ball"
                )
            self.mode = "volume"
            self.exact_count = None
            center = tuple(float(x) for x in ball.center_values())
            self._sampler = BigBallSampler(radius, center, SamplerConfig(alpha=alpha, dim=d))
            self.alpha_effective = 2.0 * alpha / (1.0 - alpha)
            self.beta_effective = beta
            size = max(1, round(ball_volume(d, radius)))
        super().__init__(size)

    def random_element(self, rng: RandomStream):
        self._count_samples(1)
        return self._sampler.draw(rng)

    def _member(self, q) -> bool:
        # Foreign-shaped ids (e.g. integer ids from explicit sets in a mixed
        # instance) are simply not members.
        if not isinstance(q, tuple) or len(q) != self.ball.dim:
            return False
        return point_in_ball(self.ball, q)

    def contains_batch(self, queries: Sequence) -> list[bool]:
        self._count_queries(len(queries))
        return [self._member(q) for q in queries]


def ball_oracle(ball: Ball, alpha: float, beta: float) -> BallOracle:
    """Wrap one ball; size in [(1-beta) C, (1+beta) C], generator exact or
    (1+alpha')-biased depending on the branch."""
    return BallOracle(ball, alpha, beta)


def list_bias(oracles: Sequence[BallOracle]) -> BiasSpec:
    """Worst-case bias across mixed exact/volume oracles.

    The estimator's guarantee is stated for one list-level bias, so mixing
    branches reports the maximum.
    """
    a = max(o.alpha_effective for o in oracles)
    b = max(o.beta_effective for o in oracles)
    if a >= 1.0:
        raise BallOracleError(
            f"effective sampler bias alpha'={a} >= 1; choose alpha < 1/3 so the "
            "guarantee interval stays meaningful"
        )
    return BiasSpec(alpha_l=a, alpha_r=a, beta_l=b, beta_r=b)


def ball_oracle_list(balls: Sequence[Ball], alpha: float, beta: float) -> OracleList:
    if len(balls) < 2:
        raise BallOracleError("need at least 2 balls")
    oracles = tuple(ball_oracle(b, alpha, beta) for b in balls)
    return OracleList(oracles, list_bias(oracles))


def estimate_ball_union(
    balls: Sequence[Ball],
    epsilon: float,
    gamma: float,
    alpha: float,
    beta: float,
    rng: RandomStream,
    *,
    c1: float = 0.0,
    z_min: int = 1,
    z_max: Optional[int] = None,
    sample_scale: float = 1.0,
    harness: Optional[RoundHarness] = None,
) -> UnionEstimate:
    """Estimate the number of lattice points in the union of the balls."""
    olist = ball_oracle_list(balls, alpha, beta)
    sched = build_schedule(len(balls), epsilon, gamma, c1=c1, z_min=z_min, z_max=z_max)
    if harness is None:
        harness = RoundHarness(olist)
    return approximate_union(olist, sched, rng, sample_scale=sample_scale, harness=harness)
