"""Random lattice points in balls: exact for small structured-center balls,
(1+alpha)-biased for large balls.

The exact sampler walks the counting DP one coordinate at a time, choosing
value t with probability C(child)/C(parent); the branch probabilities
telescope to exactly 1/C, so uniformity is auditable per draw rather than
statistically.  The large-radius sampler groups each coordinate range into
runs whose slice radii agree within a factor (1+delta)^2, weighs each run by
its length times a hybrid count of the slice ball at a representative
endpoint, picks a run, then a coordinate uniformly inside it.  Sub-balls
whose radius drops below the hybrid's exact threshold are finished with the
exact sampler (their centers are lattice points, so that branch adds no
bias).  Arbitrary centers are handled by rejection from the enlarged ball
around the nearest lattice point.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .lattice_count import (
    BallSpec,
    CountTable,
    FreeBall,
    LambdaValue,
    ResidualRadius,
    _integer_interval,
    ball_volume,
    count_lattice_points,
    count_origin_int,
    point_in_ball,
)
from .rng import RandomStream, randbelow

DEFAULT_REJECTION_GAMMA = 1e-9
ZERO_LAMBDA = LambdaValue(Fraction(0), True, "0")


class SamplerError(RuntimeError):
    pass


class RejectionCapError(SamplerError):
    """The rejection loop exceeded its iteration cap; the radius precondition
    or the numeric setup is being misused."""


@dataclass(frozen=True)
class SamplerConfig:
    """Bias target alpha and the derived constants the analysis fixes.

    eps4 = alpha/4, g(d) = d^2, beta = alpha / (alpha + 16 d + 16); the run
    partition ratio is 1 + eps4/g(d).
    """

    alpha: float
    dim: int

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise SamplerError(f"alpha={self.alpha} must be in (0, 1)")
        if self.dim < 1:
            raise SamplerError("dim must be >= 1")

    @property
    def eps4(self) -> float:
        return self.alpha / 4.0

    @property
    def g_d(self) -> int:
        return self.dim * self.dim

    @property
    def beta(self) -> float:
        return self.alpha / (self.alpha + 16.0 * self.dim + 16.0)

    @property
    def ratio(self) -> Fraction:
        return 1 + Fraction(self.eps4) / self.g_d

    @property
    def exact_threshold_sq(self) -> Fraction:
        """Squared radius below which slice counts (and sampling) are exact."""
        t = 2.0 * self.dim**1.5 / self.beta
        return Fraction(t) ** 2

    @property
    def lattice_center_radius_floor(self) -> float:
        return 2.0 * self.dim**3 / self.alpha

    @property
    def arbitrary_center_radius_floor(self) -> float:
        return 2.0 * self.dim**1.5 / self.alpha


@dataclass(frozen=True)
class IntervalPartition:
    """Consecutive integer runs with endpoint slice radii within ratio^2."""

    intervals: tuple  # ((a_i, b_i), ...)
    r2: Fraction
    center: int
    ratio: Fraction

    def residual(self, x: int) -> Fraction:
        return self.r2 - (x - self.center) ** 2

    def validate(self) -> None:
        """Check the defining conditions.

        1. Runs are consecutive: a_{i+1} = b_i + 1.
        2. Within a run, every ordered endpoint pair (x, y) satisfies
           r^2 - (x-c)^2 <= ratio^2 (r^2 - (y-c)^2).
        3. Adjacent runs cannot merge: some endpoint pair across the boundary
           exceeds the factor, so the partition is maximally coarse.
        """
        iv = self.intervals
        if not iv:
            raise SamplerError("empty partition")
        rho2 = self.ratio * self.ratio
        for i in range(len(iv) - 1):
            if iv[i + 1][0] != iv[i][1] + 1:
                raise SamplerError("runs are not consecutive")
        for a, b in iv:
            if a > b:
                raise SamplerError("inverted run")
            ga, gb = self.residual(a), self.residual(b)
            if ga > rho2 * gb or gb > rho2 * ga:
                raise SamplerError("within-run factor violated")
        for i in range(len(iv) - 1):
            pts = {iv[i][0], iv[i][1], iv[i + 1][0], iv[i + 1][1]}
            gs = [self.residual(p) for p in pts]
            if not (max(gs) > rho2 * min(gs)):
                raise SamplerError("adjacent runs could merge: factor not exceeded")


def build_partition(
    r2: Union[Fraction, float, int],
    c: int,
    ratio: Union[Fraction, float],
    lo: int,
    hi: int,
) -> IntervalPartition:
    """Greedy maximal runs over [lo, hi]; exact rational endpoint tests."""
    if lo > hi:
        raise SamplerError("empty range")
    r2 = Fraction(r2)
    ratio = Fraction(ratio)
    if ratio <= 1:
        raise SamplerError("ratio must exceed 1")
    rho2 = ratio * ratio

    def g(x: int) -> Fraction:
        return r2 - (x - c) ** 2

    intervals = []
    a = lo
    ga = g(a)
    for x in range(lo + 1, hi + 1):
        gx = g(x)
        if ga > rho2 * gx or gx > rho2 * ga:
            intervals.append((a, x - 1))
            a, ga = x, gx
    intervals.append((a, hi))
    return IntervalPartition(tuple(intervals), r2, c, ratio)


def nearest_lattice_point(p: Sequence[float]) -> tuple:
    """Coordinate-wise rounding with exact half-fractions resolved toward zero."""
    out = []
    for x in p:
        fx = Fraction(x)
        if fx >= 0:
            fl = math.floor(fx)
            out.append(fl if fx - fl <= Fraction(1, 2) else fl + 1)
        else:
            a = -fx
            fl = math.floor(a)
            out.append(-fl if a - fl <= Fraction(1, 2) else -(fl + 1))
    return tuple(out)


class SmallBallSampler:
    """Reusable exact sampler: counting table plus per-state cumulative sums,
    so repeated draws cost O(d log r) table walks instead of re-enumeration."""

    def __init__(self, ball: BallSpec, table: Optional[CountTable] = None):
        self.ball = ball
        self.table = table if table is not None else CountTable()
        self.total = count_lattice_points(ball, table=self.table)
        if self.total < 1:
            raise SamplerError("ball contains no lattice point")
        self._cums: dict = {}

    def _state(self, k: int, a0: int, a1: int, a2: int):
        key = (self.ball.dim - k, a0, a1, a2)
        entry = self._cums.get(key)
        if entry is not None:
            return entry
        lam = self.ball.lam.value
        j = self.ball.center[k][1]
        q = self.ball.r2 + a0 + a1 * lam + a2 * lam * lam
        lo, hi = _integer_interval(j * lam, q, self.ball.lam.exact)
        cums = []
        acc = 0
        rem = self.ball.dim - k - 1
        for t in range(lo, hi + 1):
            if rem == 0:
                child = 1
            else:
                child = self.table.get((rem, ResidualRadius(a0 - t * t, a1 + 2 * t * j, a2 - j * j)))
                if child is None:  # pragma: no cover
                    raise SamplerError("count table missing a reachable state")
            acc += child
            cums.append(acc)
        entry = (lo, cums)
        self._cums[key] = entry
        return entry

    def draw(self, rng: RandomStream, audit: Optional[list] = None) -> tuple:
        a0 = a1 = a2 = 0
        parent = self.total
        point = []
        for k in range(self.ball.dim):
            lo, cums = self._state(k, a0, a1, a2)
            z = randbelow(rng.gen, parent)
            i = bisect_right(cums, z)
            child = cums[i] - (cums[i - 1] if i > 0 else 0)
            t = lo + i
            if audit is not None:
                audit.append(Fraction(child, parent))
            j = self.ball.center[k][1]
            a0, a1, a2 = a0 - t * t, a1 + 2 * t * j, a2 - j * j
            parent = child
            point.append(t)
        return tuple(t + i for t, (i, _) in zip(point, self.ball.center))


def sample_small_ball(
    ball: BallSpec,
    rng: RandomStream,
    audit: Optional[list] = None,
    table: Optional[CountTable] = None,
) -> tuple:
    """One exactly uniform lattice point; see `SmallBallSampler` for bulk use.

    Each point has probability exactly 1/C(r, p, d); pass `audit` to record
    the per-level branch probabilities (Fractions) whose product is 1/C.
    """
    return SmallBallSampler(ball, table=table).draw(rng, audit=audit)


class _BigBallSampler:
    """One sampling context for a lattice-center big ball: caches partitions,
    hybrid slice counts and exact-fallback tables across draws."""

    def __init__(self, cfg: SamplerConfig):
        self.cfg = cfg
        self._partitions: dict = {}
        self._exact: dict = {}
        self.ratio = cfg.ratio
        self.thresh_sq = cfg.exact_threshold_sq

    def hybrid(self, r2: Fraction, k: int) -> Union[int, float]:
        """P(r, q, k) for a lattice-center slice ball (threshold in ambient d)."""
        if k == 0:
            return 1
        if r2 <= self.thresh_sq:
            return count_origin_int(k, math.floor(r2))
        return ball_volume(k, math.sqrt(float(r2)))

    def partition_side(self, r2: Fraction, y: int, lo: int, hi: int) -> tuple:
        key = (r2, y, lo, hi)
        hit = self._partitions.get(key)
        if hit is None:
            hit = build_partition(r2, y, self.ratio, lo, hi).intervals
            self._partitions[key] = hit
        return hit

    def exact_sampler(self, r2: Fraction, rest: tuple) -> SmallBallSampler:
        key = (r2, rest)
        hit = self._exact.get(key)
        if hit is None:
            sub = BallSpec(
                dim=len(rest),
                r2=r2,
                lam=ZERO_LAMBDA,
                l_bound=0,
                center=tuple((int(y), 0) for y in rest),
            )
            hit = SmallBallSampler(sub)
            self._exact[key] = hit
        return hit

    def draw(
        self,
        r2: Fraction,
        rest: tuple,
        rng: RandomStream,
        audit: Optional[list],
    ) -> tuple:
        t = len(rest)
        if t == 0:
            return ()
        if r2 <= self.thresh_sq:
            # Exact finish: the remaining center is a lattice point, so the
            # uniform sampler applies with zero approximation error.
            return self.exact_sampler(r2, rest).draw(rng, audit=audit)
        y = rest[0]
        lo, hi = _integer_interval(Fraction(y), r2, True)
        if lo > hi:
            raise SamplerError("empty coordinate range in big-ball recursion")
        intervals = []
        if lo <= y:
            intervals += list(self.partition_side(r2, y, lo, min(y, hi)))
        if hi >= y + 1:
            intervals += list(self.partition_side(r2, y, max(lo, y + 1), hi))

        weights = []
        exact_mode = True
        for a, b in intervals:
            rep = b if b <= y else a  # endpoint nearest the center
            p_val = self.hybrid(r2 - (rep - y) ** 2, t - 1)
            if not isinstance(p_val, int):
                exact_mode = False
            weights.append((b - a + 1) * p_val)

        if exact_mode:
            total = sum(weights)
            if total <= 0:
                raise SamplerError("no mass in interval weights")
            z = randbelow(rng.gen, total)
            acc = 0
            for (a, b), w in zip(intervals, weights):
                acc += w
                if z < acc:
                    break
            level_prob: Union[Fraction, float] = Fraction(w, total * (b - a + 1))
        else:
            weights = [float(w) for w in weights]
            total = math.fsum(weights)
            if not math.isfinite(total) or total <= 0.0:
                raise SamplerError("interval weights degenerate in float mode")
            u = rng.gen.random() * total
            acc = 0.0
            for (a, b), w in zip(intervals, weights):
                acc += w
                if u < acc:
                    break
            level_prob = w / (total * (b - a + 1))
        z_coord = a + randbelow(rng.gen, b - a + 1)
        if audit is not None:
            audit.append(level_prob)
        next_r2 = r2 - (z_coord - y) ** 2
        return (z_coord,) + self.draw(next_r2, rest[1:], rng, audit)


def sample_big_ball_lattice_center(
    radius: float,
    q: Sequence[int],
    cfg: SamplerConfig,
    rng: RandomStream,
    audit: Optional[list] = None,
    *,
    r2: Optional[Fraction] = None,
    sampler: Optional[_BigBallSampler] = None,
) -> tuple:
    """Lattice point in B(r, q) with per-point probability in [(1-a)/C, (1+a)/C].

    Requires a lattice center q and r > 2 d^3 / alpha.
    """
    d = len(q)
    if d != cfg.dim:
        raise SamplerError("config dimension does not match center")
    r2v = Fraction(radius) ** 2 if r2 is None else Fraction(r2)
    # The radius floor only exists to bound the bias; below the exact-count
    # threshold the draw is exactly uniform, so the floor is moot there.
    if radius <= cfg.lattice_center_radius_floor and r2v > cfg.exact_threshold_sq:
        raise SamplerError(
            f"radius {radius} too small; lattice-center sampler needs "
            f"r > {cfg.lattice_center_radius_floor}"
        )
    if any(int(y) != y for y in q):
        raise SamplerError("center must be a lattice point")
    if sampler is None:
        sampler = _BigBallSampler(cfg)
    return sampler.draw(r2v, tuple(int(y) for y in q), rng, audit)


def _sqrt_upper(n: int, digits: int = 12) -> Fraction:
    """Rational upper bound on sqrt(n), within 10^-digits."""
    scale = 10**digits
    v = math.isqrt(n * scale * scale)
    while v * v < n * scale * scale:
        v += 1
    return Fraction(v, scale)


class BigBallSampler:
    """Reusable rejection sampler for an arbitrary-center ball.

    Keeps the enlarged-ball sampling context warm across draws; `stats`
    accumulates attempt/acceptance counts for rejection-rate checks.
    """

    def __init__(self, radius: float, center: Sequence[float], cfg: SamplerConfig):
        d = len(center)
        if d != cfg.dim:
            raise SamplerError("config dimension does not match center")
        if radius <= cfg.arbitrary_center_radius_floor:
            raise SamplerError(
                f"radius {radius} too small; arbitrary-center sampler needs "
                f"r > {cfg.arbitrary_center_radius_floor}"
            )
        self.cfg = cfg
        self.target = FreeBall(dim=d, radius=radius, center=tuple(float(c) for c in center))
        self.q = nearest_lattice_point(center)
        enlarged = Fraction(radius) + _sqrt_upper(d)
        self.enlarged_radius = float(enlarged)
        self.enlarged_r2 = enlarged * enlarged
        if (
            self.enlarged_radius <= cfg.lattice_center_radius_floor
            and self.enlarged_r2 > cfg.exact_threshold_sq
        ):
            raise SamplerError(
                f"enlarged radius {self.enlarged_radius} below the lattice-center "
                f"floor {cfg.lattice_center_radius_floor} and above the exact "
                "threshold; decrease alpha or enlarge the ball"
            )
        self._inner = _BigBallSampler(cfg)
        self.stats = {"attempts": 0, "accepted": 0}

    def draw(
        self,
        rng: RandomStream,
        audit: Optional[list] = None,
        max_attempts: Optional[int] = None,
    ) -> tuple:
        if max_attempts is None:
            max_attempts = math.ceil(64.0 * math.log(2.0 / DEFAULT_REJECTION_GAMMA))
        for _ in range(max_attempts):
            self.stats["attempts"] += 1
            trial_audit: Optional[list] = [] if audit is not None else None
            s = self._inner.draw(self.enlarged_r2, self.q, rng, trial_audit)
            if point_in_ball(self.target, s):
                self.stats["accepted"] += 1
                if audit is not None and trial_audit is not None:
                    audit.extend(trial_audit)
                return s
        raise RejectionCapError(
            f"no accepted point after {max_attempts} attempts; check the "
            "radius precondition and numeric setup"
        )

    @property
    def failure_bound(self) -> float:
        """Theoretical per-attempt rejection bound
        alpha + 2 beta/(1-beta) + d^(3/2)/(r + sqrt(d))."""
        cfg = self.cfg
        return (
            cfg.alpha
            + 2.0 * cfg.beta / (1.0 - cfg.beta)
            + cfg.dim**1.5 / (self.target.radius + math.sqrt(cfg.dim))
        )


def sample_big_ball(
    radius: float,
    p: Sequence[float],
    cfg: SamplerConfig,
    rng: RandomStream,
    audit: Optional[list] = None,
    stats: Optional[dict] = None,
    max_attempts: Optional[int] = None,
) -> tuple:
    """One lattice point in an arbitrary-center ball via rejection.

    Draws from the enlarged ball B(r + sqrt(d), q) around the nearest lattice
    point q until the point lands in B(r, p); the per-point probability is
    within (1 +- alpha')/C with alpha' = 2 alpha / (1 - alpha).
    """
    sampler = BigBallSampler(radius, p, cfg)
    out = sampler.draw(rng, audit=audit, max_attempts=max_attempts)
    if stats is not None:
        for k, v in sampler.stats.items():
            stats[k] = stats.get(k, 0) + v
    return out
