"""Exact and approximate counting of lattice points in d-dimensional balls.

Exact counts use a dynamic program over one coordinate at a time.  For a ball
whose center coordinates all have the form i_k + j_k*lambda (integer i_k,
|j_k| <= l), fixing a prefix of coordinates to integers leaves a residual
squared radius of the form r^2 + a0 + a1*lambda + a2*lambda^2 with integer
coefficients (a0 = -sum y^2, a1 = 2 sum y*j, a2 = -sum j^2).  Counts are
invariant under integer translation of any coordinate, so the memo key is
just (dimensions remaining, residual triple); that collapse is what keeps the
table polynomial.  Large-radius balls with arbitrary centers are approximated
by the continuous ball volume, which is a (1+beta)-approximation once
r > 2 d^(3/2) / beta.

Numerics: all residual arithmetic is exact rational.  An irrational lambda is
carried as a >=128-bit rational surrogate; boundary comparisons then enforce
a 2^-64 guard band and reject inputs whose decisions fall inside it, since
the DP's correctness hinges on those sign decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence, Union

GUARD_BAND = Fraction(1, 2**64)

# 120 digits; far beyond the 128-bit floor for named-constant surrogates.
_PI_120 = (
    "3."
    "14159265358979323846264338327950288419716939937510"
    "58209749445923078164062862089986280348253421170679"
    "82148086513282306647"
)


class LatticeError(ValueError):
    pass


class GuardBandError(LatticeError):
    """A boundary comparison fell inside the numeric guard band."""


class LambdaValue(NamedTuple):
    value: Fraction
    exact: bool
    label: str


def _decimal_fraction(text: str) -> Fraction:
    return Fraction(text)


def parse_lambda(spec: Union[str, int, float, Fraction, LambdaValue]) -> LambdaValue:
    """Accept 'u/v', integers, decimals, or the named constant '1/pi'."""
    if isinstance(spec, LambdaValue):
        return spec
    if isinstance(spec, Fraction):
        return LambdaValue(spec, True, str(spec))
    if isinstance(spec, int):
        return LambdaValue(Fraction(spec), True, str(spec))
    if isinstance(spec, float):
        return LambdaValue(Fraction(spec), True, repr(spec))
    text = spec.strip()
    if text in ("1/pi", "1/PI"):
        return LambdaValue(1 / _decimal_fraction(_PI_120), False, "1/pi")
    if text in ("pi", "PI"):
        return LambdaValue(_decimal_fraction(_PI_120), False, "pi")
    try:
        return LambdaValue(Fraction(text), True, text)
    except (ValueError, ZeroDivisionError) as exc:
        raise LatticeError(f"cannot parse lambda {spec!r}") from exc


class ResidualRadius(NamedTuple):
    """Coefficients of a residual squared radius r'^2 = r^2 + a0 + a1*L + a2*L^2."""

    a0: int
    a1: int
    a2: int

    def value(self, r2: Fraction, lam: Fraction) -> Fraction:
        return r2 + self.a0 + self.a1 * lam + self.a2 * lam * lam


@dataclass(frozen=True)
class BallSpec:
    """A d-dimensional ball with structured center x_k = i_k + j_k*lambda."""

    dim: int
    r2: Fraction
    lam: LambdaValue
    l_bound: int
    center: tuple  # ((i_k, j_k), ...)

    def __post_init__(self):
        if self.dim < 1:
            raise LatticeError(f"dimension {self.dim} must be >= 1")
        if self.r2 <= 0:
            raise LatticeError("radius must be positive")
        if self.l_bound < 0:
            raise LatticeError("l must be >= 0")
        if len(self.center) != self.dim:
            raise LatticeError(f"center has {len(self.center)} coordinates, dim is {self.dim}")
        for i_k, j_k in self.center:
            if abs(j_k) > self.l_bound:
                raise LatticeError(f"|j|={abs(j_k)} exceeds l={self.l_bound}")
            if int(i_k) != i_k or int(j_k) != j_k:
                raise LatticeError("center parts i_k, j_k must be integers")

    @property
    def radius(self) -> float:
        return math.sqrt(float(self.r2))

    def center_values(self) -> tuple:
        lam = self.lam.value
        return tuple(Fraction(i) + j * lam for i, j in self.center)

    def is_lattice_center(self) -> bool:
        return all(j == 0 for _, j in self.center) or self.lam.value == 0


@dataclass(frozen=True)
class FreeBall:
    """A ball with an arbitrary real center (no DP structure assumed)."""

    dim: int
    radius: float
    center: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise LatticeError(f"dimension {self.dim} must be >= 1")
        if self.radius <= 0:
            raise LatticeError("radius must be positive")
        if len(self.center) != self.dim:
            raise LatticeError("center length does not match dim")

    @property
    def r2(self) -> Fraction:
        return Fraction(self.radius) ** 2

    def center_values(self) -> tuple:
        return tuple(Fraction(c) for c in self.center)


def make_ball(
    dim: int,
    radius: Optional[float] = None,
    *,
    r2: Union[Fraction, int, float, None] = None,
    lam: Union[str, int, float, Fraction, LambdaValue] = 0,
    l: int = 0,
    center: Optional[Sequence] = None,
) -> BallSpec:
    """Convenience constructor; radius may be given squared for exact roots."""
    if (radius is None) == (r2 is None):
        raise LatticeError("give exactly one of radius or r2")
    r2f = Fraction(radius) ** 2 if r2 is None else Fraction(r2)
    lam_v = parse_lambda(lam)
    if center is None:
        center = [(0, 0)] * dim
    norm = tuple((int(i), int(j)) for i, j in center)
    return BallSpec(dim=dim, r2=r2f, lam=lam_v, l_bound=l, center=norm)


def _checked_le(lhs: Fraction, rhs: Fraction, exact: bool) -> bool:
    """lhs <= rhs, rejecting decisions inside the guard band for surrogate lambda."""
    if not exact and abs(lhs - rhs) < GUARD_BAND and lhs != rhs:
        raise GuardBandError(
            "comparison within 2^-64 of the boundary under a surrogate lambda; "
            "supply lambda with more precision or as an exact rational"
        )
    return lhs <= rhs


def _integer_interval(x: Fraction, q: Fraction, exact: bool) -> tuple[int, int]:
    """Integers t with (t - x)^2 <= q, i.e. t in [x - sqrt(q), x + sqrt(q)].

    Float seeds with a +-2 cushion, then exact rational fix-up inward from
    both ends; the scans are bounded by the cushion plus the true range.
    """
    if q < 0:
        return 0, -1
    s = math.sqrt(float(q))
    xf = float(x)
    lo = math.ceil(xf - s) - 2
    hi = math.floor(xf + s) + 2
    while lo <= hi and not _checked_le((lo - x) ** 2, q, exact):
        lo += 1
    while hi >= lo and not _checked_le((hi - x) ** 2, q, exact):
        hi -= 1
    if lo > hi:
        return 0, -1
    return lo, hi


@lru_cache(maxsize=None)
def count_origin_int(k: int, budget: int) -> int:
    """Integer points z in Z^k with sum z_i^2 <= budget; exact, memoized.

    Fast path for lattice centers (the structured DP reduces to this when
    every j_k is zero).
    """
    if budget < 0:
        return 0
    if k == 0:
        return 1
    if k == 1:
        return 2 * math.isqrt(budget) + 1
    total = count_origin_int(k - 1, budget)
    for o in range(1, math.isqrt(budget) + 1):
        total += 2 * count_origin_int(k - 1, budget - o * o)
    return total


class CountTable:
    """Memo table keyed by (dims_remaining, residual triple).

    Entries are immutable once written; integer parts of the remaining center
    coordinates never enter the key (integer translation does not change the
    count).  Duplicate concurrent computation is harmless: the value for a
    key is a pure function of the key and the ball.
    """

    def __init__(self):
        self._table: dict = {}

    def get(self, key):
        return self._table.get(key)

    def put(self, key, value: int) -> None:
        prev = self._table.setdefault(key, value)
        if prev != value:  # pragma: no cover
            raise LatticeError("conflicting memo write: table corrupted")

    def __len__(self) -> int:
        return len(self._table)

    def keys(self):
        return self._table.keys()


def count_lattice_points(
    ball: BallSpec,
    table: Optional[CountTable] = None,
    memoize: bool = True,
) -> int:
    """Exact C(r, p, d) for a structured-center ball.

    Recurrence over coordinates: fix coordinate k+1 to each integer t in
    [x_{k+1} - r', x_{k+1} + r'] and recurse on the slice of squared radius
    r'^2 - (t - x_{k+1})^2; zero dimensions remaining counts 1.  Values are
    arbitrary-precision integers.
    """
    if table is None:
        table = CountTable()
    lam = ball.lam.value
    exact = ball.lam.exact
    r2 = ball.r2
    js = [j for _, j in ball.center]
    d = ball.dim

    def rec(k: int, a0: int, a1: int, a2: int) -> int:
        rem = d - k
        if rem == 0:
            return 1
        key = (rem, ResidualRadius(a0, a1, a2))
        if memoize:
            hit = table.get(key)
            if hit is not None:
                return hit
        j = js[k]
        x = j * lam
        q = r2 + a0 + a1 * lam + a2 * lam * lam
        lo, hi = _integer_interval(x, q, exact)
        total = 0
        for t in range(lo, hi + 1):
            total += rec(k + 1, a0 - t * t, a1 + 2 * t * j, a2 - j * j)
        if memoize:
            table.put(key, total)
        return total

    # Integer translation invariance lets the recursion ignore every i_k.
    return rec(0, 0, 0, 0)


def residual_set(ball: BallSpec) -> set[ResidualRadius]:
    """All residual squared radii reachable by pinning a nonempty prefix of
    coordinates to in-range integers (the DP's memo-key space)."""
    lam = ball.lam.value
    exact = ball.lam.exact
    r2 = ball.r2
    js = [j for _, j in ball.center]
    out: set[ResidualRadius] = set()
    level = {ResidualRadius(0, 0, 0)}
    for k in range(ball.dim):
        j = js[k]
        x = j * lam
        nxt: set[ResidualRadius] = set()
        for res in level:
            q = res.value(r2, lam)
            lo, hi = _integer_interval(x, q, exact)
            for t in range(lo, hi + 1):
                nxt.add(ResidualRadius(res.a0 - t * t, res.a1 + 2 * t * j, res.a2 - j * j))
        out |= nxt
        level = nxt
    return out


def log_ball_volume(dim: int, radius: float) -> float:
    """Natural log of the d-ball volume pi^(d/2) / Gamma(d/2 + 1) * r^d."""
    if dim < 1:
        raise LatticeError("dimension must be >= 1")
    if radius <= 0:
        raise LatticeError("radius must be positive")
    return 0.5 * dim * math.log(math.pi) - math.lgamma(0.5 * dim + 1.0) + dim * math.log(radius)


def ball_volume(dim: int, radius: float) -> float:
    """d-ball volume, computed in log space; raises with the log value when
    the result exceeds float range."""
    lv = log_ball_volume(dim, radius)
    if lv > 709.0:
        raise OverflowError(f"ball volume exceeds float range; log-volume = {lv}")
    return math.exp(lv)


def volume_radius_floor(dim: int, beta: float) -> float:
    """Minimum radius for the volume to be a (1+beta)-approximation."""
    if not (0.0 < beta < 1.0):
        raise LatticeError("beta must be in (0, 1)")
    return 2.0 * dim**1.5 / beta


def approx_count_large(dim: int, radius: float, beta: float) -> float:
    """Volume approximation of C(r, p, d), center-free.

    Valid only above the radius floor, where
    (1-beta) C <= V_d(r) <= (1+beta) C.
    """
    floor = volume_radius_floor(dim, beta)
    if radius <= floor:
        raise LatticeError(
            f"radius {radius} too small for a (1+{beta})-approximation; "
            f"need r > {floor}"
        )
    return ball_volume(dim, radius)


def hybrid_count(
    ball: Union[BallSpec, FreeBall, None],
    beta: float,
    ambient_dim: Optional[int] = None,
) -> Union[int, float]:
    """P(r, q, k): exact DP count below the radius floor, volume above it.

    Always within (1-beta) C <= P <= (1+beta) C.  The radius threshold uses
    the ambient dimension (defaults to the ball's own).  A zero-dimensional
    slice (ball=None) counts its single point.
    """
    if ball is None:
        return 1
    d = ambient_dim if ambient_dim is not None else ball.dim
    floor = volume_radius_floor(d, beta)
    r = math.sqrt(float(ball.r2)) if isinstance(ball, BallSpec) else ball.radius
    if r <= floor:
        if not isinstance(ball, BallSpec):
            raise LatticeError(
                "small-radius branch needs a DP-countable center "
                "(lattice or i + j*lambda form)"
            )
        return count_lattice_points(ball)
    return ball_volume(ball.dim, r)


def point_in_ball(ball: Union[BallSpec, FreeBall], point: Sequence[int]) -> bool:
    """Exact membership test sum (z_k - x_k)^2 <= r^2 (guarded for surrogates)."""
    center = ball.center_values()
    if len(point) != len(center):
        raise LatticeError("point dimension does not match ball")
    dist2 = sum((Fraction(int(z)) - x) ** 2 for z, x in zip(point, center))
    exact = ball.lam.exact if isinstance(ball, BallSpec) else True
    return _checked_le(dist2, ball.r2, exact)
