"""Independent brute-force oracles backing the derived test values.

Nothing here is used by production estimation paths; caps fail loudly rather
than degrade.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .lattice_count import BallSpec, FreeBall, point_in_ball


class ReferenceCapError(RuntimeError):
    pass


def exact_union(collections: Sequence[Iterable], cap: int = 10**7) -> int:
    """Exact |A_1 u ... u A_m| by hashing."""
    total = sum(len(c) if hasattr(c, "__len__") else 0 for c in collections)
    if total > cap:
        raise ReferenceCapError(f"{total} elements exceed cap {cap}")
    out: set = set()
    for c in collections:
        out.update(c)
        if len(out) > cap:
            raise ReferenceCapError(f"union exceeded cap {cap}")
    return len(out)


def enumerate_ball(
    center: Sequence[Union[int, float, Fraction]],
    radius: Union[int, float, Fraction, None] = None,
    cap: int = 10**7,
    r2: Union[int, Fraction, None] = None,
) -> list[tuple]:
    """Exhaustive scan of the integer bounding box with exact membership.

    Pass `r2` for radii whose square is exact but whose root is not
    (e.g. sqrt(n)); boundary shells then land on the right side.
    """
    d = len(center)
    if (radius is None) == (r2 is None):
        raise ValueError("give exactly one of radius or r2")
    r2 = Fraction(radius) ** 2 if r2 is None else Fraction(r2)
    rf = math.sqrt(float(r2))
    if (2 * rf + 2) ** d > cap:
        raise ReferenceCapError(f"bounding box exceeds cap {cap}")
    cfrac = [Fraction(x) for x in center]
    lo = [math.ceil(float(x) - rf) - 1 for x in cfrac]
    hi = [math.floor(float(x) + rf) + 1 for x in cfrac]

    denom = math.lcm(*(x.denominator for x in cfrac), r2.denominator)
    if denom <= 1 << 16:
        # Vectorized integer path: scale by the common denominator.
        axes = []
        for k in range(d):
            ts = np.arange(lo[k], hi[k] + 1, dtype=np.int64)
            off = ts * denom - int(cfrac[k] * denom)
            axes.append(off * off)
        r2_scaled = int(r2 * denom * denom)
        acc = axes[0].reshape([-1] + [1] * (d - 1))
        for k in range(1, d):
            shape = [1] * d
            shape[k] = -1
            acc = acc + axes[k].reshape(shape)
        mask = acc <= r2_scaled
        points = []
        for idx in zip(*np.nonzero(mask)):
            points.append(tuple(lo[k] + int(i) for k, i in enumerate(idx)))
        return points

    points = []
    for tup in itertools.product(*(range(lo[k], hi[k] + 1) for k in range(d))):
        dist2 = sum((Fraction(t) - x) ** 2 for t, x in zip(tup, cfrac))
        if dist2 <= r2:
            points.append(tup)
    return points


def enumerate_ball_spec(ball: Union[BallSpec, FreeBall], cap: int = 10**7) -> list[tuple]:
    """Enumerate via the ball's own membership test (guards included)."""
    center = ball.center_values()
    rf = math.sqrt(float(ball.r2))
    d = ball.dim
    if (2 * rf + 2) ** d > cap:
        raise ReferenceCapError(f"bounding box exceeds cap {cap}")
    lo = [math.ceil(float(x) - rf) - 1 for x in center]
    hi = [math.floor(float(x) + rf) + 1 for x in center]
    out = []
    for tup in itertools.product(*(range(lo[k], hi[k] + 1) for k in range(d))):
        if point_in_ball(ball, tup):
            out.append(tup)
    return out


def union_of_balls(balls: Sequence[Union[BallSpec, FreeBall]], cap: int = 10**7) -> set:
    out: set = set()
    for b in balls:
        out.update(enumerate_ball_spec(b, cap=cap))
        if len(out) > cap:
            raise ReferenceCapError(f"union exceeded cap {cap}")
    return out


def coverage_opt(collections: Sequence[set], k: int) -> tuple[int, tuple]:
    """Exhaustive OPT for max coverage: best union size over all k-subsets."""
    best, best_subset = -1, ()
    for subset in itertools.combinations(range(len(collections)), k):
        size = len(set().union(*(collections[i] for i in subset)))
        if size > best:
            best, best_subset = size, subset
    return best, best_subset


def greedy_exact(collections: Sequence[set], k: int) -> tuple[list[int], int]:
    """Greedy with exact unions; ties to the lowest index (oracle sanity check)."""
    chosen: list[int] = []
    covered: set = set()
    for _ in range(k):
        best_j, best_gain = None, -1
        for j in range(len(collections)):
            if j in chosen:
                continue
            gain = len(covered | collections[j])
            if gain > best_gain:
                best_j, best_gain = j, gain
        chosen.append(best_j)
        covered |= collections[best_j]
    return chosen, len(covered)
