"""Derived constants and parameter functions driving the union estimator.

All accuracy splits (eps0..eps3, delta), failure-probability splits
(gamma1..gamma3) and the sample-count functions f1..f6 are evaluated here,
once, from the user inputs (m, epsilon, gamma, c1, z_min, z_max).  The
estimator reads everything from the resulting `ParameterSchedule`.

Convention: "log" is base 2 clamped below at 1 (so m = 2 is legal), "ln" is
natural; the distinction matters only for the Chernoff-derived terms, which
use ln.  Fractional sample counts are always rounded up, which only tightens
failure probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ScheduleError(ValueError):
    pass


def _log2c(x: float) -> float:
    """Base-2 log clamped below at 1."""
    return max(1.0, math.log2(x))


def g_star(x: float) -> float:
    """Chernoff envelope exp(-x^2/6), valid for deviations x in [0, 1]."""
    return math.exp(-x * x / 6.0)


@dataclass(frozen=True)
class ParameterSchedule:
    m: int
    epsilon: float
    gamma: float
    c1: float
    z_min: int
    z_max: int
    eps0: float
    eps1: float
    eps2: float
    eps3: float
    delta: float
    gamma1: float
    gamma2: float
    gamma3: float
    f1: float
    f2: float
    f3: float
    f4: float
    f5: float
    f6: float
    h1: int
    v_bound: int


def build_schedule(
    m: int,
    epsilon: float,
    gamma: float,
    c1: float = 0.0,
    z_min: int = 1,
    z_max: int | None = None,
) -> ParameterSchedule:
    """Evaluate every derived constant for (m, epsilon, gamma, c1, z_min, z_max).

    z_min and z_max are the caller's bounds on the least / largest number of
    sets any union element belongs to; the defaults (1, m) are always safe.
    """
    if z_max is None:
        z_max = m
    if m < 2:
        raise ScheduleError(f"m={m} violates m >= 2")
    if not (0.0 < epsilon < 1.0):
        raise ScheduleError(f"epsilon={epsilon} violates 0 < epsilon < 1")
    if not (0.0 < gamma < 1.0):
        raise ScheduleError(f"gamma={gamma} violates 0 < gamma < 1")
    if c1 < 0.0:
        raise ScheduleError(f"c1={c1} violates c1 >= 0")
    if not (1 <= z_min <= z_max <= m):
        raise ScheduleError(
            f"(z_min={z_min}, z_max={z_max}) violates 1 <= z_min <= z_max <= m={m}"
        )

    logm = _log2c(m)
    eps0 = epsilon / 9.0
    eps1 = eps0 / (6.0 * logm)
    eps2 = eps1 / 4.0
    eps3 = eps0 / 3.0
    delta = eps2 / 2.0
    gamma1 = gamma / 3.0
    gamma2 = gamma / (6.0 * logm)

    f1 = 8.0 * m**c1

    # Worst-case bound on the thickness-band count v(delta, z_min, z_max, L):
    # the instance value is unobservable without reading every set.
    v_bound = math.ceil(2.0 * math.log2(z_max / z_min) / math.log2(1.0 + delta)) + 1

    f2 = 2.0 * v_bound / eps3
    if z_min < m:
        f2 += 2.0 * math.log2(m / z_min) / (eps3 * math.log2(1.0 + delta))

    f3 = f1 * 6.0 * math.log(2.0 / gamma2) / eps2**2
    f4 = f2 * math.log2(m * m / eps1) / (6.0 * eps1**2) + f3 / (eps2 * f1)
    f5 = m * f4 / z_min
    gamma3 = gamma2 / (2.0 * f5)
    f6 = f1 * (24.0 / eps1**2) * math.log(2.0 / gamma3)
    h1 = math.ceil(f5)

    sched = ParameterSchedule(
        m=m, epsilon=epsilon, gamma=gamma, c1=c1, z_min=z_min, z_max=z_max,
        eps0=eps0, eps1=eps1, eps2=eps2, eps3=eps3, delta=delta,
        gamma1=gamma1, gamma2=gamma2, gamma3=gamma3,
        f1=f1, f2=f2, f3=f3, f4=f4, f5=f5, f6=f6, h1=h1, v_bound=v_bound,
    )
    _check_margins(sched)
    return sched


def _check_margins(s: ParameterSchedule) -> None:
    """Numeric safety margins the estimator's concentration analysis relies on.

    Both hold by construction of f3 and f6; checking them at build time guards
    against formula regressions.
    """
    if not all(
        v > 0 and math.isfinite(v)
        for v in (s.eps0, s.eps1, s.eps2, s.eps3, s.delta, s.gamma1, s.gamma2,
                  s.gamma3, s.f1, s.f2, s.f3, s.f4, s.f5, s.f6)
    ):
        raise ScheduleError("schedule produced a non-positive or non-finite value")
    if s.f1 < 8.0:
        raise ScheduleError(f"f1={s.f1} fell below its floor of 8")
    # g*(eps2)^(f3/f1) <= gamma2/2: membership of high-thickness survivors.
    lhs_a = -(s.eps2**2 / 6.0) * (s.f3 / s.f1)
    if lhs_a > math.log(s.gamma2 / 2.0) + 1e-9:
        raise ScheduleError("stage-survival margin violated: g*(eps2)^(f3/f1) > gamma2/2")
    # g*(eps1)^(f6/(4 f1)) = gamma3/2 <= eps1/m^2: per-element S(x, H) accuracy.
    lhs_b = -(s.eps1**2 / 6.0) * (s.f6 / (4.0 * s.f1))
    bound_b = min(math.log(s.gamma3 / 2.0), math.log(s.eps1 / (s.m * s.m)))
    if lhs_b > bound_b + 1e-9:
        raise ScheduleError("index-sampling margin violated: g*(eps1)^(f6/(4 f1)) too large")


def round_bound(sched: ParameterSchedule) -> int:
    """Smallest y with z_max / f1^y < z_min; the stage count never exceeds it."""
    y = 0
    while sched.z_max / sched.f1**y >= sched.z_min:
        y += 1
    return y


def stage_count(sched: ParameterSchedule) -> int:
    """Exact number of stages the estimator executes (deterministic: the
    thickness cutoff sequence z_max / f1^i does not depend on randomness)."""
    stages = 0
    while True:
        stages += 1
        if sched.z_max / sched.f1**stages < sched.z_min:
            return stages


def schedule_to_dict(s: ParameterSchedule) -> dict:
    """JSON-friendly view; counts serialized as decimal strings."""
    return {
        "m": s.m, "epsilon": s.epsilon, "gamma": s.gamma, "c1": s.c1,
        "z_min": s.z_min, "z_max": s.z_max,
        "eps0": s.eps0, "eps1": s.eps1, "eps2": s.eps2, "eps3": s.eps3,
        "delta": s.delta,
        "gamma1": s.gamma1, "gamma2": s.gamma2, "gamma3": s.gamma3,
        "f1": s.f1, "f2": s.f2, "f3": s.f3, "f4": s.f4, "f5": s.f5, "f6": s.f6,
        "h1": str(s.h1), "v_bound": str(s.v_bound),
        "round_bound": round_bound(s),
    }
