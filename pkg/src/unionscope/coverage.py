"""Greedy maximal coverage driven by the union estimator.

Each greedy step evaluates every remaining candidate by estimating the union
of the tentative selection; failure probability is split evenly over the at
most m*k evaluations so a union bound keeps the whole run within gamma.
Singleton unions need no estimator: the oracle's published size m_i already
is the estimate.  The ratio arithmetic converts the generic
(1 - (1-b/k)^k - xi) guarantee into the classical (1 - 1/e) form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .estimator import approximate_union
from .oracle import OracleList
from .rng import RandomStream
from .schedule import build_schedule

ETA = math.exp(-0.25)


@dataclass
class CoverageResult:
    indices: list[int]
    estimate: float
    per_step: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "indices": self.indices,
            "estimate": self.estimate,
            "per_step": self.per_step,
        }


def _estimate_subset(
    olist: OracleList,
    subset: list[int],
    xi: float,
    gamma_eval: float,
    rng: RandomStream,
    sample_scale: float,
) -> float:
    if len(subset) == 1:
        return float(olist.oracles[subset[0]].approx_size)
    sub = olist.subset(subset)
    sched = build_schedule(len(subset), xi, gamma_eval)
    return approximate_union(sub, sched, rng, sample_scale=sample_scale).value


def greedy_max_coverage(
    olist: OracleList,
    k: int,
    xi: float,
    gamma: float,
    rng: RandomStream,
    *,
    sample_scale: float = 1.0,
) -> CoverageResult:
    """Pick k sets greedily by estimated union size; ties go to the lowest
    index.  Returns the chosen indices and the final union estimate."""
    m = olist.m
    if not (1 <= k <= m):
        raise ValueError(f"k={k} must satisfy 1 <= k <= m={m}")
    if not (0.0 < xi < 1.0):
        raise ValueError("xi must be in (0, 1)")
    gamma_eval = gamma / (m * k)

    chosen: list[int] = []
    per_step = []
    best_value = 0.0
    for step in range(k):
        best_j = None
        best_value = -1.0
        for j in range(m):
            if j in chosen:
                continue
            value = _estimate_subset(
                olist,
                chosen + [j],
                xi,
                gamma_eval,
                rng.child(f"step{step}:cand{j}"),
                sample_scale,
            )
            if value > best_value:
                best_j, best_value = j, value
        chosen.append(best_j)
        per_step.append({"step": step, "picked": best_j, "estimate": best_value})
    return CoverageResult(indices=chosen, estimate=best_value, per_step=per_step)


def coverage_ratio_bound(k: int, b: float) -> float:
    """Upper bound 1/e - (eta/e)(b + b/(2k) - 1) on (1 - b/k)^k, eta = e^(-1/4).

    The bound is valid when b + b/(2k) - 1 lies in (0, 1/4], which holds for
    the near-1 ratios this module feeds it (see `xi_choice`).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if not (0.0 <= b <= 1.0):
        raise ValueError("b must be in [0, 1]")
    return 1.0 / math.e - (ETA / math.e) * (b + b / (2.0 * k) - 1.0)


def xi_choice(k: int, c: float = 100.0) -> dict:
    """Slack choice turning the generic guarantee into 1 - 1/e.

    With alpha = 1/(ck) for all four bias parameters, the effective ratio is
    b = (1-alpha)^2/(1+alpha)^2 and xi = (eta/e)(b + b/(2k) - 1) keeps
    1 - (1-b/k)^k - xi above 1 - 1/e.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    alpha = 1.0 / (c * k)
    b = (1.0 - alpha) ** 2 / (1.0 + alpha) ** 2
    xi = (ETA / math.e) * (b + b / (2.0 * k) - 1.0)
    return {"alpha": alpha, "b": b, "xi": xi}
