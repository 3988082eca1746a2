"""Staged randomized estimator for |A_1 u ... u A_m| over biased oracles.

The run starts by drawing a multiset R_1 of h_1 random choices of the list
(one sampling round).  Each stage then estimates, with one batched membership
round, how many of u_i freshly drawn set indices contain each surviving
sample; samples whose hit count clears the stage threshold are removed and
contribute their estimated inverse thickness, weighted by the cumulative
subsampling scale, to the accumulator.  The thickness cutoff shrinks by a
factor f1(m) per stage, and survivors are subsampled to keep stage cost flat.
The output is the accumulator times M, normalized by |R_1| so that with zero
bias its expectation is the exact union size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .oracle import ElementId, OracleList, random_choice_indices
from .rng import RandomStream
from .rounds import (
    RoundHarness,
    counts_from_indices,
    membership_request,
    sampling_request,
)
from .schedule import ParameterSchedule, round_bound


class EstimatorError(RuntimeError):
    pass


@dataclass(frozen=True)
class WeightedSample:
    """An element drawn into some R_i, with its multiset multiplicity."""

    element: ElementId
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")


@dataclass
class StageSummary:
    index: int
    current_thickness: float
    u: int
    r_size: int
    v_size: int
    threshold: float
    a: float
    s_prime_after: float
    sum_after: float
    removed: Optional[list] = None  # WeightedSample list, only when recording

    def to_json(self) -> dict:
        return {
            "stage": self.index,
            "current_thickness": self.current_thickness,
            "u": self.u,
            "r_size": self.r_size,
            "v_size": self.v_size,
            "threshold": self.threshold,
            "a": self.a,
            "s_prime_after": self.s_prime_after,
            "sum_after": self.sum_after,
        }


@dataclass
class UnionEstimate:
    value: float
    stages: int
    rounds: int
    samples_drawn: int
    membership_queries: int
    schedule: ParameterSchedule
    sample_scale: float
    guarantee: Optional[dict]
    stage_summaries: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "stages": self.stages,
            "rounds": self.rounds,
            "samples_drawn": self.samples_drawn,
            "membership_queries": self.membership_queries,
            "sample_scale": self.sample_scale,
            "guarantee": self.guarantee,
            "stage_summary": [s.to_json() for s in self.stage_summaries],
        }


def thickness(x: ElementId, olist: OracleList) -> int:
    """Exact number of sets containing x, via m membership queries.

    Reference helper for tests and oracles; the estimator never calls it.
    """
    return sum(o.contains_batch([x])[0] for o in olist.oracles)


def estimate_s(x: ElementId, H, olist: OracleList) -> int:
    """Hit count S(x, H): indices i in H (with multiplicity) whose set holds x."""
    H = list(H)
    if not H:
        raise EstimatorError("estimate_s needs a non-empty index multiset")
    distinct = sorted(set(H))
    answers = {i: olist.oracles[i].contains_batch([x])[0] for i in distinct}
    return sum(1 for i in H if answers[i])


def _guarantee(sched: ParameterSchedule, olist: OracleList, sample_scale: float):
    if sample_scale < 1.0:
        return None
    b = olist.bias
    lo = (1.0 - sched.epsilon) * (1.0 - b.alpha_l) * (1.0 - b.beta_l)
    hi = (1.0 + sched.epsilon) * (1.0 + b.alpha_r) * (1.0 + b.beta_r)
    return {
        "lower_factor": lo,
        "upper_factor": hi,
        "confidence": 1.0 - sched.gamma,
        "form": "[(1-eps)(1-alpha_l)(1-beta_l)*U, (1+eps)(1+alpha_r)(1+beta_r)*U]",
    }


def approximate_union(
    olist: OracleList,
    sched: ParameterSchedule,
    rng: RandomStream,
    *,
    sample_scale: float = 1.0,
    harness: Optional[RoundHarness] = None,
    min_index_factor: float = 32.0,
    record_elements: bool = False,
) -> UnionEstimate:
    """Run the staged estimator and return sum * M / |R_1|.

    Caller obligation for the guarantee: z_min <= minThickness(L) and
    maxThickness(L) <= z_max must hold for the instance (not checkable
    online).  `sample_scale` multiplies h_1 and every u_i; below 1 the
    output carries no guarantee.  Scaled-down runs keep every u_i at or
    above min_index_factor * f1 * s_i so the hit counts S(x, H_i) still
    resolve the stage threshold; at full scale f6 dominates that floor by
    orders of magnitude, so it never binds.
    """
    if olist.m != sched.m:
        raise EstimatorError(f"oracle list has m={olist.m} but schedule was built for m={sched.m}")
    if sample_scale <= 0.0:
        raise EstimatorError("sample_scale must be positive")
    if harness is None:
        harness = RoundHarness(olist)
    rounds_before = harness.rounds

    m = olist.m
    big_m = olist.total_size
    bound = round_bound(sched)

    h1 = max(1, math.ceil(sched.h1 * sample_scale))
    if h1 > harness.query_cap:
        raise EstimatorError(
            f"h1 = {h1} samples exceed the round query cap {harness.query_cap}; "
            "lower --sample-scale (the schedule's constants are worst-case) or "
            "raise the cap"
        )

    # Round 1: R_1 as a position-indexed multiset of h1 random choices.
    idx = random_choice_indices(olist, rng.child("r1:index"), h1)
    answers = harness.execute_round(
        sampling_request(m, counts_from_indices(idx, m)), rng.child("r1:samples")
    )
    r_elems: list[ElementId] = []
    taken = [0] * m
    for i in idx:
        r_elems.append(answers.samples[i][taken[i]])
        taken[i] += 1

    total = 0.0
    s_prime = 1.0
    stage = 0
    queries_logical = 0
    summaries: list[StageSummary] = []

    while True:
        stage += 1
        ct = sched.z_max / sched.f1 ** (stage - 1)
        s_i = m / ct
        u_floor = math.ceil(s_i * sched.f1 * min_index_factor)
        u_i = max(1, u_floor, math.ceil(s_i * sched.f6 * sample_scale))

        h_stream = rng.child(f"stage{stage}:indices")
        h_counts = np.bincount(h_stream.gen.integers(0, m, size=u_i), minlength=m)

        # One batched membership round: deduplicated (element, set) pairs,
        # fanned back out; the logical count is |R_i| * u_i pre-dedup.
        order: dict[ElementId, int] = {}
        for el in r_elems:
            if el not in order:
                order[el] = len(order)
        distinct = list(order)
        queries_logical += len(r_elems) * u_i
        queried = [distinct if h_counts[k] > 0 else () for k in range(m)]
        answers = harness.execute_round(
            membership_request(queried),
            rng.child(f"stage{stage}:round"),
            logical_size=len(r_elems) * u_i,
        )
        s_by_el = np.zeros(len(distinct), dtype=np.int64)
        for k in range(m):
            if h_counts[k] > 0 and answers.membership[k]:
                s_by_el += h_counts[k] * np.asarray(answers.membership[k], dtype=np.int64)

        threshold = ct / (2.0 * sched.f1 * m) * u_i
        v_pos = []
        rest_pos = []
        for pos, el in enumerate(r_elems):
            if s_by_el[order[el]] >= threshold:
                v_pos.append(pos)
            else:
                rest_pos.append(pos)

        stage_sum = 0.0
        for pos in v_pos:
            s_val = int(s_by_el[order[r_elems[pos]]])
            if s_val == 0:
                raise EstimatorError(
                    "S(x, H) = 0 for a removed sample; schedule thresholds are corrupt"
                )
            assert s_val >= threshold
            stage_sum += u_i / (s_val * m)
        total += s_prime * stage_sum

        ct_next = sched.z_max / sched.f1**stage
        s_next = m / ct_next
        h_next = math.ceil(h1 / s_next)
        if len(rest_pos) < h_next:
            next_elems = [r_elems[p] for p in rest_pos]
            a_i = 1.0
        else:
            pick = rng.child(f"stage{stage}:subsample").gen.choice(
                len(rest_pos), size=h_next, replace=False
            )
            next_elems = [r_elems[rest_pos[p]] for p in sorted(pick)]
            a_i = len(rest_pos) / h_next
        s_prime *= a_i

        summaries.append(
            StageSummary(
                index=stage,
                current_thickness=ct,
                u=u_i,
                r_size=len(r_elems),
                v_size=len(v_pos),
                threshold=threshold,
                a=a_i,
                s_prime_after=s_prime,
                sum_after=total,
                removed=multiset_view(r_elems[p] for p in v_pos) if record_elements else None,
            )
        )
        if stage > bound:
            raise EstimatorError(f"stage count {stage} exceeded round bound {bound}")
        if ct_next < sched.z_min:
            break
        r_elems = next_elems

    return UnionEstimate(
        value=total * big_m / h1,
        stages=stage,
        rounds=harness.rounds - rounds_before,
        samples_drawn=h1,
        membership_queries=queries_logical,
        schedule=sched,
        sample_scale=sample_scale,
        guarantee=_guarantee(sched, olist, sample_scale),
        stage_summaries=summaries,
    )


def multiset_view(elements) -> list[WeightedSample]:
    """Aggregate a position-indexed multiset into WeightedSample records."""
    counts: dict[ElementId, int] = {}
    for el in elements:
        counts[el] = counts.get(el, 0) + 1
    return [WeightedSample(el, c) for el, c in counts.items()]
