import dataclasses
import math

import numpy as np
import pytest

from unionscope.estimator import (
    EstimatorError,
    WeightedSample,
    approximate_union,
    estimate_s,
    multiset_view,
    thickness,
)
from unionscope.oracle import BiasSpec, OracleList, make_biased_explicit_set
from unionscope.reference import exact_union
from unionscope.rng import RandomStream
from unionscope.rounds import RoundHarness
from unionscope.schedule import build_schedule, round_bound


def explicit_list(sets, bias=BiasSpec(), seed=0):
    root = RandomStream.from_seed(seed)
    oracles = tuple(
        make_biased_explicit_set(s, bias, root.child(f"o{i}")) for i, s in enumerate(sets)
    )
    return OracleList(oracles, bias)


def scaled(sched, target=4000):
    return min(1.0, target / sched.h1)


def test_identical_sets_recover_exact_size():
    """L = (A, A): |A u A| = |A|; all thickness 2, removed at stage 1."""
    sets = [list(range(100)), list(range(100))]
    olist = explicit_list(sets)
    sched = build_schedule(2, 0.25, 0.1)
    root = RandomStream.from_seed(1)
    hits = 0
    for t in range(40):
        est = approximate_union(olist, sched, root.child(f"t{t}"), sample_scale=scaled(sched))
        if abs(est.value - 100) / 100 <= 0.25:
            hits += 1
    assert hits >= 36


def test_three_disjoint_sets():
    sets = [list(range(10)), list(range(100, 120)), list(range(200, 230))]
    olist = explicit_list(sets)
    sched = build_schedule(3, 0.25, 0.1)
    root = RandomStream.from_seed(2)
    hits = 0
    for t in range(40):
        est = approximate_union(olist, sched, root.child(f"t{t}"), sample_scale=scaled(sched))
        if abs(est.value - 60) / 60 <= 0.25:
            hits += 1
    assert hits >= 36


def test_shared_core_instance_and_stage_one_domination():
    """10 sets A_i = B_i u C with |C| = 1000, |B_i| = 100: union is 2000 and
    the stage-1 removals are dominated (by multiplicity) by core elements."""
    core = list(range(1000))
    sets = [core + list(range(1000 + 100 * i, 1100 + 100 * i)) for i in range(10)]
    olist = explicit_list(sets)
    assert exact_union(sets) == 2000
    sched = build_schedule(10, 0.25, 0.1)
    root = RandomStream.from_seed(3)
    est = approximate_union(
        olist, sched, root.child("t"), sample_scale=scaled(sched, 6000), record_elements=True
    )
    assert abs(est.value - 2000) / 2000 <= 0.25
    stage1 = est.stage_summaries[0]
    removed_core = sum(w.multiplicity for w in stage1.removed if w.element < 1000)
    total_removed = sum(w.multiplicity for w in stage1.removed)
    assert total_removed > 0
    assert removed_core / total_removed >= 0.75


def test_thickness_examples():
    sets = [[1, 2], [2, 3], [2, 4]]
    olist = explicit_list(sets)
    assert thickness(2, olist) == 3
    assert thickness(99, olist) == 0
    assert thickness(1, olist) == 1


def test_estimate_s_examples():
    sets = [[1, 2], [2, 3], [2, 4]]
    olist = explicit_list(sets)
    assert estimate_s(1, [0] * 3, olist) == 3
    assert estimate_s(1, [0, 1, 2], olist) == 1
    assert estimate_s(2, [0, 1, 2], olist) == 3
    with pytest.raises(EstimatorError):
        estimate_s(1, [], olist)


def test_estimate_s_expectation():
    """Random H of size u: E[S(x, H)] = u * T(x)/m, averaged over 10^4 draws."""
    sets = [[7, 1], [7, 2], [7, 3], [4]]
    olist = explicit_list(sets)
    m, u, t_x = 4, 12, 3  # x = 7 lives in three sets
    gen = np.random.default_rng(0)
    total = 0
    for _ in range(10_000):
        H = gen.integers(0, m, size=u)
        total += sum(1 for i in H if i < 3)
    mean = total / 10_000
    expected = u * t_x / m
    assert abs(mean - expected) <= 4 * math.sqrt(u * 0.75 * 0.25 / 10_000) + 0.05
    # agreement with the module's counter on one fixed multiset
    assert estimate_s(7, [0, 0, 1, 3], olist) == 3


def test_union_identity_inverse_thickness():
    """|U A_i| = sum_i sum_{x in A_i} 1/T(x, L), exactly, on a small instance."""
    sets = [list(range(0, 30)), list(range(20, 50)), list(range(40, 80))]
    olist = explicit_list(sets)
    total = 0.0
    for s in sets:
        for x in s:
            total += 1.0 / thickness(x, olist)
    assert total == pytest.approx(exact_union(sets))


def test_determinism_same_seed_same_estimate():
    sets = [list(range(60)), list(range(30, 90)), list(range(80, 140))]
    olist = explicit_list(sets)
    sched = build_schedule(3, 0.3, 0.1)
    a = approximate_union(olist, sched, RandomStream.from_seed(9).child("t"),
                          sample_scale=scaled(sched))
    b = approximate_union(olist, sched, RandomStream.from_seed(9).child("t"),
                          sample_scale=scaled(sched))
    assert a.value == b.value
    assert a.to_json() == b.to_json()


def test_rounds_equals_stages_plus_one_and_bound():
    for m, zmax in [(2, 2), (8, 8), (12, 12), (40, 40)]:
        sets = [list(range(10 * i, 10 * i + 8)) for i in range(m)]
        olist = explicit_list(sets)
        sched = build_schedule(m, 0.25, 0.1, z_max=zmax)
        est = approximate_union(olist, sched, RandomStream.from_seed(m).child("t"),
                                sample_scale=scaled(sched, 1500))
        assert est.rounds == est.stages + 1
        assert est.stages <= round_bound(sched)


def test_membership_query_accounting():
    """Logical queries are |R_i| * u_i per stage, pre-deduplication."""
    sets = [list(range(10)), list(range(5, 15))]
    olist = explicit_list(sets)
    sched = build_schedule(2, 0.25, 0.1)
    est = approximate_union(olist, sched, RandomStream.from_seed(4).child("t"),
                            sample_scale=scaled(sched, 500))
    expected = sum(s.r_size * s.u for s in est.stage_summaries)
    assert est.membership_queries == expected


def test_guarantee_present_only_at_full_scale():
    sets = [[1, 2, 3], [3, 4, 5]]
    olist = explicit_list(sets, bias=BiasSpec(0.1, 0.1, 0.1, 0.1), seed=5)
    sched = build_schedule(2, 0.5, 0.2)
    est = approximate_union(olist, sched, RandomStream.from_seed(5).child("t"),
                            sample_scale=1e-9)
    assert est.guarantee is None
    # tiny h1 makes full scale infeasible here, so check the factors directly
    from unionscope.estimator import _guarantee
    g = _guarantee(sched, olist, 1.0)
    assert g["lower_factor"] == pytest.approx((1 - 0.5) * 0.9 * 0.9)
    assert g["upper_factor"] == pytest.approx((1 + 0.5) * 1.1 * 1.1)
    assert g["confidence"] == pytest.approx(0.8)


def test_bias_propagation_interval():
    """alpha = beta = 0.1 on all sides: estimates stay in the widened interval."""
    bias = BiasSpec(0.1, 0.1, 0.1, 0.1)
    sets = [list(range(0, 40)), list(range(20, 70)), list(range(50, 120)),
            list(range(100, 160))]
    olist = explicit_list(sets, bias=bias, seed=6)
    exact = exact_union(sets)
    sched = build_schedule(4, 0.25, 0.1)
    root = RandomStream.from_seed(6)
    lo = (1 - 0.25) * 0.9 * 0.9 * exact
    hi = (1 + 0.25) * 1.1 * 1.1 * exact
    hits = 0
    for t in range(40):
        est = approximate_union(olist, sched, root.child(f"t{t}"), sample_scale=scaled(sched))
        if lo <= est.value <= hi:
            hits += 1
    assert hits >= 36


def test_zero_hit_guard_fires_on_corrupted_schedule():
    """A negative z_max forces a non-positive threshold, which admits S = 0."""
    sets = [list(range(10)), list(range(20, 30))]
    olist = explicit_list(sets)
    sched = dataclasses.replace(build_schedule(2, 0.25, 0.1), z_max=-5)
    with pytest.raises(EstimatorError, match="S\\(x, H\\) = 0"):
        approximate_union(olist, sched, RandomStream.from_seed(8).child("t"),
                          sample_scale=1e-9)


def test_schedule_mismatch_rejected():
    sets = [[1], [2], [3]]
    olist = explicit_list(sets)
    sched = build_schedule(2, 0.25, 0.1)
    with pytest.raises(EstimatorError, match="m="):
        approximate_union(olist, sched, RandomStream.from_seed(0).child("t"))


def test_weighted_sample_and_multiset_view():
    with pytest.raises(ValueError):
        WeightedSample(1, 0)
    view = {w.element: w.multiplicity for w in multiset_view([5, 5, 7])}
    assert view == {5: 2, 7: 1}


def test_external_harness_round_delta():
    """Rounds are counted per estimation run even on a shared harness."""
    sets = [list(range(10)), list(range(5, 15))]
    olist = explicit_list(sets)
    sched = build_schedule(2, 0.25, 0.1)
    harness = RoundHarness(olist)
    root = RandomStream.from_seed(11)
    a = approximate_union(olist, sched, root.child("a"), sample_scale=1e-9, harness=harness)
    b = approximate_union(olist, sched, root.child("b"), sample_scale=1e-9, harness=harness)
    assert a.rounds == a.stages + 1
    assert b.rounds == b.stages + 1
    assert harness.rounds == a.rounds + b.rounds
