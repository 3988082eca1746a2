import math

import numpy as np
import pytest
from scipy import stats

from unionscope.oracle import (
    BiasSpec,
    OracleError,
    OracleList,
    make_biased_explicit_set,
    random_choice,
    random_choice_indices,
)
from unionscope.rng import RandomStream


def make_root(seed=1234):
    return RandomStream.from_seed(seed)


def test_zero_bias_identity():
    o = make_biased_explicit_set(range(5), BiasSpec(), make_root())
    assert o.approx_size == 5
    assert np.allclose(o.probabilities, 0.2)


def test_alpha_bias_envelope():
    bias = BiasSpec(alpha_l=0.1, alpha_r=0.1)
    o = make_biased_explicit_set(range(10), bias, make_root())
    assert o.probabilities.min() >= 0.09 - 1e-12
    assert o.probabilities.max() <= 0.11 + 1e-12
    assert abs(o.probabilities.sum() - 1.0) < 1e-9


def test_beta_bias_size_range():
    bias = BiasSpec(beta_l=0.2, beta_r=0.2)
    for seed in range(20):
        o = make_biased_explicit_set(range(100), bias, make_root(seed))
        assert 80 <= o.approx_size <= 120


def test_empty_set_rejected():
    with pytest.raises(OracleError):
        make_biased_explicit_set([], BiasSpec(), make_root())


def test_bias_spec_range_validation():
    with pytest.raises(OracleError):
        BiasSpec(alpha_l=1.0)
    with pytest.raises(OracleError):
        BiasSpec(beta_r=-0.1)


def test_contains_batch_and_instrumentation():
    o = make_biased_explicit_set([1, 2, 3], BiasSpec(), make_root())
    assert o.contains_batch([2, 9]) == [True, False]
    assert o.contains_batch([]) == []
    assert o.query_count == 2
    o.random_element(make_root(7))
    o.random_elements(make_root(8), 5)
    assert o.sample_count == 6


def test_oracle_list_needs_two_sets():
    o = make_biased_explicit_set([1], BiasSpec(), make_root())
    with pytest.raises(OracleError):
        OracleList((o,), BiasSpec())


def test_random_choice_index_statistics():
    """m1=1, m2=3 over disjoint supports: index-2 frequency within 3 sigma of 3/4."""
    root = make_root(5)
    bias = BiasSpec()
    o1 = make_biased_explicit_set([0], bias, root.child("a"))
    o2 = make_biased_explicit_set([10, 11, 12], bias, root.child("b"))
    olist = OracleList((o1, o2), bias)
    n = 100_000
    idx = random_choice_indices(olist, root.child("draws"), n)
    freq = float(np.mean(idx == 1))
    sigma = math.sqrt(0.75 * 0.25 / n)
    assert abs(freq - 0.75) <= 3 * sigma


def test_random_choice_uniform_over_equal_sizes():
    root = make_root(6)
    bias = BiasSpec()
    oracles = tuple(
        make_biased_explicit_set([100 * i + j for j in range(4)], bias, root.child(str(i)))
        for i in range(4)
    )
    olist = OracleList(oracles, bias)
    idx = random_choice_indices(olist, root.child("draws"), 40_000)
    counts = np.bincount(idx, minlength=4)
    assert stats.chisquare(counts).pvalue > 1e-6


def test_random_choice_returns_member_of_picked_set():
    root = make_root(9)
    bias = BiasSpec()
    o1 = make_biased_explicit_set([0, 1], bias, root.child("a"))
    o2 = make_biased_explicit_set([10, 11, 12], bias, root.child("b"))
    olist = OracleList((o1, o2), bias)
    for t in range(200):
        i, x = random_choice(olist, root.child(f"d{t}"))
        assert x in (o1.elements if i == 0 else o2.elements)


def test_generator_uniformity_chi_square():
    """Zero bias, 10^6 draws: every element frequency within 5 sigma of 1/n."""
    n = 8
    o = make_biased_explicit_set(range(n), BiasSpec(), make_root(3))
    draws = o.random_elements(make_root(33), 1_000_000)
    counts = np.bincount(np.asarray(draws), minlength=n)
    expected = 1_000_000 / n
    sigma = math.sqrt(1_000_000 * (1 / n) * (1 - 1 / n))
    assert np.all(np.abs(counts - expected) <= 5 * sigma)
    assert stats.chisquare(counts).pvalue > 1e-6


def test_random_choice_marginal_matches_thickness_formula():
    """Exhaustive check on an instance with M <= 20: the element marginal is
    sum over containing sets of (m_i/M)(1/|A_i|) for zero bias."""
    root = make_root(17)
    bias = BiasSpec()
    sets = [[1, 2, 3], [2, 3, 4, 5], [5, 6]]
    oracles = tuple(
        make_biased_explicit_set(s, bias, root.child(str(i))) for i, s in enumerate(sets)
    )
    olist = OracleList(oracles, bias)
    M = olist.total_size
    assert M <= 20
    for x in {1, 2, 3, 4, 5, 6}:
        expected = sum(
            (o.approx_size / M) * (1 / o.true_size) for o, s in zip(oracles, sets) if x in s
        )
        actual = 0.0
        for o, s in zip(oracles, sets):
            if x in s:
                actual += (o.approx_size / M) * float(o.probabilities[o.elements.index(x)])
        assert actual == pytest.approx(expected)


def test_streams_are_reproducible_and_independent():
    a = make_root(42).child("x").gen.random(4)
    b = make_root(42).child("x").gen.random(4)
    c = make_root(42).child("y").gen.random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
