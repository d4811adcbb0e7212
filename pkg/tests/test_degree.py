import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from fountainq import degree
from fountainq.errors import ParameterError


def exact_harmonic(D):
    return sum((Fraction(1, d) for d in range(1, D + 1)), Fraction(0))


def test_soliton_small_example():
    dist = degree.ideal_soliton(3, 3)
    assert dist.probs[1:] == pytest.approx([1 / 3, 1 / 2, 1 / 6], abs=1e-15)
    assert dist.probs[0] == 0
    assert dist.dbar == pytest.approx(11 / 6, abs=1e-12)


def test_soliton_two_point():
    dist = degree.ideal_soliton(300, 2)
    assert dist.probs[1] == pytest.approx(0.5)
    assert dist.probs[2] == pytest.approx(0.5)
    assert dist.dbar == pytest.approx(1.5)


@pytest.mark.parametrize("k", [3, 10, 300, 700])
def test_dbar_equals_harmonic_number(k):
    for D in range(2, min(k, 500) + 1):
        dist = degree.ideal_soliton(k, D)
        assert abs(dist.dbar - float(exact_harmonic(D))) < 1e-12
        assert abs(dist.probs.sum() - 1.0) < 1e-12


def test_harmonic_sandwich():
    for D in range(2, 2001):
        h = degree.harmonic(D)
        assert math.log(D + 1) < h < math.log(D) + 1


def test_exact_form_matches_float():
    dist = degree.ideal_soliton(40, 17, exact=True)
    assert sum(dist.exact) == 1
    assert dist.exact_dbar == exact_harmonic(17)
    assert np.allclose(dist.probs, [float(p) for p in dist.exact], rtol=0, atol=1e-16)


@pytest.mark.parametrize("k, D", [(2, 2), (10, 1), (10, 11)])
def test_soliton_rejects_bad_params(k, D):
    with pytest.raises(ParameterError):
        degree.ideal_soliton(k, D)


def nearest_soliton(k, target):
    t = Fraction(target)
    return min(range(2, k + 1), key=lambda D: (abs(exact_harmonic(D) - t), D))


@pytest.mark.parametrize(
    "target, expected", [("4.0", 30), ("4.7", 61), ("5.6", 151), ("1.5", 2)]
)
def test_soliton_for_difficulty_frozen(target, expected):
    # expected values come from an exact-rational scan, frozen here
    assert nearest_soliton(300, target) == expected
    params = degree.soliton_for_difficulty(300, float(target))
    assert params.D == expected
    assert params.k == 300


@pytest.mark.parametrize("target", [1.4, 7.0])
def test_soliton_for_difficulty_out_of_range(target):
    with pytest.raises(ParameterError):
        degree.soliton_for_difficulty(300, target)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(3, 120), frac=st.floats(0.0, 1.0))
def test_soliton_for_difficulty_is_nearest(k, frac):
    lo, hi = degree.harmonic(2), degree.harmonic(k)
    target = lo + frac * (hi - lo)
    D = degree.soliton_for_difficulty(k, target).D
    best = min(abs(degree.harmonic(j) - target) for j in range(2, k + 1))
    assert abs(degree.harmonic(D) - target) == pytest.approx(best, abs=1e-12)


def test_point_mass():
    dist = degree.point_mass(20, 7)
    assert dist.dbar == 7
    assert dist.support.tolist() == [7]
    rng = np.random.default_rng(1)
    assert set(degree.sample_degrees(dist, 1000, rng).tolist()) == {7}


@pytest.mark.parametrize(
    "probs", [[0.5, 0.5], [0, 0.7, 0.7], [0, -0.1, 1.1], [[0, 1]], []]
)
def test_from_probs_rejects(probs):
    with pytest.raises(ParameterError):
        degree.from_probs(probs)


def test_probs_read_only():
    dist = degree.ideal_soliton(10, 5)
    with pytest.raises(ValueError):
        dist.probs[1] = 0.3


@pytest.mark.parametrize("D", [2, 10, 31])
def test_sampler_chi_square(D):
    k = 300
    dist = degree.ideal_soliton(k, D)
    rng = np.random.default_rng(1000 + D)
    draws = degree.sample_degrees(dist, 10**6, rng)
    assert draws.min() >= 1 and draws.max() <= D
    observed = np.bincount(draws, minlength=D + 1)[1:]
    expected = dist.probs[1 : D + 1] * draws.size
    assert stats.chisquare(observed, expected).pvalue > 0.001


def test_sampler_degree_one_frequency():
    dist = degree.ideal_soliton(300, 2)
    draws = degree.sample_degrees(dist, 10**6, np.random.default_rng(5))
    assert abs(np.mean(draws == 1) - 0.5) < 0.005


def test_scalar_sampler_in_support():
    dist = degree.ideal_soliton(50, 9)
    rng = np.random.default_rng(3)
    seen = {degree.sample_degree(dist, rng) for _ in range(3000)}
    assert seen <= set(range(1, 10))
    assert len(seen) > 5


def test_arbitrary_distribution_sampling():
    dist = degree.from_probs([0, 0, 0.25, 0, 0.75])
    draws = degree.sample_degrees(dist, 40000, np.random.default_rng(2))
    assert set(np.unique(draws).tolist()) == {2, 4}
    assert abs(np.mean(draws == 2) - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 40000) + 1e-3
    assert dist.dbar == pytest.approx(3.5)
