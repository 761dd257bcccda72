import math

import numpy as np
import pytest
from hypothesis import given, strategies as hst

from localstats import reference_laws as laws
from localstats.functions import IntervalSet, TestFunction


def test_poisson_pmf_values():
    assert laws.poisson_pmf(0, 1.0) == pytest.approx(math.exp(-1))
    assert laws.poisson_pmf(1, 1.0) == pytest.approx(math.exp(-1))
    assert sum(laws.poisson_pmf(r, 3.0) for r in range(51)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        laws.poisson_pmf(-1, 1.0)


def test_poisson_pmf_log_space_branch_is_continuous():
    a = laws.poisson_pmf(20, 18.0)
    b = math.exp(-18.0 + 20 * math.log(18.0) - math.lgamma(21))
    assert a == pytest.approx(b, rel=1e-12)
    assert laws.poisson_pmf(400, 380.0) > 0


def test_exponential_gap_cdf():
    assert laws.exponential_gap_cdf(0.0) == 0.0
    assert laws.exponential_gap_cdf(50.0) == pytest.approx(1.0, abs=1e-15)
    assert laws.exponential_gap_cdf(1.0) == pytest.approx(0.632121, abs=1e-6)
    with pytest.raises(ValueError):
        laws.exponential_gap_cdf(-0.1)
    vals = laws.exponential_gap_cdf(np.linspace(0, 30, 301))
    assert np.all(np.diff(vals) >= 0) and np.all(vals < 1)


def test_k_neighbor_cdf_is_erlang():
    a = np.linspace(0, 6, 61)
    assert np.allclose(laws.poisson_k_neighbor_cdf(a, 2), 1 - np.exp(-a) * (1 + a))
    assert np.allclose(laws.poisson_k_neighbor_cdf(a, 1), laws.exponential_gap_cdf(a))


def test_pair_value():
    assert laws.poisson_pair_value(TestFunction.hat()) == pytest.approx(1.0)
    assert laws.poisson_pair_value(TestFunction.zero()) == 0.0
    assert laws.poisson_pair_value(TestFunction.plateau(0, 0.25)) == pytest.approx(0.250001, abs=1e-6)


def test_mixed_second():
    assert laws.poisson_mixed_second((0, 1), (0, 1)) == pytest.approx(2.0)
    assert laws.poisson_mixed_second((0, 1), (2, 3)) == pytest.approx(1.0)
    assert laws.poisson_mixed_second((0, 2), (1, 3)) == pytest.approx(5.0)


@given(hst.floats(-5, 5), hst.floats(0.01, 5), hst.floats(-5, 5), hst.floats(0.01, 5))
def test_mixed_second_symmetric(a, la, b, lb):
    i1, i2 = IntervalSet.of(a, a + la), IntervalSet.of(b, b + lb)
    assert laws.poisson_mixed_second(i1, i2) == pytest.approx(laws.poisson_mixed_second(i2, i1))


def test_moment_thresholds():
    assert laws.moment_exists(1.99, rational=True) and not laws.moment_exists(2.0, rational=True)
    assert laws.moment_exists(2.99, rational=False) and not laws.moment_exists(3.0, rational=False)


def test_total_variation():
    p = {(0,): 0.5, (1,): 0.5}
    assert laws.total_variation(p, p) == 0.0
    assert laws.total_variation(p, {(2,): 1.0}) == pytest.approx(1.0)
