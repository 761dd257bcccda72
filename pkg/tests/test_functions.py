import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from localstats.functions import (
    IntervalSet,
    TestFunction,
    correlation_convolution,
    product,
    simpson_pieces,
)


def test_interval_set_parse_and_length():
    iv = IntervalSet.parse("0,1;0.5,2")
    assert iv.pieces() == [(0.0, 2.0)]
    assert iv.length == pytest.approx(2.0)
    assert iv.lo == 0.0 and iv.hi == 2.0


@pytest.mark.parametrize("bad", [(), ((1.0, 1.0),), ((0.0, np.inf),), ((2.0, 1.0),)])
def test_interval_set_rejects_degenerate(bad):
    with pytest.raises(ValueError):
        IntervalSet(bad)


def test_interval_contains_is_closed():
    iv = IntervalSet.of(-1.0, 1.0)
    assert iv.contains(np.array([-1.0, 0.0, 1.0, 1.0000001])).tolist() == [True, True, True, False]


def test_intersection_length():
    assert IntervalSet.of(0, 2).intersection_length(IntervalSet.of(1, 3)) == pytest.approx(1.0)
    assert IntervalSet.of(0, 1).intersection_length(IntervalSet.of(2, 3)) == 0.0


def test_test_function_validation():
    with pytest.raises(ValueError):
        TestFunction((0.0, 1.0, 0.5), (0.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        TestFunction((0.0, 1.0), (1.0, 0.0))
    with pytest.raises(ValueError):
        TestFunction((0.0, 1.0, 2.0), (0.0, -1.0, 0.0))


def test_hat_and_plateau_integrals():
    assert TestFunction.hat().integral() == pytest.approx(1.0)
    assert TestFunction.zero().integral() == 0.0
    assert TestFunction.plateau(0.0, 0.25).integral() == pytest.approx(0.250001, abs=1e-9)


def test_evaluation_outside_support_is_zero():
    f = TestFunction.hat(0.0, 1.0)
    assert f(np.array([-2.0, -1.0, 0.0, 0.5, 1.0, 3.0])).tolist() == [0.0, 0.0, 1.0, 0.5, 0.0, 0.0]


def test_round_trip_dict():
    f = TestFunction((-1.0, 0.2, 3.0), (0.0, 2.5, 0.0))
    g = TestFunction.from_dict(f.to_dict())
    assert np.array_equal(f.knots, g.knots) and np.array_equal(f.values, g.values)


def test_product_is_pointwise():
    f1 = TestFunction((-1.0, 0.0, 1.0), (0.0, 1.0, 0.0))
    f2 = TestFunction((-0.5, 0.5, 2.0), (0.0, 2.0, 0.0))
    p = product(f1, f2)
    w = np.linspace(-2, 3, 101)
    assert np.allclose(p(w), f1(w) * f2(w))


def _brute_convolution(f1, f2, w):
    # f1 *' f2 (w) = int f1(w + t) f2(t) dt, fine midpoint rule
    t = np.linspace(-10, 10, 400_001)
    dt = t[1] - t[0]
    return np.array([np.sum(f1(wi + t) * f2(t)) * dt for wi in w])


def test_correlation_convolution_matches_quadrature():
    f1 = TestFunction((-1.0, 0.3, 1.0), (0.0, 1.5, 0.0))
    f2 = TestFunction((-0.5, 0.0, 0.4, 2.0), (0.0, 1.0, 0.7, 0.0))
    conv = correlation_convolution(f1, f2)
    w = np.linspace(-3.5, 2.0, 23)
    assert np.allclose(conv(w), _brute_convolution(f1, f2, w), atol=1e-6)
    lo, hi = conv.support
    assert lo == pytest.approx(f1.support[0] - f2.support[1])
    assert hi == pytest.approx(f1.support[1] - f2.support[0])


def test_convolution_integral_is_product_of_integrals():
    f1 = TestFunction.hat(0.2, 0.7, 2.0)
    f2 = TestFunction.plateau(-0.3, 0.5, shoulder=0.2)
    conv = correlation_convolution(f1, f2)
    lo, hi = conv.support
    total = simpson_pieces(conv, np.union1d(conv.breakpoints, [lo, hi]))
    assert total == pytest.approx(f1.integral() * f2.integral(), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(hst.lists(hst.floats(-5, 5), min_size=4, max_size=4))
def test_simpson_exact_for_cubics(coeffs):
    poly = np.polynomial.Polynomial(coeffs)
    edges = np.array([-1.0, -0.2, 0.3, 1.5])
    exact = poly.integ()(1.5) - poly.integ()(-1.0)
    assert simpson_pieces(poly, edges) == pytest.approx(exact, rel=1e-12, abs=1e-12)
