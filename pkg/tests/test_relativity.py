import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gauge_forms.relativity import (
    GALILEAN,
    RELATIVISTIC,
    Boost,
    CompositionLaw,
    FourVector,
    boost_apply,
    boost_matrix,
    compose,
    interval2,
    proper_time,
    to_metric_signature,
    transform_current,
)

speeds = st.floats(-0.999, 0.999)


def test_identity_and_invariant_speed():
    assert compose(0.37, 0.0) == 0.37
    for v in (-0.9, -0.2, 0.0, 0.5, 0.99):
        assert compose(1.0, v) == pytest.approx(1.0, abs=1e-15)
    law = CompositionLaw.for_light_speed(3.0)
    assert compose(3.0, 1.7, law) == pytest.approx(3.0, abs=1e-15)


def test_galilean_limit():
    assert compose(3.0, 4.5, GALILEAN) == 7.5
    assert GALILEAN.limit_speed == math.inf


def test_pole_and_bad_K():
    with pytest.raises(ZeroDivisionError):
        compose(2.0, -0.5)
    with pytest.raises(ValueError):
        CompositionLaw(-1.0)


@given(speeds, speeds, speeds)
def test_group_axioms(u, v, w):
    assert abs(compose(compose(u, v), w) - compose(u, compose(v, w))) < 1e-13
    assert compose(u, v) == compose(v, u)
    assert compose(u, -u) == 0.0
    assert abs(compose(u, v)) < 1.0


def test_rapidity_oracle(rng):
    # tanh(a + b) = (tanh a + tanh b) / (1 + tanh a tanh b)
    a, b = rng.uniform(-3, 3, size=(2, 500))
    got = np.array([compose(x, y) for x, y in zip(np.tanh(a), np.tanh(b))])
    np.testing.assert_allclose(got, np.tanh(a + b), atol=1e-14)


def test_boost_zero_is_identity(rng):
    e = FourVector(tuple(rng.normal(size=4)))
    assert boost_apply(Boost(0.0), e) == e


def test_boost_composition_matches_matrix_product(rng):
    for _ in range(200):
        v1, v2 = rng.uniform(-0.95, 0.95, size=2)
        e = FourVector(tuple(rng.normal(size=4)))
        two = boost_apply(Boost(v1), boost_apply(Boost(v2), e))
        one = boost_apply(Boost(compose(v1, v2)), e)
        np.testing.assert_allclose(two.array(), one.array(), atol=1e-12)
        np.testing.assert_allclose(boost_matrix(Boost(v1)) @ boost_matrix(Boost(v2)) @ e.array(), one.array(), atol=1e-12)


def test_boost_inverse(rng):
    b = Boost(0.63)
    e = FourVector(tuple(rng.normal(size=4)))
    np.testing.assert_allclose(boost_apply(b.inverse(), boost_apply(b, e)).array(), e.array(), atol=1e-14)


def test_lightlike_stays_lightlike():
    o = FourVector((0, 0, 0, 0))
    for v in (-0.9, 0.3, 0.99):
        assert abs(interval2(o, boost_apply(Boost(v), FourVector((1, 1, 0, 0))))) < 1e-13


def test_boost_rejects_fast():
    with pytest.raises(ValueError):
        Boost(1.0)
    with pytest.raises(ValueError):
        Boost(-3.0, c=2.0)
    assert Boost(0.6).gamma == pytest.approx(1.25)


def test_interval_examples_and_invariance(rng):
    e = FourVector((1.0, 2.0, 3.0, 4.0))
    assert interval2(e, e) == 0
    assert interval2(FourVector((0, 0, 0, 0)), FourVector.event(2.5, 0)) == 6.25
    worst = 0.0
    for _ in range(1000):
        a, b = (FourVector(tuple(rng.normal(size=4))) for _ in range(2))
        B = Boost(rng.uniform(-0.99, 0.99))
        s0 = interval2(a, b)
        s1 = interval2(boost_apply(B, a), boost_apply(B, b))
        worst = max(worst, abs(s1 - s0) / max(abs(s0), 1e-300))
    # random pairs can be nearly null, so the relative gap is bounded loosely here
    assert worst < 1e-9


def test_interval_invariance_relative_on_timelike(rng):
    for _ in range(1000):
        dt = rng.uniform(1, 2)
        dx = rng.uniform(-0.5, 0.5, size=3)
        a = FourVector((0, 0, 0, 0))
        b = FourVector((dt, *dx))
        B = Boost(rng.uniform(-0.9, 0.9))
        s0 = interval2(a, b)
        assert abs(interval2(boost_apply(B, a), boost_apply(B, b)) - s0) < 1e-12 * abs(s0)


def test_proper_time_of_moving_clock(rng):
    for v in rng.uniform(-0.99, 0.99, size=50):
        t = rng.uniform(0.1, 10)
        tau = proper_time(FourVector.event(0, 0), FourVector.event(t, v * t))
        assert tau == pytest.approx(t / Boost(v).gamma, rel=1e-12)
    with pytest.raises(ValueError):
        proper_time(FourVector((0, 0, 0, 0)), FourVector((0, 1, 0, 0)))


def test_signature_conversion():
    assert to_metric_signature(2.0) == -2.0
    eta = np.diag([1.0, -1, -1, -1])
    np.testing.assert_array_equal(to_metric_signature(eta), np.diag([-1.0, 1, 1, 1]))
    np.testing.assert_array_equal(to_metric_signature(to_metric_signature(eta)), eta)


def test_current_transformation_is_a_boost(rng):
    for _ in range(50):
        rho, *j = rng.normal(size=4)
        V = rng.uniform(-0.9, 0.9)
        rho2, j2 = transform_current(rho, j, V)
        # a current four-vector (rho c, j) transforms with the inverse boost
        expected = boost_apply(Boost(-V), FourVector((rho, *j))).array()
        np.testing.assert_allclose([rho2, *j2], expected, atol=1e-13)
        # the invariant rho^2 - j^2 is preserved
        assert rho2**2 - np.dot(j2, j2) == pytest.approx(rho**2 - np.dot(j, j), abs=1e-12)


def test_four_vector_validation():
    with pytest.raises(ValueError):
        FourVector((1, 2, 3))
    with pytest.raises(ValueError):
        FourVector((1, 2, 3, math.nan))
