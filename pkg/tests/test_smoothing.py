import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vexlab.errors import ConfigurationError
from vexlab.numerics import PeriodicFunction, TrigPolynomial
from vexlab.smoothing import (
    approx_identity,
    convolve,
    difference,
    modulus,
    r_delta,
    r_delta_derivative,
    r_delta_multiplier,
    shift_difference,
    steklov,
    steklov_multiplier,
    steklov_translated,
)

P = TrigPolynomial.from_real([0.4, 1.0, -0.5, 0.0, 0.25], [0.3, 0.0, 0.7])
X = np.linspace(-3.0, 3.0, 13)


def generic(p):
    """Same function without the polynomial type, forcing the quadrature path."""
    return PeriodicFunction(lambda x: p(x), name="generic")


def test_steklov_multiplier_path_matches_quadrature():
    for h in (0.1, 0.7, 2.0):
        np.testing.assert_allclose(steklov(P, h)(X), steklov(generic(P), h)(X), atol=1e-11)


def test_steklov_translated_paths():
    a = steklov_translated(P, 2.0, 0.3)(X)
    b = steklov_translated(generic(P), 2.0, 0.3)(X)
    np.testing.assert_allclose(a, b, atol=1e-11)


@pytest.mark.parametrize("r", [1, 2])
def test_r_delta_paths(r):
    np.testing.assert_allclose(r_delta(P, 0.5, r)(X), r_delta(generic(P), 0.5, r)(X), atol=1e-9)


def test_r_delta_multiplier_series_and_closed_form_agree():
    k = np.array([0.499, 0.501]) / 0.5
    direct = []
    for kk in k:
        h = np.linspace(0.25, 0.5, 20001)
        m = steklov_multiplier(kk, h)
        direct.append(np.trapezoid(m, h) * 2 / 0.5)
    np.testing.assert_allclose(r_delta_multiplier(k, 0.5), direct, rtol=1e-8)


def test_r_delta_derivative_needs_no_derivative():
    d1 = r_delta_derivative(generic(P), 0.4)(X)
    d2 = r_delta(P, 0.4).derivative(1)(X)
    np.testing.assert_allclose(d1, d2, atol=1e-12)


def test_difference_and_shift_difference():
    h = 0.3
    np.testing.assert_allclose(difference(P, h, 2)(X), difference(generic(P), h, 2)(X), atol=1e-10)
    want = P(X + 2 * h) - 2 * P(X + h) + P(X)
    for method in ("binomial", "compose", "multiplier"):
        np.testing.assert_allclose(shift_difference(P, h, 2, method=method)(X), want, atol=1e-12)


def test_modulus_edge_cases():
    assert modulus(P, 0.0, 2) == 0.0
    assert modulus(P, 0.3, 0) == pytest.approx(modulus(P, 1.0, 0))
    cos = TrigPolynomial.monomial(1)
    # |m_1(h) - 1| * ||cos||
    h = 0.4
    assert modulus(cos, h, 1) == pytest.approx(abs(steklov_multiplier(1, h) - 1) * math.sqrt(math.pi), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 3.0), st.lists(st.floats(-2, 2), min_size=5, max_size=5))
def test_modulus_subadditive_in_f(delta, v):
    g = TrigPolynomial.from_vector(v)
    for r in (1, 2):
        lhs = modulus(P + g, delta, r)
        assert lhs <= modulus(P, delta, r) + modulus(g, delta, r) + 1e-12
        # T_h is a contraction in L^2, so ||(I - T)^r f|| <= 2^r ||f||
        assert lhs <= 2**r * modulus(P + g, delta, 0) + 1e-12


def test_steklov_domain_checked():
    with pytest.raises(ConfigurationError):
        steklov(P, 0.0)
    with pytest.raises(ConfigurationError):
        r_delta(P, 7.0)


def test_convolution_with_constant():
    one = TrigPolynomial([1.0])
    g = convolve(P, one)
    # (f * 1)(x) = int f = 2 pi c_0
    np.testing.assert_allclose(g(X), 2 * math.pi * P.c[0].real, rtol=1e-8)


@pytest.mark.parametrize("kernel", ["poisson", "gauss", "bump"])
def test_approximate_identity_converges(kernel):
    f = PeriodicFunction.from_expr("exp(cos(x))")
    errs = [np.max(np.abs(approx_identity(f, kernel, t)(X) - f(X))) for t in (0.2, 0.05)]
    assert errs[1] < errs[0]
