import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from vexlab.errors import ConfigurationError, ConvergenceError
from vexlab.numerics import (
    PeriodicFunction,
    QuadratureConfig,
    TrigPolynomial,
    build_rule,
    differentiate,
    integrate,
    periodic_grid,
    to_trig,
)


def test_trapezoid_is_spectral_for_smooth_periodic():
    # int exp(cos x) = 2 pi I_0(1)
    from scipy.special import i0

    assert integrate(PeriodicFunction.from_expr("exp(cos(x))")) == pytest.approx(2 * math.pi * i0(1.0), rel=1e-13)


def test_graded_rule_handles_integrable_singularity():
    f = PeriodicFunction.from_expr("abs(sin(x/2))^(-0.5)", singular_points=(0.0,))
    exact = 4 * math.sqrt(math.pi) * gamma(0.25) / (2 * gamma(0.75))
    assert integrate(f) == pytest.approx(exact, rel=1e-9)


def test_subinterval_and_breakpoints():
    f = PeriodicFunction.from_expr("abs(sin(x))", smoothness="piecewise", breakpoints=(0.0,))
    want = (1 - math.cos(1.0)) + (1 - math.cos(2.0))
    assert integrate(f, (-1.0, 2.0), QuadratureConfig(rule="gauss")) == pytest.approx(want, rel=1e-12)


def test_interval_outside_torus_rejected():
    with pytest.raises(ConfigurationError):
        integrate(np.sin, (0.0, 4.0))


def test_non_convergence_is_reported():
    f = PeriodicFunction(lambda x: np.abs(np.sin(x / 2)) ** 0.1)  # opaque callable, cusp unknown
    with pytest.raises(ConvergenceError):
        integrate(f, quad=QuadratureConfig(max_refinements=3, tol=1e-12))


@pytest.mark.parametrize("bad", [dict(rule="simpson"), dict(panels=2), dict(tol=0.5), dict(refinement=1)])
def test_quadrature_config_validation(bad):
    with pytest.raises(ConfigurationError):
        QuadratureConfig(**bad)


def test_rule_weights_sum_to_length():
    for kind in ("trapezoid", "gauss"):
        r = build_rule(panels=32, rule=kind, singular=(0.0, 1.0))
        assert r.weights.sum() == pytest.approx(2 * math.pi, rel=1e-13)


coeffs = st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=7)


@settings(max_examples=60, deadline=None)
@given(coeffs, coeffs)
def test_trig_polynomial_grid_and_samples_agree(a, b):
    p = TrigPolynomial.from_real(a, b[: max(len(a) - 1, 0)])
    x = periodic_grid(32)
    np.testing.assert_allclose(p.grid_values(32), p(x), atol=1e-12)
    q = TrigPolynomial.from_samples(p(x))
    assert q.equals(p, tol=1e-12)


def test_real_form_and_derivative():
    p = TrigPolynomial.from_real([1.0, 2.0, 0.0], [0.5, -1.0])
    x = np.array([0.3, -1.1])
    want = 0.5 + 2 * np.cos(x) + 0.5 * np.sin(x) - np.sin(2 * x)
    np.testing.assert_allclose(p(x), want, rtol=1e-14)
    d = p.derivative(1)
    np.testing.assert_allclose(d(x), -2 * np.sin(x) + 0.5 * np.cos(x) - 2 * np.cos(2 * x), rtol=1e-13)
    np.testing.assert_allclose(differentiate(p, 2)(x), p.derivative(2)(x))


def test_to_trig_projection():
    f = PeriodicFunction.from_expr("exp(cos(x))")
    p = to_trig(f)
    x = np.linspace(-3, 3, 11)
    np.testing.assert_allclose(p(x), np.exp(np.cos(x)), rtol=1e-14)
    assert p.degree < 30


def test_non_periodic_expression_rejected():
    with pytest.raises(ConfigurationError):
        PeriodicFunction.from_expr("x")


def test_expression_kinks_are_located():
    f = PeriodicFunction.from_expr("abs(sin(x))")
    assert f.smoothness == "piecewise"
    assert np.allclose(sorted(f.breakpoints), [-np.pi, 0.0], atol=1e-12)
    g = PeriodicFunction.from_expr("max(cos(x), 0)")
    assert np.allclose(sorted(g.breakpoints), [-np.pi / 2, np.pi / 2], atol=1e-12)
    assert PeriodicFunction.from_expr("sqrt(abs(sin(x)))").smoothness == "singular"
    assert PeriodicFunction.from_expr("sin(x)^2").smoothness == "smooth"


def test_fourier_coefficients_of_kinked_expression():
    from vexlab import fourier_coeffs

    c = fourier_coeffs("abs(sin(x))", 2).real
    assert abs(c[2] - 2 / np.pi) < 1e-12
    assert abs(c[4] + 2 / (3 * np.pi)) < 1e-12
