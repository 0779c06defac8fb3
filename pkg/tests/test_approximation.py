import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vexlab import SolverOptions, best_approximation, fourier_coeffs, jackson_kernel, jackson_stechkin
from vexlab import partial_sum, vallee_poussin
from vexlab.approximation import jackson_multipliers
from vexlab.catalog import resolve_function
from vexlab.descent import golden_line_search
from vexlab.errors import ConfigurationError
from vexlab.numerics import PeriodicFunction, TrigPolynomial


def parseval_tail(f, n):
    c = f.c
    return math.sqrt(2 * math.pi * 2 * np.sum(np.abs(c[n + 1 :]) ** 2))


def test_fourier_coefficients_sign_convention():
    f = PeriodicFunction.from_expr("sin(x) + 2*cos(3*x)")
    c = fourier_coeffs(f, 3)  # c_{-3} .. c_3
    np.testing.assert_allclose(c, [1.0, 0, 0.5j, 0, -0.5j, 0, 1.0], atol=1e-14)


def test_vallee_poussin_reproduces_low_degree():
    p = TrigPolynomial.from_real([1, 2, 3], [0.5, -1])
    assert vallee_poussin(p, 2).equals(p, tol=1e-14)
    assert vallee_poussin(p, 1).degree <= 2


def test_partial_sum():
    f = resolve_function("trig_mix")
    s = partial_sum(f, 3)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(s(x), np.cos(3 * x), atol=1e-13)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_jackson_kernel_normalization(r):
    for n in (6, 11, 20):
        J = jackson_kernel(r, n)
        assert J.integral() == pytest.approx(1.0, abs=1e-8)
        assert J.kappa_quadrature() == pytest.approx(J.kappa, rel=1e-12)
        assert J.hat(0) == 1.0
        assert J.degree <= n


def test_jackson_kernel_invariant():
    with pytest.raises(ConfigurationError):
        jackson_kernel(3, 3)


def test_jackson_stechkin_degree_and_multipliers():
    f = resolve_function("exp_cos")
    D = jackson_stechkin(f, 8, 2)
    assert D.degree <= 8
    d = jackson_multipliers(8, 2)
    assert d[0] == pytest.approx(1.0)


def test_best_approximation_matches_parseval_tail():
    f = resolve_function("exp_cos")
    for n in (1, 3, 6):
        res = best_approximation(f, n, 2.0)
        assert res.value == pytest.approx(parseval_tail(f, n), rel=1e-4)
        assert res.polynomial.degree <= n


def test_engines_agree_on_variable_exponent():
    f = resolve_function("smooth_abs")
    a = best_approximation(f, 3, "2+cos(x)", options=SolverOptions("coordinate"))
    b = best_approximation(f, 3, "2+cos(x)", options=SolverOptions("lbfgs"))
    assert a.value == pytest.approx(b.value, rel=2e-4)


def test_best_approximation_of_polynomial_is_zero():
    p = TrigPolynomial.from_real([1, 0.5], [0.3])
    assert best_approximation(p, 2, 2.0).value < 1e-12


def test_negative_degree_rejected():
    with pytest.raises(ConfigurationError):
        best_approximation(resolve_function("exp_cos"), -1)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(0.01, 2.0))
def test_golden_line_search_finds_parabola_minimum(c, s):
    phi = lambda t: (t - c) ** 2  # noqa: E731
    t, v = golden_line_search(phi, phi(0.0), s, 1e-9)
    assert t == pytest.approx(c, abs=1e-6)
