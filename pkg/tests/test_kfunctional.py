import math

import numpy as np
import pytest

from vexlab import k_functional, realization_operator
from vexlab.catalog import resolve_function
from vexlab.errors import ConfigurationError
from vexlab.kfunctional import realization_coefficients
from vexlab.numerics import PeriodicFunction, TrigPolynomial
from vexlab.smoothing import r_delta_multiplier

COS = TrigPolynomial.monomial(1)


@pytest.mark.parametrize("delta, r", [(0.5, 1), (2.0, 1), (0.5, 2), (0.9, 2)])
def test_cosine_closed_form(delta, r):
    # inf over a of |1 - a| + delta^r |a|, times ||cos|| = sqrt(pi)
    res = k_functional(COS, delta, r)
    assert res.value == pytest.approx(math.sqrt(math.pi) * min(1.0, delta**r), rel=1e-6)
    assert res.accepted


def test_upper_bounds_respected():
    f = resolve_function("trig_mix")
    res = k_functional(f, 0.3, 2, "2+cos(x)")
    assert all(res.value <= v * (1 + 1e-12) for v in res.upper_bounds.values())
    assert set(res.to_dict()) >= {"K", "M", "upper_bounds", "converged", "accepted", "K_doubled_M"}


def test_monotone_in_delta():
    f = resolve_function("exp_cos")
    vals = [k_functional(f, d, 1).value for d in (0.05, 0.2, 0.8)]
    assert vals[0] <= vals[1] <= vals[2]


def test_realization_identity():
    # A = I - (I - R^r)^r on the multiplier side
    for r in (1, 2, 3):
        k = np.arange(0, 9)
        mu = r_delta_multiplier(k, 0.4)
        lhs = sum(c * mu**pw for pw, c in realization_coefficients(r))
        np.testing.assert_allclose(lhs, 1 - (1 - mu**r) ** r, atol=1e-13)


def test_realization_paths_agree():
    f = TrigPolynomial.from_real([0.1, 1.0, 0.4], [0.0, -0.6])
    g = PeriodicFunction(lambda x: f(x), name="generic")
    x = np.linspace(-3, 3, 9)
    np.testing.assert_allclose(realization_operator(f, 0.5, 2)(x), realization_operator(g, 0.5, 2)(x), atol=1e-8)


def test_argument_checks():
    with pytest.raises(ConfigurationError):
        k_functional(COS, 0.5, 0)
    with pytest.raises(ConfigurationError):
        k_functional(COS, 0.5, 2, M=3)
    with pytest.raises(ConfigurationError):
        realization_operator(COS, 0.0, 1)


def test_zero_delta_gives_zero():
    assert k_functional(resolve_function("exp_cos"), 0.0, 1, check_degree=False).value < 1e-6
