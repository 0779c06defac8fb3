import math

import numpy as np
import pytest

from vexlab import Weight, classify_weight
from vexlab.errors import CapabilityError, ConfigurationError
from vexlab.weights import (
    ExponentFunction,
    IntervalFamily,
    classical_ap_constant,
    conjugate_exponent,
    dual_weight,
    log_holder_profile,
    muckenhoupt_constant,
)


def test_exponent_bounds_and_conjugate():
    p = ExponentFunction("2+cos(x)")
    assert p.p_minus == pytest.approx(1.0, abs=1e-6)
    assert p.p_plus == pytest.approx(3.0, abs=1e-6)
    q = conjugate_exponent("3")
    assert q.constant == pytest.approx(1.5)
    x = np.array([0.5, 2.0])
    qq = conjugate_exponent("1.5+sin(x)^2")(x)
    pp = 1.5 + np.sin(x) ** 2
    np.testing.assert_allclose(1 / pp + 1 / qq, 1.0, rtol=1e-13)


def test_exponent_below_one_rejected():
    from vexlab.catalog import resolve_exponent

    with pytest.raises(ConfigurationError):
        resolve_exponent("0.5+cos(x)")


def test_weight_validation():
    with pytest.raises((ValueError, ConfigurationError)):
        Weight("-1 + 0*x")


def test_dual_weight():
    w = Weight.power(0.5)
    d = dual_weight(w, 3.0)
    x = np.array([0.4, 1.7])
    np.testing.assert_allclose(d(x), w(x) ** (1 - 1.5), rtol=1e-13)
    assert dual_weight(Weight(1.0), "1+abs(sin(x))")(np.array([0.0, 1.0])).tolist() == [1.0, 1.0]


def test_dual_weight_undefined_where_exponent_is_one():
    with pytest.raises(CapabilityError):
        dual_weight(Weight("2+cos(x)"), "1+abs(sin(x))")(np.array([0.0]))


def test_log_holder_profile_smooth_exponent_is_bounded():
    prof = log_holder_profile("2+cos(x)")
    assert prof.is_log_holder
    assert all(math.isfinite(e.value) for e in prof.estimates)


def test_constant_exponent_matches_classical_ap():
    fam = IntervalFamily.dyadic(6, order=4)
    w = Weight.power(0.5)
    a = muckenhoupt_constant(w, 2.0, fam).value
    b = classical_ap_constant(w, 2.0, fam).value
    assert a == pytest.approx(b, rel=0.05)


def test_unit_weight_constant():
    fam = IntervalFamily.dyadic(4, order=4)
    # (1/|Q|) ||1_Q||_2 ||1_Q||_2 = 1 for omega = 1, p = 2
    assert muckenhoupt_constant(Weight(1.0), 2.0, fam).value == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("gamma, verdict", [(0.5, "in"), (-1.5, "not-in")])
def test_classification(gamma, verdict):
    c = classify_weight(Weight.power(gamma), 2.0)
    assert c.verdict == verdict
    if verdict == "not-in":
        assert c.growth >= 4.0
    else:
        assert c.last_change < 0.25
