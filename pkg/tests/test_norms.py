import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vexlab import INFINITE, LebesgueSpace, Weight, luxemburg_norm, modular
from vexlab.errors import ConfigurationError
from vexlab.norms import dual_norm_estimate
from vexlab.numerics import TrigPolynomial
from vexlab.weights import conjugate_exponent


def test_closed_forms():
    assert luxemburg_norm(1.0, 2).value == pytest.approx(math.sqrt(2 * math.pi), abs=1e-8)
    assert luxemburg_norm("sin(x)", 2).value == pytest.approx(math.sqrt(math.pi), abs=1e-8)
    assert modular("2", 2) == pytest.approx(8 * math.pi, rel=1e-13)
    assert luxemburg_norm(1.0, 4).value == pytest.approx((2 * math.pi) ** 0.25, rel=1e-10)


def test_gauge_solves_unit_modular():
    p, w = "2+cos(x)", Weight.power(0.5)
    res = luxemburg_norm("sin(x) + 0.3", p, w)
    assert modular(lambda x: (np.sin(x) + 0.3) / res.value, p, w) == pytest.approx(1.0, abs=1e-8)
    assert res.modular_at_solution <= 1.0 + 1e-12


def test_infinite_modular_sentinel():
    q = conjugate_exponent("1+abs(sin(x))")  # infinite at x = 0
    sp = LebesgueSpace(q, nodes=256)
    assert sp.modular(np.full(256, 2.0)) is INFINITE
    assert sp.modular(np.full(256, 0.5)) < 1.0
    assert sp.modular(np.zeros(256)) == 0.0
    assert math.isfinite(sp.norm(np.full(256, 2.0)))


def test_tolerance_validated():
    with pytest.raises(ConfigurationError) as info:
        luxemburg_norm("sin(x)", 2, tol=-1)
    assert info.value.pointer == "/solver/tol"


pexp = st.sampled_from(["2", "2+cos(x)", "1.2+0.5*abs(sin(x))", "3"])
trig = st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=9).map(
    lambda v: TrigPolynomial.from_vector(v if len(v) % 2 else v[:-1]))


@settings(max_examples=25, deadline=None)
@given(pexp, trig, trig, st.floats(-4, 4, allow_nan=False))
def test_norm_axioms(p, f, g, lam):
    sp = LebesgueSpace(p, Weight.power(-0.3), nodes=512)
    nf, ng, nfg = sp.norm(f), sp.norm(g), sp.norm(f + g)
    assert sp.norm(f * lam) == pytest.approx(abs(lam) * nf, rel=1e-8, abs=1e-12)
    assert nfg <= nf + ng + 1e-9 * (nf + ng + 1)


@settings(max_examples=20, deadline=None)
@given(trig)
def test_gradient_matches_finite_differences(f):
    sp = LebesgueSpace("2+cos(x)", nodes=64)
    v = sp.values(f)
    if sp.norm(v) < 1e-3:
        return
    a, g = sp.norm_and_gradient(v)
    e = np.zeros_like(v)
    i = int(np.argmax(np.abs(v)))
    e[i] = 1e-6
    fd = (sp.norm(v + e) - sp.norm(v - e)) / 2e-6
    assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_refined_space_agrees():
    sp = LebesgueSpace("1.2+0.5*abs(sin(x))", Weight.power(0.5), nodes=1024)
    f = TrigPolynomial.from_real([0.2, 1.0, 0.0, 0.3])
    assert sp.refined(2).norm(f) == pytest.approx(sp.norm(f), rel=1e-4)


def test_dual_norm_bounded_by_twice_norm():
    f = "cos(x) + 0.2"
    tester = lambda x: np.sign(np.cos(x) + 0.2) * np.abs(np.cos(x) + 0.2)  # noqa: E731
    from vexlab.numerics import PeriodicFunction

    g = PeriodicFunction(tester, smoothness="piecewise")
    est = dual_norm_estimate(f, 2, testers=[g])
    n = luxemburg_norm(f, 2).value
    assert n * 0.999 <= est <= 2 * n


def test_norm_runtime():
    t = time.perf_counter()
    luxemburg_norm("sin(x)", 2)
    assert time.perf_counter() - t < 1.0


@pytest.mark.parametrize("c", [1e-200, 1e-140, 1e140, 1e200])
def test_extreme_scales(c):
    for p in ("3", "2+cos(x)"):
        sp = LebesgueSpace(p, nodes=64)
        v = np.sin(sp.nodes) + 0.1
        assert sp.norm(v * c) / c == pytest.approx(sp.norm(v), rel=1e-9)
