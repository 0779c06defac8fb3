import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vexlab import exprdsl
from vexlab.errors import DomainError, ExprSyntaxError
from vexlab.exprdsl import Expr, diff, evaluate, evaluate_array, parse, to_string


@pytest.mark.parametrize(
    "text, offset",
    [("2*(", 3), ("sin(", 4), ("1 + ", 4), ("x $ 2", 2), ("foo(x)", 0), (")", 0)],
)
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_offsets_are_bytes_not_characters():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x + é")
    assert info.value.offset == 4
    with pytest.raises(ExprSyntaxError) as info:
        parse("é")
    assert info.value.offset == 0


def test_precedence_and_associativity():
    assert evaluate(parse("2^3^2"), 0.0) == 512.0
    assert evaluate(parse("-2^2"), 0.0) == -4.0
    assert evaluate(parse("1 - 2 - 3"), 0.0) == -4.0
    assert evaluate(parse("8 / 4 / 2"), 0.0) == 1.0
    assert evaluate(parse("2 + 3 * x"), 2.0) == 8.0
    assert evaluate(parse("pi"), 0.0) == math.pi


def test_functions():
    x = np.linspace(0.1, 3.0, 7)
    e = parse("sin(x) + cos(x) * exp(x) - log(x) + abs(x - 1) + sqrt(x) + min(x, 1) + max(x, 2) + pow(x, 3)")
    want = (np.sin(x) + np.cos(x) * np.exp(x) - np.log(x) + np.abs(x - 1) + np.sqrt(x)
            + np.minimum(x, 1) + np.maximum(x, 2) + x**3)
    np.testing.assert_allclose(evaluate_array(e, x), want, rtol=1e-14)


@pytest.mark.parametrize("text, x", [("log(x)", -1.0), ("sqrt(x)", -1.0), ("1/x", 0.0), ("x^0.5", -2.0)])
def test_domain_errors_name_subexpression_and_point(text, x):
    with pytest.raises(DomainError) as info:
        evaluate(parse(text), x)
    assert info.value.x == x
    assert info.value.subexpr


def test_arity_checked():
    with pytest.raises(ExprSyntaxError):
        parse("sin(x, 2)")
    with pytest.raises(ExprSyntaxError):
        parse("pow(x)")


def test_node_validation():
    with pytest.raises(ValueError):
        Expr("call", "tan", (Expr("var", "x"),))
    with pytest.raises(ValueError):
        Expr("num", float("nan"))


def test_symbolic_derivative_matches_finite_difference():
    e = parse("sin(x)^2 * exp(cos(x)) + sqrt(2 + cos(x)) / (3 + sin(2*x))")
    d = diff(e)
    x = np.linspace(-3, 3, 25)
    h = 1e-6
    fd = (evaluate_array(e, x + h) - evaluate_array(e, x - h)) / (2 * h)
    np.testing.assert_allclose(evaluate_array(d, x), fd, atol=1e-7)


def test_depends_on_x():
    assert exprdsl.depends_on_x(parse("sin(x) + 1"))
    assert not exprdsl.depends_on_x(parse("2 * pi + 1"))


# ---- round trip on random trees

_leaf = st.one_of(
    st.just(Expr("var", "x")),
    st.just(Expr("const", "pi")),
    st.floats(-50, 50, allow_nan=False).map(lambda v: Expr("num", v)),
)


def _grow(children):
    unary = st.sampled_from(["sin", "cos", "exp", "abs", "sqrt", "log"])
    binary = st.sampled_from(["min", "max", "pow"])
    return st.one_of(
        children.map(lambda a: Expr("neg", None, (a,))),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "^"]), children, children).map(
            lambda t: Expr("bin", t[0], (t[1], t[2]))),
        st.tuples(unary, children).map(lambda t: Expr("call", t[0], (t[1],))),
        st.tuples(binary, children, children).map(lambda t: Expr("call", t[0], (t[1], t[2]))),
    )


trees = st.recursive(_leaf, _grow, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_print_parse_round_trip(e):
    text = to_string(e)
    assert parse(text) == e
    assert to_string(parse(text)) == text


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5), st.integers(1, 4), st.integers(0, 3))
def test_polynomial_values(coeffs, k, j):
    text = " + ".join(f"{c!r}*x^{i}" for i, c in enumerate(coeffs))
    e = parse(text)
    x = np.linspace(-1, 1, 5) * k + j
    want = sum(c * x**i for i, c in enumerate(coeffs))
    np.testing.assert_allclose(evaluate_array(e, x), want, rtol=1e-12, atol=1e-9)
