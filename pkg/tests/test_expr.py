import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tresca.expr import ExpressionError, parse_expression


@pytest.mark.parametrize("src, x, y, expected", [
    ("2", 0.3, 0.7, 2.0),
    ("x", 0.3, 0.7, 0.3),
    ("1 + 2 * 3", 0, 0, 7.0),
    ("(1 + 2) * 3", 0, 0, 9.0),
    ("8 / 4 / 2", 0, 0, 1.0),
    ("1 - 2 - 3", 0, 0, -4.0),
    ("-x * y", 2.0, 3.0, -6.0),
    ("- -2", 0, 0, None),  # factor allows a single leading minus
    ("sin(x) + cos(y)", 0.5, 0.25, math.sin(0.5) + math.cos(0.25)),
    ("exp(abs(-x))", 1.5, 0, math.exp(1.5)),
    ("1.5e-3*x", 2.0, 0, 3e-3),
    ("2E2", 0, 0, 200.0),
])
def test_evaluate(src, x, y, expected):
    if expected is None:
        with pytest.raises(ExpressionError):
            parse_expression(src)
        return
    assert parse_expression(src)(x, y) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("src", ["", "1 +", "pi", "sin x", "(1", "1)", "x ** 2", "sqrt(x)", "2 3", "1..2"])
def test_rejects(src):
    with pytest.raises(ExpressionError):
        parse_expression(src)


def test_error_reports_column():
    with pytest.raises(ExpressionError, match="column 5"):
        parse_expression("1 + $")


def test_nonfinite_value_reports_location():
    e = parse_expression("1 / x")
    with pytest.raises(ExpressionError, match=r"x=0"):
        e(np.array([1.0, 0.0]), np.array([0.0, 0.5]))


def test_constant_detection():
    assert parse_expression("2*3 - 1").is_constant
    assert parse_expression("2*3 - 1").constant_value() == 5.0
    assert not parse_expression("x - x").is_constant


def test_vectorized_shape():
    x = np.linspace(0, 1, 7)
    assert parse_expression("3").__call__(x, x).shape == (7,)
    np.testing.assert_array_equal(parse_expression("x*y")(x, 2 * x), 2 * x * x)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_arithmetic_matches_python(a, b, c):
    e = parse_expression(f"{a!r} + {b!r} * ({c!r} - x)")
    assert e(0.5, 0.0) == a + b * (c - 0.5)
