import numpy as np
import pytest
from hypothesis import given, strategies as st

from exprgen import random_expr
from freeball import linalg
from freeball.errors import (DegenerateExpression, ExprSyntaxError, NotPolynomial, OutOfDomain,
                             UnknownVariable)
from freeball.ratexpr import (Add, Const, Inv, MatExpr, Mul, Var, equivalent, eval_expr, expr_is_polynomial,
                              num_vars, parse, parse_any, poly_to_expr, to_string)

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_print_parse_round_trip(seed):
    e = random_expr(np.random.default_rng(seed))
    once = parse(to_string(e), 2)
    # Scale nodes come back as products with a constant; parser output is a fixed point
    assert parse(to_string(once), 2) == once
    x = linalg.ginibre(2, np.random.default_rng(seed), size=2) * 0.1
    assert np.allclose(eval_expr(once, x), eval_expr(e, x), atol=1e-10)


def test_precedence_and_postfix_inverse():
    assert parse("1 + Z1*Z2") == Add(Const(1), Mul(Var(0), Var(1)))
    assert parse("Z1^-1") == Inv(Var(0))
    assert parse("(2 - Z1)^-1") == parse("inv(2 - Z1)")
    assert parse("W", 2) == Var(1)


def test_complex_literals():
    assert parse("(1.5-2i)") == Const(1.5 - 2j)
    assert parse("i") == Const(1j)
    assert parse("(-3)") == Const(-3)


def test_matrix_expressions():
    m = parse_any("[1, Z1; 0, 1]")
    assert isinstance(m, MatExpr) and m.k == 2
    x = np.array([[[2.0]]])
    assert np.allclose(eval_expr(m, x), [[1, 2], [0, 1]])


@pytest.mark.parametrize("text, line, col", [
    ("1 + ", 1, 5),
    ("Z1 ** Z2", 1, 5),
    ("inv 1", 1, 5),
    ("(1 + Z1", 1, 8),
    ("1\n + )", 2, 4),
])
def test_syntax_errors_report_position(text, line, col):
    with pytest.raises(ExprSyntaxError) as exc:
        parse(text, 2)
    assert (exc.value.line, exc.value.col) == (line, col)
    assert exc.value.expected


def test_expected_tokens_after_inverse():
    with pytest.raises(ExprSyntaxError) as exc:
        parse("Z1^-1^-1")
    assert "^-1" not in exc.value.expected


def test_unknown_variables():
    with pytest.raises(UnknownVariable):
        parse("Z3", 2)
    with pytest.raises(UnknownVariable):
        parse("W", 3)
    with pytest.raises(UnknownVariable):
        parse("Q1")


def test_eval_out_of_domain():
    e = parse("inv(1 - Z1)")
    with pytest.raises(OutOfDomain):
        eval_expr(e, np.array([[[1.0]]]))


@given(seeds)
def test_inverse_evaluates_to_matrix_inverse(seed):
    x = linalg.ginibre(3, np.random.default_rng(seed), size=2) * 0.3
    got = eval_expr(parse("inv(1 - Z1*Z2)"), x)
    assert np.allclose(got @ (np.eye(3) - x[0] @ x[1]), np.eye(3), atol=1e-12)


def test_equivalence_of_known_identities():
    a = parse("inv(1 - Z1*Z2)*Z1")
    b = parse("Z1*inv(1 - Z2*Z1)")
    assert equivalent(a, b, seed=1).verdict == "equivalent"
    c = parse("Z2*Z1")
    res = equivalent(parse("Z1*Z2"), c, seed=1)
    assert res.verdict == "distinct" and res.witness is not None


def test_equivalence_needs_a_common_point():
    with pytest.raises(DegenerateExpression):
        equivalent(parse("inv(Z1 - Z1)"), parse("1"), trials=5)


def test_polynomial_bridge():
    p = expr_is_polynomial(parse("1 - 0.5*Z1*Z2 - 0.5*Z2*Z1 + inv(2)"))
    assert p.degree() == 2
    assert p.constant_term()[0, 0] == pytest.approx(1.5)
    back = poly_to_expr(p)
    x = linalg.ginibre(2, np.random.default_rng(0), size=2)
    assert np.allclose(eval_expr(back, x), p.eval(x))
    with pytest.raises(NotPolynomial):
        expr_is_polynomial(parse("inv(1 - Z1)"))


def test_num_vars():
    assert num_vars(parse("Z3 + 1")) == 3
