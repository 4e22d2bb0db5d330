import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exprgen import random_expr
from freeball import linalg
from freeball.errors import DegenerateExpression, DimensionMismatch, IdentityViolation, OutOfPencilDomain
from freeball.linearize import linearize
from freeball.ncball import BallSpec
from freeball.ratexpr import eval_expr, parse, parse_any
from freeball.realization import (FMRealization, assemble, border_norm, eval_descriptor, eval_fm,
                                  factorization_check, fm_bound, fm_check, fm_from_linearization, synth,
                                  synth_check)
from freeball.reproduce import example_poly, fm_section_data

PHI = (1 + np.sqrt(5)) / 2


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_realization_agrees_with_evaluation(seed):
    e = random_expr(np.random.default_rng(seed), depth=3)
    chk = synth_check(e, points=20, seed=seed)
    assert chk.checked == 20 and chk.max_error <= 1e-8


def test_small_realizations():
    r = synth(parse("inv(1 - Z1)"))
    assert r.dim == 1
    assert np.allclose(r.A[0], [[1]]) and np.allclose(r.b, [1]) and np.allclose(r.c, [1])
    r = synth(parse("Z1*Z2 + 3"), 2)
    x = linalg.ginibre(2, np.random.default_rng(0), size=2)
    assert np.allclose(eval_descriptor(r, x), x[0] @ x[1] + 3 * np.eye(2))


def test_realization_extends_past_expression_domain():
    # inv(Z1)*Z1 is undefined at Z1 = 0 as written, but the function is 1
    e = parse("inv(1 + Z1) * (1 + Z1)")
    x = np.array([[[-1.0]]])
    with pytest.raises(Exception):
        eval_expr(e, x)
    r = synth(e)
    try:
        v = eval_descriptor(r, x)
    except OutOfPencilDomain:
        return
    assert np.allclose(v, 1)


def test_degenerate_inverse():
    with pytest.raises(DegenerateExpression):
        synth(parse("inv(Z1*Z2)"), 2)


def test_matrix_realization():
    e = parse_any("[1, Z1; Z2, inv(1 - Z1*Z2)]", 2)
    r = synth(e, 2)
    x = 0.3 * linalg.ginibre(2, np.random.default_rng(1), size=2)
    assert np.allclose(eval_descriptor(r, x), eval_expr(e, x), atol=1e-12)
    with pytest.raises(DimensionMismatch):
        assemble([[synth(parse("Z1"), 1), synth(parse("Z1"), 1)]])


def test_block_factorization_and_negative_control():
    e = parse("inv(1 - 0.5*Z1*Z2 - 0.5*Z2*Z1)", 2)
    r = synth(e, 2)
    rep = factorization_check(r, s=0.9, trials=30)
    assert rep.max_residual <= 1e-10
    bad = type(r)(r.A, r.b, r.c + 1e-3)
    target = lambda x: eval_descriptor(r, x)
    with pytest.raises(IdentityViolation):
        factorization_check(bad, s=0.9, trials=30, target=target)


def test_fm_from_linearization_inverts_the_polynomial():
    p = example_poly("symmetric")
    fm = fm_from_linearization(linearize(p))
    num = p.to_numeric()
    x = 0.5 * linalg.ginibre(3, np.random.default_rng(2), size=2)
    assert np.allclose(eval_fm(fm, x) @ num.eval(x), np.eye(3), atol=1e-10)
    assert fm_check(num, fm, trials=30).ok


def test_fm_stated_data_and_headline():
    fm = fm_section_data()
    p = example_poly("symmetric").to_numeric()
    assert fm_check(p, fm, trials=60).max_residual <= 1e-8
    bound = fm_bound(fm, BallSpec.polydisk(2), 0.5, levels=(1, 2), samples=40, hill_steps=30)
    assert bound.f1 == pytest.approx(PHI, abs=1e-12)
    assert border_norm(bound.b_dual_norm) == pytest.approx(PHI, abs=1e-12)
    assert bound.b_dual_exact
    assert bound.ngn_constant(2.0) == pytest.approx(4 + np.sqrt(5), abs=1e-12)
    assert bound.f2_sampled <= bound.f2_bound + 1e-12


def test_fm_json_round_trip():
    fm = fm_section_data()
    back = FMRealization.from_json(fm.to_json())
    assert all(np.allclose(getattr(fm, k), getattr(back, k)) for k in "ABCD")


@given(st.floats(0, 10))
def test_border_norm_oracle(t):
    m = np.array([[1.0, -t], [0.0, 1.0]])
    assert border_norm(t) == pytest.approx(linalg.opnorm(m), rel=1e-12)
