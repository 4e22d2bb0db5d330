import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from freeball import linalg
from freeball.errors import AlreadyLinear, NotMonicAtZero
from freeball.freepoly import MatPoly, poly_direct_sum
from freeball.linearize import (atom_certificate, higman_step, identity_residual, linearize,
                                normalize_at_zero, select_term, verify)
from freeball.reproduce import example_poly


def exact_poly(seed, d=2, terms=3, deg=3):
    rng = np.random.default_rng(seed)
    z = [MatPoly.var(j, d, exact=True) for j in range(d)]
    p = MatPoly.identity(d, 1, exact=True)
    for _ in range(terms):
        w = rng.integers(d, size=int(rng.integers(1, deg + 1)))
        c = sp.Rational(int(rng.integers(-4, 5)), int(rng.integers(1, 5)))
        mono = MatPoly.identity(d, 1, exact=True)
        for a in w:
            mono = mono * z[int(a)]
        p = p + c * mono
    return p


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_identity_holds_exactly_for_random_polynomials(seed):
    p = exact_poly(seed)
    if p.degree() < 2:
        return
    lin = linearize(p)
    assert identity_residual(lin).is_zero()
    rep = verify(lin, trials=12, seed=seed)
    assert rep.ok


def test_untrimmed_and_trimmed_agree():
    p = example_poly("symmetric")
    full = linearize(p, trim_result=False)
    trimmed = linearize(p)
    assert trimmed.size <= full.size
    assert identity_residual(full).is_zero() and identity_residual(trimmed).is_zero()
    x = linalg.ginibre(2, np.random.default_rng(0), size=2) * 0.4
    # both pencils have the same determinant up to the identity padding
    assert np.linalg.det(full.pencil().to_numeric().eval(x)) == pytest.approx(
        np.linalg.det(trimmed.pencil().to_numeric().eval(x)))


def test_higman_step_is_exact():
    p = example_poly("symmetric")
    st_ = higman_step(p)
    lhs = poly_direct_sum(p, MatPoly.identity(2, 1, exact=True))
    # left * result * right == diag(p, 1) up to the bordering convention
    assert (st_.left * st_.result * st_.right - lhs).is_zero()
    assert st_.result.k == 2


def test_select_term_prefers_largest_word():
    p = example_poly("symmetric")
    (i, j), word, c = select_term(p)
    assert (i, j) == (0, 0) and len(word) == 2 and c == sp.Rational(-1, 2)
    with pytest.raises(AlreadyLinear):
        select_term(MatPoly(2, 1, {(): 1, (0,): 1}, exact=True))


def test_normalization():
    z = MatPoly.var(0, 1, exact=True)
    p = 2 - z * z
    with pytest.raises(NotMonicAtZero):
        linearize(p)
    q = normalize_at_zero(p)
    assert q.constant_term()[0, 0] == 1
    with pytest.raises(NotMonicAtZero):
        normalize_at_zero(z * z)


def test_matrix_polynomial_linearization():
    z, w = MatPoly.var(0, 2, k=2, exact=True), MatPoly.var(1, 2, k=2, exact=True)
    c = np.array([[sp.Integer(1), sp.Integer(2)], [sp.Integer(0), sp.Integer(1)]], dtype=object)
    p = MatPoly.identity(2, 2, exact=True) - MatPoly.const(c, 2, exact=True) * z * w
    lin = linearize(p)
    assert identity_residual(lin).is_zero()
    assert verify(lin, trials=30).ok


def test_atom_certificate_reducible_case():
    # (1 - Z1)(1 - Z2) factors, so the certificate cannot be given
    z, w = MatPoly.var(0, 2, exact=True), MatPoly.var(1, 2, exact=True)
    cert = atom_certificate((1 - z) * (1 - w))
    assert cert.verdict == "inconclusive"
    assert cert.invariant_subspace is not None


def test_atom_certificates_for_the_two_examples():
    for name, dim in (("symmetric", 9), ("bilinear", 4)):
        cert = atom_certificate(example_poly(name))
        assert cert.verdict == "atom" and cert.algebra_dim == dim
