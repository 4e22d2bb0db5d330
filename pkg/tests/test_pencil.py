import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freeball import linalg
from freeball.errors import DimensionMismatch, NotContractive
from freeball.ncball import BallSpec
from freeball.pencil import (as_pencil, conjugate, cp_map_matrix, invertibility_radius, irreducible,
                             jsr_rowball, jsr_truncated, linear_part, neumann_inv, pencil_eval, pencil_inv,
                             similarity_to_dual_ball)

seeds = st.integers(0, 2**32 - 1)


@given(seeds, st.integers(1, 3), st.integers(1, 3), st.floats(0.05, 0.95))
def test_neumann_within_truncation_bound(seed, m, n, q):
    rng = np.random.default_rng(seed)
    a = linalg.ginibre(m, rng, size=2)
    x = linalg.ginibre(n, rng, size=2)
    x = x * q / linalg.opnorm(linear_part(a, x))
    res = neumann_inv(a, x)
    err = linalg.opnorm(res.value - pencil_inv(a, x))
    assert err <= res.truncation_bound + 50 * np.finfo(float).eps / (1 - res.q)
    # the partial sum obeys the geometric norm bound
    assert linalg.opnorm(res.value) <= 1 / (1 - res.q) + 1e-12


def test_neumann_rejects_non_contractive():
    with pytest.raises(NotContractive):
        neumann_inv(np.array([[[1.0]]]), np.array([[[1.0]]]))


def test_pencil_eval_shape_checks():
    assert pencil_eval(np.zeros((1, 2, 2)), np.ones((1, 3, 3))).shape == (6, 6)
    with pytest.raises(DimensionMismatch):
        as_pencil(np.zeros((2, 2, 3)))


def test_jsr_word_sum_oracle():
    rng = np.random.default_rng(0)
    t = linalg.ginibre(3, rng, size=2)
    n = 6
    s = np.zeros((3, 3), dtype=np.complex128)
    for w in itertools.product(range(2), repeat=n):
        m = np.eye(3)
        for j in w:
            m = m @ t[j]
        s += m @ m.conj().T
    assert jsr_truncated(t, n) == pytest.approx(linalg.opnorm(s) ** (1 / (2 * n)), rel=1e-12)


def test_jsr_cp_map_power_iteration_oracle():
    rng = np.random.default_rng(1)
    t = linalg.ginibre(3, rng, size=2)
    s = np.eye(3, dtype=np.complex128)
    for _ in range(3000):
        s = sum(tj @ s @ tj.conj().T for tj in t)
        nrm = linalg.opnorm(s)
        s /= nrm
    assert jsr_rowball(t).value == pytest.approx(np.sqrt(nrm), rel=1e-9)


@given(seeds)
def test_jsr_truncation_converges_from_above(seed):
    t = linalg.ginibre(3, np.random.default_rng(seed), size=2)
    res = jsr_rowball(t)
    assert jsr_truncated(t, 400) >= res.value * (1 - 1e-9)
    assert abs(jsr_truncated(t, 400) / res.value - 1) < abs(res.truncated / res.value - 1) + 1e-9


def test_jsr_known_values():
    # a row coisometry has joint spectral radius 1
    t = np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]],
                  [[0.0, 0.0], [0.0, 1.0]]]) / np.sqrt(2)
    assert jsr_rowball(t).value == pytest.approx(1.0)
    assert cp_map_matrix(t).shape == (4, 4)


def test_invertibility_radius_of_scalar_pencil():
    # 1 - 2z is singular first at |z| = 1/2
    res = invertibility_radius(np.array([[[2.0]]]), BallSpec.polydisk(1), levels=(1,), samples=200)
    assert res.r_clean <= 0.5 <= res.r_witness
    assert res.r_witness - res.r_clean < 1e-4
    w = res.witnesses[-1]
    assert w["smallest_sv"] < 1e-10


def test_irreducible_and_reducible():
    e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert irreducible(np.array([e12, e12.T])).algebra_dim == 4
    res = irreducible(np.array([e12, np.diag([1.0, 2.0])]))
    assert not res.irreducible and res.algebra_dim == 3
    v = res.invariant_subspace
    for a in (e12, np.diag([1.0, 2.0])):
        proj = v @ np.linalg.pinv(v)
        assert np.allclose(proj @ a @ v, a @ v, atol=1e-10)


def test_similarity_search_identity_stage():
    a = np.array([[[0.5]], [[0.5]]])
    res = similarity_to_dual_ball(a, BallSpec.polydisk(2))
    assert res.stage == "identity" and res.kappa == pytest.approx(1.0)
    assert np.allclose(conjugate(a, res.S), res.B)
