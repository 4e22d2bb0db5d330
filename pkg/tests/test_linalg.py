import numpy as np
import pytest
from hypothesis import given, strategies as st

from freeball import linalg
from freeball.errors import DimensionMismatch, SingularMatrix

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 5)


def rand(n, seed):
    return linalg.ginibre(n, np.random.default_rng(seed))


@given(seeds, sizes)
def test_opnorm_matches_largest_singular_value(seed, n):
    a = rand(n, seed)
    assert linalg.opnorm(a) == pytest.approx(np.sqrt(np.max(np.linalg.eigvalsh(a.conj().T @ a))), rel=1e-10)


@given(seeds, sizes, sizes)
def test_kron_norm_is_multiplicative(seed, n, m):
    a, b = rand(n, seed), rand(m, seed + 1)
    assert linalg.opnorm(linalg.kron(a, b)) == pytest.approx(linalg.opnorm(a) * linalg.opnorm(b), rel=1e-10)


@given(seeds, sizes)
def test_inverse_and_solve_agree(seed, n):
    a = rand(n, seed) + 3 * np.eye(n)
    b = rand(n, seed + 7)
    inv = linalg.inverse(a)
    assert np.allclose(inv @ a, np.eye(n), atol=1e-12)
    assert np.allclose(linalg.solve(a, b), inv @ b, atol=1e-12)


def test_inverse_reports_condition_number():
    a = np.diag([1.0, 1e-3])
    _, cond = linalg.inverse(a, return_cond=True)
    assert cond == pytest.approx(1e3)


def test_singular_matrix_raises_with_smallest_sv():
    with pytest.raises(SingularMatrix) as exc:
        linalg.inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert exc.value.smallest_sv < 1e-12


def test_inverse_rejects_rectangular():
    with pytest.raises(DimensionMismatch):
        linalg.inverse(np.ones((2, 3)))


@given(seeds, sizes)
def test_hermitian_part_eigenvalue_bounds_numerical_range(seed, n):
    a = rand(n, seed)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    assert np.vdot(v, a @ v).real >= linalg.min_real_eig_hermitian_part(a) - 1e-12


def test_direct_sum_blocks():
    out = linalg.direct_sum(np.ones((1, 1)), 2 * np.eye(2))
    assert out.shape == (3, 3)
    assert out[0, 0] == 1 and out[2, 2] == 2 and out[0, 2] == 0


def test_ginibre_is_seed_deterministic_and_scaled():
    a = linalg.ginibre(200, linalg.make_rng(3))
    b = linalg.ginibre(200, linalg.make_rng(3))
    assert np.array_equal(a, b)
    # variance 1/n entries put the spectrum in the unit disk
    assert np.mean(np.abs(a) ** 2) == pytest.approx(1 / 200, rel=0.05)
    assert linalg.spec_radius(a) < 1.2


def test_batch_helpers_match_loops():
    xs = linalg.ginibre(3, np.random.default_rng(0), size=5)
    assert np.allclose(linalg.batch_opnorm(xs), [linalg.opnorm(x) for x in xs])
    assert np.allclose(linalg.batch_min_sv(xs), [linalg.min_singular_value(x) for x in xs])
