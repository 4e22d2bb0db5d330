import numpy as np
import pytest

from freeball import _kernels

pytestmark = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")


def _tree():
    # words: (), (0,), (1,), (0, 1), (0, 1, 1)
    return np.array([-1, 0, -1, 1, 3]), np.array([-1, 0, 1, 1, 1])


def test_word_products_agree():
    rng = np.random.default_rng(0)
    xs = rng.standard_normal((4, 2, 3, 3)) + 1j * rng.standard_normal((4, 2, 3, 3))
    parent, letter = _tree()
    got = _kernels._nb_word_products(xs, parent, letter)
    want = _kernels._np_word_products(xs, parent, letter)
    assert np.allclose(got, want, atol=1e-13)
    assert np.allclose(want[:, 4], xs[:, 0] @ xs[:, 1] @ xs[:, 1])


def test_kron_accumulate_agrees():
    rng = np.random.default_rng(1)
    coeffs = rng.standard_normal((5, 2, 2)) + 0j
    mono = rng.standard_normal((3, 5, 4, 4)) + 1j * rng.standard_normal((3, 5, 4, 4))
    got = _kernels._nb_kron_accumulate(coeffs, mono)
    want = _kernels._np_kron_accumulate(coeffs, mono)
    assert np.allclose(got, want, atol=1e-12)
    assert np.allclose(want[0], sum(np.kron(c, m) for c, m in zip(coeffs, mono[0])))


def test_neumann_sum_agrees():
    rng = np.random.default_rng(2)
    t = 0.1 * (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    got = _kernels._nb_neumann_sum(t, 30)
    want = _kernels._np_neumann_sum(t, 30)
    assert np.allclose(got, want, atol=1e-13)
    assert np.allclose(want, np.linalg.inv(np.eye(6) - t), atol=1e-12)


def test_disable_flag(monkeypatch):
    monkeypatch.setenv("FREEBALL_DISABLE_JIT", "1")
    assert not _kernels.jit_enabled()
    monkeypatch.setenv("FREEBALL_DISABLE_JIT", "0")
    assert _kernels.jit_enabled()
