"""Dense complex linear algebra helpers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Everything here
is a thin, validated layer over LAPACK (through numpy) so that the rest of the
package can rely on a single notion of norm, inverse and conditioning.
"""

import numpy as np

from .errors import DimensionMismatch, InputError, SingularMatrix

DEFAULT_SINGULAR_RTOL = 1e-12


def as_cmatrix(a, name="matrix"):
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return m


def eye(n):
    return np.eye(n, dtype=np.complex128)


def kron(a, b):
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def opnorm(a):
    """Largest singular value (operator 2-norm)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def singular_values(a):
    return np.linalg.svd(np.asarray(a), compute_uv=False)


def min_singular_value(a):
    a = np.asarray(a)
    if a.size == 0:
        return np.inf
    return float(singular_values(a)[-1])


def cond2(a):
    """2-norm condition number; ``inf`` for a singular matrix."""
    s = singular_values(a)
    if s[-1] == 0:
        return np.inf
    return float(s[0] / s[-1])


def inverse(a, rtol=DEFAULT_SINGULAR_RTOL, return_cond=False):
    """Inverse of a square matrix.

    Raises :class:`SingularMatrix` when the smallest singular value is below
    ``rtol * opnorm(a)``.  With ``return_cond`` the 2-norm condition number is
    returned alongside the inverse.
    """
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"inverse needs a square matrix, got {a.shape}")
    s = singular_values(a)
    if s[-1] <= rtol * s[0] or s[0] == 0:
        raise SingularMatrix("matrix is numerically singular", smallest_sv=float(s[-1]),
                             cond=np.inf)
    inv = np.linalg.inv(a)
    if return_cond:
        return inv, float(s[0] / s[-1])
    return inv


def solve(a, b, rtol=DEFAULT_SINGULAR_RTOL):
    a = as_cmatrix(a)
    s_min = min_singular_value(a)
    if s_min <= rtol * opnorm(a):
        raise SingularMatrix("matrix is numerically singular", smallest_sv=s_min)
    return np.linalg.solve(a, np.asarray(b, dtype=np.complex128))


def spec_radius(a):
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def hermitian_part(a):
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def min_real_eig_hermitian_part(a):
    """Smallest eigenvalue of (A + A*)/2."""
    return float(np.linalg.eigvalsh(hermitian_part(a))[0])


def direct_sum(*mats):
    mats = [np.atleast_2d(np.asarray(m, dtype=np.complex128)) for m in mats]
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols), dtype=np.complex128)
    i = j = 0
    for m in mats:
        out[i:i + m.shape[0], j:j + m.shape[1]] = m
        i += m.shape[0]
        j += m.shape[1]
    return out


def matmul(*mats):
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return out


def make_rng(seed):
    """A numpy Generator from a 64-bit seed (or an existing generator)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))


def ginibre(n, rng, size=None):
    """Complex Ginibre matrix (entries of variance 1/n).

    With ``size`` a leading batch shape is prepended.
    """
    shape = (n, n) if size is None else tuple(np.atleast_1d(size)) + (n, n)
    scale = np.sqrt(0.5 / n)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def batch_opnorm(m):
    """Operator norms of a stack of matrices, shape (..., a, b) -> (...)."""
    return np.linalg.svd(m, compute_uv=False)[..., 0]


def batch_min_sv(m):
    return np.linalg.svd(m, compute_uv=False)[..., -1]
