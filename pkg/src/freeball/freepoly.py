"""Matrix-coefficient polynomials in freely noncommuting variables.

A word is a tuple of 0-based letters; letter ``j`` stands for the variable
``Z_{j+1}``.  A :class:`MatPoly` stores a dict from words to ``k x k``
coefficients and evaluates at a tuple ``X = (X_1, ..., X_d)`` of ``n x n``
matrices as ``sum_w kron(A_w, X^w)``, a ``kn x kn`` matrix.

Coefficients are either complex128 arrays (the default) or object arrays of
exact sympy numbers (``exact=True``), which the linearization code uses to
verify identities without rounding.
"""

from fractions import Fraction

import numpy as np
import sympy as sp

from . import _kernels
from .errors import DimensionMismatch, InputError


# exact scalars --------------------------------------------------------------

def _exact_real(x):
    f = Fraction(x).limit_denominator(10**6)
    if float(f) != x:
        f = Fraction(x)
    return sp.Rational(f.numerator, f.denominator)


def exact_scalar(z):
    """Exact sympy value for ``z``.

    Floats are first matched against nearby small-denominator rationals so that
    ``0.6666666666666666`` becomes ``2/3``; otherwise the binary value is kept.
    """
    if isinstance(z, sp.Basic):
        return z
    z = complex(z)
    re = _exact_real(z.real)
    im = _exact_real(z.imag)
    return re + sp.I * im if im != 0 else re


def exact_array(a):
    if not (isinstance(a, np.ndarray) and a.dtype == object):
        a = np.asarray(a, dtype=np.complex128)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = exact_scalar(v)
    return out


def numeric_array(a):
    if isinstance(a, np.ndarray) and a.dtype == object:
        out = np.empty(a.shape, dtype=np.complex128)
        for idx, v in np.ndenumerate(a):
            out[idx] = complex(sp.N(v, 30))
        return out
    return np.asarray(a, dtype=np.complex128)


def _is_zero(c):
    if c.dtype == object:
        return all(sp.expand(v) == 0 for v in c.flat)
    return not np.any(c)


def _simplify(c):
    if c.dtype == object:
        out = np.empty(c.shape, dtype=object)
        for idx, v in np.ndenumerate(c):
            out[idx] = sp.expand(v)
        return out
    return c


def words_of_degree(d, deg):
    if deg == 0:
        return [()]
    return [w + (j,) for w in words_of_degree(d, deg - 1) for j in range(d)]


def deglex_key(word):
    return (len(word), word)


class MatPoly:
    """Polynomial in ``d`` free variables with ``k x k`` matrix coefficients."""

    def __init__(self, d, k, coeffs=None, exact=False):
        if d < 1 or k < 1:
            raise InputError("need d >= 1 and k >= 1")
        self.d = int(d)
        self.k = int(k)
        self.exact = bool(exact)
        self.coeffs = {}
        self._tree = None
        for w, c in (coeffs or {}).items():
            w = tuple(int(a) for a in w)
            if any(a < 0 or a >= d for a in w):
                raise InputError(f"letter out of range in word {w} for d={d}")
            c = exact_array(c) if exact else np.asarray(c, dtype=np.complex128)
            if c.ndim == 0:
                c = c.reshape(1, 1)
            if c.shape != (k, k):
                raise DimensionMismatch(f"coefficient of {w} has shape {c.shape}, expected {(k, k)}")
            if w in self.coeffs:
                c = self.coeffs[w] + c
            self.coeffs[w] = c
        self._prune()

    # construction ---------------------------------------------------------

    @classmethod
    def const(cls, c, d, k=None, exact=False):
        c = np.asarray(c, dtype=object if exact else np.complex128)
        if c.ndim == 0:
            kk = k or 1
            c = c * (np.eye(kk, dtype=np.complex128) if not exact else _obj_eye(kk))
        return cls(d, c.shape[0], {(): c}, exact=exact)

    @classmethod
    def identity(cls, d, k, exact=False):
        return cls(d, k, {(): _obj_eye(k) if exact else np.eye(k)}, exact=exact)

    @classmethod
    def zero(cls, d, k, exact=False):
        return cls(d, k, {}, exact=exact)

    @classmethod
    def var(cls, j, d, k=1, exact=False):
        """The variable ``Z_{j+1}`` times the k x k identity."""
        return cls(d, k, {(j,): _obj_eye(k) if exact else np.eye(k)}, exact=exact)

    def _prune(self):
        for w in [w for w, c in self.coeffs.items() if _is_zero(c)]:
            del self.coeffs[w]
        if self.exact:
            self.coeffs = {w: _simplify(c) for w, c in self.coeffs.items()}

    def copy(self):
        return MatPoly(self.d, self.k, {w: c.copy() for w, c in self.coeffs.items()}, exact=self.exact)

    def to_exact(self):
        if self.exact:
            return self
        return MatPoly(self.d, self.k, {w: exact_array(c) for w, c in self.coeffs.items()}, exact=True)

    def to_numeric(self):
        if not self.exact:
            return self
        return MatPoly(self.d, self.k, {w: numeric_array(c) for w, c in self.coeffs.items()})

    # inspection -----------------------------------------------------------

    @property
    def words(self):
        return sorted(self.coeffs, key=deglex_key)

    def coeff(self, word):
        word = tuple(word)
        if word in self.coeffs:
            return self.coeffs[word]
        return _obj_zeros(self.k) if self.exact else np.zeros((self.k, self.k), dtype=np.complex128)

    def degree(self):
        """Largest word length; the zero polynomial has degree 0."""
        return max((len(w) for w in self.coeffs), default=0)

    def constant_term(self):
        return self.coeff(())

    def is_zero(self):
        return not self.coeffs

    def homogeneous_parts(self):
        parts = [MatPoly(self.d, self.k, exact=self.exact) for _ in range(self.degree() + 1)]
        for w, c in self.coeffs.items():
            parts[len(w)].coeffs[w] = c
        return parts

    def entry(self, i, j):
        return MatPoly(self.d, 1, {w: c[i:i + 1, j:j + 1] for w, c in self.coeffs.items()},
                       exact=self.exact)

    def submatrix(self, rows, cols):
        rows = list(rows)
        cols = list(cols)
        if len(rows) != len(cols):
            raise DimensionMismatch("submatrix must be square")
        return MatPoly(self.d, len(rows), {w: c[np.ix_(rows, cols)] for w, c in self.coeffs.items()},
                       exact=self.exact)

    def permute(self, perm):
        """Simultaneous row/column permutation: new index i is old index perm[i]."""
        return self.submatrix(perm, perm)

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, MatPoly):
            if other.d != self.d or other.k != self.k:
                raise DimensionMismatch(f"incompatible polynomials ({self.d},{self.k}) vs ({other.d},{other.k})")
            if other.exact != self.exact:
                return other.to_exact() if self.exact else other.to_numeric()
            return other
        return MatPoly.const(other, self.d, self.k, exact=self.exact) if np.ndim(other) == 0 else \
            MatPoly.const(other, self.d, exact=self.exact)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out[w] + c if w in out else c
        return MatPoly(self.d, self.k, out, exact=self.exact or other.exact)

    __radd__ = __add__

    def __neg__(self):
        return MatPoly(self.d, self.k, {w: -c for w, c in self.coeffs.items()}, exact=self.exact)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scalar_mul(self, s):
        if self.exact:
            s = exact_scalar(s)
        return MatPoly(self.d, self.k, {w: c * s for w, c in self.coeffs.items()}, exact=self.exact)

    def __mul__(self, other):
        if not isinstance(other, MatPoly) and np.ndim(other) == 0:
            return self.scalar_mul(other)
        other = self._coerce(other)
        out = {}
        for u, a in self.coeffs.items():
            for v, b in other.coeffs.items():
                w = u + v
                prod = a @ b
                out[w] = out[w] + prod if w in out else prod
        return MatPoly(self.d, self.k, out, exact=self.exact or other.exact)

    def __rmul__(self, other):
        if np.ndim(other) == 0:
            return self.scalar_mul(other)
        return self._coerce(other) * self

    def __pow__(self, e):
        out = MatPoly.identity(self.d, self.k, exact=self.exact)
        for _ in range(int(e)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MatPoly):
            return NotImplemented
        if (self.d, self.k) != (other.d, other.k):
            return False
        return (self - other).is_zero()

    def __hash__(self):
        return id(self)

    def dilate(self, r):
        """``p_r(Z) = p(rZ)``."""
        out = {}
        for w, c in self.coeffs.items():
            f = exact_scalar(r) ** len(w) if self.exact else r ** len(w)
            out[w] = c * f
        return MatPoly(self.d, self.k, out, exact=self.exact)

    def adjoint(self):
        """Formal adjoint: ``adjoint(p)(X*) = p(X)*``."""
        out = {}
        for w, c in self.coeffs.items():
            cc = np.vectorize(sp.conjugate, otypes=[object])(c).T if self.exact else c.conj().T
            out[w[::-1]] = cc
        return MatPoly(self.d, self.k, out, exact=self.exact)

    def max_abs_coeff_diff(self, other):
        diff = (self.to_numeric() - other.to_numeric())
        return max((float(np.max(np.abs(c))) for c in diff.coeffs.values()), default=0.0)

    # evaluation -----------------------------------------------------------

    def _prefix_tree(self):
        if self._tree is None:
            index = {(): 0}
            parent = [-1]
            letter = [-1]
            for w in sorted(self.coeffs, key=deglex_key):
                for ell in range(1, len(w) + 1):
                    pre = w[:ell]
                    if pre not in index:
                        index[pre] = len(parent)
                        parent.append(index[pre[:-1]] if ell > 1 else -1)
                        letter.append(pre[-1])
            words = list(self.coeffs)
            num = self.to_numeric()
            coeffs = np.array([num.coeffs[w] for w in words]).reshape(len(words), self.k, self.k)
            sel = np.array([index[w] for w in words], dtype=np.int64)
            self._tree = (np.array(parent), np.array(letter), sel, coeffs)
        return self._tree

    def eval_batch(self, xs):
        """Evaluate at a stack of tuples, ``xs`` of shape (S, d, n, n)."""
        xs = np.asarray(xs, dtype=np.complex128)
        if xs.ndim != 4 or xs.shape[1] != self.d or xs.shape[2] != xs.shape[3]:
            raise DimensionMismatch(f"expected tuples of shape (S, {self.d}, n, n), got {xs.shape}")
        s, _, n, _ = xs.shape
        if not self.coeffs:
            return np.zeros((s, self.k * n, self.k * n), dtype=np.complex128)
        parent, letter, sel, coeffs = self._prefix_tree()
        mono = _kernels.word_products(xs, parent, letter)[:, sel]
        return _kernels.kron_accumulate(coeffs, mono)

    def eval(self, x):
        x = as_tuple(x, self.d)
        return self.eval_batch(x[None])[0]

    __call__ = eval

    def eval_exact(self, x):
        """Evaluate with exact arithmetic at a tuple of exact (or exactly representable) matrices."""
        q = self.to_exact()
        xs = [exact_array(np.atleast_2d(np.asarray(m, dtype=object))) for m in x]
        if len(xs) != self.d:
            raise DimensionMismatch(f"tuple has {len(xs)} matrices, expected {self.d}")
        n = xs[0].shape[0]
        out = _obj_zeros(self.k * n)
        for w, c in q.coeffs.items():
            mono = _obj_eye(n)
            for a in w:
                mono = mono @ xs[a]
            for i in range(self.k):
                for j in range(self.k):
                    if c[i, j] != 0:
                        out[i * n:(i + 1) * n, j * n:(j + 1) * n] += c[i, j] * mono
        return _simplify(out)

    def __repr__(self):
        terms = []
        for w in self.words:
            name = "".join(f"Z{a + 1}" for a in w) or "1"
            terms.append(f"{name}:{self.coeffs[w].tolist()}")
        return f"MatPoly(d={self.d}, k={self.k}, {', '.join(terms) or '0'})"


def _obj_eye(k):
    out = np.empty((k, k), dtype=object)
    out[:] = sp.Integer(0)
    for i in range(k):
        out[i, i] = sp.Integer(1)
    return out


def _obj_zeros(k, m=None):
    out = np.empty((k, k if m is None else m), dtype=object)
    out[:] = sp.Integer(0)
    return out


def as_tuple(x, d=None):
    """Validate a matrix tuple: array-like of shape (d, n, n)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim == 2 and d == 1:
        x = x[None]
    if x.ndim == 1 and (d is None or len(x) == d):
        x = x.reshape(-1, 1, 1)
    if x.ndim != 3 or x.shape[1] != x.shape[2]:
        raise DimensionMismatch(f"matrix tuple must have shape (d, n, n), got {x.shape}")
    if d is not None and x.shape[0] != d:
        raise DimensionMismatch(f"tuple has {x.shape[0]} matrices, expected {d}")
    if not np.all(np.isfinite(x)):
        raise InputError("matrix tuple has non-finite entries")
    return x


def scalar_point(values, n=1):
    """The tuple ``(v_1 I_n, ..., v_d I_n)``."""
    return np.array([v * np.eye(n) for v in values], dtype=np.complex128)


def tuple_direct_sum(x, y):
    x = as_tuple(x)
    y = as_tuple(y)
    from .linalg import direct_sum
    return np.array([direct_sum(a, b) for a, b in zip(x, y)])


def direct_sum_permutation(k, n1, n2):
    """Index list ``perm`` with ``p(x+y)[perm][:, perm] == p(x) (+) p(y)``."""
    n = n1 + n2
    perm = [a * n + i for a in range(k) for i in range(n1)]
    perm += [a * n + n1 + i for a in range(k) for i in range(n2)]
    return perm


def block_poly(grid):
    """Assemble a square block matrix of polynomials (like ``np.block``)."""
    d = grid[0][0].d
    exact = any(p.exact for row in grid for p in row)
    sizes = [row[0].k for row in grid]
    for i, row in enumerate(grid):
        if len(row) != len(grid):
            raise DimensionMismatch("block grid must be square")
        for j, p in enumerate(row):
            if p.k != sizes[i] or p.k != sizes[j]:
                raise DimensionMismatch("blocks must be square and aligned")
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    k = int(offsets[-1])
    words = set()
    for row in grid:
        for p in row:
            words.update(p.coeffs)
    out = {}
    for w in words:
        c = _obj_zeros(k) if exact else np.zeros((k, k), dtype=np.complex128)
        for i, row in enumerate(grid):
            for j, p in enumerate(row):
                if w in p.coeffs:
                    blk = p.to_exact().coeffs[w] if exact else p.coeffs[w]
                    c[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = blk
        out[w] = c
    return MatPoly(d, k, out, exact=exact)


def poly_direct_sum(*ps):
    """Block diagonal sum of polynomials (possibly of different sizes)."""
    d = ps[0].d
    exact = any(p.exact for p in ps)
    k = sum(p.k for p in ps)
    out = {}
    off = 0
    for p in ps:
        q = p.to_exact() if exact else p
        for w, c in q.coeffs.items():
            if w not in out:
                out[w] = _obj_zeros(k) if exact else np.zeros((k, k), dtype=np.complex128)
            out[w][off:off + p.k, off:off + p.k] = c
        off += p.k
    return MatPoly(d, k, out, exact=exact)


def from_scalar_grid(grid):
    """Matrix polynomial whose (i, j) entry is the 1 x 1 polynomial grid[i][j]."""
    k = len(grid)
    d = grid[0][0].d
    exact = any(p.exact for row in grid for p in row)
    out = {}
    for i, row in enumerate(grid):
        for j, p in enumerate(row):
            q = p.to_exact() if exact else p
            for w, c in q.coeffs.items():
                if w not in out:
                    out[w] = _obj_zeros(k) if exact else np.zeros((k, k), dtype=np.complex128)
                out[w][i, j] = c[0, 0]
    return MatPoly(d, k, out, exact=exact)

