"""Hot loops for batched evaluation.

Each kernel has a numba version and a plain numpy version with identical
semantics.  The numba path is used when numba imports and the environment
variable ``FREEBALL_DISABLE_JIT`` is unset or ``0``.
"""

import os

import numpy as np

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False


def jit_enabled():
    flag = os.environ.get("FREEBALL_DISABLE_JIT", "0").strip().lower()
    return HAS_NUMBA and flag in ("", "0", "false", "no")


# word products -------------------------------------------------------------
#
# Words are given as a prefix tree: word i equals word parent[i] followed by
# letter[i]; parent -1 denotes the empty word.  Parents always precede children.

def _np_word_products(x, parent, letter):
    s, _, n, _ = x.shape
    out = np.empty((s, len(parent), n, n), dtype=np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    for i in range(len(parent)):
        if parent[i] < 0:
            if letter[i] < 0:
                out[:, i] = eye
            else:
                out[:, i] = x[:, letter[i]]
        else:
            np.matmul(out[:, parent[i]], x[:, letter[i]], out=out[:, i])
    return out


def _np_kron_accumulate(coeffs, mono):
    # out[s, a*n+i, b*n+j] = sum_w coeffs[w, a, b] * mono[s, w, i, j]
    s, w, n, _ = mono.shape
    k = coeffs.shape[1]
    out = np.einsum("wab,swij->saibj", coeffs, mono, optimize=True)
    return out.reshape(s, k * n, k * n)


def _np_neumann_sum(t, terms):
    m = t.shape[0]
    out = np.eye(m, dtype=np.complex128)
    power = np.eye(m, dtype=np.complex128)
    for _ in range(terms):
        power = power @ t
        out += power
    return out


if HAS_NUMBA:
    @numba.njit(cache=True)
    def _nb_word_products(x, parent, letter):
        s, _, n, _ = x.shape
        nw = parent.shape[0]
        out = np.zeros((s, nw, n, n), dtype=np.complex128)
        for q in range(s):
            for i in range(nw):
                p = parent[i]
                c = letter[i]
                if p < 0:
                    if c < 0:
                        for a in range(n):
                            out[q, i, a, a] = 1.0
                    else:
                        for a in range(n):
                            for b in range(n):
                                out[q, i, a, b] = x[q, c, a, b]
                else:
                    for a in range(n):
                        for e in range(n):
                            v = out[q, p, a, e]
                            if v != 0:
                                for b in range(n):
                                    out[q, i, a, b] += v * x[q, c, e, b]
        return out

    @numba.njit(cache=True)
    def _nb_kron_accumulate(coeffs, mono):
        s, nw, n, _ = mono.shape
        k = coeffs.shape[1]
        out = np.zeros((s, k * n, k * n), dtype=np.complex128)
        for q in range(s):
            for w in range(nw):
                for a in range(k):
                    for b in range(k):
                        c = coeffs[w, a, b]
                        if c == 0:
                            continue
                        for i in range(n):
                            for j in range(n):
                                out[q, a * n + i, b * n + j] += c * mono[q, w, i, j]
        return out

    @numba.njit(cache=True)
    def _nb_neumann_sum(t, terms):
        m = t.shape[0]
        out = np.eye(m, dtype=np.complex128)
        power = np.eye(m, dtype=np.complex128)
        for _ in range(terms):
            power = power @ t
            out += power
        return out
else:  # pragma: no cover
    _nb_word_products = _np_word_products
    _nb_kron_accumulate = _np_kron_accumulate
    _nb_neumann_sum = _np_neumann_sum


def word_products(x, parent, letter):
    """Stack of word products ``X^w`` for every word in a prefix tree.

    ``x`` has shape (samples, d, n, n); the result has shape (samples, W, n, n).
    """
    x = np.ascontiguousarray(x, dtype=np.complex128)
    parent = np.asarray(parent, dtype=np.int64)
    letter = np.asarray(letter, dtype=np.int64)
    if jit_enabled():
        return _nb_word_products(x, parent, letter)
    return _np_word_products(x, parent, letter)


def kron_accumulate(coeffs, mono):
    """Batched ``sum_w kron(coeffs[w], mono[:, w])``."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    mono = np.ascontiguousarray(mono, dtype=np.complex128)
    if jit_enabled():
        return _nb_kron_accumulate(coeffs, mono)
    return _np_kron_accumulate(coeffs, mono)


def neumann_sum(t, terms):
    """``I + T + ... + T^terms``."""
    t = np.ascontiguousarray(t, dtype=np.complex128)
    if jit_enabled():
        return _nb_neumann_sum(t, int(terms))
    return _np_neumann_sum(t, int(terms))
