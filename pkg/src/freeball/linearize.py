"""Linearization of matrix polynomials by repeated Higman bordering.

Each step removes one top-degree term ``c Z^w`` from an entry ``(i, j)`` and
borders the matrix with one row and column::

    [[I, Y1], [0, 1]] . [[Y0, -Y1], [-Y2, 1]] . [[I, 0], [Y2, 1]] = diag(M, 1)

where ``Y0 = M - c E_ij Z^w``, ``Y1 = a e_i Z^{w'}`` and ``Y2 = b e_j^T Z^{w''}``
with ``w = w'w''``, ``|w'| = ceil(|w|/2)``, ``b = sqrt|c|`` and ``a = -c/b``.
Repeating until every entry is affine gives ``diag(P, I_l) = F L_A G`` with ``F``
upper and ``G`` lower uni-triangular.  All arithmetic is exact (sympy), so the
identity is checked coefficient by coefficient without rounding.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import sympy as sp

from . import linalg
from .errors import AlreadyLinear, NotMonicAtZero
from .freepoly import (MatPoly, _obj_eye, _obj_zeros, deglex_key, numeric_array, poly_direct_sum)
from .pencil import irreducible


@dataclass
class HigmanStep:
    result: MatPoly
    left: MatPoly
    right: MatPoly
    entry: tuple
    word: tuple
    coeff: object


@dataclass
class Linearization:
    p: MatPoly
    pad: int
    F: MatPoly
    G: MatPoly
    F_inv: MatPoly
    G_inv: MatPoly
    A_exact: np.ndarray
    perm: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    @property
    def A(self):
        return np.array([numeric_array(a) for a in self.A_exact])

    @property
    def size(self):
        return self.p.k + self.pad

    @property
    def d(self):
        return self.p.d

    def pencil(self):
        """``L_A`` as an exact matrix polynomial."""
        return pencil_from_exact(self.A_exact)

    def to_json(self):
        from .jsonio import encode_cmatrix, encode_poly
        return {"size": self.size, "pad": self.pad, "perm": self.perm,
                "A": [encode_cmatrix(a) for a in self.A],
                "A_exact": [[[str(v) for v in row] for row in a] for a in self.A_exact],
                "F": encode_poly(self.F), "G": encode_poly(self.G),
                "steps": [{"entry": list(s[0]), "word": [a + 1 for a in s[1]], "coeff": str(s[2])}
                          for s in self.steps]}


def pencil_from_exact(a_exact):
    d, m, _ = a_exact.shape
    coeffs = {(): _obj_eye(m)}
    for j in range(d):
        coeffs[(j,)] = -a_exact[j]
    return MatPoly(d, m, coeffs, exact=True)


def _monomial_matrix(d, size, i, j, word, c):
    out = _obj_zeros(size)
    out[i, j] = c
    return MatPoly(d, size, {tuple(word): out}, exact=True)


def select_term(m):
    """Top-degree term chosen for the next step: (entry, word, coefficient).

    Among words of maximal length the largest in degree-lexicographic order is
    taken, then the first entry in row-major order.
    """
    deg = m.degree()
    if deg < 2:
        raise AlreadyLinear("every entry already has degree <= 1")
    word = max((w for w in m.coeffs if len(w) == deg), key=deglex_key)
    c = m.coeffs[word]
    for i in range(m.k):
        for j in range(m.k):
            if c[i, j] != 0:
                return (i, j), word, c[i, j]
    raise AssertionError("pruned coefficient is zero")


def higman_step(m):
    """One bordering step on a square exact matrix polynomial of degree >= 2."""
    m = m.to_exact()
    (i, j), word, c = select_term(m)
    k, d = m.k, m.d
    cut = math.ceil(len(word) / 2)
    w1, w2 = word[:cut], word[cut:]
    b = sp.sqrt(sp.Abs(c))
    a = sp.expand(-c / b)
    size = k + 1
    grow = poly_direct_sum(m, MatPoly.identity(d, 1, exact=True))
    y0 = grow - _monomial_matrix(d, size, i, j, word, c)
    y1 = _monomial_matrix(d, size, i, k, w1, a)       # column k, row i
    y2 = _monomial_matrix(d, size, k, j, w2, b)       # row k, column j
    result = y0 - y1 - y2
    ident = MatPoly.identity(d, size, exact=True)
    return HigmanStep(result, ident + y1, ident + y2, (i, j), word, c)


def _unipotent_inverse(f):
    # F = I + J with J nilpotent: F^{-1} = sum_i (-J)^i
    ident = MatPoly.identity(f.d, f.k, exact=True)
    j = f - ident
    out = ident
    term = ident
    for _ in range(f.k):
        term = term * (-j)
        if term.is_zero():
            break
        out = out + term
    return out


def _pencil_coeffs(lpoly):
    d, m = lpoly.d, lpoly.k
    a = np.empty((d, m, m), dtype=object)
    for j in range(d):
        a[j] = -lpoly.coeff((j,))
    return a


def normalize_at_zero(p):
    """``p(Z) p(0)^{-1}`` (exact), so the result is the identity at 0."""
    p = p.to_exact()
    c0 = sp.Matrix(p.constant_term())
    if c0.det() == 0:
        raise NotMonicAtZero("p(0) is singular")
    inv = np.array(c0.inv().tolist(), dtype=object)
    return p * MatPoly.const(inv, p.d, exact=True)


def linearize(p, trim_result=True):
    """Linearize a square matrix polynomial with ``p(0) = I``.

    Returns a :class:`Linearization` with ``diag(p, I_pad) = F L_A G``.
    """
    p = p.to_exact()
    ident = _obj_eye(p.k)
    c0 = p.constant_term()
    if any(sp.expand(v) != 0 for v in (c0 - ident).flat):
        raise NotMonicAtZero("p(0) must equal the identity; use normalize_at_zero first")
    d = p.d
    f = MatPoly.identity(d, p.k, exact=True)
    g = MatPoly.identity(d, p.k, exact=True)
    cur = p
    steps = []
    while cur.degree() >= 2:
        st = higman_step(cur)
        one = MatPoly.identity(d, 1, exact=True)
        f = poly_direct_sum(f, one) * st.left
        g = st.right * poly_direct_sum(g, one)
        cur = st.result
        steps.append((st.entry, st.word, st.coeff))
    lin = Linearization(p, cur.k - p.k, f, g, _unipotent_inverse(f), _unipotent_inverse(g),
                        _pencil_coeffs(cur), list(range(cur.k)), steps)
    return trim(lin) if trim_result else lin


def identity_residual(lin):
    """Exact difference ``F L_A G - diag(p, I)`` as a matrix polynomial."""
    lhs = poly_direct_sum(lin.p.to_exact(), MatPoly.identity(lin.d, lin.pad, exact=True)) \
        if lin.pad else lin.p.to_exact()
    return lin.F * lin.pencil() * lin.G - lhs


def trim(lin):
    """Drop padding coordinates that the pencil leaves as a decoupled identity block.

    A coordinate ``t`` is removed when row and column ``t`` of every ``A_j``
    vanish and deleting it from ``F`` and ``G`` keeps the identity exact.
    """
    changed = True
    while changed:
        changed = False
        for t in range(lin.size - 1, lin.p.k - 1, -1):
            a = lin.A_exact
            if any(v != 0 for v in a[:, t, :].flat) or any(v != 0 for v in a[:, :, t].flat):
                continue
            keep = [s for s in range(lin.size) if s != t]
            cand = Linearization(lin.p, lin.pad - 1, lin.F.submatrix(keep, keep), lin.G.submatrix(keep, keep),
                                 None, None, a[:, keep][:, :, keep], [lin.perm[s] for s in keep], lin.steps)
            if identity_residual(cand).is_zero():
                cand.F_inv = _unipotent_inverse(cand.F)
                cand.G_inv = _unipotent_inverse(cand.G)
                lin = cand
                changed = True
                break
    return lin


@dataclass
class VerifyReport:
    symbolic: bool
    inverse_symbolic: bool
    numeric_max_residual: float
    trials: int
    tol: float

    @property
    def ok(self):
        return self.symbolic and self.inverse_symbolic and self.numeric_max_residual <= self.tol

    def to_json(self):
        return {"ok": self.ok, "symbolic": self.symbolic, "inverse_symbolic": self.inverse_symbolic,
                "numeric_max_residual": self.numeric_max_residual, "trials": self.trials, "tol": self.tol}


def verify(lin, spec=None, trials=100, seed=0, tol=1e-10, levels=(1, 2, 3)):
    """Check ``diag(p, I) = F L_A G`` exactly and at sampled points of the ball."""
    from .ncball import BallSpec, sample

    symbolic = identity_residual(lin).is_zero()
    ident = MatPoly.identity(lin.d, lin.size, exact=True)
    inv_ok = (lin.F * lin.F_inv - ident).is_zero() and (lin.G * lin.G_inv - ident).is_zero()
    spec = spec or BallSpec.polydisk(lin.d)
    lhs = poly_direct_sum(lin.p, MatPoly.identity(lin.d, lin.pad)) if lin.pad else lin.p
    lhs = lhs.to_numeric()
    f, g, pen = lin.F.to_numeric(), lin.G.to_numeric(), lin.pencil().to_numeric()
    worst = 0.0
    per = -(-trials // len(levels))
    done = 0
    for n in levels:
        xs = sample(spec, n, 1.0, per, seed)
        want = lhs.eval_batch(xs)
        got = f.eval_batch(xs) @ pen.eval_batch(xs) @ g.eval_batch(xs)
        scale = np.maximum(1.0, linalg.batch_opnorm(want))
        worst = max(worst, float(np.max(linalg.batch_opnorm(got - want) / scale)))
        done += len(xs)
    return VerifyReport(symbolic, inv_ok, worst, done, tol)


@dataclass
class AtomCertificate:
    verdict: str  # "atom" or "inconclusive"
    algebra_dim: int
    size: int
    linearization: Linearization
    reason: str = ""
    invariant_subspace: np.ndarray = None

    def to_json(self):
        from .jsonio import encode_cmatrix
        out = {"verdict": self.verdict, "algebra_dim": self.algebra_dim, "size": self.size,
               "reason": self.reason, "linearization": self.linearization.to_json()}
        if self.invariant_subspace is not None:
            out["invariant_subspace"] = encode_cmatrix(self.invariant_subspace)
        return out


def atom_certificate(p):
    """Sufficient test for an atom: the linearizing pencil is irreducible."""
    p = p.to_exact()
    c0 = p.constant_term()
    if any(sp.expand(v) != 0 for v in (c0 - _obj_eye(p.k)).flat):
        p = normalize_at_zero(p)
    lin = linearize(p)
    irr = irreducible(lin.A)
    if irr.irreducible:
        return AtomCertificate("atom", irr.algebra_dim, lin.size, lin)
    return AtomCertificate("inconclusive", irr.algebra_dim, lin.size, lin,
                           reason=f"pencil algebra has dimension {irr.algebra_dim} < {lin.size ** 2}",
                           invariant_subspace=irr.invariant_subspace)
