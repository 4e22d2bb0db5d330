"""Descriptor realizations ``r(X) = (b^* (x) I) L_A(X)^{-1} (c (x) I)``.

Realizations are built compositionally from an expression tree: constants
and variables have fixed small realizations, sums are direct sums, products
are series connections and inverses use a bordered pencil.  No minimization is
attempted, so the state dimension can be larger than necessary.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (DegenerateExpression, DimensionMismatch, FreeballError, IdentityViolation,
                     NotPolynomial, OutOfPencilDomain)
from .freepoly import as_tuple
from .ncball import BallSpec, dual_norm_bounds, norm_over_ball, sample
from .pencil import pencil_eval
from .ratexpr import (Add, Const, Inv, MatExpr, Mul, Neg, Scale, Sub, Var, expr_is_polynomial,
                      num_vars)


@dataclass
class Descriptor:
    """Scalar realization: state dimension N, ``A`` of shape (d, N, N), ``b`` and ``c`` in C^N."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def d(self):
        return self.A.shape[0]

    def to_json(self):
        from .jsonio import encode_cmatrix
        return {"dim": self.dim, "A": [encode_cmatrix(a) for a in self.A],
                "b": encode_cmatrix(self.b[:, None]), "c": encode_cmatrix(self.c[:, None])}


@dataclass
class BlockDescriptor:
    """Matrix realization: ``B`` and ``C`` are N x k; block (i, j) of the value is entry (i, j)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    block_dims: list = field(default_factory=list)

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def k(self):
        return self.B.shape[1]

    def to_json(self):
        from .jsonio import encode_cmatrix
        return {"dim": self.dim, "k": self.k, "block_dims": self.block_dims,
                "A": [encode_cmatrix(a) for a in self.A],
                "B": encode_cmatrix(self.B), "C": encode_cmatrix(self.C)}


def _const(v, d):
    return Descriptor(np.zeros((d, 1, 1), dtype=np.complex128), np.ones(1, dtype=np.complex128),
                      np.array([v], dtype=np.complex128))


def _var(j, d):
    a = np.zeros((d, 2, 2), dtype=np.complex128)
    a[j, 0, 1] = 1.0
    return Descriptor(a, np.array([1, 0], dtype=np.complex128), np.array([0, 1], dtype=np.complex128))


def _sum(r1, r2):
    d = r1.d
    n1, n2 = r1.dim, r2.dim
    a = np.zeros((d, n1 + n2, n1 + n2), dtype=np.complex128)
    a[:, :n1, :n1] = r1.A
    a[:, n1:, n1:] = r2.A
    return Descriptor(a, np.concatenate([r1.b, r2.b]), np.concatenate([r1.c, r2.c]))


def _product(r1, r2):
    # series connection, renormalized so the pencil is monic again
    d = r1.d
    n1, n2 = r1.dim, r2.dim
    cb = np.outer(r1.c, r2.b.conj())
    a = np.zeros((d, n1 + n2, n1 + n2), dtype=np.complex128)
    a[:, :n1, :n1] = r1.A
    a[:, n1:, n1:] = r2.A
    a[:, :n1, n1:] = cb @ r2.A
    b = np.concatenate([r1.b, np.zeros(n2)])
    c = np.concatenate([cb @ r2.c, r2.c])
    return Descriptor(a, b, c)


def _scaled(r, s):
    return Descriptor(r.A, r.b, s * r.c)


def _inverse(r):
    value0 = np.vdot(r.b, r.c)
    if abs(value0) < 1e-12 * max(1.0, np.linalg.norm(r.b) * np.linalg.norm(r.c)):
        raise DegenerateExpression("inverse of a function that vanishes at 0 has no monic realization")
    n = r.dim
    m0 = np.zeros((n + 1, n + 1), dtype=np.complex128)
    m0[:n, :n] = np.eye(n)
    m0[:n, n] = -r.c
    m0[n, :n] = r.b.conj()
    m0_inv = linalg.inverse(m0)
    a = np.zeros((r.d, n + 1, n + 1), dtype=np.complex128)
    a[:, :n, :n] = r.A
    e = np.zeros(n + 1, dtype=np.complex128)
    e[n] = 1.0
    return Descriptor(np.array([m0_inv @ aj for aj in a]), e, m0_inv @ e)


def _affine_inverse(e, d):
    # inv(a + sum m_j Z_j) = (1/a) (1 - sum (-m_j/a) Z_j)^{-1}: a one-dimensional realization
    try:
        p = expr_is_polynomial(e, d)
    except NotPolynomial:
        return None
    if p.degree() > 1:
        return None
    a0 = complex(p.constant_term()[0, 0])
    if a0 == 0:
        raise DegenerateExpression("inverse of a function that vanishes at 0 has no monic realization")
    a = np.array([[[-complex(p.coeff((j,))[0, 0]) / a0]] for j in range(d)], dtype=np.complex128)
    return Descriptor(a, np.ones(1, dtype=np.complex128), np.array([1 / a0], dtype=np.complex128))


def synth(e, d=None):
    """Realization of a scalar expression (Descriptor) or a matrix expression (BlockDescriptor)."""
    if d is None:
        d = max(num_vars(e), 1)
    if isinstance(e, MatExpr):
        return assemble([[synth(x, d) for x in row] for row in e.entries])
    return _synth(e, d)


def _synth(e, d):
    if isinstance(e, Const):
        return _const(e.value, d)
    if isinstance(e, Var):
        if e.index >= d:
            raise DimensionMismatch(f"variable Z{e.index + 1} exceeds d = {d}")
        return _var(e.index, d)
    if isinstance(e, Add):
        return _sum(_synth(e.left, d), _synth(e.right, d))
    if isinstance(e, Sub):
        return _sum(_synth(e.left, d), _scaled(_synth(e.right, d), -1.0))
    if isinstance(e, Mul):
        return _product(_synth(e.left, d), _synth(e.right, d))
    if isinstance(e, Neg):
        return _scaled(_synth(e.arg, d), -1.0)
    if isinstance(e, Scale):
        return _scaled(_synth(e.arg, d), e.factor)
    if isinstance(e, Inv):
        direct = _affine_inverse(e.arg, d)
        if direct is not None:
            return direct
        return _inverse(_synth(e.arg, d))
    raise TypeError(f"not an expression node: {e!r}")


def assemble(grid):
    """Block realization of a k x k grid of scalar realizations.

    The state space is the direct sum over entries in row-major order; column
    ``i`` of ``B`` carries ``b_ij`` for every ``j`` and column ``j`` of ``C``
    carries ``c_ij`` for every ``i``.
    """
    k = len(grid)
    if any(len(row) != k for row in grid):
        raise DimensionMismatch("realization grid must be square")
    cells = [grid[i][j] for i in range(k) for j in range(k)]
    d = cells[0].d
    if any(r.d != d for r in cells):
        raise DimensionMismatch("all entries must have the same number of variables")
    dims = [r.dim for r in cells]
    n = sum(dims)
    a = np.zeros((d, n, n), dtype=np.complex128)
    bb = np.zeros((n, k), dtype=np.complex128)
    cc = np.zeros((n, k), dtype=np.complex128)
    off = 0
    for idx, r in enumerate(cells):
        i, j = divmod(idx, k)
        sl = slice(off, off + r.dim)
        a[:, sl, sl] = r.A
        bb[sl, i] = r.b
        cc[sl, j] = r.c
        off += r.dim
    return BlockDescriptor(a, bb, cc, dims)


def _io(r):
    if isinstance(r, Descriptor):
        return r.b[:, None], r.c[:, None]
    return r.B, r.C


def eval_descriptor(r, x):
    """``(b^* (x) I) L_A(X)^{-1} (c (x) I)``; raises OutOfPencilDomain if L_A(X) is singular."""
    x = as_tuple(x, r.A.shape[0])
    n = x.shape[1]
    b, c = _io(r)
    lx = pencil_eval(r.A, x)
    rhs = np.kron(c, np.eye(n))
    s = linalg.singular_values(lx)
    if s[-1] <= 1e-12 * s[0]:
        raise OutOfPencilDomain(f"L_A(X) is singular (smallest sv {s[-1]:.3e})")
    return np.kron(b.conj().T, np.eye(n)) @ np.linalg.solve(lx, rhs)


# block identity check -------------------------------------------------------

@dataclass
class FactorizationReport:
    trials: int
    max_residual: float
    max_gamma_residual: float
    bound_violations: int = 0
    max_bound_ratio: float = None

    def to_json(self):
        return {"trials": self.trials, "max_residual": self.max_residual,
                "max_gamma_residual": self.max_gamma_residual,
                "bound_violations": self.bound_violations, "max_bound_ratio": self.max_bound_ratio}


def factor_blocks(r, x, target=None):
    """The matrices alpha, beta, middle, gamma and gamma^{-1} at the point ``x``.

    Block sizes are (k, N, k) in units of the level n.
    """
    x = as_tuple(x)
    n = x.shape[1]
    b, c = _io(r)
    k = b.shape[1]
    big_n = r.dim
    i_n = np.eye(n)
    lx = pencil_eval(r.A, x)
    cx = np.kron(c, i_n)
    bx = np.kron(b.conj().T, i_n)
    linv_c = np.linalg.solve(lx, cx)
    rx = (target(x) if target is not None else bx @ linv_c)
    kn, nn = k * n, big_n * n
    z = np.zeros
    ik, iN = np.eye(kn), np.eye(nn)
    alpha = np.block([[ik, z((kn, nn)), ik], [cx, lx, z((nn, kn))], [z((kn, kn)), bx, z((kn, kn))]])
    beta = np.block([[ik, z((kn, nn)), z((kn, kn))], [cx, lx, z((nn, kn))],
                     [z((kn, kn)), bx, ik]])
    mid = np.block([[ik, z((kn, nn)), z((kn, kn))], [z((nn, kn)), iN, z((nn, kn))],
                    [z((kn, kn)), z((kn, nn)), rx]])
    gamma = np.block([[ik, z((kn, nn)), ik], [z((nn, kn)), iN, -linv_c],
                      [z((kn, kn)), z((kn, nn)), ik]])
    gamma_inv = np.block([[ik, z((kn, nn)), -ik], [z((nn, kn)), iN, linv_c],
                          [z((kn, kn)), z((kn, nn)), ik]])
    return alpha, beta, mid, gamma, gamma_inv, lx


def factorization_check(r, spec=None, s=1.0, trials=100, seed=0, target=None, tol=1e-8,
                        similarity=None, levels=(1, 2, 3)):
    """Check ``alpha = beta . diag(I, I, r) . gamma`` at sampled points of ``s`` times the ball.

    ``target`` evaluates the function being realized (default: the realization
    itself).  With ``similarity = (kappa, dual_norm)`` the resolvent bound
    ``||L_A(X)^{-1}|| <= kappa / (1 - dual_norm ||Q(X)||)`` is also checked.
    Raises IdentityViolation when the relative residual exceeds ``tol``.
    """
    spec = spec or BallSpec.polydisk(r.A.shape[0])
    worst = worst_g = 0.0
    violations = 0
    ratio = None
    per = -(-trials // len(levels))
    done = 0
    for n in levels:
        for x in sample(spec, n, s, per, seed):
            try:
                alpha, beta, mid, gamma, gamma_inv, lx = factor_blocks(r, x, target)
            except (np.linalg.LinAlgError, FreeballError):
                continue
            scale = max(1.0, linalg.opnorm(alpha))
            worst = max(worst, linalg.opnorm(alpha - beta @ mid @ gamma) / scale)
            worst_g = max(worst_g, linalg.opnorm(gamma @ gamma_inv - np.eye(len(gamma))))
            if similarity is not None:
                kappa, beta_norm = similarity
                bound = kappa / (1 - beta_norm * spec.q_norm(x))
                val = linalg.opnorm(np.linalg.inv(lx))
                ratio = max(ratio or 0.0, val / bound)
                if val > bound * (1 + 1e-9):
                    violations += 1
            done += 1
    rep = FactorizationReport(done, float(worst), float(worst_g), violations, ratio)
    if worst > tol or worst_g > tol:
        raise IdentityViolation(f"block factorization residual {max(worst, worst_g):.3e} exceeds {tol:g}",
                                residual=float(max(worst, worst_g)))
    return rep


# inverse realizations of polynomials ---------------------------------------

@dataclass
class FMRealization:
    """``P(X)^{-1} = D (x) I + (C^* (x) I) L_A(X)^{-1} sum_j B_j (x) X_j``.

    ``A`` has shape (d, m, m), ``B`` shape (d, m, k), ``C`` shape (m, k), ``D`` (k, k).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def to_json(self):
        from .jsonio import encode_cmatrix
        return {"A": [encode_cmatrix(a) for a in self.A], "B": [encode_cmatrix(b) for b in self.B],
                "C": encode_cmatrix(self.C), "D": encode_cmatrix(self.D)}

    @classmethod
    def from_json(cls, obj):
        from .jsonio import decode_cmatrix
        a = np.array([decode_cmatrix(m) for m in obj["A"]])
        b = np.array([decode_cmatrix(m) for m in obj["B"]])
        c = decode_cmatrix(obj["C"])
        d = decode_cmatrix(obj.get("D", {"rows": c.shape[1], "cols": c.shape[1],
                                         "data": [[1.0 if i == j else 0.0, 0.0]
                                                  for i in range(c.shape[1]) for j in range(c.shape[1])]}))
        return cls(a, b, c, d)


def fm_from_linearization(lin):
    """Inverse realization read off ``diag(p, I) = F L_A G`` (first k coordinates)."""
    a = lin.A
    k = lin.p.k
    e = np.zeros((lin.size, k), dtype=np.complex128)
    e[:k, :k] = np.eye(k)
    return FMRealization(a, np.array([aj @ e for aj in a]), e, np.eye(k, dtype=np.complex128))


def fm_b_part(fm, x):
    x = as_tuple(x, fm.A.shape[0])
    return sum(np.kron(bj, xj) for bj, xj in zip(fm.B, x))


def eval_fm(fm, x):
    x = as_tuple(x, fm.A.shape[0])
    n = x.shape[1]
    lx = pencil_eval(fm.A, x)
    return np.kron(fm.D, np.eye(n)) + np.kron(fm.C.conj().T, np.eye(n)) @ np.linalg.solve(lx, fm_b_part(fm, x))


@dataclass
class FMCheckReport:
    trials: int
    max_residual: float
    skipped: int
    tol: float

    @property
    def ok(self):
        return self.trials > 0 and self.max_residual <= self.tol

    def to_json(self):
        return {"ok": self.ok, "trials": self.trials, "max_residual": self.max_residual,
                "skipped": self.skipped, "tol": self.tol}


def fm_check(p, fm, spec=None, trials=100, seed=0, tol=1e-8, levels=(1, 2, 3)):
    """Compare ``P(X)^{-1}`` with the inverse realization at sampled points of the ball."""
    spec = spec or BallSpec.polydisk(p.d)
    worst = 0.0
    skipped = done = 0
    per = -(-trials // len(levels))
    for n in levels:
        for x in sample(spec, n, 1.0, per, seed):
            try:
                want = linalg.inverse(p.eval(x))
                got = eval_fm(fm, x)
            except (FreeballError, np.linalg.LinAlgError):
                skipped += 1
                continue
            worst = max(worst, linalg.opnorm(got - want) / max(1.0, linalg.opnorm(want)))
            done += 1
    return FMCheckReport(done, float(worst), skipped, tol)


def border_norm(t):
    """``||[[I, -T], [0, I]]||`` as a function of ``t = ||T||``."""
    return 0.5 * (t + np.sqrt(t * t + 4.0))


@dataclass
class FMBound:
    r: float
    f1: float
    f2_sampled: float
    f2_bound: float
    f3: float
    b_dual_norm: float
    b_dual_exact: bool
    value: float

    def ngn_constant(self, weighted_part_sum):
        """``1 + f1 * f3(1) * sum_j j ||P_j||``, the bound left after the 1/(1-r) factor cancels."""
        return 1.0 + self.f1 * border_norm(self.b_dual_norm) * weighted_part_sum

    def to_json(self):
        return {"r": self.r, "f1": self.f1, "f2_sampled": self.f2_sampled, "f2_bound": self.f2_bound,
                "f3": self.f3, "b_dual_norm": self.b_dual_norm, "b_dual_exact": self.b_dual_exact,
                "value": self.value}


def fm_bound(fm, spec, r, levels=(1, 2, 3), samples=150, hill_steps=100, seed=0):
    """Factorwise bound for ``sup ||P(rX)^{-1}||`` over the ball.

    The three factors are ``||[[I, 0], [-C^*, I]]||``, ``sup ||diag(L_A(rX)^{-1}, I)||``
    and ``sup ||[[I, -B(rX)], [0, I]]||``.  The middle factor is reported both as a
    sampled lower estimate and as ``1/(1-r)``; the last one is computed from the
    dual norm of B, which is exact when the rank-one certificate meets a lower
    bound from sampling.
    """
    m, k = fm.C.shape
    lower = np.block([[np.eye(m), np.zeros((m, k))], [-fm.C.conj().T, np.eye(k)]])
    f1 = linalg.opnorm(lower)
    beta_lo, beta_hi = dual_norm_bounds(spec, fm.B, levels=levels, samples=samples,
                                        hill_steps=hill_steps, seed=seed)
    beta = beta_hi if np.isfinite(beta_hi) else beta_lo
    exact = bool(np.isfinite(beta_hi) and beta_hi - beta_lo <= 1e-12)
    f3 = float(border_norm(r * beta))

    def resolvent(x):
        return linalg.inverse(pencil_eval(fm.A, r * x))

    est = norm_over_ball(resolvent, spec, levels=levels, samples=samples, hill_steps=hill_steps, seed=seed)
    f2_sampled = max(1.0, est.lower_bound)
    f2_bound = 1.0 / (1.0 - r)
    return FMBound(r, f1, f2_sampled, f2_bound, f3, float(beta), exact, float(f1 * f2_bound * f3))


@dataclass
class SynthCheck:
    checked: int
    max_error: float
    descriptor_only: int
    expression_only: int
    tol: float

    @property
    def ok(self):
        return self.checked > 0 and self.max_error <= self.tol

    def to_json(self):
        return {"ok": self.ok, "checked": self.checked, "max_error": self.max_error,
                "descriptor_only": self.descriptor_only, "expression_only": self.expression_only,
                "tol": self.tol}


def synth_check(e, r=None, points=100, seed=0, levels=(1, 2, 3), scale=0.5, tol=1e-8, d=None, max_draws=10):
    """Compare a realization with direct evaluation at ``points`` random points where both are defined.

    At most ``max_draws * points`` candidates are drawn.

    Points where only one side is defined are counted separately: a
    descriptor may evaluate where the expression's own inverses fail.
    """
    from .ratexpr import eval_expr

    d = d or max(num_vars(e), 1)
    r = r if r is not None else synth(e, d)
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = desc_only = expr_only = 0
    t = 0
    while done < points and t < max_draws * points:
        n = levels[t % len(levels)]
        t += 1
        x = scale * rng.uniform(0.2, 1.0) * linalg.ginibre(n, rng, size=d)
        try:
            want = eval_expr(e, x)
        except FreeballError:
            want = None
        try:
            got = eval_descriptor(r, x)
        except FreeballError:
            got = None
        if want is None or got is None:
            desc_only += want is None and got is not None
            expr_only += got is None and want is not None
            continue
        worst = max(worst, linalg.opnorm(got - want) / max(1.0, linalg.opnorm(want)))
        done += 1
    return SynthCheck(done, float(worst), desc_only, expr_only, tol)
