"""Monic linear pencils ``L_A(X) = I - sum_j kron(A_j, X_j)``.

Includes Neumann-series inversion, the row-ball joint spectral radius,
a sampled search for the invertibility radius, a Burnside irreducibility test
and a search for a similarity that moves a pencil into the polar dual ball.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from . import _kernels, linalg
from .errors import DimensionMismatch, NotContractive, SimilarityNotFound
from .freepoly import MatPoly, as_tuple
from .ncball import (CERTIFIED_INSIDE, SAMPLED_INSIDE, BallSpec, DualMembership, _stream,
                     dual_membership, sample)


def as_pencil(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionMismatch(f"pencil coefficients must have shape (d, m, m), got {a.shape}")
    return a


def pencil_poly(a):
    """``L_A`` as a degree-one matrix polynomial."""
    a = as_pencil(a)
    d, m, _ = a.shape
    coeffs = {(): np.eye(m)}
    for j in range(d):
        coeffs[(j,)] = -a[j]
    return MatPoly(d, m, coeffs)


def linear_part(a, x):
    a = as_pencil(a)
    x = as_tuple(x, a.shape[0])
    return _kernels.kron_accumulate(a, x[None])[0]


def linear_part_batch(a, xs):
    return _kernels.kron_accumulate(as_pencil(a), xs)


def pencil_eval(a, x):
    t = linear_part(a, x)
    return np.eye(t.shape[0]) - t


def pencil_inv(a, x):
    return linalg.inverse(pencil_eval(a, x))


@dataclass
class NeumannResult:
    value: np.ndarray
    truncation_bound: float
    terms: int
    q: float


def neumann_inv(a, x, max_terms=100000, tol=1e-12):
    """``L_A(X)^{-1}`` as ``sum_{i<=N} T^i`` with ``T = sum_j kron(A_j, X_j)``.

    ``N`` is the smallest count with ``q^(N+1)/(1-q) <= tol`` (``q = ||T||``),
    capped at ``max_terms``; the returned bound is that tail estimate.
    """
    t = linear_part(a, x)
    q = linalg.opnorm(t)
    if q >= 1:
        raise NotContractive(f"||sum A_j (x) X_j|| = {q:.6g} >= 1")
    if q == 0:
        terms = 0
    else:
        terms = int(np.ceil(np.log(tol * (1 - q)) / np.log(q))) - 1
        terms = min(max(terms, 0), max_terms)
    value = _kernels.neumann_sum(t, terms)
    bound = q ** (terms + 1) / (1 - q)
    return NeumannResult(value, float(bound), terms, q)


# joint spectral radius ------------------------------------------------------

@dataclass
class JSRResult:
    value: float
    truncated: float
    truncation_level: int

    @property
    def rel_gap(self):
        return abs(self.value - self.truncated) / max(self.value, 1e-300)

    def to_json(self):
        return {"value": self.value, "truncated": self.truncated,
                "truncation_level": self.truncation_level, "rel_gap": self.rel_gap}


def cp_map_matrix(t):
    """Matrix of ``S -> sum_j T_j S T_j^*`` acting on column-stacked ``vec(S)``."""
    t = as_pencil(t)
    return sum(np.kron(tj.conj(), tj) for tj in t)


def jsr_truncated(t, n):
    """``||sum_{|w|=n} T^w T^w*||^(1/2n)``, computed by iterating the CP map on I."""
    t = as_pencil(t)
    s = np.eye(t.shape[1], dtype=np.complex128)
    for _ in range(n):
        s = sum(tj @ s @ tj.conj().T for tj in t)
    return linalg.opnorm(s) ** (1.0 / (2 * n))


def jsr_rowball(t, check_level=12):
    """Row-ball joint spectral radius: square root of the CP map's spectral radius."""
    value = np.sqrt(linalg.spec_radius(cp_map_matrix(t)))
    return JSRResult(float(value), float(jsr_truncated(t, check_level)), check_level)


# invertibility radius -------------------------------------------------------

@dataclass
class RadiusResult:
    r_witness: float
    r_clean: float
    witnesses: list = field(default_factory=list)

    def to_json(self):
        from .jsonio import encode_tuple
        return {"r_witness": self.r_witness, "r_clean": self.r_clean,
                "witnesses": [{"r": w["r"], "radius": w["radius"], "smallest_sv": w["smallest_sv"],
                               "point": encode_tuple(w["point"])} for w in self.witnesses]}


def _find_singular(a, spec, r, levels, samples, seed):
    # Along the complex line through X, L_A(tX) is singular exactly at t = 1/lambda
    # for the nonzero eigenvalues lambda of sum A_j (x) X_j.
    best = None
    for n in levels:
        xs = sample(spec, n, r, samples, seed, mode="mixed")
        t = linear_part_batch(a, xs)
        ev = np.linalg.eigvals(t)
        idx = np.argmax(np.abs(ev), axis=1)
        lam = ev[np.arange(len(xs)), idx]
        hit = np.flatnonzero(np.abs(lam) >= 1.0)
        for i in hit:
            y = xs[i] / lam[i]
            rad = spec.q_norm(y)
            if best is None or rad < best["radius"]:
                best = {"r": r, "radius": rad, "point": y,
                        "smallest_sv": linalg.min_singular_value(pencil_eval(a, y))}
    return best


def invertibility_radius(a, spec, levels=(1, 2, 3), samples=500, steps=20, r_max=2.0, seed=0):
    """Bisection for the largest radius ``r`` with ``L_A`` invertible on ``r`` times the ball.

    At each radius, sampled points are scanned for exact singular points of
    ``L_A`` on the complex line through them.  ``r_witness`` is the smallest
    radius where a singular witness was found (``inf`` if none up to
    ``r_max``) and ``r_clean`` the largest radius scanned without one.
    """
    a = as_pencil(a)
    witnesses = []
    top = _find_singular(a, spec, r_max, levels, samples, _seed_mix(seed, 0))
    if top is None:
        return RadiusResult(float("inf"), float(r_max), [])
    witnesses.append(top)
    lo, hi = 0.0, r_max
    for step in range(1, steps + 1):
        mid = 0.5 * (lo + hi)
        w = _find_singular(a, spec, mid, levels, samples, _seed_mix(seed, step))
        if w is None:
            lo = mid
        else:
            hi = mid
            witnesses.append(w)
    return RadiusResult(float(hi), float(lo), witnesses)


def _seed_mix(seed, k):
    return int(np.random.SeedSequence([int(seed) & (2**64 - 1), 7919, k]).generate_state(1, np.uint64)[0])


# irreducibility -------------------------------------------------------------

@dataclass
class IrreducibilityResult:
    irreducible: bool
    algebra_dim: int
    size: int
    witness_words: list
    invariant_subspace: np.ndarray = None

    @property
    def verdict(self):
        return "irreducible" if self.irreducible else "reducible"

    def to_json(self):
        from .jsonio import encode_cmatrix
        out = {"verdict": self.verdict, "algebra_dim": self.algebra_dim, "size": self.size,
               "witness_words": [[a + 1 for a in w] for w in self.witness_words]}
        if self.invariant_subspace is not None:
            out["invariant_subspace"] = encode_cmatrix(self.invariant_subspace)
        return out


def algebra_basis(a, rtol=1e-9):
    """Words whose products span the unital algebra generated by the A_j.

    Breadth-first closure of ``span{I}`` under left multiplication by each A_j;
    a product is kept when its residual after projection onto the current span
    exceeds ``rtol`` relative to its norm.
    """
    a = as_pencil(a)
    m = a.shape[1]
    ident = np.eye(m, dtype=np.complex128) / np.sqrt(m)
    basis = [ident.ravel()]
    ortho = [ident.ravel()]
    mats = [ident]
    words = [()]
    queue = [0]
    while queue and len(basis) < m * m:
        i = queue.pop(0)
        for j in range(a.shape[0]):
            cand = a[j] @ mats[i]
            nrm = np.linalg.norm(cand)
            if nrm == 0:
                continue
            cand = cand / nrm
            v = cand.ravel()
            q = np.array(ortho)
            resid = v - q.T @ (q.conj() @ v)
            # second pass for numerical orthogonality
            resid = resid - q.T @ (q.conj() @ resid)
            rn = np.linalg.norm(resid)
            if rn > rtol:
                ortho.append(resid / rn)
                basis.append(v)
                mats.append(cand)
                words.append((j,) + words[i])
                queue.append(len(mats) - 1)
                if len(basis) == m * m:
                    break
    return words, mats


def _invariant_subspace(mats, seed=0):
    m = mats[0].shape[0]
    rng = linalg.make_rng(seed)
    coeffs = rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats))
    r = sum(c * b for c, b in zip(coeffs, mats))
    for adjoint in (False, True):
        gens = [b.conj().T for b in mats] if adjoint else mats
        _, vecs = np.linalg.eig(r.conj().T if adjoint else r)
        for u in vecs.T:
            orbit = np.array([b @ u for b in gens]).T
            uu, s, _ = np.linalg.svd(orbit)
            rank = int(np.sum(s > 1e-9 * s[0]))
            if 0 < rank < m:
                # an invariant subspace of the adjoint algebra has an invariant complement
                return uu[:, rank:] if adjoint else uu[:, :rank]
    return None


def irreducible(a, seed=0):
    """Burnside test: the pencil is irreducible iff its algebra is all of M_m."""
    a = as_pencil(a)
    m = a.shape[1]
    words, mats = algebra_basis(a)
    dim = len(words)
    ok = dim == m * m
    inv = None if ok else _invariant_subspace(mats, seed)
    return IrreducibilityResult(ok, dim, m, words, inv)


# similarity to the dual ball ------------------------------------------------

@dataclass
class SimilarityResult:
    S: np.ndarray
    B: np.ndarray
    kappa: float
    certificate: DualMembership
    stage: str

    def to_json(self):
        from .jsonio import encode_cmatrix
        return {"S": encode_cmatrix(self.S), "B": [encode_cmatrix(b) for b in self.B],
                "kappa": self.kappa, "certificate": self.certificate.to_json(), "stage": self.stage}


def _canonical_eigvecs(m):
    vals, vecs = np.linalg.eig(m)
    order = sorted(range(len(vals)), key=lambda i: (-abs(vals[i]), -vals[i].real, -vals[i].imag))
    vecs = vecs[:, order]
    for i in range(vecs.shape[1]):
        v = vecs[:, i]
        k = int(np.argmax(np.abs(v)))
        vecs[:, i] = v / np.linalg.norm(v) * (abs(v[k]) / v[k])
    return vecs


def _accept(cert, slack):
    return cert.verdict == CERTIFIED_INSIDE or (cert.verdict == SAMPLED_INSIDE and cert.value <= 1 + slack)


def conjugate(a, s):
    s_inv = linalg.inverse(s)
    return np.array([s_inv @ aj @ s for aj in as_pencil(a)])


def similarity_to_dual_ball(a, spec, slack=1e-6, samples=150, hill_steps=100, refine_iters=300, seed=0):
    """Find ``S`` with ``S^{-1} A S`` in the closed polar dual of ``spec``.

    Tries ``S = I``, then the eigenvector matrix of ``sum_j A_j`` (columns of
    unit norm, ordered by decreasing eigenvalue modulus), then a Nelder-Mead
    refinement of ``S``.  A candidate is accepted only with a certified dual
    membership or a sampled sup at most ``1 + slack``.
    """
    a = as_pencil(a)
    m = a.shape[1]
    if not irreducible(a).irreducible:
        warnings.warn("pencil is reducible; similarity search may fail", stacklevel=2)
    opts = dict(samples=samples, hill_steps=hill_steps, seed=seed)

    def attempt(s, stage):
        try:
            b = conjugate(a, s)
        except linalg.SingularMatrix:
            return None
        cert = dual_membership(spec, b, **opts)
        if _accept(cert, slack):
            return SimilarityResult(s, b, linalg.cond2(s), cert, stage)
        return None

    res = attempt(np.eye(m, dtype=np.complex128), "identity")
    if res is not None:
        return res
    s1 = _canonical_eigvecs(a.sum(axis=0))
    if linalg.cond2(s1) < 1e12:
        res = attempt(s1, "eigenvectors")
        if res is not None:
            return res
    else:
        s1 = np.eye(m, dtype=np.complex128)

    from scipy.optimize import minimize
    probe = np.concatenate([sample(spec, n, 1.0, 40, seed, mode="boundary") for n in (1, 2)])

    def unpack(p):
        return (p[:m * m] + 1j * p[m * m:]).reshape(m, m)

    def cost(p):
        s = unpack(p)
        try:
            b = conjugate(a, s)
        except linalg.SingularMatrix:
            return 1e6
        vals = [linalg.opnorm(linear_part(b, x)) for x in probe]
        return max(vals)

    p0 = np.concatenate([s1.real.ravel(), s1.imag.ravel()])
    out = minimize(cost, p0, method="Nelder-Mead", options={"maxiter": refine_iters, "xatol": 1e-10,
                                                            "fatol": 1e-12})
    res = attempt(unpack(out.x), "refined")
    if res is not None:
        return res
    raise SimilarityNotFound(f"no similarity found; best sampled dual norm {out.fun:.6g}")
