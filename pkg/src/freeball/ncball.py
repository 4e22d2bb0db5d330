"""Noncommutative operator balls, sampling, sup-norm estimation and polar duals.

A ball is described by a linear pencil ``Q(X) = sum_j kron(Q_j, X_j)``; the
ball at level ``n`` is the set of d-tuples of n x n matrices with
``||Q(X)|| < 1``.  Two special cases get fast paths: the row ball (``Q(X)`` is
the block row ``[X_1 ... X_d]``) and the polydisk (``Q(X)`` is block diagonal).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels, linalg
from .errors import AllSamplesOutOfDomain, DimensionMismatch, FreeballError, InputError
from .freepoly import MatPoly, as_tuple

INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"

BOUNDARY_GAP = 1e-6
BOUNDARY_FRACTION = 0.7
DEFAULT_LEVELS = (1, 2, 3, 4)


@dataclass
class BallSpec:
    kind: str
    d: int
    Q: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("rowball", "polydisk", "general"):
            raise InputError(f"unknown ball kind {self.kind!r}")
        if self.d < 1:
            raise InputError("ball needs d >= 1")
        if self.kind == "general":
            q = np.asarray(self.Q, dtype=np.complex128)
            if q.ndim != 3 or q.shape[0] != self.d:
                raise DimensionMismatch(f"general ball needs {self.d} coefficient matrices")
            flat = q.reshape(self.d, -1)
            if np.linalg.matrix_rank(flat, tol=1e-12 * max(1.0, np.abs(flat).max())) < self.d:
                raise InputError("ball coefficients Q_j must be linearly independent")
            self.Q = q

    @classmethod
    def rowball(cls, d):
        return cls("rowball", d)

    @classmethod
    def polydisk(cls, d):
        return cls("polydisk", d)

    @classmethod
    def general(cls, q):
        q = np.asarray(q, dtype=np.complex128)
        return cls("general", q.shape[0], q)

    def coefficients(self):
        """The coefficient matrices Q_j for any kind of ball."""
        if self.kind == "general":
            return self.Q
        q = np.zeros((self.d, self.d, self.d), dtype=np.complex128)
        for j in range(self.d):
            if self.kind == "rowball":
                q[j, 0, j] = 1.0
            else:
                q[j, j, j] = 1.0
        return q

    def q_eval(self, x):
        x = as_tuple(x, self.d)
        if self.kind == "rowball":
            return np.hstack(list(x))
        if self.kind == "polydisk":
            return linalg.direct_sum(*x)
        return sum(linalg.kron(q, m) for q, m in zip(self.Q, x))

    def q_norm(self, x):
        return linalg.opnorm(self.q_eval(x))

    def q_norm_batch(self, xs):
        xs = np.asarray(xs, dtype=np.complex128)
        if xs.ndim != 4 or xs.shape[1] != self.d:
            raise DimensionMismatch(f"expected shape (S, {self.d}, n, n), got {xs.shape}")
        if self.kind == "rowball":
            s, d, n, _ = xs.shape
            row = np.concatenate([xs[:, j] for j in range(d)], axis=2)
            return linalg.batch_opnorm(row)
        if self.kind == "polydisk":
            return linalg.batch_opnorm(xs).max(axis=1)
        return linalg.batch_opnorm(_kernels.kron_accumulate(self.Q, xs))

    def project(self, xs, radius):
        """Pull a stack of tuples back inside ``radius`` times the closed ball."""
        xs = np.array(xs, dtype=np.complex128)
        if self.kind == "polydisk":
            norms = linalg.batch_opnorm(xs)
            scale = np.minimum(1.0, radius / np.maximum(norms, 1e-300))
            return xs * scale[:, :, None, None]
        norms = self.q_norm_batch(xs)
        scale = np.minimum(1.0, radius / np.maximum(norms, 1e-300))
        return xs * scale[:, None, None, None]

    def to_json(self):
        from .jsonio import encode_cmatrix
        out = {"kind": self.kind, "d": self.d}
        if self.kind == "general":
            out["Q"] = [encode_cmatrix(q) for q in self.Q]
        return out

    @classmethod
    def from_json(cls, obj):
        from .jsonio import decode_cmatrix
        try:
            kind = obj["kind"]
            d = int(obj["d"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad ball encoding: {exc}") from exc
        if kind == "general":
            q = np.array([decode_cmatrix(m) for m in obj["Q"]])
            return cls("general", d, q)
        return cls(kind, d)

    @classmethod
    def parse(cls, text, d=None):
        """Shorthand ``rowball``, ``polydisk:3`` etc., or a JSON object/file."""
        text = str(text).strip()
        base, _, dd = text.partition(":")
        if base in ("rowball", "polydisk"):
            dim = int(dd) if dd else d
            if dim is None:
                raise InputError(f"ball {text!r} needs a dimension (e.g. {base}:2)")
            return cls(base, dim)
        from .jsonio import load_json
        return cls.from_json(load_json(text))


def membership(spec, x, tol=1e-9):
    v = spec.q_norm(x)
    if v < 1 - tol:
        return INTERIOR
    if v <= 1 + tol:
        return BOUNDARY
    return OUTSIDE


def _stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1)] + [int(k) for k in key]))


def sample(spec, n, rho=1.0, count=100, seed=0, mode="interior", boundary_fraction=BOUNDARY_FRACTION):
    """Random tuples in ``rho`` times the ball at level ``n``.

    Each tuple is a Ginibre tuple rescaled so that ``||Q(X)|| = s * rho``.  In
    ``interior`` mode ``s`` is uniform in (0, 1 - 1e-6]; in ``boundary`` mode
    ``s = 1 - 1e-6``; ``mixed`` takes the boundary value with probability
    ``boundary_fraction``.  Tuple ``i`` depends only on (seed, n, i), so a
    larger ``count`` extends a smaller one.
    """
    if not 0 < rho:
        raise InputError("rho must be positive")
    g = _stream(seed, n, 0).standard_normal((count, spec.d, n, n, 2))
    xs = np.sqrt(0.5 / n) * (g[..., 0] + 1j * g[..., 1])
    s = np.minimum(1.0 - _stream(seed, n, 1).random(count), 1.0 - BOUNDARY_GAP)
    if mode == "boundary":
        s[:] = 1.0 - BOUNDARY_GAP
    elif mode == "mixed":
        s = np.where(_stream(seed, n, 2).random(count) < boundary_fraction, 1.0 - BOUNDARY_GAP, s)
    elif mode != "interior":
        raise InputError(f"unknown sampling mode {mode!r}")
    norms = spec.q_norm_batch(xs)
    return xs * (s * rho / norms)[:, None, None, None]


def evaluate_norms(f, xs):
    """Operator norms of ``f`` at each tuple; NaN where ``f`` is undefined."""
    if isinstance(f, MatPoly):
        return linalg.batch_opnorm(f.eval_batch(xs))
    out = np.full(len(xs), np.nan)
    for i, x in enumerate(xs):
        try:
            out[i] = linalg.opnorm(f(x))
        except FreeballError:
            pass
    return out


def _point_value(f, x):
    if isinstance(f, MatPoly):
        return linalg.opnorm(f.eval(x))
    try:
        return linalg.opnorm(f(x))
    except FreeballError:
        return np.nan


@dataclass
class NormEstimate:
    lower_bound: float
    witness: np.ndarray
    level: int
    evaluated: int
    skipped: int
    per_level: dict = field(default_factory=dict)

    def to_json(self):
        from .jsonio import encode_tuple
        return {"lower_bound": self.lower_bound, "level": self.level, "evaluated": self.evaluated,
                "skipped": self.skipped, "witness": encode_tuple(self.witness),
                "per_level": {str(k): v for k, v in self.per_level.items()}}


def hill_climb(value_fn, spec, x0, v0, steps, rng, radius, step0=0.3):
    """Greedy random search inside ``radius`` times the ball; returns (x, value)."""
    x, v = x0, v0
    n = x.shape[-1]
    sigma = step0
    for t in range(steps):
        if t % 10 == 9:
            nrm = spec.q_norm(x)
            cand = x * (radius / nrm) if nrm > 0 else x
            cand = spec.project(cand[None], radius)[0]
        else:
            pert = np.sqrt(0.5 / n) * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))
            cand = spec.project((x + sigma * pert)[None], radius)[0]
        cv = value_fn(cand)
        if np.isfinite(cv) and cv > v:
            x, v = cand, cv
            sigma = min(1.0, sigma * 1.5)
        else:
            sigma = max(1e-7, sigma * 0.8)
    return x, v


def norm_over_ball(f, spec, levels=DEFAULT_LEVELS, samples=200, hill_steps=150, seed=0,
                   radius=1.0, boundary_fraction=BOUNDARY_FRACTION):
    """Lower bound for ``sup ||f(X)||`` over ``radius`` times the ball.

    Samples are drawn with the boundary bias of :func:`sample`; a greedy hill
    climb is then started from every running-maximum sample of each level.  The
    bound never decreases when ``samples``, ``hill_steps`` or ``levels`` grow.
    """
    best_v, best_x, best_level = -np.inf, None, None
    evaluated = skipped = 0
    per_level = {}
    limit = radius * (1.0 - BOUNDARY_GAP)
    value_fn = (lambda x: _point_value(f, x))
    for n in levels:
        xs = sample(spec, n, radius, samples, seed, mode="mixed", boundary_fraction=boundary_fraction)
        vals = evaluate_norms(f, xs)
        ok = np.isfinite(vals)
        evaluated += int(ok.sum())
        skipped += int((~ok).sum())
        level_best, level_x = -np.inf, None
        running = -np.inf
        for i in np.flatnonzero(ok):
            if vals[i] > running:
                running = vals[i]
                x, v = hill_climb(value_fn, spec, xs[i], vals[i], hill_steps, _stream(seed, n, 3, i), limit)
                if v > level_best:
                    level_best, level_x = v, x
        per_level[n] = float(level_best) if level_x is not None else None
        if level_x is not None and level_best > best_v:
            best_v, best_x, best_level = level_best, level_x, n
    if best_x is None:
        raise AllSamplesOutOfDomain("every sampled point was outside the domain of the function")
    return NormEstimate(float(best_v), best_x, best_level, evaluated, skipped, per_level)


# polar dual -----------------------------------------------------------------

CERTIFIED_INSIDE = "certified_inside"
SAMPLED_INSIDE = "sampled_inside"
OUTSIDE_WITNESS = "outside_witness"


@dataclass
class DualMembership:
    verdict: str
    value: float
    u: np.ndarray = None
    v: np.ndarray = None
    witness: np.ndarray = None

    @property
    def inside(self):
        return self.verdict in (CERTIFIED_INSIDE, SAMPLED_INSIDE)

    def to_json(self):
        from .jsonio import encode_cmatrix, encode_tuple
        out = {"verdict": self.verdict, "value": self.value}
        if self.u is not None:
            out["u"] = encode_cmatrix(self.u)
            out["v"] = encode_cmatrix(self.v)
        if self.witness is not None:
            out["witness"] = encode_tuple(self.witness)
        return out


def rank_one_factors(b, rtol=1e-12):
    """Columns u_j, v_j with B_j = u_j v_j^*, or None if some B_j has rank > 1."""
    b = np.asarray(b, dtype=np.complex128)
    us, vs = [], []
    for bj in b:
        u, s, vh = np.linalg.svd(bj)
        if s[0] == 0:
            us.append(np.zeros(bj.shape[0]))
            vs.append(np.zeros(bj.shape[1]))
            continue
        if len(s) > 1 and s[1] > rtol * s[0]:
            return None
        us.append(np.sqrt(s[0]) * u[:, 0])
        vs.append(np.sqrt(s[0]) * vh[0].conj())
    return np.array(us).T, np.array(vs).T


def _balance(u, v):
    # ||U D|| ||V D^-1|| is invariant to the factor split only up to D; search log-scales
    from scipy.optimize import minimize

    live = [j for j in range(u.shape[1]) if np.any(u[:, j]) and np.any(v[:, j])]

    def cost(t):
        dd = np.ones(u.shape[1])
        dd[live] = np.exp(t)
        return linalg.opnorm(u * dd) * linalg.opnorm(v / dd)

    base = cost(np.zeros(len(live)))
    if len(live) < 2:
        return u, v, base
    res = minimize(cost, np.zeros(len(live)), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    if res.fun < base:
        dd = np.ones(u.shape[1])
        dd[live] = np.exp(res.x)
        return u * dd, v / dd, float(res.fun)
    return u, v, base


def dual_membership(spec, b, tol=1e-9, cert_tol=1e-10, levels=DEFAULT_LEVELS, samples=200,
                    hill_steps=150, seed=0):
    """Decide whether the tuple ``b`` lies in the polar dual of the ball.

    For a polydisk with every ``B_j = u_j v_j^*`` of rank at most one, membership
    is certified when ``||[u_1 ... u_d]|| * ||[v_1 ... v_d]|| <= 1 + cert_tol``.
    Otherwise ``sup ||sum_j kron(B_j, X_j)||`` is estimated by sampling.
    """
    b = np.asarray(b, dtype=np.complex128)
    if b.ndim != 3 or b.shape[0] != spec.d:
        raise DimensionMismatch(f"expected a {spec.d}-tuple of matrices")
    if spec.kind == "polydisk":
        fac = rank_one_factors(b)
        if fac is not None:
            u, v, value = _balance(*fac)
            if value <= 1 + cert_tol:
                return DualMembership(CERTIFIED_INSIDE, float(value), u, v)

    poly = MatPoly(spec.d, b.shape[1], {(j,): b[j] for j in range(spec.d)})
    est = norm_over_ball(poly, spec, levels=levels, samples=samples, hill_steps=hill_steps, seed=seed)
    if est.lower_bound > 1 + tol:
        return DualMembership(OUTSIDE_WITNESS, est.lower_bound, witness=est.witness)
    return DualMembership(SAMPLED_INSIDE, est.lower_bound, witness=est.witness)


def dual_norm_bounds(spec, b, levels=DEFAULT_LEVELS, samples=200, hill_steps=150, seed=0):
    """Lower and upper bounds for ``sup ||sum_j kron(B_j, X_j)||`` over the closed ball.

    The ``B_j`` may be rectangular.  The upper bound comes from a rank-one
    factorization (polydisk) or the stacked column norm (row ball) and is
    ``inf`` when neither applies.  The lower bound combines sampling with the
    scalar point ``(1, ..., 1)`` when that point lies in the closed ball.
    """
    b = np.asarray(b, dtype=np.complex128)
    if b.ndim != 3 or b.shape[0] != spec.d:
        raise DimensionMismatch(f"expected a {spec.d}-tuple of matrices")
    upper = np.inf
    if spec.kind == "polydisk":
        fac = rank_one_factors(b)
        if fac is not None:
            upper = _balance(*fac)[2]
    elif spec.kind == "rowball":
        upper = linalg.opnorm(np.concatenate(list(b), axis=0))

    def f(x):
        return sum(np.kron(bj, xj) for bj, xj in zip(b, x))

    lower = norm_over_ball(f, spec, levels=levels, samples=samples, hill_steps=hill_steps,
                           seed=seed).lower_bound
    ones = np.ones((spec.d, 1, 1), dtype=np.complex128)
    if spec.q_norm(ones) <= 1 + 1e-12:
        lower = max(lower, linalg.opnorm(f(ones)))
    return float(lower), float(min(upper, np.inf))
