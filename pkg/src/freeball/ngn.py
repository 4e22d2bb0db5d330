"""NGN-type bounds, their empirical counterparts and the supporting experiments.

Every bound input is a :class:`Quantity` carrying an ``exact`` flag.  Values
estimated by sampling are lower bounds for true suprema, so a bound built from
them is not a certified upper bound; reports never call a result inconsistent
on the strength of such a bound.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import AllSamplesOutOfDomain, FreeballError, NotAccretive, SimilarityNotFound, StabilityViolation
from .freepoly import MatPoly, as_tuple
from .ncball import BOUNDARY_GAP, BallSpec, _stream, hill_climb, norm_over_ball, sample

DEFAULT_R_GRID = (0.0, 0.5, 0.9, 0.99, 0.999)
DEFAULT_LEVELS = (1, 2, 3, 4)


@dataclass(frozen=True)
class Quantity:
    value: float
    exact: bool = True

    def to_json(self):
        return {"value": self.value, "exact": self.exact}


def quantity(v, exact=True):
    """Coerce a number, a (value, exact) pair, a dict or a Quantity."""
    if isinstance(v, Quantity):
        return v
    if isinstance(v, dict):
        return Quantity(float(v["value"]), bool(v.get("exact", True)))
    if isinstance(v, (tuple, list)):
        return Quantity(float(v[0]), bool(v[1]))
    return Quantity(float(v), exact)


def _all_exact(*qs):
    return all(quantity(q).exact for q in qs)


# closed-form bounds ----------------------------------------------------------

def bound_lemma31(part_norms):
    """``sum_j j ||P_j||`` from the norms of the homogeneous parts ``P_0 .. P_N``."""
    return float(sum(j * quantity(q).value for j, q in enumerate(part_norms)))


def bound_lemma31_coarse(p_norm, n):
    """The cruder ``N(N+1)/2 ||P||``."""
    return n * (n + 1) / 2 * quantity(p_norm).value


def bound_lemma32(f_norm, finv_norm, n):
    a = quantity(f_norm).value * quantity(finv_norm).value
    return {"left": 1 + (n * n + n + 1) * a, "right": 2 * a}


def bound_theoremA(f_norm, finv_norm, n, g_norm, ginv_norm, m):
    a = quantity(f_norm).value * quantity(finv_norm).value
    b = quantity(g_norm).value * quantity(ginv_norm).value
    return {"left": (1 + (n * n + n + 1) * a) * b, "right": (1 + (m * m + m + 1) * b) * a}


def bound_prop36(kappa, weighted_part_sum):
    return 1 + quantity(kappa).value * quantity(weighted_part_sum).value


# empirical suprema -------------------------------------------------------------

@dataclass
class EmpiricalSup:
    sup_left: float
    sup_right: float
    witness_left: tuple
    witness_right: tuple
    per_r: dict = field(default_factory=dict)

    def to_json(self):
        from .jsonio import encode_tuple
        return {"sup_left": self.sup_left, "sup_right": self.sup_right,
                "witness_left": {"r": self.witness_left[0], "x": encode_tuple(self.witness_left[1])},
                "witness_right": {"r": self.witness_right[0], "x": encode_tuple(self.witness_right[1])},
                "per_r": {str(r): v for r, v in self.per_r.items()}}


def _guarded(fn, singular, tol=1e-12):
    # wraps fn(x) -> (denominator, numerator-side callable); records singular denominators
    def f(x):
        den, build = fn(x)
        s = linalg.singular_values(den)
        if s[-1] <= tol * max(1.0, s[0]):
            singular.append((x, float(s[-1])))
            raise StabilityViolation("singular value at a sampled point", smallest_sv=float(s[-1]))
        return build(den)
    return f


def empirical_sup(p, spec=None, r_grid=DEFAULT_R_GRID, levels=DEFAULT_LEVELS, samples=200,
                  hill_steps=100, seed=0):
    """Sampled lower bounds for ``sup ||P(rX)^{-1} P(X)||`` and ``sup ||P(X) P(rX)^{-1}||``.

    Raises StabilityViolation if ``P(rX)`` is singular at any sampled point.
    """
    spec = spec or BallSpec.polydisk(p.d)
    best = {"left": (-np.inf, None), "right": (-np.inf, None)}
    per_r = {}
    for r in r_grid:
        singular = []
        pr = p.dilate(r)
        left = _guarded(lambda x: (pr.eval(x), lambda den: np.linalg.solve(den, p.eval(x))), singular)
        right = _guarded(lambda x: (pr.eval(x),
                                    lambda den: np.linalg.solve(den.conj().T, p.eval(x).conj().T).conj().T),
                         singular)
        row = {}
        for side, f in (("left", left), ("right", right)):
            try:
                est = norm_over_ball(f, spec, levels=levels, samples=samples, hill_steps=hill_steps, seed=seed)
            except AllSamplesOutOfDomain:
                if not singular:
                    raise
            if singular:
                x, sv = singular[0]
                raise StabilityViolation(f"P(rX) singular at r = {r}", r=r, point=x, smallest_sv=sv)
            row[side] = est.lower_bound
            if est.lower_bound > best[side][0]:
                best[side] = (est.lower_bound, (r, est.witness))
        per_r[r] = row
    return EmpiricalSup(best["left"][0], best["right"][0], best["left"][1], best["right"][1], per_r)


def empirical_sup_chain(factors, spec=None, r_grid=DEFAULT_R_GRID, levels=DEFAULT_LEVELS, samples=200,
                        hill_steps=100, seed=0):
    """Sampled ``sup ||(P_1^{(r)})^{-1} P_1 ... (P_l^{(r)})^{-1} P_l||`` for a factored input."""
    spec = spec or BallSpec.polydisk(factors[0].d)
    out = {}
    for r in r_grid:
        dil = [f.dilate(r) for f in factors]

        def chain(x):
            acc = None
            for f, fr in zip(factors, dil):
                term = linalg.solve(fr.eval(x), f.eval(x))
                acc = term if acc is None else acc @ term
            return acc

        est = norm_over_ball(chain, spec, levels=levels, samples=samples, hill_steps=hill_steps, seed=seed)
        out[r] = est.lower_bound
    return out


# Jordan block ---------------------------------------------------------------

JORDAN = np.array([[[1.0, 1.0], [0.0, 1.0]]], dtype=np.complex128)


def jordan_closed_form(r):
    return r / ((1 - r) * (1 + r) ** 2)


def jordan_demo(r_grid=(0.5, 0.9, 0.99, 0.999, 0.9999)):
    """``L_A(rX)^{-1} L_A(X)`` for the 2x2 Jordan block at the scalar point ``X = r``."""
    from .pencil import pencil_eval

    rows = []
    for r in r_grid:
        x = np.array([[[r]]], dtype=np.complex128)
        m = linalg.solve(pencil_eval(JORDAN, r * x), pencil_eval(JORDAN, x))
        rows.append({"r": r, "top_right": float(abs(m[0, 1])), "closed_form": jordan_closed_form(r),
                     "norm": linalg.opnorm(m)})
    return rows


# stability scan --------------------------------------------------------------

@dataclass
class ScanReport:
    verdict: str  # "no_witness" or "singular_witness"
    min_sv: float
    witness: np.ndarray  # the minimizing point, singular or not
    evaluated: int

    def to_json(self):
        from .jsonio import encode_tuple
        return {"verdict": self.verdict, "min_sv": self.min_sv, "evaluated": self.evaluated,
                "witness": encode_tuple(self.witness) if self.witness is not None else None}


def _min_sv(f, x):
    try:
        v = f.eval(x) if isinstance(f, MatPoly) else f(x)
    except FreeballError as e:
        return 0.0, 1.0, str(e)
    s = linalg.singular_values(v)
    return float(s[-1]), float(max(1.0, s[0])), None


def _snap(f, x, spec, iters=40):
    # secant iteration on t -> det f(tX), from t = 1; keeps only points the sampler could reach
    def h(t):
        try:
            v = f.eval(t * x) if isinstance(f, MatPoly) else f(t * x)
        except FreeballError:
            return None
        return np.linalg.det(v)

    t0, t1 = 1.0 + 0j, 1.0 + 1e-3 + 0j
    h0, h1 = h(t0), h(t1)
    for _ in range(iters):
        if h0 is None or h1 is None or h1 == h0:
            return None
        t0, t1 = t1, t1 - h1 * (t1 - t0) / (h1 - h0)
        h0, h1 = h1, h(t1)
        if abs(t1 - t0) <= 1e-14 * max(1.0, abs(t1)):
            break
    y = t1 * x
    return y if np.isfinite(t1) and spec.q_norm(y) <= 1.0 - BOUNDARY_GAP else None


def stability_scan(f, spec, levels=DEFAULT_LEVELS, samples=2500, seed=0, refine=5, refine_steps=150,
                   rtol=1e-10):
    """Search the open ball for a point where ``f`` is singular or undefined.

    The origin of every level is included; the ``refine`` smallest samples per
    level are then pushed downhill and snapped to a zero of ``det f(tX)`` on
    the complex line through them when that zero lies in the ball.
    ``no_witness`` is evidence of stability, not a proof.
    """
    best = (np.inf, None)
    evaluated = 0
    for n in levels:
        xs = sample(spec, n, 1.0, samples, seed, mode="mixed")
        xs = np.concatenate([np.zeros((1,) + xs.shape[1:], dtype=xs.dtype), xs])
        if isinstance(f, MatPoly):
            vals = f.eval_batch(xs)
            svs = np.linalg.svd(vals, compute_uv=False)
            rel = svs[:, -1] / np.maximum(1.0, svs[:, 0])
        else:
            rel = np.array([a / b for a, b, _ in (_min_sv(f, x) for x in xs)])
        evaluated += len(xs)
        order = np.argsort(rel)
        for i in order[:refine]:
            if rel[i] <= rtol:
                x, v = xs[i], rel[i]
            else:
                def neg(x):
                    a, b, _ = _min_sv(f, x)
                    return -a / b
                x, v = hill_climb(neg, spec, xs[i], -rel[i], refine_steps, _stream(seed, n, 7, int(i)),
                                  1.0 - 1e-6)
                v = -v
                evaluated += refine_steps
                y = _snap(f, x, spec)
                if y is not None:
                    a, b, _ = _min_sv(f, y)
                    if a / b < v:
                        x, v = y, a / b
            if v < best[0]:
                best = (float(v), x)
    verdict = "singular_witness" if best[0] <= rtol else "no_witness"
    return ScanReport(verdict, best[0], best[1], evaluated)


# cyclicity approximants ------------------------------------------------------

@dataclass
class CyclicityReport:
    rows: list
    point: np.ndarray

    @property
    def max_sup(self):
        return max(row["sup"] for row in self.rows)

    def to_json(self):
        from .jsonio import encode_tuple
        return {"point": encode_tuple(self.point), "rows": self.rows}


def cyclicity_approximants(factors, g=None, r_seq=None, spec=None, point=None, levels=(1, 2, 3),
                           samples=100, hill_steps=60, seed=0, resolvent=True):
    """Evidence for ``g (P_1^{(r_n)})^{-1} P_1 ... P_l -> g P_2 ... P_l`` boundedly and pointwise.

    ``r_seq`` defaults to ``1 - 2^{-n}`` for n = 1..16.  For each n the report
    holds a sampled sup of ``||H_n||``, the error at ``point`` and (optionally)
    a sampled sup of ``||(P_1^{(r_n)})^{-1}||``.
    """
    p1 = factors[0]
    d, k = p1.d, p1.k
    spec = spec or BallSpec.polydisk(d)
    if r_seq is None:
        r_seq = [1 - 2.0 ** -n for n in range(1, 17)]
    if point is None:
        point = np.array([0.5j * np.eye(2)] * d)
    point = as_tuple(point, d)

    def tail(x):
        out = np.eye(k * x.shape[1], dtype=np.complex128)
        for f in factors[1:]:
            out = out @ f.eval(x)
        return out

    def gval(x):
        if g is None:
            return np.eye(k * x.shape[1], dtype=np.complex128)
        return g.eval(x) if isinstance(g, MatPoly) else g(x)

    rows = []
    for n, r in enumerate(r_seq, start=1):
        pr = p1.dilate(r)
        singular = []

        def h(x):
            den = pr.eval(x)
            s = linalg.singular_values(den)
            if s[-1] <= 1e-12 * max(1.0, s[0]):
                singular.append(x)
                raise StabilityViolation("P_1(rX) singular", r=r, point=x, smallest_sv=float(s[-1]))
            return gval(x) @ np.linalg.solve(den, p1.eval(x)) @ tail(x)

        est = norm_over_ball(h, spec, levels=levels, samples=samples, hill_steps=hill_steps, seed=seed)
        if singular:
            raise StabilityViolation(f"P_1(rX) singular at r = {r}", r=r, point=singular[0])
        err = linalg.opnorm(h(point) - gval(point) @ tail(point))
        row = {"n": n, "r": r, "sup": est.lower_bound, "pointwise_error": err}
        if resolvent:
            res = norm_over_ball(lambda x: linalg.inverse(pr.eval(x)), spec, levels=levels, samples=samples,
                                 hill_steps=0, seed=seed)
            row["resolvent_sup"] = res.lower_bound
        rows.append(row)
    return CyclicityReport(rows, point)


# parallel sums --------------------------------------------------------------

def psum_eval(x, y):
    """``(I - X)(2I - X - Y)^{-1}(I - Y)``."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    i = np.eye(x.shape[0])
    return (i - x) @ linalg.solve(2 * i - x - y, i - y)


def psum_left(x, y):
    i = np.eye(x.shape[0])
    return linalg.solve(2 * i - x - y, (i - x) @ (i - y))


def psum_right(x, y):
    i = np.eye(x.shape[0])
    m = (i - x) @ (i - y)
    return linalg.solve((2 * i - x - y).conj().T, m.conj().T).conj().T


PSUM_FORMS = (
    "(1 - Z1)*inv(2 - Z1 - Z2)*(1 - Z2)",
    "inv(inv(1 - Z1) + inv(1 - Z2))",
    "(1 - Z2)*inv(2 - Z1 - Z2)*(1 - Z1)",
)


@dataclass
class AccretivityReport:
    samples: int
    max_norm: float
    min_re: float
    min_re_inverse_minus_one: float
    half_plane_min: float
    tol: float

    @property
    def ok(self):
        t = self.tol
        return (self.max_norm <= 1 + t and self.min_re >= -t and self.min_re_inverse_minus_one >= -t
                and self.half_plane_min >= -t)

    def to_json(self):
        return {"ok": self.ok, "samples": self.samples, "max_norm": self.max_norm, "min_re": self.min_re,
                "min_re_inverse_minus_one": self.min_re_inverse_minus_one,
                "half_plane_min": self.half_plane_min, "tol": self.tol}


def psum_check(spec=None, levels=DEFAULT_LEVELS, samples=250, seed=0, tol=1e-9):
    """Contractivity and accretivity of the parallel sum at boundary-biased samples of the bidisk.

    The inverse is obtained by inverting the computed value, independently of
    the sum-of-resolvents form.
    """
    spec = spec or BallSpec.polydisk(2)
    one = BallSpec.polydisk(1)
    max_norm, min_re, min_inv, half = -np.inf, np.inf, np.inf, np.inf
    count = 0
    for n in levels:
        for x, y in sample(spec, n, 1.0, samples, seed, mode="mixed"):
            v = psum_eval(x, y)
            max_norm = max(max_norm, linalg.opnorm(v))
            min_re = min(min_re, linalg.min_real_eig_hermitian_part(v))
            min_inv = min(min_inv, linalg.min_real_eig_hermitian_part(linalg.inverse(v)) - 1.0)
            count += 1
        for (z,) in sample(one, n, 1.0, samples, seed, mode="mixed"):
            res = linalg.inverse(np.eye(n) - z)
            half = min(half, linalg.min_real_eig_hermitian_part(res) - 0.5)
    return AccretivityReport(count, float(max_norm), float(min_re), float(min_inv), float(half), tol)


@dataclass
class ApproximantReport:
    min_re: float
    rows: list

    @property
    def ok(self):
        return all(row["resolvent_ok"] and row["product_ok"] for row in self.rows)

    def to_json(self):
        return {"ok": self.ok, "min_re": self.min_re, "rows": self.rows}


def accretive_approximant(f, lambdas=(1.0, 0.1, 0.01), spec=None, levels=DEFAULT_LEVELS, samples=250,
                          seed=0, tol=1e-9, d=2):
    """Resolvent bounds for ``F_lambda = (F + lambda I)^{-1}`` of an accretive ``F``.

    Raises NotAccretive if ``Re F`` has a negative eigenvalue at some sample.
    """
    spec = spec or BallSpec.polydisk(d)
    pts = [x for n in levels for x in sample(spec, n, 1.0, samples, seed, mode="mixed")]
    vals = []
    min_re = np.inf
    for x in pts:
        v = f.eval(x) if isinstance(f, MatPoly) else f(x)
        m = linalg.min_real_eig_hermitian_part(v)
        if m < -tol:
            raise NotAccretive(f"Re F has eigenvalue {m:.3e} at a sampled point", witness=x)
        min_re = min(min_re, m)
        vals.append(v)
    rows = []
    for lam in lambdas:
        worst_res = worst_prod = 0.0
        err = []
        for v in vals:
            i = np.eye(len(v))
            fl = linalg.inverse(v + lam * i)
            worst_res = max(worst_res, linalg.opnorm(fl))
            prod = v @ fl
            worst_prod = max(worst_prod, linalg.opnorm(prod))
            err.append(linalg.opnorm(prod - i))
        rows.append({"lambda": lam, "max_resolvent": worst_res, "resolvent_ok": worst_res <= 1 / lam + tol,
                     "max_product": worst_prod, "product_ok": worst_prod <= 1 + tol,
                     "mean_identity_error": float(np.mean(err)), "max_identity_error": float(np.max(err))})
    return ApproximantReport(float(min_re), rows)


def decoupled_pair(t):
    c, s = np.cos(t), np.sin(t)
    x = c * np.array([[c, s], [s, -c]], dtype=np.complex128)
    y = c * np.array([[c, -s], [-s, -c]], dtype=np.complex128)
    return x, y


def decoupled_psum_demo(t_grid=(1.2, 0.9, 0.6, 0.3, 0.1, 0.05, 0.01), trials=200, seed=0):
    """Norms of the one-sided parallel sums along a family approaching ``(I, I)``.

    Also compares the left-sided sum with its variable swap by random evaluation.
    """
    from .ratexpr import equivalent, parse

    rows = []
    for t in t_grid:
        x, y = decoupled_pair(t)
        nx, ny = linalg.opnorm(x), linalg.opnorm(y)
        rows.append({"t": t, "norm_x": nx, "norm_y": ny, "in_ball": bool(max(nx, ny) < 1),
                     "left": linalg.opnorm(psum_left(x, y)), "right": linalg.opnorm(psum_right(x, y))})
    e1 = parse("inv(2 - Z1 - Z2)*(1 - Z1)*(1 - Z2)", 2)
    e2 = parse("inv(2 - Z2 - Z1)*(1 - Z2)*(1 - Z1)", 2)
    swap = equivalent(e1, e2, trials=trials, seed=seed)
    return {"rows": rows, "swap": swap.to_json()}


# aggregated report ------------------------------------------------------------

@dataclass
class BoundEntry:
    name: str
    value: object
    inputs: dict
    exact: bool

    def to_json(self):
        return {"name": self.name, "value": self.value, "exact": self.exact,
                "inputs": {k: (v.to_json() if isinstance(v, Quantity) else v) for k, v in self.inputs.items()}}


@dataclass
class BoundReport:
    poly_id: str
    entries: list
    empirical: EmpiricalSup
    verdict: str
    similarity: dict = None
    notes: list = field(default_factory=list)

    def entry(self, name):
        return next(e for e in self.entries if e.name == name)

    def to_json(self):
        return {"poly_id": self.poly_id, "verdict": self.verdict, "similarity": self.similarity,
                "entries": [e.to_json() for e in self.entries],
                "empirical": self.empirical.to_json() if self.empirical else None, "notes": self.notes}


def _sup_norm(f, spec, opts):
    return Quantity(norm_over_ball(f, spec, **opts).lower_bound, exact=False)


def bound_report(p, spec=None, poly_id="p", known=None, r_grid=DEFAULT_R_GRID, levels=(1, 2, 3),
                 samples=150, hill_steps=80, seed=0, tol=1e-6, run_empirical=True):
    """Linearize, find a similarity into the dual ball and tabulate every applicable bound.

    ``known`` maps input names (``part_norms``, ``F``, ``F_inv``, ``G``, ``G_inv``,
    ``kappa``) to values treated as exact; anything missing is estimated by
    sampling and flagged.
    """
    from .linearize import linearize, normalize_at_zero
    from .pencil import similarity_to_dual_ball

    spec = spec or BallSpec.polydisk(p.d)
    known = dict(known or {})
    opts = dict(levels=levels, samples=samples, hill_steps=hill_steps, seed=seed)
    notes = []
    pe = p.to_exact()
    c0 = pe.constant_term()
    if any(v != 0 for v in (c0 - np.eye(p.k, dtype=object)).flat):
        pe = normalize_at_zero(pe)
        notes.append("normalized to P P(0)^{-1}")
    pn = pe.to_numeric()

    parts = pn.homogeneous_parts()
    if "part_norms" in known:
        part_norms = [quantity(v) for v in known["part_norms"]]
    else:
        part_norms = [Quantity(0.0) if q.is_zero() else _sup_norm(q, spec, opts) for q in parts]
    entries = []
    wsum = bound_lemma31(part_norms)
    wsum_q = Quantity(wsum, _all_exact(*part_norms[1:]))
    entries.append(BoundEntry("lemma31", wsum, {"part_norms": [q.to_json() for q in part_norms]}, wsum_q.exact))

    lin = linearize(pe)
    similarity = None
    kappa = None
    try:
        sim = similarity_to_dual_ball(lin.A, spec, seed=seed)
        certified = sim.certificate.verdict == "certified_inside"
        kappa = quantity(known["kappa"]) if "kappa" in known else Quantity(sim.kappa, certified)
        similarity = {"kappa": kappa.value, "stage": sim.stage, "certificate": sim.certificate.verdict}
    except SimilarityNotFound as e:
        notes.append(str(e))
        sim = None

    if sim is not None:
        s_inv = linalg.inverse(sim.S)
        fs = lin.F.to_numeric() * MatPoly.const(sim.S, p.d)
        gs = MatPoly.const(s_inv, p.d) * lin.G.to_numeric()
        fs_inv = MatPoly.const(s_inv, p.d) * lin.F_inv.to_numeric()
        gs_inv = lin.G_inv.to_numeric() * MatPoly.const(sim.S, p.d)
        vals = {}
        for name, poly in (("F", fs), ("F_inv", fs_inv), ("G", gs), ("G_inv", gs_inv)):
            vals[name] = quantity(known[name]) if name in known else _sup_norm(poly, spec, opts)
        n_deg, m_deg = lin.F.degree(), lin.G.degree()
        thm = bound_theoremA(vals["F"], vals["F_inv"], n_deg, vals["G"], vals["G_inv"], m_deg)
        entries.append(BoundEntry("theoremA", thm, dict(vals, N=n_deg, M=m_deg), _all_exact(*vals.values())))
        if p.k == 1:
            val = bound_prop36(kappa, wsum_q)
            entries.append(BoundEntry("prop36", {"left": val, "right": val},
                                      {"kappa": kappa, "weighted_part_sum": wsum_q},
                                      kappa.exact and wsum_q.exact))

    emp = None
    verdict = "not_checked"
    if run_empirical:
        emp = empirical_sup(pn, spec, r_grid=r_grid, levels=levels, samples=samples,
                            hill_steps=hill_steps, seed=seed)
        verdict = "consistent"
        for e in entries:
            if not isinstance(e.value, dict):
                continue
            bad = emp.sup_left > e.value["left"] + tol or emp.sup_right > e.value["right"] + tol
            if bad and e.exact:
                verdict = "inconsistent"
            elif bad and verdict == "consistent":
                verdict = "inconclusive"
    return BoundReport(poly_id, entries, emp, verdict, similarity, notes)
