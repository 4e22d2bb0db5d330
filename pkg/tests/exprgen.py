"""Random rational expressions that are defined at the origin."""

import numpy as np

from freeball.ratexpr import Add, Const, Inv, Mul, Scale, Sub, Var, eval_expr


def _leaf(rng, d):
    if rng.random() < 0.7:
        return Var(int(rng.integers(d)))
    return Const(complex(*np.round(rng.normal(size=2), 2)))


def _build(rng, d, depth):
    if depth == 0 or rng.random() < 0.25:
        return _leaf(rng, d)
    kind = rng.choice(["add", "sub", "mul", "inv", "scale"], p=[0.25, 0.15, 0.3, 0.2, 0.1])
    if kind == "inv":
        # shift so the argument is invertible near the origin
        return Inv(Add(Const(1.0 + 2 * rng.random()), _build(rng, d, depth - 1)))
    if kind == "scale":
        return Scale(complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)), _build(rng, d, depth - 1))
    left, right = _build(rng, d, depth - 1), _build(rng, d, depth - 1)
    return {"add": Add, "sub": Sub, "mul": Mul}[kind](left, right)


def random_expr(rng, d=2, depth=4, tries=50):
    """An expression in ``d`` variables that evaluates at the zero tuple."""
    zero = np.zeros((d, 2, 2), dtype=np.complex128)
    for _ in range(tries):
        e = _build(rng, d, depth)
        try:
            eval_expr(e, zero)
        except Exception:
            continue
        return e
    raise RuntimeError("no expression defined at the origin")


def corpus(count=50, seed=0, d=2, depth=4):
    rng = np.random.default_rng(seed)
    return [random_expr(rng, d, depth) for _ in range(count)]
