"""Noncommutative rational expressions: syntax tree, parser, printer, evaluation.

Grammar (whitespace and newlines are ignored)::

    expr     := term (("+" | "-") term)*
    term     := factor ("*" factor)*
    factor   := base ("^-1")?
    base     := number | variable | "(" expr ")" | "inv" "(" expr ")" | "-" factor
    variable := "Z" integer            (also "W" for Z2 when d == 2)
    number   := decimal | decimal "i" | "i"
    matrix   := "[" row (";" row)* "]"     row := expr ("," expr)*

A parenthesised literal such as ``(1.5-2i)`` or ``(-3)`` is read as a single
complex constant, which is also how the printer writes constants that are not
plain non-negative reals or imaginaries.  This makes ``parse(to_string(e)) == e``
hold for every tree the parser can produce.
"""

from dataclasses import dataclass
import math
import re

import numpy as np

from .errors import (DegenerateExpression, DimensionMismatch, ExprSyntaxError, NotPolynomial,
                     OutOfDomain, UnknownVariable)
from .freepoly import MatPoly, as_tuple, from_scalar_grid
from . import linalg


# syntax tree ----------------------------------------------------------------

class RatExpr:
    """Base class for expression nodes."""

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return to_string(self)


def _lift(v):
    return v if isinstance(v, RatExpr) else Const(complex(v))


@dataclass(frozen=True, eq=True)
class Const(RatExpr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True, eq=True)
class Var(RatExpr):
    index: int


@dataclass(frozen=True, eq=True)
class Add(RatExpr):
    left: RatExpr
    right: RatExpr


@dataclass(frozen=True, eq=True)
class Sub(RatExpr):
    left: RatExpr
    right: RatExpr


@dataclass(frozen=True, eq=True)
class Mul(RatExpr):
    left: RatExpr
    right: RatExpr


@dataclass(frozen=True, eq=True)
class Neg(RatExpr):
    arg: RatExpr


@dataclass(frozen=True, eq=True)
class Inv(RatExpr):
    arg: RatExpr


@dataclass(frozen=True, eq=True)
class Scale(RatExpr):
    factor: complex
    arg: RatExpr

    def __post_init__(self):
        object.__setattr__(self, "factor", complex(self.factor))


@dataclass(frozen=True)
class MatExpr:
    """Square grid of scalar expressions."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        k = len(rows)
        if k == 0 or any(len(r) != k for r in rows):
            raise DimensionMismatch("matrix expression must be square and non-empty")
        object.__setattr__(self, "entries", rows)

    @property
    def k(self):
        return len(self.entries)

    def __str__(self):
        return to_string(self)


def children(e):
    if isinstance(e, (Add, Sub, Mul)):
        return (e.left, e.right)
    if isinstance(e, (Neg, Inv, Scale)):
        return (e.arg,)
    return ()


def num_vars(e):
    """One more than the largest variable index in ``e`` (0 if there are none)."""
    if isinstance(e, MatExpr):
        return max(num_vars(x) for row in e.entries for x in row)
    if isinstance(e, Var):
        return e.index + 1
    return max((num_vars(c) for c in children(e)), default=0)


def node_count(e):
    return 1 + sum(node_count(c) for c in children(e))


# tokenizer ------------------------------------------------------------------

_REAL = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<invpow>\^\s*-\s*1(?![0-9.]))"
    rf"|(?P<num>{_REAL})(?P<imag>i(?![A-Za-z0-9_]))?"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*(),;\[\]])"
)


@dataclass
class _Tok:
    kind: str  # "num", "var", "inv", "op", "invpow", "eof"
    text: str
    value: object
    line: int
    col: int


def _tokenize(text, d):
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", line, col,
                                  ["number", "variable", "inv", "(", "-", "[", "+", "*", "^-1"])
        s = m.group(0)
        if m.group("ws") is not None:
            for i, ch in enumerate(s):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        elif m.group("invpow") is not None:
            toks.append(_Tok("invpow", s, None, line, col))
        elif m.group("num") is not None:
            v = float(m.group("num"))
            toks.append(_Tok("num", s, complex(0, v) if m.group("imag") else complex(v), line, col))
        elif m.group("id") is not None:
            toks.append(_classify_identifier(s, d, line, col))
        else:
            toks.append(_Tok("op", s, None, line, col))
        pos = m.end()
    col = pos - line_start + 1
    toks.append(_Tok("eof", "", None, line, col))
    return toks


def _classify_identifier(s, d, line, col):
    if s == "inv":
        return _Tok("inv", s, None, line, col)
    if s == "i":
        return _Tok("num", s, 1j, line, col)
    if s == "W":
        if d is not None and d != 2:
            raise UnknownVariable(f"'W' is only an alias for Z2 when d = 2 (line {line}, col {col})")
        return _Tok("var", s, 1, line, col)
    m = re.fullmatch(r"Z([0-9]+)", s)
    if m:
        j = int(m.group(1))
        if j < 1 or (d is not None and j > d):
            raise UnknownVariable(f"variable {s} out of range for d = {d} (line {line}, col {col})")
        return _Tok("var", s, j - 1, line, col)
    raise UnknownVariable(f"unknown identifier {s!r} at line {line}, col {col}")


# parser ---------------------------------------------------------------------

_BASE_START = ["number", "variable", "(", "inv", "-"]


class _Parser:
    def __init__(self, text, d):
        self.toks = _tokenize(text, d)
        self.pos = 0

    @property
    def tok(self):
        return self.toks[self.pos]

    def _t(self, i):
        return self.toks[min(i, len(self.toks) - 1)]

    def fail(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {what}", t.line, t.col, expected)

    def is_op(self, s, tok=None):
        t = tok or self.tok
        return t.kind == "op" and t.text == s

    def expect_op(self, s, expected=None):
        if not self.is_op(s):
            self.fail(expected or [s])
        self.pos += 1

    def expr(self):
        e = self.term()
        while self.is_op("+") or self.is_op("-"):
            op = self.tok.text
            self.pos += 1
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self):
        e = self.factor()
        while self.is_op("*"):
            self.pos += 1
            e = Mul(e, self.factor())
        return e

    def factor(self):
        e = self.base()
        if self.tok.kind == "invpow":
            self.pos += 1
            e = Inv(e)
        return e

    def _adjacent(self, a, b):
        ta, tb = self._t(a), self._t(b)
        return ta.line == tb.line and ta.col + len(ta.text) == tb.col

    def _folded_literal(self):
        # "(" ["-"] num [("+"|"-") imag-num] ")" written without spaces -> one constant
        start = self.pos
        i = self.pos + 1
        sign = 1.0
        if self.is_op("-", self._t(i)):
            sign = -1.0
            i += 1
        t = self._t(i)
        if t.kind != "num":
            return None
        value = complex(sign * t.value.real + 0.0, sign * t.value.imag + 0.0)
        i += 1
        if (self.is_op("+", self._t(i)) or self.is_op("-", self._t(i))) \
                and self._t(i + 1).kind == "num" and t.value.imag == 0 \
                and self._t(i + 1).value.real == 0 \
                and self.is_op(")", self._t(i + 2)):
            s2 = 1.0 if self._t(i).text == "+" else -1.0
            value = complex(value.real, s2 * self._t(i + 1).value.imag)
            i += 2
        if not self.is_op(")", self._t(i)):
            return None
        if not all(self._adjacent(j, j + 1) for j in range(start, i)):
            return None
        self.pos = i + 1
        return Const(value)

    def base(self):
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return Const(t.value)
        if t.kind == "var":
            self.pos += 1
            return Var(t.value)
        if t.kind == "inv":
            self.pos += 1
            self.expect_op("(")
            e = self.expr()
            self.expect_op(")", self._after(")"))
            return Inv(e)
        if self.is_op("("):
            lit = self._folded_literal()
            if lit is not None:
                return lit
            self.pos += 1
            e = self.expr()
            self.expect_op(")", self._after(")"))
            return e
        if self.is_op("-"):
            self.pos += 1
            return Neg(self.factor())
        self.fail(_BASE_START)

    def matrix(self):
        self.expect_op("[")
        rows = [[self.expr()]]
        while True:
            if self.is_op(","):
                self.pos += 1
                rows[-1].append(self.expr())
            elif self.is_op(";"):
                self.pos += 1
                rows.append([self.expr()])
            elif self.is_op("]"):
                self.pos += 1
                break
            else:
                self.fail(self._after(",", ";", "]"))
        k = len(rows)
        if any(len(r) != k for r in rows):
            raise DimensionMismatch(f"matrix expression must be square, got row lengths {[len(r) for r in rows]}")
        return MatExpr(tuple(tuple(r) for r in rows))

    def _after(self, *ops):
        # "^-1" may follow a base but not another "^-1"
        prev = self.toks[self.pos - 1] if self.pos else None
        tail = [] if prev is not None and prev.kind == "invpow" else ["^-1"]
        return list(ops) + ["+", "-", "*"] + tail

    def finish(self):
        if self.tok.kind != "eof":
            self.fail(self._after("end of input"))


def parse(text, d=None):
    """Parse a scalar expression."""
    p = _Parser(text, d)
    e = p.expr()
    p.finish()
    return e


def parse_matrix(text, d=None):
    p = _Parser(text, d)
    m = p.matrix()
    p.finish()
    return m


def parse_any(text, d=None):
    """Parse either a ``[...]`` matrix expression or a scalar expression."""
    if text.lstrip().startswith("["):
        return parse_matrix(text, d)
    return parse(text, d)


# printer --------------------------------------------------------------------

def _fmt_real(x):
    return repr(float(x))


def _fmt_const(c):
    re_, im = c.real, c.imag
    neg_re = math.copysign(1.0, re_) < 0
    neg_im = math.copysign(1.0, im) < 0
    if im == 0 and not neg_im and not neg_re:
        return _fmt_real(re_)
    if re_ == 0 and not neg_re and not neg_im:
        return _fmt_real(im) + "i"
    if im == 0 and not neg_im:
        return f"({_fmt_real(re_)})"
    if re_ == 0 and not neg_re:
        return f"(-{_fmt_real(-im)}i)"
    sign = "-" if neg_im else "+"
    return f"({_fmt_real(re_)}{sign}{_fmt_real(abs(im))}i)"


def to_string(e, level=0):
    """Render an expression; ``level`` is 0 (sum), 1 (product) or 2 (atom)."""
    if isinstance(e, MatExpr):
        return "[" + "; ".join(", ".join(to_string(x) for x in row) for row in e.entries) + "]"
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return f"Z{e.index + 1}"
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        s = f"{to_string(e.left, 0)} {op} {to_string(e.right, 1)}"
        return f"({s})" if level > 0 else s
    if isinstance(e, Mul):
        s = f"{to_string(e.left, 1)} * {to_string(e.right, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(e, Neg):
        return "-" + to_string(e.arg, 2)
    if isinstance(e, Inv):
        return f"inv({to_string(e.arg, 0)})"
    if isinstance(e, Scale):
        s = f"{_fmt_const(e.factor)} * {to_string(e.arg, 2)}"
        return f"({s})" if level > 1 else s
    raise TypeError(f"not an expression node: {e!r}")


# evaluation -----------------------------------------------------------------

DOMAIN_RTOL = 1e-10


def _eval(e, x, path, stats, tol):
    n = x.shape[1]
    if isinstance(e, Const):
        return e.value * np.eye(n, dtype=np.complex128)
    if isinstance(e, Var):
        if e.index >= x.shape[0]:
            raise DimensionMismatch(f"variable Z{e.index + 1} but the tuple has d = {x.shape[0]}")
        return x[e.index]
    if isinstance(e, Add):
        return _eval(e.left, x, path + (0,), stats, tol) + _eval(e.right, x, path + (1,), stats, tol)
    if isinstance(e, Sub):
        return _eval(e.left, x, path + (0,), stats, tol) - _eval(e.right, x, path + (1,), stats, tol)
    if isinstance(e, Mul):
        return _eval(e.left, x, path + (0,), stats, tol) @ _eval(e.right, x, path + (1,), stats, tol)
    if isinstance(e, Neg):
        return -_eval(e.arg, x, path + (0,), stats, tol)
    if isinstance(e, Scale):
        return e.factor * _eval(e.arg, x, path + (0,), stats, tol)
    if isinstance(e, Inv):
        m = _eval(e.arg, x, path + (0,), stats, tol)
        s = linalg.singular_values(m)
        if s[0] == 0 or s[-1] < tol * s[0]:
            raise OutOfDomain(path, s[-1])
        stats["max_cond"] = max(stats.get("max_cond", 1.0), float(s[0] / s[-1]))
        return np.linalg.inv(m)
    raise TypeError(f"not an expression node: {e!r}")


def eval_expr(e, x, tol=DOMAIN_RTOL, stats=None):
    """Evaluate a scalar or matrix expression at the tuple ``x`` of shape (d, n, n).

    Constants act as ``c * I_n``.  A matrix expression returns the block matrix
    with block (i, j) equal to entry (i, j) evaluated at ``x``.  Raises
    :class:`OutOfDomain` when an inverse is applied to a matrix whose smallest
    singular value is below ``tol`` times its norm.
    """
    x = as_tuple(x)
    if stats is None:
        stats = {}
    if isinstance(e, MatExpr):
        n = x.shape[1]
        k = e.k
        out = np.zeros((k * n, k * n), dtype=np.complex128)
        for i, row in enumerate(e.entries):
            for j, ent in enumerate(row):
                out[i * n:(i + 1) * n, j * n:(j + 1) * n] = _eval(ent, x, (i, j), stats, tol)
        return out
    return _eval(e, x, (), stats, tol)


def make_evaluator(f, d=None):
    """Uniform callable ``x -> matrix`` for a MatPoly, expression or callable."""
    if isinstance(f, MatPoly):
        return f.eval
    if isinstance(f, (RatExpr, MatExpr)):
        return lambda x: eval_expr(f, x)
    if callable(f):
        return f
    raise TypeError(f"cannot evaluate object of type {type(f).__name__}")


# equivalence ----------------------------------------------------------------

@dataclass
class EquivalenceResult:
    verdict: str  # "equivalent" or "distinct"
    checked: int
    skipped: int
    max_discrepancy: float
    witness: object = None

    @property
    def equivalent(self):
        return self.verdict == "equivalent"

    def to_json(self):
        out = {"verdict": self.verdict, "checked": self.checked, "skipped": self.skipped,
               "max_discrepancy": self.max_discrepancy}
        if self.witness is not None:
            from .jsonio import encode_tuple
            out["witness"] = encode_tuple(self.witness)
        return out


def equivalent(e1, e2, trials=200, seed=0, levels=3, tol=1e-8, d=None, max_cond=1e8):
    """Randomised test of whether two expressions define the same function.

    Points are complex Ginibre tuples at levels 1..``levels`` (cycling).  Points
    outside either domain, or where an inverse has condition number above
    ``max_cond``, are skipped.  A point with discrepancy above ``tol`` times the
    larger of 1 and the two values' norms is returned as a witness.
    """
    if d is None:
        d = max(num_vars(e1), num_vars(e2), 1)
    rng = linalg.make_rng(seed)
    checked = skipped = 0
    worst = 0.0
    for t in range(trials):
        n = 1 + t % levels
        x = np.array([linalg.ginibre(n, rng) for _ in range(d)])
        try:
            s1, s2 = {}, {}
            v1 = eval_expr(e1, x, stats=s1)
            v2 = eval_expr(e2, x, stats=s2)
        except OutOfDomain:
            skipped += 1
            continue
        if max(s1.get("max_cond", 1.0), s2.get("max_cond", 1.0)) > max_cond:
            skipped += 1
            continue
        checked += 1
        scale = max(1.0, linalg.opnorm(v1), linalg.opnorm(v2))
        gap = linalg.opnorm(v1 - v2) / scale
        worst = max(worst, gap)
        if gap > tol:
            return EquivalenceResult("distinct", checked, skipped, gap, x)
    if checked == 0:
        raise DegenerateExpression("no sampled point lies in the common domain of both expressions")
    return EquivalenceResult("equivalent", checked, skipped, worst)


# polynomial bridge ----------------------------------------------------------

def _word_expr(w):
    if not w:
        return None
    e = Var(w[0])
    for a in w[1:]:
        e = Mul(e, Var(a))
    return e


def _scalar_poly_expr(p):
    terms = []
    for w in p.words:
        c = complex(p.to_numeric().coeffs[w][0, 0])
        we = _word_expr(w)
        if we is None:
            terms.append(Const(c))
        elif c == 1:
            terms.append(we)
        else:
            terms.append(Mul(Const(c), we))
    if not terms:
        return Const(0)
    e = terms[0]
    for t in terms[1:]:
        e = Add(e, t)
    return e


def poly_to_expr(p):
    """Expression for a polynomial: a scalar expression when k = 1, else a MatExpr."""
    if p.k == 1:
        return _scalar_poly_expr(p)
    return MatExpr(tuple(tuple(_scalar_poly_expr(p.entry(i, j)) for j in range(p.k))
                         for i in range(p.k)))


def expr_is_polynomial(e, d=None):
    """Convert an inverse-free expression to a MatPoly (raising NotPolynomial otherwise).

    Inverses of nonzero constants are allowed.
    """
    if d is None:
        d = max(num_vars(e), 1)
    if isinstance(e, MatExpr):
        return from_scalar_grid([[expr_is_polynomial(x, d) for x in row] for row in e.entries])
    return _to_poly(e, d)


def _to_poly(e, d):
    if isinstance(e, Const):
        return MatPoly.const(e.value, d)
    if isinstance(e, Var):
        return MatPoly.var(e.index, d)
    if isinstance(e, Add):
        return _to_poly(e.left, d) + _to_poly(e.right, d)
    if isinstance(e, Sub):
        return _to_poly(e.left, d) - _to_poly(e.right, d)
    if isinstance(e, Mul):
        return _to_poly(e.left, d) * _to_poly(e.right, d)
    if isinstance(e, Neg):
        return -_to_poly(e.arg, d)
    if isinstance(e, Scale):
        return _to_poly(e.arg, d).scalar_mul(e.factor)
    if isinstance(e, Inv):
        inner = _to_poly(e.arg, d)
        if inner.degree() == 0 and not inner.is_zero():
            return MatPoly.const(1.0 / complex(inner.constant_term()[0, 0]), d)
        raise NotPolynomial(f"expression contains a non-constant inverse: {to_string(e)}")
    raise TypeError(f"not an expression node: {e!r}")
