"""JSON encodings for matrices, tuples, polynomials and pencils.

Complex matrices are written as ``{"rows": n, "cols": m, "data": [[re, im], ...]}``
in row-major order.  Polynomial words are written with 1-based letters.
"""

import json

import numpy as np

from .errors import InputError
from .freepoly import MatPoly, as_tuple


def encode_cmatrix(a):
    a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[float(v.real), float(v.imag)] for v in a.ravel()],
    }


def _scalar(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InputError(f"bad complex scalar {v!r}")


def decode_cmatrix(obj):
    if isinstance(obj, (int, float)) or (isinstance(obj, list) and len(obj) == 2
                                         and all(isinstance(t, (int, float)) for t in obj)):
        return np.array([[_scalar(obj)]], dtype=np.complex128)
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        data = [_scalar(v) for v in obj["data"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad matrix encoding: {exc}") from exc
    if len(data) != rows * cols:
        raise InputError(f"matrix data has {len(data)} entries, expected {rows * cols}")
    out = np.array(data, dtype=np.complex128).reshape(rows, cols)
    if not np.all(np.isfinite(out)):
        raise InputError("matrix has non-finite entries")
    return out


def encode_tuple(x):
    x = as_tuple(x)
    return {"d": int(x.shape[0]), "n": int(x.shape[1]), "matrices": [encode_cmatrix(m) for m in x]}


def decode_tuple(obj):
    try:
        mats = [decode_cmatrix(m) for m in obj["matrices"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad tuple encoding: {exc}") from exc
    x = as_tuple(np.array(mats))
    if "d" in obj and int(obj["d"]) != x.shape[0]:
        raise InputError("tuple field d disagrees with matrix count")
    return x


def encode_poly(p):
    q = p.to_numeric()
    terms = []
    for w in q.words:
        c = q.coeffs[w]
        coeff = [float(c[0, 0].real), float(c[0, 0].imag)] if q.k == 1 else encode_cmatrix(c)
        terms.append({"word": [a + 1 for a in w], "coeff": coeff})
    return {"d": q.d, "k": q.k, "terms": terms}


def decode_poly(obj):
    try:
        d = int(obj["d"])
        k = int(obj.get("k", 1))
        coeffs = {}
        for t in obj["terms"]:
            w = tuple(int(a) - 1 for a in t["word"])
            c = decode_cmatrix(t["coeff"])
            if c.shape == (1, 1) and k > 1:
                c = c[0, 0] * np.eye(k)
            coeffs[w] = coeffs.get(w, 0) + c
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad polynomial encoding: {exc}") from exc
    return MatPoly(d, k, coeffs)


def encode_pencil(a):
    out = encode_tuple(a)
    out["pencil"] = True
    return out


def decode_pencil(obj):
    return decode_tuple(obj)


def load_json(path_or_text):
    """Parse JSON from a file path, or from the text itself when it starts with '{' or '['."""
    text = str(path_or_text).strip()
    try:
        if text.startswith("{") or text.startswith("["):
            return json.loads(text)
        with open(text) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path_or_text!r}: {exc}") from exc


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and dataclass-like objects."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2:
                return encode_cmatrix(obj)
            return [to_jsonable(v) for v in obj]
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    return obj
