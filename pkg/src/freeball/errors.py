"""Exception types shared across the package."""


class FreeballError(Exception):
    """Base class for all package errors."""

    code = "error"

    def to_json(self):
        out = {"error": self.code, "message": str(self)}
        out.update(getattr(self, "details", {}) or {})
        return out


class InputError(FreeballError):
    """Malformed input (bad JSON, wrong shapes, bad options)."""

    code = "input_error"


class DimensionMismatch(InputError):
    code = "dimension_mismatch"


class SingularMatrix(FreeballError):
    """Raised when a matrix is numerically singular."""

    code = "singular"

    def __init__(self, message, smallest_sv=None, cond=None):
        super().__init__(message)
        self.smallest_sv = smallest_sv
        self.cond = cond
        self.details = {"smallest_sv": smallest_sv}


class ExprSyntaxError(InputError):
    """Parse failure with a position and the set of tokens that would have been accepted."""

    code = "syntax_error"

    def __init__(self, message, line, col, expected=()):
        self.line = line
        self.col = col
        self.expected = sorted(set(expected))
        super().__init__(f"{message} at line {line}, col {col}; expected one of {self.expected}")
        self.details = {"line": line, "col": col, "expected": self.expected}


class UnknownVariable(InputError):
    code = "unknown_variable"


class OutOfDomain(FreeballError):
    """An inverse node was hit at a (numerically) singular argument."""

    code = "out_of_domain"

    def __init__(self, path, smallest_sv):
        self.path = tuple(path)
        self.smallest_sv = float(smallest_sv)
        super().__init__(f"singular inverse at node path {list(self.path)} (smallest sv {self.smallest_sv:.3e})")
        self.details = {"path": list(self.path), "smallest_sv": self.smallest_sv}


class DegenerateExpression(FreeballError):
    code = "degenerate_expression"


class NotPolynomial(FreeballError):
    code = "not_polynomial"


class AllSamplesOutOfDomain(FreeballError):
    code = "all_samples_out_of_domain"


class NotContractive(FreeballError):
    code = "not_contractive"


class SimilarityNotFound(FreeballError):
    code = "similarity_not_found"


class NotMonicAtZero(FreeballError):
    code = "not_monic_at_zero"


class AlreadyLinear(FreeballError):
    """A Higman step was requested on a matrix with no word of degree >= 2."""

    code = "already_linear"


class IdentityViolation(FreeballError):
    code = "identity_violation"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
        self.details = {"residual": residual}


class OutOfPencilDomain(FreeballError):
    code = "out_of_pencil_domain"


class StabilityViolation(FreeballError):
    """A point x in the ball with P(rx) singular was met while estimating a sup."""

    code = "stability_violation"

    def __init__(self, message, r=None, point=None, smallest_sv=None):
        super().__init__(message)
        self.r = r
        self.point = point
        self.smallest_sv = smallest_sv
        self.details = {"r": r, "smallest_sv": smallest_sv}


class NotAccretive(FreeballError):
    code = "not_accretive"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
