"""Exception hierarchy shared by every module.

Each error carries a stable ``code`` (used in the HTTP error envelope and
CLI messages) and an ``exit_code`` (CLI process exit status: 3 validation,
4 I/O, 5 numeric; argparse owns 2 for usage errors).
"""


class LatentScopeError(Exception):
    code = "error"
    exit_code = 1

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message)
        self.detail = detail


class InvalidArgumentError(LatentScopeError):
    code = "invalid-argument"
    exit_code = 3


class ShapeError(LatentScopeError):
    code = "shape"
    exit_code = 3


class ValidationError(LatentScopeError):
    code = "validation"
    exit_code = 3


class DegenerateGeometryError(LatentScopeError):
    code = "degenerate-geometry"
    exit_code = 3


class NotFoundError(LatentScopeError):
    code = "not-found"
    exit_code = 3


class ConflictError(LatentScopeError):
    code = "conflict"
    exit_code = 3


class FormatError(LatentScopeError):
    code = "format"
    exit_code = 4


class IOFailureError(LatentScopeError):
    code = "io"
    exit_code = 4


class NumericError(LatentScopeError):
    code = "numeric"
    exit_code = 5
