"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit 2, physics
coverage / data-integrity problems exit 3.
"""
from __future__ import annotations


class ThzRisError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(ThzRisError):
    """A scenario file or argument failed validation.

    ``kind`` is one of ``parse``, ``schema``, ``reference``; ``path`` points
    at the offending field (e.g. ``ris[0].d_x``) when known.
    """

    def __init__(self, message: str, *, kind: str = "schema", path: str | None = None,
                 line: int | None = None, col: int | None = None):
        self.kind = kind
        self.path = path
        self.line = line
        self.col = col
        super().__init__(message)

    def as_dict(self) -> dict:
        return {
            "error": "validation",
            "kind": self.kind,
            "path": self.path,
            "line": self.line,
            "col": self.col,
            "message": str(self),
        }


class CoverageError(ThzRisError):
    """Input falls outside the validity range of a physics table or model."""


class DataIntegrityError(ThzRisError):
    """A shipped coefficient table does not match its recorded checksum."""
