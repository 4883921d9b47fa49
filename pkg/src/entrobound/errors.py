"""Exception types shared across the package.

The CLI maps each of these onto a distinct exit code, so keep the
hierarchy flat and the meanings disjoint.
"""

from __future__ import annotations

__all__ = [
    "ModelError",
    "MissingCertificateError",
    "AdmissibilityError",
    "ResourceCapError",
    "ReportIntegrityError",
    "SweepAborted",
]


class ModelError(ValueError):
    """Invalid model parameters or a query the model cannot answer exactly,
    such as a mass lookup beyond a finite table or sampling an unlisted tail."""


class MissingCertificateError(ModelError):
    """No tail certificate is available for an operation that needs one."""


class AdmissibilityError(ValueError):
    """The moment order lies outside the interval the tail certificate admits."""


class ResourceCapError(RuntimeError):
    """Honouring the requested tolerance would exceed the truncation budget."""


class ReportIntegrityError(ValueError):
    """A simulation report is internally inconsistent on re-derivation."""


class SweepAborted(RuntimeError):
    """A sweep stopped on a hard error; ``partial`` holds the finished reports."""

    def __init__(self, message: str, partial: list):
        super().__init__(message)
        self.partial = partial
