"""Exception and warning types shared across the pipeline."""

from __future__ import annotations


class CertlabError(Exception):
    """Base class for all certlab errors."""


class SchemaError(CertlabError):
    """An input file does not parse under its expected schema."""


class ConverterFailed(CertlabError):
    """External text converter exited nonzero or produced no output."""


class RulesParseError(CertlabError):
    """A rules file is malformed or contains a non-compiling pattern."""

    def __init__(self, message: str, group: str | None = None, pattern_index: int | None = None):
        super().__init__(message)
        self.group = group
        self.pattern_index = pattern_index


class NotAnId(CertlabError):
    """A raw string matches no ID pattern of the requested scheme."""


class UnknownSeed(CertlabError):
    """A queried node is not present in the reference graph."""


class DegenerateInput(CertlabError):
    """A statistic is undefined for the given input (e.g. constant vector)."""


class SchemaMismatch(CertlabError):
    """Two snapshots have incompatible schema versions."""


class BindError(CertlabError):
    """The service could not bind its listen address."""


class BadSelector(CertlabError):
    """A subscription selector does not parse."""


class ConflictWarning(UserWarning):
    """CSV and HTML metadata disagree on a non-authoritative field."""
