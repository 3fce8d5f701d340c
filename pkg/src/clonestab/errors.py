"""Exception hierarchy shared across the toolkit.

ConfigError maps to CLI exit code 1, DataError (and subclasses) to exit
code 2. Everything else is a bug.
"""


class CloneStabError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CloneStabError):
    """Unusable configuration or input artifact (bad repo path, malformed
    fixture spec, malformed manifest, invalid options)."""


class DataError(CloneStabError):
    """The inputs were readable but the requested data does not exist or
    is inconsistent."""


class EmptyHistoryError(DataError):
    """No revision changed any file matching the path filter."""


class RevisionNotFoundError(DataError):
    """A revision id is not part of the analyzed history."""


class PathNotFoundError(DataError):
    """A file path does not exist at the requested revision."""


class InternalConsistencyError(CloneStabError):
    """Invariant violation inside the pipeline; indicates a bug, not bad
    user input."""
