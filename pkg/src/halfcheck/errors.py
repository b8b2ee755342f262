"""Typed error taxonomy shared across the package.

The hierarchy encodes what KIND of failure occurred; the CLI maps kinds to
exit codes (2 config/precondition, 3 data, 4 backend) and the service maps
them to HTTP statuses.
"""


class HalfcheckError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HalfcheckError):
    """Invalid configuration: bad keys, unbound backends, bad paths."""


class PreconditionError(ConfigError):
    """An operation was invoked in a state that violates its contract."""


class DataError(HalfcheckError):
    """Missing or malformed input data (files, records, matrices)."""


class BackendError(HalfcheckError):
    """A model backend failed or refused its input."""


class BackendUnavailable(BackendError):
    """The backend could not be reached or is not operational."""


class InputTooLong(BackendError):
    """Input exceeds the backend's declared maximum length."""


class NoViableCandidates(BackendError):
    """The generator produced no candidate satisfying its constraints."""
