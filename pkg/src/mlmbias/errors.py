"""Exception hierarchy.

Grouped by how the CLI maps them to exit codes: InputError subclasses
are configuration/data problems (exit 2), BackendError subclasses are
scorer/transport problems (exit 3), MetricUndefinedError means a metric
has no defined value on the given input (exit 4).
"""


class MlmBiasError(Exception):
    """Base class for all package errors."""


class InputError(MlmBiasError):
    """Invalid configuration or input data."""


class ConfigError(InputError):
    pass


class LexiconError(InputError):
    pass


class LexiconParseError(LexiconError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(loc + message)
        self.path = path
        self.line = line


class LexiconInvariantError(LexiconError):
    """A lexicon invariant is violated; names the offending word."""

    def __init__(self, message: str, word: str | None = None):
        super().__init__(message)
        self.word = word


class CorpusError(InputError):
    pass


class FixtureError(InputError):
    """Table-backend fixture failed to parse or validate."""


class PairGenError(InputError):
    pass


class BackendError(MlmBiasError):
    """Scorer backend failure."""


class UnknownQueryError(BackendError):
    """Table backend received a query outside its fixture."""


class TransportError(BackendError):
    """Remote backend wire failure; carries request context."""

    def __init__(self, message: str, request: str | None = None):
        super().__init__(f"{message} [{request}]" if request else message)
        self.request = request


class BackendConnectionError(TransportError):
    pass


class BackendTimeoutError(TransportError):
    pass


class MalformedResponseError(TransportError):
    pass


class BackendRequestError(TransportError):
    """Server answered with an error status."""

    def __init__(self, message: str, status: int | None = None, request: str | None = None):
        super().__init__(message, request=request)
        self.status = status


class EmbeddingError(MlmBiasError):
    """Dimension mismatch or zero vector in similarity computation."""


class MetricUndefinedError(MlmBiasError):
    """Metric has no defined value (empty input, zero denominator)."""
