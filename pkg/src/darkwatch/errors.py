"""Exception hierarchy shared across the pipeline.

Every error carries a stable ``code`` string; the HTTP service and the
CLI map codes to status codes / exit diagnostics without string-matching
messages.
"""

from __future__ import annotations


class DarkwatchError(Exception):
    code = "error"


class InvalidUrlError(DarkwatchError):
    code = "invalid-url"


class StorageIOError(DarkwatchError):
    code = "storage-io"


class UnknownDocumentError(DarkwatchError):
    code = "unknown-doc"


class ProviderUnavailableError(DarkwatchError):
    code = "provider-unavailable"


class EmptyCorpusError(DarkwatchError):
    code = "empty-corpus"


class VocabMismatchError(DarkwatchError):
    code = "vocab-mismatch"


class DegenerateLabelsError(DarkwatchError):
    code = "degenerate-labels"


class BadKError(DarkwatchError):
    code = "bad-k"


class DimMismatchError(DarkwatchError):
    code = "dim-mismatch"


class BadClusterError(DarkwatchError):
    code = "bad-cluster"


class EmptyForumError(DarkwatchError):
    code = "empty-forum"


class UnknownForumError(DarkwatchError):
    code = "unknown-forum"


class ClassMismatchError(DarkwatchError):
    code = "class-mismatch"


class AuthError(DarkwatchError):
    code = "auth-error"


class TransportError(DarkwatchError):
    code = "transport-error"


class MalformedResponseError(DarkwatchError):
    code = "malformed-response"


class MalformedMatchError(DarkwatchError):
    code = "malformed-match"


class NotComputedError(DarkwatchError):
    code = "not-computed"


class ConfigError(DarkwatchError):
    code = "config-error"
