"""Error taxonomy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, data errors
(corpus/prediction content) exit 2, resource errors (models, embeddings,
lexicons, dictionaries) exit 3.
"""


class AggdetectError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(AggdetectError):
    """Bad flags, bad config keys, or an invalid block combination."""


class DataError(AggdetectError):
    """Malformed or inconsistent corpus / prediction data."""


class ResourceError(AggdetectError):
    """A referenced resource (model, embeddings, lexicon, dictionary) is
    missing, malformed, or fails its checksum."""
