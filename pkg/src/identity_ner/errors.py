"""Exception hierarchy shared across the toolkit.

Everything raised on purpose derives from IdentityNerError so the CLI can
map library failures to a "data error" exit code in one place.
"""


class IdentityNerError(Exception):
    """Base class for all toolkit errors."""


class SpanBoundaryError(IdentityNerError):
    """A span does not line up with token boundaries."""


class OverlapError(IdentityNerError):
    """Two spans in the same document overlap."""


class LengthMismatchError(IdentityNerError):
    """Parallel sequences have different lengths."""


class EmptyDocumentError(IdentityNerError):
    """An operation that needs at least one token got an empty document."""


class EmptyDatasetError(IdentityNerError):
    """Training was attempted on an empty dataset."""


class DimensionMismatchError(IdentityNerError):
    """A vector does not match the model's feature dimension."""


class SpanOutOfBoundsError(IdentityNerError):
    """A span reaches outside its text."""


class ModelAlphabetError(IdentityNerError):
    """A model's tag or class alphabet is not the one the pipeline needs."""


class ModelKindError(IdentityNerError):
    """A model file holds a different kind of model than requested."""


class FormatVersionError(IdentityNerError):
    """A model file was written with an unsupported format version."""


class CorruptFileError(IdentityNerError):
    """A model file failed its checksum."""


class CorpusFormatError(IdentityNerError):
    """A corpus file contains a malformed or invalid record."""


class UnknownItemError(IdentityNerError):
    """A review decision references an item that is not in the queue."""


class InvalidEditedSpanError(IdentityNerError):
    """An edit decision carries spans that are invalid for the item's text."""


class MalformedDecisionError(IdentityNerError):
    """A review decision record is missing or misusing fields."""


class ConstantVectorError(IdentityNerError):
    """Pearson correlation is undefined for a constant vector."""
