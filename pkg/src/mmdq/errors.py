"""Exception types shared across the toolkit.

Every failure mode that callers are expected to handle gets its own class so
tests and CLI error mapping can catch them precisely. ``MmdqError`` is the
common base; I/O trouble is kept separate so the CLI can map it to a distinct
exit code.
"""


class MmdqError(Exception):
    """Base class for all validation and computation errors in mmdq."""


class IoFailure(MmdqError):
    """Filesystem-level failure while reading or writing corpus artifacts."""


# corpus loading
class MissingColumn(MmdqError):
    pass


class DuplicateId(MmdqError):
    pass


class AspectNotInText(MmdqError):
    pass


class UnknownLabel(MmdqError):
    pass


class MalformedSidecar(MmdqError):
    pass


class DimMismatch(MmdqError):
    pass


class NonFiniteValue(MmdqError):
    pass


class WrongKind(MmdqError):
    pass


# image quality
class UndecodableImage(MmdqError):
    pass


class ZeroPixelImage(MmdqError):
    pass


class InconsistentLMax(MmdqError):
    pass


# relevance
class ZeroVector(MmdqError):
    pass


class BatchTooSmall(MmdqError):
    pass


# weighting / training
class NonFiniteComponent(MmdqError):
    pass


class ShapeMismatch(MmdqError):
    pass


class NegativeWeight(MmdqError):
    pass


class DegenerateData(MmdqError):
    pass


# synthesis
class UnknownKind(MmdqError):
    pass
