"""Exception types shared across the package."""


class ReluForgeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ReluForgeError):
    """An evaluation input was rejected (wrong dimension, non-finite values)."""


class StructuralError(ReluForgeError):
    """Operands violate a structural contract (widths, dimensions, shapes)."""


class NoFreeChannelError(StructuralError):
    """Composition needs a structurally free channel in the inner network.

    Raised when the inner network's output cannot be surfaced at its last
    hidden layer because no channel is unused over the layers that would
    host the running accumulator. Padding the inner network by one unit
    always clears the condition.
    """


class ConversionError(ReluForgeError):
    """A network rewrite could not be carried out."""


class ParameterError(ReluForgeError):
    """A builder or verifier parameter is out of its admissible range."""


class SeriesTruncationError(ReluForgeError):
    """A power series head lacks coefficients required by the truncation order."""


class DocumentError(ReluForgeError):
    """Base class for serialization problems."""


class DocumentParseError(DocumentError):
    """The document text is not valid JSON. Carries the byte offset."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class DocumentVersionError(DocumentError):
    """The document's format version is not supported."""


class DocumentInvariantError(DocumentError):
    """The document parsed but the reconstructed network fails validation."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)
