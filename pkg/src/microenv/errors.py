class MicroenvError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(MicroenvError):
    """A required column or configuration key is missing or malformed."""


class ValidationError(MicroenvError):
    """Input data violates an invariant (duplicate ids, non-finite values, ...)."""


class FormatError(MicroenvError):
    """A file is structurally unusable (empty, zero columns, ...)."""
