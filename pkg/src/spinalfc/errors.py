"""Exception types shared across the package.

The CLI maps these onto exit codes: config problems exit 2, data/format
problems exit 3, everything else exits 1.
"""


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


class ConfigError(ValueError):
    """A configuration value or key is invalid."""


class DataError(ValueError):
    """Dataset contents violate a contract (bad labels, count mismatch)."""


class FormatError(ValueError):
    """A binary file does not match its declared format."""


class StateError(RuntimeError):
    """An operation was called out of order (e.g. backward before forward)."""


class SizeError(ValueError):
    """A requested computation exceeds a safety limit."""
