"""Exception types raised by the index, the query engine and the benchmark pipeline."""


class HSTIError(Exception):
    """Base exception for hsti_indexer errors."""


class OutOfBoundsError(HSTIError, ValueError):
    """Raised when a point, cell index or code falls outside its valid domain."""


class EmptyDatasetError(HSTIError, ValueError):
    """Raised when a dataset has no usable records."""


class InvalidParameterError(HSTIError, ValueError):
    """Raised when a parameter or record value is invalid."""


class RoutingViolationError(HSTIError, ValueError):
    """Raised when an object is sent to a region whose key range does not cover it."""


class ConfigurationError(HSTIError, ValueError):
    """Raised when configuration is invalid."""


class FrozenIndexError(HSTIError):
    """Raised when writing to an index that has been frozen."""


class ChecksumMismatchError(HSTIError):
    """Raised when two query methods disagree on the same query."""
