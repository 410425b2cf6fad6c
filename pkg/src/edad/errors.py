"""Exception hierarchy shared by every edad module."""


class EdadError(Exception):
    """Base class for all errors raised by edad."""


class DimensionError(EdadError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class SingularMatrixError(EdadError, ArithmeticError):
    """Inversion of a matrix that is not full rank."""


class ResourceLimitError(EdadError, RuntimeError):
    """A generation or search exceeded its configured limit."""


class UnsupportedSizeError(EdadError, ValueError):
    """Number of pairs outside the supported range."""


class InvalidSubspaceError(EdadError, ValueError):
    """A basis is dependent or not isotropic."""


class CacheError(EdadError):
    """A transversal cache is unusable."""


class CorruptCacheError(CacheError):
    """A transversal cache file failed validation."""


class MissingCacheError(CacheError, FileNotFoundError):
    """No cache file exists for the requested transversal."""


class DomainError(EdadError, ValueError):
    """A model parameter lies outside its admissible range."""


class SolverError(EdadError, RuntimeError):
    """A root bracket does not change sign."""


class ConfigurationError(EdadError, ValueError):
    """Invalid run configuration or option combination."""
