"""Exception hierarchy shared by every dfshift module."""


class DFSError(Exception):
    """Base class for all dfshift errors."""


class InvalidDims(DFSError, ValueError):
    pass


class RangeError(DFSError, IndexError):
    pass


class ShapeMismatch(DFSError, ValueError):
    pass


class InvalidInput(DFSError, ValueError):
    pass


class ConfigError(DFSError, ValueError):
    pass


class InvalidLabel(DFSError, ValueError):
    pass


class StateError(DFSError, RuntimeError):
    pass


class NumericsError(DFSError, ArithmeticError):
    pass


class FormatError(DFSError, ValueError):
    pass


class GenError(DFSError, ValueError):
    pass


class EmptyEval(DFSError, ValueError):
    pass
