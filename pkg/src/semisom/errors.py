"""Exception types shared across the package."""


class SemisomError(Exception):
    """Base class for all errors raised by semisom."""


class InputError(SemisomError):
    """Bad input data: malformed files, dimension mismatches, empty datasets."""


class ParameterError(SemisomError):
    """A parameter value outside its valid range."""


class StateError(SemisomError):
    """An operation was requested in a state that cannot support it."""


class MapFormatError(InputError):
    """A map file is corrupt, truncated, or has an unsupported version."""
