"""Exception hierarchy shared by all synergy modules."""


class SynergyError(Exception):
    """Base class for every error raised by this package."""


class InputError(SynergyError):
    """Bad user-supplied input (maps to CLI exit code 2)."""


class EmptySampleError(SynergyError):
    """An information measure was requested over zero records (exit code 3)."""


class MalformedCodeError(InputError, ValueError):
    """A NACE code could not be normalized."""


class MalformedZipError(InputError, ValueError):
    """No 5-digit ZIP code could be recovered from the raw value."""


class UnresolvableGeographyError(InputError):
    """Neither the concordance nor the record itself supplies a state."""


class MissingColumnError(InputError):
    """A required CSV column is absent from the header."""


class EmptyFileError(InputError):
    """The input file has no header row."""


class CsvParseError(InputError):
    """A CSV row could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptySectorError(EmptySampleError):
    """No record carries the requested sector flag."""


class DegenerateVarianceError(SynergyError, ValueError):
    """A correlation input vector is constant."""


class DomainTooLargeError(SynergyError, ValueError):
    """The dense oracle would need more than the allowed number of cells."""


class InvalidSpecError(SynergyError, ValueError):
    """A synthetic-data specification is inconsistent."""
