"""Exception hierarchy shared across the package.

Each class carries the CLI exit code used when it escapes to the
command line: 2 for configuration and file-format problems, 3 for
capacity/bounds violations, 4 for numerical failures.
"""


class PseudodiceError(Exception):
    exit_code = 1


class ConfigError(PseudodiceError):
    """Bad configuration value, unknown key, or unusable CLI arguments."""

    exit_code = 2


class FormatError(PseudodiceError):
    """Malformed data file; the message names the path and position."""

    exit_code = 2


class CapacityError(PseudodiceError):
    """A request exceeds a configured or available capacity."""

    exit_code = 3


class BoundsError(PseudodiceError):
    """An index range does not fit the sequence it addresses."""

    exit_code = 3


class DomainError(PseudodiceError):
    """Operation applied outside its domain (empty dataset, bad shape)."""

    exit_code = 3


class DivergenceError(PseudodiceError):
    """Training produced a non-finite loss; ``epoch`` is 1-indexed."""

    exit_code = 4

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class ValidationError(PseudodiceError):
    """A report failed its finiteness/consistency gate before emission."""

    exit_code = 4
