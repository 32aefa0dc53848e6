"""Exception and warning types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit 2,
numerical failures (underdetermined systems, degenerate eigenproblems) exit 3,
file-format and I/O problems exit 4.
"""

from __future__ import annotations


class RecipcalError(Exception):
    """Base class for all package errors."""


class ConfigError(RecipcalError):
    """A scenario/config value violates a documented precondition."""


class InvalidParameterError(RecipcalError):
    """A model parameter is outside its valid range."""


class InvalidInputError(RecipcalError):
    """An input array is unusable (e.g. identically zero where a direction is needed)."""


class UnsupportedArchitectureError(RecipcalError):
    """Operation is defined only for the other array architecture."""


class UnsupportedPartitionError(RecipcalError):
    """Requested antenna partition cannot be formed."""


class SingularHardwareError(RecipcalError):
    """A hardware response that must be invertible has a zero entry."""


class SingularCalibrationError(RecipcalError):
    """A calibration vector that must be invertible has a zero entry."""


class ContractViolationError(RecipcalError):
    """An input violates a structural contract (e.g. non-Hermitian cost matrix)."""


class UnderdeterminedSystemError(RecipcalError):
    """The least-squares measurement system has too few independent equations.

    ``condition`` names the violated requirement: ``"K"`` when the stacked
    pilot matrix is rank-deficient (too few transmit beams), ``"L"`` when the
    stacked combiner matrix is rank-deficient (too few receive beams).
    """

    def __init__(self, condition: str, message: str):
        super().__init__(message)
        self.condition = condition


class CsvFormatError(RecipcalError):
    """A CSV file does not follow the documented schema.

    Carries the 1-based line number where parsing failed (0 for file-level
    problems such as a missing version header).
    """

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class DegenerateSolutionWarning(UserWarning):
    """The two smallest eigenvalues of the calibration cost matrix nearly coincide.

    The estimated calibration vector is then not unique and should not be
    trusted; typical causes are a disconnected measurement graph or an
    all-zero channel.
    """
