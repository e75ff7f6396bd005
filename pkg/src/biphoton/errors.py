"""Exception types shared across the toolkit.

The CLI maps these onto process exit codes: ``ValidationError`` (and any
plain ``ValueError``) exits with status 2, ``RegimeError`` with status 3.
"""


class ValidationError(ValueError):
    """Bad or inconsistent input parameters (wrong units, non-normalized
    amplitudes, grid mismatches, malformed files)."""


class RangeError(ValidationError):
    """Wavelength outside the validity range of a material's dispersion fit.

    Raised instead of silently extrapolating the Sellmeier polynomial.
    """


class PhaseMatchError(ValidationError):
    """No real phase-matching solution exists for the requested geometry."""


class RegimeError(RuntimeError):
    """A requested computation falls outside the validity regime of the
    approximation it is built on (e.g. focusing too strong for the
    factorized Gaussian-beam phase matching).  Carries the numeric margin
    so callers can report how badly the check failed."""

    def __init__(self, message: str, lhs: float = float("nan"),
                 rhs: float = float("nan")):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs
