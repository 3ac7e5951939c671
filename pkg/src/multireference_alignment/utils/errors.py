#!/usr/bin/env python3
"""
Exception hierarchy for the multireference alignment toolkit

Every error carries a human readable ``detail``, an optional ``diagnostics``
dict and the CLI ``exit_code`` it maps to (1 usage, 2 solver, 3 I/O).
"""

from typing import Any, Dict, Optional


class MraError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 2

    def __init__(self, detail: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})

    def with_diagnostics(self, diagnostics: Dict[str, Any]) -> "MraError":
        """Merge extra diagnostics into the error and return it for re-raising"""
        merged = dict(diagnostics)
        merged.update(self.diagnostics)
        self.diagnostics = merged
        return self

    def __str__(self) -> str:
        if not self.diagnostics:
            return self.detail
        extras = ", ".join(f"{key}={value}" for key, value in sorted(self.diagnostics.items()))
        return f"{self.detail} [{extras}]"


class ConfigError(MraError, ValueError):
    """Invalid configuration or command-line usage"""

    exit_code = 1


class DataFormatError(MraError, OSError):
    """Unreadable, unwritable or malformed data container"""

    exit_code = 3


class LengthMismatchError(MraError, ValueError):
    """Two vectors that must share length L do not"""


class ZeroNormError(MraError, ValueError):
    """Reference signal has zero norm"""


class TensorBudgetError(MraError, ValueError):
    """Requested moment tensor exceeds the configured order or entry budget"""


class MissingShiftsError(MraError, ValueError):
    """Observations carry no true shifts"""


class DegenerateWeightsError(MraError, ValueError):
    """Posterior weights are undefined (zero noise level)"""


class NonpositiveWeightError(MraError, ValueError):
    """Weighted log maximization requires strictly positive weights"""


class PeriodError(MraError, ValueError):
    """Period does not divide L or is too large for the construction"""


class InvalidDirectionError(MraError, ValueError):
    """Perturbation direction leaves the simplex"""


class IndistinguishablePairError(MraError, ValueError):
    """Two (signal, distribution) pairs agree on every moment up to d_max"""


class SolverError(MraError):
    """A recovery algorithm could not produce an estimate"""


class ZeroDCError(SolverError):
    """Sum of the first moment vanishes so the rescaling step is undefined"""


class VanishingSpectrumError(SolverError):
    """Power spectrum has entries below the floor"""


class DegenerateEigengapError(SolverError):
    """Whitened second moment has repeated eigenvalues"""


class NoOrthogonalEigenvectorError(SolverError):
    """No eigenvector of the whitened matrix is orthogonal to its half-length shift"""
