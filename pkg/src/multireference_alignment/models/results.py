#!/usr/bin/env python3
"""
Data containers passed between the solvers, services and CLI
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..utils.errors import InvalidDirectionError, LengthMismatchError, MraError

SIMPLEX_TOL = 1e-12

DIAGNOSTIC_KEYS = ("eigen_gap", "ps_min", "dc_sum", "iterations", "objective")


def as_signal(values: Any, name: str = "signal") -> np.ndarray:
    """Coerce to a finite 1-D float array of length at least 1"""
    array = np.asarray(values, dtype=float)
    if array.ndim != 1 or array.size < 1:
        raise LengthMismatchError(f"{name} must be a non-empty vector, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise MraError(f"{name} has non-finite entries")
    return array


def is_on_simplex(probs: np.ndarray, tol: float = SIMPLEX_TOL) -> bool:
    probs = np.asarray(probs, dtype=float)
    return bool(np.all(probs >= 0) and abs(probs.sum() - 1.0) <= tol * max(1, probs.size))


def as_distribution(values: Any, name: str = "rho") -> np.ndarray:
    """Coerce to a probability vector, rejecting anything off the simplex"""
    probs = as_signal(values, name)
    if not is_on_simplex(probs):
        raise MraError(f"{name} is not a probability vector (min={probs.min():.3g}, sum={probs.sum():.15g})")
    return probs


def check_same_length(*arrays: np.ndarray) -> int:
    lengths = {np.asarray(a).shape[-1] for a in arrays}
    if len(lengths) != 1:
        raise LengthMismatchError(f"Length mismatch: {sorted(lengths)}")
    return lengths.pop()


@dataclass
class ObservationSet:
    """N measurements of length L with their known noise level"""

    data: np.ndarray
    sigma: float
    true_shifts: Optional[np.ndarray] = None

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise MraError(f"Observation matrix must be N x L with N >= 1, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise MraError("Observation matrix has non-finite entries")
        self.sigma = float(self.sigma)
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise MraError(f"sigma must be finite and nonnegative, got {self.sigma}")
        if self.true_shifts is not None:
            self.true_shifts = np.asarray(self.true_shifts, dtype=np.int64) % self.L
            if self.true_shifts.shape != (self.N,):
                raise LengthMismatchError(
                    f"true_shifts has shape {self.true_shifts.shape}, expected ({self.N},)"
                )

    @property
    def N(self) -> int:
        return int(self.data.shape[0])

    @property
    def L(self) -> int:
        return int(self.data.shape[1])


@dataclass
class MomentPair:
    """First moment (length L) and second moment (L x L)"""

    m1: np.ndarray
    m2: np.ndarray
    source: str = "population"
    N: Optional[int] = None
    sigma: Optional[float] = None

    def __post_init__(self):
        self.m1 = as_signal(self.m1, "m1")
        self.m2 = np.asarray(self.m2, dtype=float)
        L = self.m1.size
        if self.m2.shape != (L, L):
            raise LengthMismatchError(f"m2 has shape {self.m2.shape}, expected ({L}, {L})")
        if self.source not in ("population", "sample"):
            raise MraError(f"Unknown moment source {self.source!r}")
        if self.source == "sample":
            self.m2 = 0.5 * (self.m2 + self.m2.T)

    @property
    def L(self) -> int:
        return int(self.m1.size)

    @property
    def is_population(self) -> bool:
        return self.source == "population"


@dataclass
class MomentTensor:
    """Order-d moment tensor stored as an array of shape (L,) * d"""

    order: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.order < 1 or self.entries.ndim != self.order:
            raise MraError(f"Tensor of order {self.order} has {self.entries.ndim} axes")
        if len(set(self.entries.shape)) != 1:
            raise MraError(f"Tensor axes differ in length: {self.entries.shape}")

    @property
    def L(self) -> int:
        return int(self.entries.shape[0])

    def norm2(self) -> float:
        return float(np.sum(self.entries ** 2))


@dataclass
class PerturbationDirection:
    """Joint direction (z, theta) in signal and distribution space"""

    z: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.z = as_signal(self.z, "z")
        self.theta = as_signal(self.theta, "theta")
        check_same_length(self.z, self.theta)

    def validate_against(self, rho: np.ndarray, tol: float = 1e-12) -> None:
        """Check the direction keeps rho on the simplex to first order"""
        rho = np.asarray(rho, dtype=float)
        check_same_length(self.theta, rho)
        if abs(self.theta.sum()) > tol * max(1.0, np.abs(self.theta).sum()):
            raise InvalidDirectionError(f"theta must sum to zero, got {self.theta.sum():.3g}")
        if np.any(self.theta[rho == 0] < 0):
            raise InvalidDirectionError("theta is negative where rho vanishes")


@dataclass
class AlignmentResult:
    shift: int
    aligned: np.ndarray
    error: float


@dataclass
class RecoveryResult:
    """Estimate returned by every solver"""

    x_hat: np.ndarray
    rho_hat: np.ndarray
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    method: str = ""
    trace: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.x_hat = np.asarray(self.x_hat, dtype=float)
        self.rho_hat = np.asarray(self.rho_hat, dtype=float)
        for key in DIAGNOSTIC_KEYS:
            self.diagnostics.setdefault(key, 0 if key == "iterations" else 0.0)


@dataclass
class EmState:
    x: np.ndarray
    rho: np.ndarray
    loglik: float
    iteration: int = 0


@dataclass
class SpikedPrediction:
    """Limiting squared cosine between clean and noisy top eigenvectors"""

    cos2: float
    above_threshold: bool
    critical_lambda: float
    aspect_ratio: float

    @property
    def cosine(self) -> float:
        return float(np.sqrt(self.cos2))


@dataclass
class SpikedTrial:
    empirical_cosine: float
    predicted_cosine: float
    empirical_mse: float
    predicted_mse: float


@dataclass
class BoundReport:
    """Orbit Chapman-Robbins bound; every chi-square quantity is leading order in 1/sigma"""

    d: Optional[int]
    k_d: float
    lambda_N: float
    bound: float
    orbit_distance2: float
    bound_composed: float = float("nan")
    chi2: float = 0.0
    indistinguishable: bool = False
    leading_order: bool = True

    def as_row(self) -> Dict[str, Any]:
        return {
            "d": self.d if self.d is not None else "indistinguishable",
            "k_d": self.k_d,
            "lambda_N": self.lambda_N,
            "chi2": self.chi2,
            "bound": self.bound,
            "bound_composed": self.bound_composed,
            "orbit_distance2": self.orbit_distance2,
            "leading_order": self.leading_order,
        }


@dataclass
class ExperimentReport:
    kind: str
    rows: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
