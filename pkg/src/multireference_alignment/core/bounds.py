#!/usr/bin/env python3
"""
Chi-square leading terms and orbit Chapman-Robbins lower bounds

All chi-square quantities are leading order in 1/sigma; remainders are not computed.
"""

import math
from typing import Optional, Tuple

import numpy as np

from ..models.results import BoundReport
from ..utils.config_manager import get_config
from ..utils.errors import IndistinguishablePairError, PeriodError
from ..utils.logger import log
from .cyclic import orbit_distance2
from .moments import fourier_moment_array

# Squared tensor differences below this fraction of ||M^d||^2 count as zero
ZERO_DIFFERENCE_TOL = 1e-18


def _d_max(d_max: Optional[int]) -> int:
    return int(d_max if d_max is not None else get_config().get("moment_settings.d_max", 3))


def first_distinguishing_order(x: np.ndarray, rho: np.ndarray, x_alt: np.ndarray, rho_alt: np.ndarray,
                               d_max: Optional[int] = None) -> Tuple[Optional[int], float]:
    """
    Smallest d <= d_max at which the moment tensors of the two pairs differ

    Returns (d, K^d) with K^d = ||M^d - M~^d||^2 / d!, or (None, 0.0) when the
    pairs agree on every order up to d_max.
    """
    for d in range(1, _d_max(d_max) + 1):
        first = fourier_moment_array(x, rho, d)
        second = fourier_moment_array(x_alt, rho_alt, d)
        size = first.size
        # Parseval: ||M||^2 = ||F_d M||^2 / L^d
        difference = float(np.sum(np.abs(first - second) ** 2)) / size
        scale = max(float(np.sum(np.abs(first) ** 2)), float(np.sum(np.abs(second) ** 2))) / size
        if difference > ZERO_DIFFERENCE_TOL * max(scale, np.finfo(float).tiny):
            return d, difference / math.factorial(d)
    return None, 0.0


def chi2_leading(x: np.ndarray, rho: np.ndarray, x_alt: np.ndarray, rho_alt: np.ndarray,
                 sigma: float, d_max: Optional[int] = None) -> float:
    """sigma^(-2d) K^d; zero (with a warning) for pairs indistinguishable up to d_max"""
    d, k_d = first_distinguishing_order(x, rho, x_alt, rho_alt, d_max)
    if d is None:
        log(f"⚠️  Pairs are indistinguishable up to order {_d_max(d_max)}; chi-square leading term is 0", "warning")
        return 0.0
    return float(sigma ** (-2 * d) * k_d)


def orbit_bound(x: np.ndarray, rho: np.ndarray, x_alt: np.ndarray, rho_alt: np.ndarray,
                N: int, sigma: float, d_max: Optional[int] = None) -> BoundReport:
    """
    MSE lower bound from the pair (x, rho) versus (x_alt, rho_alt)

    ``bound`` uses exp(lambda_N K^d) - 1 for the N-fold chi-square;
    ``bound_composed`` uses (1 + chi2)^N - 1 with the same leading-order chi2.
    """
    distance = orbit_distance2(x_alt, x, normalized=True)
    d, k_d = first_distinguishing_order(x, rho, x_alt, rho_alt, d_max)
    if d is None:
        raise IndistinguishablePairError(
            f"pairs agree on all moments up to order {_d_max(d_max)}", {"orbit_distance2": distance}
        )
    lambda_N = N / sigma ** (2 * d)
    chi2 = sigma ** (-2 * d) * k_d
    bound = distance / math.expm1(lambda_N * k_d) if lambda_N * k_d < 700 else 0.0
    composed_exponent = N * math.log1p(chi2)
    bound_composed = distance / math.expm1(composed_exponent) if composed_exponent < 700 else 0.0
    return BoundReport(
        d=d,
        k_d=float(k_d),
        lambda_N=float(lambda_N),
        bound=float(bound),
        orbit_distance2=float(distance),
        bound_composed=float(bound_composed),
        chi2=float(chi2),
    )


def aperiodic_rate_bound(N: int, snr: float) -> float:
    """Leading term 1/(8 N snr^2); the O(1/(N snr^1.5)) remainder is not computed"""
    if N < 1 or snr <= 0:
        raise ValueError("aperiodic_rate_bound needs N >= 1 and snr > 0")
    return 1.0 / (8.0 * N * snr ** 2)


def periodic_rate_bound(N: int, snr: float, L: int, ell: int) -> float:
    """Leading term (1/(54 N)) ((L - 2 ell) / (2 ell)) / snr^3 for rho of period ell"""
    if N < 1 or snr <= 0:
        raise ValueError("periodic_rate_bound needs N >= 1 and snr > 0")
    if ell < 1 or 2 * ell >= L:
        raise PeriodError(f"ell={ell} must satisfy 1 <= ell < L/2 = {L / 2}")
    return (1.0 / (54.0 * N)) * ((L - 2.0 * ell) / (2.0 * ell)) / snr ** 3
