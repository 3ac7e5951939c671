#!/usr/bin/env python3
"""
Synthetic data for the observation model y_j = shift(x, S_j) + sigma * G_j

Every stochastic function takes an explicit ``numpy.random.Generator``.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from ..models.options import GeneratorConfig
from ..models.results import ObservationSet, as_distribution, as_signal
from ..utils.errors import MissingShiftsError, PeriodError
from ..utils.helpers import haar_like_signal, make_rng
from ..utils.logger import log


def uniform_distribution(L: int) -> np.ndarray:
    return np.full(L, 1.0 / L)


def dirac_distribution(L: int, at: int = 0) -> np.ndarray:
    rho = np.zeros(L)
    rho[at % L] = 1.0
    return rho


def wrapped_gaussian_distribution(L: int, s: float) -> np.ndarray:
    """rho[t] proportional to exp(-t^2/s^2) with t taken as its signed representative in (-L/2, L/2]"""
    if s <= 0:
        raise ValueError(f"spread must be positive, got {s}")
    t = np.arange(L)
    signed = np.where(t > L / 2, t - L, t)
    weights = np.exp(-(signed / s) ** 2)
    return weights / weights.sum()


def random_simplex(L: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized vector of i.i.d. Uniform[0, 1] entries"""
    weights = rng.uniform(0.0, 1.0, size=L)
    return weights / weights.sum()


def periodic_distribution(L: int, period: int, base: Optional[Sequence[float]] = None,
                          rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Tile a base block of length ``period`` L/period times, then normalize"""
    if period < 1 or L % period:
        raise PeriodError(f"period {period} does not divide L={L}")
    if base is None:
        if rng is None:
            raise ValueError("periodic_distribution needs a base block or a generator")
        base = rng.uniform(0.0, 1.0, size=period)
    base = np.asarray(base, dtype=float)
    if base.shape != (period,) or np.any(base < 0) or base.sum() <= 0:
        raise PeriodError("base block must be a nonnegative, nonzero vector of length period")
    tiled = np.tile(base, L // period)
    return tiled / tiled.sum()


def explicit_distribution(probs: Sequence[float]) -> np.ndarray:
    return as_distribution(probs)


def minimal_period(rho: np.ndarray, tol: float = 1e-12) -> int:
    """Smallest l in [1, L] with rho[k + l] = rho[k] for all k"""
    rho = np.asarray(rho, dtype=float)
    L = rho.size
    for ell in range(1, L):
        if L % ell == 0 and np.max(np.abs(np.roll(rho, ell) - rho)) <= tol:
            return ell
    return L


def is_aperiodic(rho: np.ndarray, tol: float = 1e-12) -> bool:
    return minimal_period(rho, tol) == np.asarray(rho).size


def random_signal(L: int, rng: np.random.Generator, norm: Optional[float] = None) -> np.ndarray:
    """i.i.d. standard normal entries, optionally rescaled to a given norm"""
    x = rng.standard_normal(L)
    if norm is not None:
        x *= norm / np.linalg.norm(x)
    return x


def build_distribution(config: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    kind = config.distribution_kind
    if kind == "uniform":
        return uniform_distribution(config.L)
    if kind == "dirac":
        return dirac_distribution(config.L)
    if kind == "wrapped_gaussian":
        return wrapped_gaussian_distribution(config.L, config.spread)
    if kind == "random_simplex":
        return random_simplex(config.L, rng)
    if kind == "periodic":
        return periodic_distribution(config.L, config.period, config.base, rng)
    return explicit_distribution(config.probs)


def sample_observations(x: np.ndarray, rho: np.ndarray, sigma: float, N: int,
                        rng: np.random.Generator) -> ObservationSet:
    """Draw N rows shift(x, S_j) + sigma * G_j with S_j ~ rho"""
    x = as_signal(x, "x")
    rho = as_distribution(rho)
    L = x.size
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    shifts = rng.choice(L, size=N, p=rho)
    index = (np.arange(L)[None, :] - shifts[:, None]) % L
    data = x[index]
    if sigma > 0:
        data = data + sigma * rng.standard_normal((N, L))
    return ObservationSet(data=data, sigma=sigma, true_shifts=shifts)


def reshuffle(obs: ObservationSet, theta: np.ndarray, rng: np.random.Generator) -> ObservationSet:
    """Shift each row again by an independent draw from theta; the effective distribution becomes rho * theta"""
    theta = as_distribution(theta, "theta")
    L = obs.L
    extra = rng.choice(L, size=obs.N, p=theta)
    index = (np.arange(L)[None, :] - extra[:, None]) % L
    data = np.take_along_axis(obs.data, index, axis=1)
    shifts = None if obs.true_shifts is None else (obs.true_shifts + extra) % L
    return ObservationSet(data=data, sigma=obs.sigma, true_shifts=shifts)


def oracle_aligned_estimate(obs: ObservationSet) -> np.ndarray:
    """Average of the rows shifted back by their true shifts"""
    if obs.true_shifts is None:
        raise MissingShiftsError("oracle_aligned_estimate needs true shifts")
    L = obs.L
    index = (np.arange(L)[None, :] + obs.true_shifts[:, None]) % L
    return np.take_along_axis(obs.data, index, axis=1).mean(axis=0)


def generate(config: GeneratorConfig) -> Tuple[np.ndarray, np.ndarray, ObservationSet]:
    """Signal, distribution and observations for one generator configuration"""
    rng = make_rng(config.seed)
    if config.signal == "haar_like":
        x = haar_like_signal()
        if config.signal_norm is not None:
            x = x * config.signal_norm / np.linalg.norm(x)
    else:
        x = random_signal(config.L, rng, config.signal_norm)
    rho = build_distribution(config, rng)
    obs = sample_observations(x, rho, config.sigma, config.N, rng)
    log(f"🎲 Generated N={config.N} observations of length L={config.L} "
        f"(sigma={config.sigma}, distribution={config.distribution_kind})", "progress")
    return x, rho, obs
