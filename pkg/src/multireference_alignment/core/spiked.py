#!/usr/bin/env python3
"""
Spiked-covariance predictions for the top eigenvector of the second moment

The formulas are predictive: the harness compares them with simulation.
"""

import numpy as np
from scipy.linalg import eigh

from ..models.results import SpikedPrediction, SpikedTrial, as_distribution, as_signal
from .cyclic import dft, idft, orbit_distance2
from .model import sample_observations
from .moments import population_moments, power_spectrum_from_m2
from .spectral import whiten_second_moment


def predicted_cosine2(lam: float, sigma: float, gamma: float) -> SpikedPrediction:
    """Limiting squared cosine (1 - s^4 g / l^2) / (1 + s^2 g / l) above l = s^2 sqrt(g), zero below"""
    if lam < 0 or sigma <= 0 or gamma <= 0:
        raise ValueError("predicted_cosine2 needs lam >= 0, sigma > 0 and gamma > 0")
    critical = sigma ** 2 * np.sqrt(gamma)
    above = lam > critical
    cos2 = 0.0
    if above:
        cos2 = (1.0 - sigma ** 4 * gamma / lam ** 2) / (1.0 + sigma ** 2 * gamma / lam)
    return SpikedPrediction(cos2=float(cos2), above_threshold=bool(above),
                            critical_lambda=float(critical), aspect_ratio=float(gamma))


def critical_sigma(lam: float, gamma: float) -> float:
    """Noise level at which lam sits exactly on the threshold"""
    return float(np.sqrt(lam) * gamma ** -0.25)


def spike_eigenvalue(x: np.ndarray, rho: np.ndarray) -> float:
    """
    Top eigenvalue of the energy-preserving whitened second moment, ||x||^2 max(rho)

    Whitening needs a nonvanishing power spectrum; otherwise the closed form is returned.
    """
    x = as_signal(x, "x")
    rho = as_distribution(rho)
    m2 = population_moments(x, rho).m2
    power = power_spectrum_from_m2(m2)
    if power.min() <= 1e-12 * power.max():
        return float(np.dot(x, x) * rho.max())
    return float(eigh(whiten_second_moment(m2, power, preserve_energy=True), eigvals_only=True).max())


def sample_threshold(L: int, sigma: float, x_norm: float, rho_max: float) -> float:
    """N* = L sigma^4 / (||x||^4 rho_max^2)"""
    if min(L, sigma, x_norm, rho_max) <= 0:
        raise ValueError("sample_threshold needs positive arguments")
    return float(L * sigma ** 4 / (x_norm ** 4 * rho_max ** 2))


def flat_spectrum_signal(L: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Random real signal whose DFT has constant modulus equal to ``norm``"""
    spectrum = dft(rng.standard_normal(L))
    magnitude = np.abs(spectrum)
    unit = np.where(magnitude > 0, spectrum / np.where(magnitude > 0, magnitude, 1.0), 1.0)
    return idft(norm * unit)


def empirical_cosine(u: np.ndarray, v: np.ndarray) -> float:
    return float(abs(np.dot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v)))


def top_eigenvector(matrix: np.ndarray) -> np.ndarray:
    values, vectors = eigh(0.5 * (matrix + matrix.T))
    return vectors[:, int(np.argmax(values))]


def simulate_spiked_trial(x: np.ndarray, rho: np.ndarray, sigma: float, N: int,
                          rng: np.random.Generator) -> SpikedTrial:
    """
    Compare clean and noisy top eigenvectors of the second moment

    ``x`` is expected to have a flat power spectrum so the noise stays white.
    """
    clean = population_moments(x, rho).m2
    obs = sample_observations(x, rho, sigma, N, rng)
    noisy = obs.data.T @ obs.data / N

    u = top_eigenvector(clean)
    v = top_eigenvector(noisy)
    lam = spike_eigenvalue(x, rho)
    prediction = predicted_cosine2(lam, sigma, x.size / N)

    mse = min(orbit_distance2(v, u), orbit_distance2(-v, u))
    return SpikedTrial(
        empirical_cosine=empirical_cosine(u, v),
        predicted_cosine=prediction.cosine,
        empirical_mse=float(mse),
        predicted_mse=float(2.0 - 2.0 * prediction.cosine),
    )
