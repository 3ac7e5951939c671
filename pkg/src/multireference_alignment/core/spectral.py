#!/usr/bin/env python3
"""
Spectral recovery of (x, rho) from the first two moments
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from ..models.options import SpectralOptions
from ..models.results import MomentPair, ObservationSet, RecoveryResult
from ..utils.errors import (
    DegenerateEigengapError,
    NoOrthogonalEigenvectorError,
    PeriodError,
    SolverError,
    VanishingSpectrumError,
    ZeroDCError,
)
from ..utils.logger import log
from .cyclic import circulant_matrix, dft, idft, shift
from .least_squares import ls_objective, project_simplex
from .model import random_simplex, reshuffle
from .moments import power_spectrum_from_m2, sample_moments

DECONVOLUTION_FLOOR = 1e-8
ORTHOGONALITY_TOL = 1e-6


def deconvolve(numerator: np.ndarray, kernel: np.ndarray, floor: float = DECONVOLUTION_FLOOR) -> np.ndarray:
    """
    Solve C_kernel r = numerator by Fourier division

    |F kernel| is floored at ``floor * max |F kernel|`` keeping its phase.
    """
    fk = dft(kernel)
    magnitude = np.abs(fk)
    limit = floor * magnitude.max()
    small = magnitude < limit
    if np.any(small):
        phase = np.where(magnitude > 0, fk / np.where(magnitude > 0, magnitude, 1.0), 1.0)
        fk = np.where(small, limit * phase, fk)
    return idft(dft(numerator) / fk)


def _floored_power_spectrum(m: MomentPair, ps_floor: float, diagnostics: Dict[str, Any]) -> np.ndarray:
    ps = power_spectrum_from_m2(m.m2)
    peak = float(ps.max())
    diagnostics["ps_min"] = float(ps.min())
    if peak <= 0:
        raise VanishingSpectrumError("power spectrum is nowhere positive", diagnostics)
    limit = ps_floor * peak
    below = ps < limit
    diagnostics["ps_floored"] = int(below.sum())
    if np.any(below):
        if m.is_population:
            raise VanishingSpectrumError(
                f"{int(below.sum())} power spectrum entries below {limit:.3g}", diagnostics
            )
        log(f"⚠️  Flooring {int(below.sum())} power spectrum entries at {limit:.3g}", "warning")
        ps = np.maximum(ps, limit)
    return ps


def whiten_second_moment(m2: np.ndarray, power_spectrum: np.ndarray, preserve_energy: bool = False) -> np.ndarray:
    """
    Q m2 Q^T with Q = F^-1 diag(P^-1/2) F, real part, symmetrized

    For population moments the result is C_u D_rho C_u^T with C_u orthogonal.
    ``preserve_energy`` rescales by trace(m2) so the eigenvalues become ||x||^2 rho.
    """
    m2 = np.asarray(m2, dtype=float)
    Q = circulant_matrix(idft(1.0 / np.sqrt(power_spectrum)))
    whitened = Q @ m2 @ Q.T
    whitened = 0.5 * (whitened + whitened.T)
    if preserve_energy:
        whitened *= float(np.trace(m2))
    return whitened


def _eigen_gaps(values: np.ndarray) -> np.ndarray:
    """Distance of each eigenvalue to its nearest neighbour"""
    if values.size == 1:
        return np.array([np.inf])
    diffs = np.diff(values)
    left = np.concatenate([[np.inf], diffs])
    right = np.concatenate([diffs, [np.inf]])
    return np.minimum(left, right)


def _recolor_and_rescale(v: np.ndarray, ps: np.ndarray, m1: np.ndarray, dc_tol: float,
                         diagnostics: Dict[str, Any]) -> np.ndarray:
    recolored = idft(np.sqrt(ps) * dft(v))
    dc_data = float(m1.sum())
    dc_vector = float(recolored.sum())
    diagnostics["dc_sum"] = dc_data
    if abs(dc_data) <= dc_tol * np.linalg.norm(m1) or abs(dc_vector) <= dc_tol * np.linalg.norm(recolored):
        raise ZeroDCError("first moment sums to zero; the scale of x is undetermined", diagnostics)
    return (dc_data / dc_vector) * recolored


def invert_moments_with_diagnostics(m: MomentPair, opts: Optional[SpectralOptions] = None) -> RecoveryResult:
    """Exact inversion of the first two moments, returning diagnostics alongside the estimate"""
    opts = opts or SpectralOptions()
    diagnostics: Dict[str, Any] = {"iterations": 1}

    ps = _floored_power_spectrum(m, opts.ps_floor, diagnostics)
    whitened = whiten_second_moment(m.m2, ps)
    values, vectors = eigh(whitened)

    gaps = _eigen_gaps(values)
    scale = max(float(np.abs(values).max()), np.finfo(float).tiny)
    diagnostics["min_eigen_gap"] = float(gaps.min()) if values.size > 1 else float("inf")
    if values.size > 1 and gaps.min() < opts.gap_tol * scale:
        raise DegenerateEigengapError(
            f"whitened second moment has repeated eigenvalues (gap {gaps.min():.3g})", diagnostics
        )

    if opts.eig_selector == "largest_eigenvalue":
        chosen = int(np.argmax(values))
    else:
        chosen = int(np.argmax(gaps))
    diagnostics["eigen_gap"] = float(gaps[chosen]) if values.size > 1 else 0.0

    x_hat = _recolor_and_rescale(vectors[:, chosen], ps, m.m1, opts.dc_tol, diagnostics)
    rho_hat = deconvolve(m.m1, x_hat)
    diagnostics["objective"] = ls_objective(x_hat, rho_hat, m, 1.0)
    log(f"🔎 Moment inversion: eigen gap {diagnostics['eigen_gap']:.3g}, "
        f"misfit {diagnostics['objective']:.3g}", "diagnostics")
    return RecoveryResult(x_hat=x_hat, rho_hat=rho_hat, diagnostics=diagnostics, method="spectral")


def invert_moments(m: MomentPair, opts: Optional[SpectralOptions] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Recover (x, rho) up to a common shift from exact or estimated moments"""
    result = invert_moments_with_diagnostics(m, opts)
    return result.x_hat, result.rho_hat


def recover(obs: ObservationSet, opts: Optional[SpectralOptions] = None,
            rng: Optional[np.random.Generator] = None, threads: int = 1) -> RecoveryResult:
    """Reshuffle, estimate moments, invert, and undo the reshuffle on rho"""
    opts = opts or SpectralOptions()
    rng = rng if rng is not None else np.random.default_rng()
    context = {"N": obs.N, "sigma": obs.sigma, "reshuffled": opts.reshuffle}

    theta = None
    if opts.reshuffle:
        theta = random_simplex(obs.L, rng)
        obs = reshuffle(obs, theta, rng)
    moments = sample_moments(obs, threads=threads)

    try:
        result = invert_moments_with_diagnostics(moments, opts)
    except SolverError as e:
        raise e.with_diagnostics(context)

    rho_hat = result.rho_hat
    if theta is not None:
        rho_hat = deconvolve(rho_hat, theta)
    if opts.project_rho:
        rho_hat = project_simplex(rho_hat)

    result.diagnostics.update(context)
    return RecoveryResult(x_hat=result.x_hat, rho_hat=rho_hat, diagnostics=result.diagnostics, method="spectral")


def recover_half_periodic(m: MomentPair, cluster_tol: float = 1e-9, tol: float = ORTHOGONALITY_TOL) -> np.ndarray:
    """
    Recover x when rho may have period L/2

    Picks the eigenvector of the whitened second moment that is orthogonal to
    its own shift by L/2. Within a two-dimensional top eigenspace that vector is
    the normalized sum of the eigenvectors of the restricted half-shift.
    """
    L = m.L
    if L % 2:
        raise PeriodError(f"half-period recovery needs even L, got {L}")
    diagnostics: Dict[str, Any] = {}
    ps = _floored_power_spectrum(m, 1e-8, diagnostics)
    values, vectors = eigh(whiten_second_moment(m.m2, ps))

    top = values.max()
    cluster = np.flatnonzero(values >= top - cluster_tol * max(abs(top), np.finfo(float).tiny))
    half = L // 2
    if cluster.size == 1:
        u = vectors[:, cluster[0]]
    elif cluster.size == 2:
        a, b = vectors[:, cluster[0]], vectors[:, cluster[1]]
        ra, rb = shift(a, half), shift(b, half)
        restricted = np.array([[a @ ra, a @ rb], [b @ ra, b @ rb]])
        _, g = eigh(0.5 * (restricted + restricted.T))
        coefficients = (g[:, 0] + g[:, 1]) / np.sqrt(2.0)
        u = coefficients[0] * a + coefficients[1] * b
    else:
        raise NoOrthogonalEigenvectorError(
            f"top eigenspace has dimension {cluster.size}; no unique eigenvector orthogonal to its half shift",
            {"cluster_size": int(cluster.size)},
        )

    overlap = abs(float(u @ shift(u, half)))
    if overlap >= tol:
        raise NoOrthogonalEigenvectorError(
            f"selected eigenvector overlaps its half shift by {overlap:.3g}", {"overlap": overlap}
        )
    return _recolor_and_rescale(u, ps, m.m1, 1e-10, diagnostics)
