#!/usr/bin/env python3
"""
Expectation-maximization over the latent shifts

The modified variant updates both the signal and the shift distribution; the
uniform variant keeps the distribution fixed at uniform.
"""

from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from ..models.options import EmOptions, SpectralOptions
from ..models.results import EmState, ObservationSet, RecoveryResult, as_signal
from ..utils.errors import DegenerateWeightsError, NonpositiveWeightError, SolverError
from ..utils.logger import log
from .cyclic import cross_correlation, dft, idft
from .model import uniform_distribution

RHO_FLOOR = 1e-12


def _noise_level(obs: ObservationSet, sigma: Optional[float]) -> float:
    sigma = obs.sigma if sigma is None else float(sigma)
    if sigma <= 0:
        raise DegenerateWeightsError("posterior weights need a positive noise level")
    return sigma


def _log_weights(x: np.ndarray, rho: np.ndarray, obs: ObservationSet, variant: str,
                 sigma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Unnormalized log weights (N x L) and their per-row log-sum-exp"""
    corr = cross_correlation(x, obs.data)
    distances = np.dot(x, x) + np.sum(obs.data ** 2, axis=1, keepdims=True) - 2.0 * corr
    log_w = -distances / (2.0 * sigma ** 2)
    if variant == "modified":
        with np.errstate(divide="ignore"):
            log_w = log_w + np.log(rho)[None, :]
    return log_w, logsumexp(log_w, axis=1, keepdims=True)


def posterior_weights(x: np.ndarray, rho: np.ndarray, obs: ObservationSet, variant: str = "modified",
                      sigma: Optional[float] = None) -> np.ndarray:
    """Posterior probability of each shift for each observation; rows sum to one"""
    sigma = _noise_level(obs, sigma)
    log_w, lse = _log_weights(as_signal(x, "x"), np.asarray(rho, dtype=float), obs, variant, sigma)
    return np.exp(log_w - lse)


def marginal_log_likelihood(x: np.ndarray, rho: np.ndarray, obs: ObservationSet,
                            sigma: Optional[float] = None) -> float:
    """sum_j log sum_l rho[l] N(y_j; shift(x, l), sigma^2 I), constants included"""
    sigma = _noise_level(obs, sigma)
    _, lse = _log_weights(as_signal(x, "x"), np.asarray(rho, dtype=float), obs, "modified", sigma)
    return float(lse.sum() - obs.N * 0.5 * obs.L * np.log(2.0 * np.pi * sigma ** 2))


def simplex_weighted_log_max(w: np.ndarray) -> np.ndarray:
    """Maximizer of sum_l w[l] log q[l] over the simplex"""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise NonpositiveWeightError("weights must be strictly positive")
    return w / w.sum()


def em_step(state: EmState, obs: ObservationSet, opts: Optional[EmOptions] = None) -> EmState:
    opts = opts or EmOptions()
    sigma = _noise_level(obs, opts.weight_sigma)
    weights = posterior_weights(state.x, state.rho, obs, opts.variant, sigma)

    # sum_l w[j, l] shift(y_j, -l) in the Fourier domain, averaged over j
    x_next = idft(np.mean(np.conj(dft(weights)) * dft(obs.data), axis=0))

    if opts.variant == "modified":
        rho_next = simplex_weighted_log_max(np.maximum(weights.sum(axis=0), np.finfo(float).tiny))
        rho_next = np.maximum(rho_next, RHO_FLOOR)
        rho_next /= rho_next.sum()
    else:
        rho_next = uniform_distribution(obs.L)

    loglik = marginal_log_likelihood(x_next, rho_next, obs, sigma)
    return EmState(x=x_next, rho=rho_next, loglik=loglik, iteration=state.iteration + 1)


def initial_state(obs: ObservationSet, opts: EmOptions, rng: np.random.Generator) -> EmState:
    """Starting point per opts.init; the spectral warm start falls back to a random start"""
    L = obs.L
    sigma = _noise_level(obs, opts.weight_sigma)
    x0 = None
    rho0 = uniform_distribution(L)

    if opts.init == "provided":
        x0 = as_signal(opts.x0, "x0")
        if opts.rho0 is not None:
            rho0 = np.asarray(opts.rho0, dtype=float)
    elif opts.init == "spectral_warm_start":
        from .spectral import recover

        try:
            warm = recover(obs, SpectralOptions(), rng)
            x0, rho0 = warm.x_hat, warm.rho_hat
        except SolverError as e:
            log(f"⚠️  Spectral warm start failed ({e.detail}); using a random start", "warning")

    if x0 is None:
        x0 = rng.standard_normal(L)
        x0 /= np.linalg.norm(x0)

    if opts.variant == "uniform":
        rho0 = uniform_distribution(L)
    else:
        rho0 = np.maximum(rho0, RHO_FLOOR)
        rho0 = rho0 / rho0.sum()
    return EmState(x=x0, rho=rho0, loglik=marginal_log_likelihood(x0, rho0, obs, sigma), iteration=0)


def run_em(obs: ObservationSet, opts: Optional[EmOptions] = None,
           rng: Optional[np.random.Generator] = None) -> RecoveryResult:
    """Iterate em_step until the parameter change drops below tol or max_iters is reached"""
    opts = opts or EmOptions()
    rng = rng if rng is not None else np.random.default_rng()
    state = initial_state(obs, opts, rng)
    trace = [state.loglik]
    converged = False
    change = float("inf")

    for _ in range(opts.max_iters):
        nxt = em_step(state, obs, opts)
        change = float(np.linalg.norm(nxt.x - state.x) + np.linalg.norm(nxt.rho - state.rho))
        state = nxt
        trace.append(state.loglik)
        log(f"   EM iteration {state.iteration}: loglik {state.loglik:.6f}, change {change:.3g}", "solver_iterations")
        if change < opts.tol:
            converged = True
            break

    method = "em" if opts.variant == "modified" else "uniform_em"
    log(f"🔁 {method} stopped after {state.iteration} iterations (converged={converged})", "diagnostics")
    return RecoveryResult(
        x_hat=state.x,
        rho_hat=state.rho,
        diagnostics={
            "iterations": state.iteration,
            "objective": state.loglik,
            "loglik": state.loglik,
            "converged": converged,
            "last_change": change,
        },
        method=method,
        trace=trace,
    )
