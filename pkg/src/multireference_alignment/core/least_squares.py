#!/usr/bin/env python3
"""
Non-convex least-squares fit of (x, rho) to the first two moments

    f(x, rho) = ||m2 - C_x D_rho C_x^T||_F^2 + lambda ||m1 - C_x rho||^2,  rho on the simplex

The second-moment term is evaluated in the Fourier domain: with a = Fx and
r = F rho, F (C_x D_rho C_x^T) F^-1 has entries a_k conj(a_l) r_{k-l} / L, and
conjugation by F preserves the Frobenius norm.
"""

from typing import Optional, Tuple

import numpy as np

from ..models.options import LsOptions
from ..models.results import MomentPair, RecoveryResult
from ..utils.helpers import child_seed, run_ordered, spawn_generators
from ..utils.logger import log
from .cyclic import circulant_multiply, circulant_transpose_multiply, dft, idft
from .moments import power_spectrum_from_m2


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)"""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    thresholds = (np.cumsum(u) - 1.0) / np.arange(1, v.size + 1)
    k = np.nonzero(u > thresholds)[0][-1]
    projected = np.maximum(v - thresholds[k], 0.0)
    return projected / projected.sum()


def _lag_index(L: int) -> np.ndarray:
    """(k - l) mod L for every Fourier index pair"""
    rows = np.arange(L)
    return (rows[:, None] - rows[None, :]) % L


def _to_fourier(matrix: np.ndarray) -> np.ndarray:
    """F matrix F^-1"""
    return np.fft.fft(np.fft.ifft(matrix, axis=1), axis=0)


def _residuals(x: np.ndarray, rho: np.ndarray, m: MomentPair):
    """Fourier-side second-moment residual F (m2 - C_x D_rho C_x^T) F^-1 and the first-moment residual"""
    L = x.size
    a = dft(x)
    lags = _lag_index(L)
    model = np.outer(a, np.conj(a)) * dft(rho)[lags] / L
    r2_hat = _to_fourier(m.m2) - model
    r1 = m.m1 - circulant_multiply(x, rho)
    return a, lags, r2_hat, r1


def ls_objective(x: np.ndarray, rho: np.ndarray, m: MomentPair, lam: float) -> float:
    _, _, r2_hat, r1 = _residuals(np.asarray(x, dtype=float), np.asarray(rho, dtype=float), m)
    return float(np.sum(np.abs(r2_hat) ** 2) + lam * np.dot(r1, r1))


def ls_gradient(x: np.ndarray, rho: np.ndarray, m: MomentPair, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradient of ls_objective with respect to x and rho

    The second-moment parts are -4 sum_s rho_s R_s^T r2 R_s x and
    -2 (R_i x)^T r2 (R_i x); both reduce to lag sums over the Fourier residual.
    """
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    L = x.size
    a, lags, r2_hat, r1 = _residuals(x, rho, m)

    # sum_s rho_s R_s^T r2 R_s has Fourier entries r2_hat[k, l] * r_{l-k}
    weighted = r2_hat * dft(rho)[lags.T]
    grad_x = -4.0 * idft(weighted @ a) - 2.0 * lam * circulant_transpose_multiply(rho, r1)

    # (R_i x)^T r2 (R_i x) is the inverse DFT of the lag sums of conj(a_k) r2_hat[k, l] a_l
    paired = np.conj(a)[:, None] * r2_hat * a[None, :]
    lag_sums = (np.bincount(lags.ravel(), weights=paired.real.ravel(), minlength=L)
                + 1j * np.bincount(lags.ravel(), weights=paired.imag.ravel(), minlength=L))
    grad_rho = -2.0 * idft(lag_sums) - 2.0 * lam * circulant_transpose_multiply(x, r1)
    return grad_x, grad_rho


def objective_scale(m: MomentPair, lam: float) -> float:
    """Objective at x = 0, the reference for the convergence floor"""
    return float(np.sum(m.m2 ** 2) + lam * np.dot(m.m1, m.m1))


def _projected_step(x: np.ndarray, rho: np.ndarray, m: MomentPair, lam: float, step: float,
                    opts: LsOptions) -> Optional[Tuple[np.ndarray, np.ndarray, float, float]]:
    """Backtracking projected gradient step from (x, rho); None when no step length passes"""
    value = ls_objective(x, rho, m, lam)
    grad_x, grad_rho = ls_gradient(x, rho, m, lam)
    for _ in range(opts.max_backtracks):
        x_new = x - step * grad_x
        rho_new = project_simplex(rho - step * grad_rho)
        dx, drho = x_new - x, rho_new - rho
        new_value = ls_objective(x_new, rho_new, m, lam)
        bound = value + grad_x @ dx + grad_rho @ drho + (dx @ dx + drho @ drho) / (2.0 * step)
        if new_value <= bound:
            return x_new, rho_new, new_value, step
        step *= opts.shrink
    return None


def _descend(x: np.ndarray, rho: np.ndarray, m: MomentPair, lam: float, opts: LsOptions,
             max_iters: int, trace: list) -> dict:
    value = trace[-1]
    floor = opts.ftol * objective_scale(m, lam)
    x_prev, rho_prev = x, rho
    momentum = 1.0
    step = opts.initial_step
    state = {"x": x, "rho": rho, "value": value, "iterations": 0, "stagnated": False, "momentum_resets": 0}
    if value <= floor:
        return state

    for iteration in range(1, max_iters + 1):
        state["iterations"] = iteration
        next_momentum = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum ** 2)) if opts.accelerate else 1.0
        beta = (momentum - 1.0) / next_momentum
        result = None
        if beta > 0:
            result = _projected_step(x + beta * (x - x_prev), rho + beta * (rho - rho_prev), m, lam, step, opts)
            if result is not None and result[2] > value:
                result = None
            if result is None:
                state["momentum_resets"] += 1
        if result is None:
            next_momentum = 1.0
            result = _projected_step(x, rho, m, lam, step, opts)
        if result is None:
            state["stagnated"] = True
            break

        x_new, rho_new, new_value, step = result
        if new_value > value:
            # rounding level reached
            break
        decrease = value - new_value
        x_prev, rho_prev = x, rho
        x, rho, value = x_new, rho_new, new_value
        momentum = next_momentum
        trace.append(value)
        state.update(x=x, rho=rho, value=value)
        log(f"   LS iteration {iteration}: objective {value:.6g}, step {step:.3g}", "solver_iterations")
        if value <= floor or decrease <= opts.tol * (value + decrease):
            break
        step *= opts.grow
    return state


def ls_descent(x0: np.ndarray, rho0: np.ndarray, m: MomentPair, lam: float,
               opts: Optional[LsOptions] = None) -> RecoveryResult:
    """
    Accelerated projected gradient from one starting point

    Every accepted iterate lowers the objective; a momentum step that would
    raise it is replaced by a plain projected step. The second moment cannot
    tell x from -x, so once the descent stops the sign flip is tried and the
    descent resumes from it when it fits the first moment better.
    """
    opts = opts or LsOptions()
    x = np.asarray(x0, dtype=float).copy()
    rho = project_simplex(rho0)
    trace = [ls_objective(x, rho, m, lam)]

    state = _descend(x, rho, m, lam, opts, opts.max_iters, trace)
    iterations, resets = state["iterations"], state["momentum_resets"]
    sign_flipped = False
    flipped_value = ls_objective(-state["x"], state["rho"], m, lam)
    if flipped_value < state["value"]:
        log(f"   LS sign flip lowers the objective to {flipped_value:.6g}", "solver_iterations")
        sign_flipped = True
        trace.append(flipped_value)
        state = _descend(-state["x"], state["rho"], m, lam, opts, opts.max_iters, trace)
        iterations += state["iterations"]
        resets += state["momentum_resets"]

    return RecoveryResult(
        x_hat=state["x"],
        rho_hat=state["rho"],
        diagnostics={"objective": state["value"], "iterations": iterations, "stagnated": state["stagnated"],
                     "lambda": lam, "momentum_resets": resets, "sign_flipped": sign_flipped},
        method="ls",
        trace=trace,
    )


def random_start(m: MomentPair, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Random phases on the moment-estimated power spectrum, and a jittered uniform distribution

    The DC coefficient is sum(m1), which carries the sign the second moment cannot see.
    """
    L = m.L
    power = power_spectrum_from_m2(m.m2)
    power = np.maximum(power, 1e-6 * max(abs(float(np.trace(m.m2))), 1e-12))
    spectrum = dft(rng.standard_normal(L))
    magnitude = np.abs(spectrum)
    phases = np.where(magnitude > 0, spectrum / np.where(magnitude > 0, magnitude, 1.0), 1.0)
    start = np.sqrt(power) * phases
    start[0] = float(np.sum(m.m1))
    rho0 = 0.5 / L + 0.5 * rng.dirichlet(np.ones(L))
    return idft(start), rho0


def run_ls(m: MomentPair, opts: Optional[LsOptions] = None, rng: Optional[np.random.Generator] = None,
           sigma: Optional[float] = None) -> RecoveryResult:
    """Best of several projected-gradient restarts"""
    opts = opts or LsOptions()
    rng = rng if rng is not None else np.random.default_rng()
    noise = sigma if sigma is not None else (m.sigma or 0.0)
    lam = opts.resolve_lambda(m.L, noise)
    generators = spawn_generators(child_seed(rng), opts.restarts)

    def one_restart(generator: np.random.Generator) -> RecoveryResult:
        x0, rho0 = random_start(m, generator)
        return ls_descent(x0, rho0, m, lam, opts)

    results = run_ordered(one_restart, generators, opts.n_jobs)
    objectives = [r.diagnostics["objective"] for r in results]
    best = results[int(np.argmin(objectives))]
    best.diagnostics["restart_objectives"] = objectives
    best.diagnostics["restarts"] = opts.restarts
    log(f"📉 LS finished: best objective {best.diagnostics['objective']:.4g} over {opts.restarts} restarts", "diagnostics")
    return best
