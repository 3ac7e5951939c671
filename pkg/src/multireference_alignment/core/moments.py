#!/usr/bin/env python3
"""
First and second moments, power spectrum extraction and order-d moment tensors
"""

import string
from typing import List, Optional

import numpy as np

from ..models.results import (
    MomentPair,
    MomentTensor,
    ObservationSet,
    PerturbationDirection,
    as_distribution,
    as_signal,
    check_same_length,
)
from ..utils.config_manager import get_config
from ..utils.errors import PeriodError, TensorBudgetError
from ..utils.helpers import pairwise_sum, run_ordered
from .cyclic import circulant_matrix, circulant_multiply, dft, idft


def population_moments(x: np.ndarray, rho: np.ndarray) -> MomentPair:
    """m1 = x * rho and m2 = C_x D_rho C_x^T"""
    x = as_signal(x, "x")
    rho = as_distribution(rho)
    check_same_length(x, rho)
    C = circulant_matrix(x)
    m1 = circulant_multiply(x, rho)
    m2 = (C * rho) @ C.T
    return MomentPair(m1=m1, m2=m2, source="population")


def _block_sums(block: np.ndarray):
    return block.sum(axis=0), block.T @ block


def sample_moments(obs: ObservationSet, block_rows: Optional[int] = None, threads: int = 1) -> MomentPair:
    """
    Unbiased sample moments in one pass over row blocks

    Block partial sums are combined with a fixed pairwise tree, so the result
    does not depend on ``threads``.
    """
    if block_rows is None:
        block_rows = int(get_config().get("moment_settings.block_rows", 4096))
    block_rows = max(1, block_rows)
    blocks = [obs.data[start:start + block_rows] for start in range(0, obs.N, block_rows)]
    partials = run_ordered(_block_sums, blocks, threads)

    first = pairwise_sum([p[0] for p in partials]) / obs.N
    second = pairwise_sum([p[1] for p in partials]) / obs.N
    second -= obs.sigma ** 2 * np.eye(obs.L)
    return MomentPair(m1=first, m2=second, source="sample", N=obs.N, sigma=obs.sigma)


def power_spectrum_from_m2(m2: np.ndarray) -> np.ndarray:
    """L * diag(F m2 F^-1), real part; equals |Fx|^2 for population moments"""
    m2 = np.asarray(m2, dtype=float)
    L = m2.shape[0]
    conjugated = np.fft.ifft(np.fft.fft(m2, axis=0), axis=1)
    return L * np.real(np.diag(conjugated))


def _check_budget(L: int, d: int) -> None:
    config = get_config()
    d_max = int(config.get("moment_settings.d_max", 3))
    budget = int(config.get("moment_settings.max_tensor_entries", 2_000_000))
    if d < 1 or d > d_max:
        raise TensorBudgetError(f"tensor order {d} outside [1, {d_max}]")
    if L ** d > budget:
        raise TensorBudgetError(f"tensor with {L}^{d} entries exceeds the budget of {budget}")


def _outer_subscripts(d: int) -> List[str]:
    """Subscripts 'la', 'lb', ... for a d-fold outer product summed over shifts l"""
    return [f"l{string.ascii_lowercase[i]}" for i in range(d)]


def _shift_stack(x: np.ndarray) -> np.ndarray:
    """Row l is shift(x, l)"""
    return circulant_matrix(x).T


def moment_tensor_direct(x: np.ndarray, rho: np.ndarray, d: int) -> MomentTensor:
    """M[k] = sum_l rho[l] prod_i x[k_i - l]"""
    x = as_signal(x, "x")
    rho = np.asarray(rho, dtype=float)
    L = check_same_length(x, rho)
    _check_budget(L, d)

    shifted = _shift_stack(x)
    subscripts = _outer_subscripts(d)
    target = "".join(s[1] for s in subscripts)
    entries = np.einsum(f"l,{','.join(subscripts)}->{target}", rho, *([shifted] * d))
    return MomentTensor(order=d, entries=entries)


def fourier_moment_array(x: np.ndarray, rho: np.ndarray, d: int) -> np.ndarray:
    """d-dimensional DFT of the moment tensor: Frho[sum(a) mod L] * prod_j Fx[a_j]"""
    x = as_signal(x, "x")
    rho = np.asarray(rho, dtype=float)
    L = check_same_length(x, rho)
    _check_budget(L, d)

    fx = dft(x)
    frho = dft(rho)
    product = fx
    index_sum = np.arange(L)
    for _ in range(d - 1):
        product = np.multiply.outer(product, fx)
        index_sum = np.add.outer(index_sum, np.arange(L))
    return frho[index_sum % L] * product


def moment_tensor_fourier(x: np.ndarray, rho: np.ndarray, d: int) -> MomentTensor:
    """Moment tensor through the inverse d-dimensional DFT of fourier_moment_array"""
    spectrum = fourier_moment_array(x, rho, d)
    entries = np.fft.ifftn(spectrum)
    # real because spectrum[-a] = conj(spectrum[a]) for real x, rho
    return MomentTensor(order=d, entries=entries.real)


def tensor_norm2(tensor: MomentTensor) -> float:
    return tensor.norm2()


def directional_derivative(x: np.ndarray, rho: np.ndarray, v: PerturbationDirection, d: int) -> MomentTensor:
    """
    Derivative of M^d at (x, rho) along v = (z, theta)

    Expanded with the product rule: the theta term is the moment tensor with
    rho replaced by theta, and the signal term sums d copies of the outer
    product with one factor replaced by the shifted z.
    """
    x = as_signal(x, "x")
    rho = np.asarray(rho, dtype=float)
    L = check_same_length(x, rho, v.z)
    v.validate_against(rho)
    _check_budget(L, d)

    shifted_x = _shift_stack(x)
    shifted_z = _shift_stack(v.z)
    subscripts = _outer_subscripts(d)
    target = "".join(s[1] for s in subscripts)
    expression = f"l,{','.join(subscripts)}->{target}"

    entries = np.einsum(expression, v.theta, *([shifted_x] * d))
    for position in range(d):
        factors = [shifted_z if i == position else shifted_x for i in range(d)]
        entries = entries + np.einsum(expression, rho, *factors)
    return MomentTensor(order=d, entries=entries)


def periodic_counterexample(x1: np.ndarray, ell: int) -> np.ndarray:
    """
    Signal sharing the first two moments of x1 under any rho of period ell

    Fourier coefficients at multiples of L/ell are kept, all others change sign.
    """
    x1 = as_signal(x1, "x1")
    L = x1.size
    if ell < 1 or L % ell:
        raise PeriodError(f"ell={ell} does not divide L={L}")
    if 2 * ell >= L:
        raise PeriodError(f"ell={ell} must be smaller than L/2={L / 2}")
    spectrum = dft(x1)
    keep = np.arange(L) % (L // ell) == 0
    return idft(np.where(keep, spectrum, -spectrum))
