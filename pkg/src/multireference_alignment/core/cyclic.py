#!/usr/bin/env python3
"""
Cyclic-signal algebra: shifts, DFT conventions, circulant products and orbit alignment

Conventions used across the package:

* ``shift(x, s)[i] = x[(i - s) mod L]``
* ``dft`` is the forward transform ``(Fz)[k] = sum_i z[i] exp(-2 pi i k i / L)``,
  ``idft`` carries the 1/L factor, so ``L * diag(F m2 F^-1)`` is the power spectrum.
* ``C_z[i, j] = z[(i - j) mod L]``; column j of ``C_x`` is ``shift(x, j)``.
"""

from typing import Tuple

import numpy as np
from scipy.linalg import circulant

from ..models.results import AlignmentResult, as_signal, check_same_length
from ..utils.errors import ZeroNormError

# Correlation values closer than this (relative) count as ties in align
TIE_TOL = 1e-10


def shift(x: np.ndarray, s: int) -> np.ndarray:
    """Cyclic shift: output[i] = x[(i - s) mod L]"""
    x = np.asarray(x)
    return np.roll(x, int(s) % x.shape[-1], axis=-1)


def dft(x: np.ndarray) -> np.ndarray:
    return np.fft.fft(x, axis=-1)


def idft(spectrum: np.ndarray) -> np.ndarray:
    """Inverse DFT returning the real signal; the imaginary part vanishes for conjugate-symmetric input"""
    return np.fft.ifft(spectrum, axis=-1).real


def circulant_matrix(first_column: np.ndarray) -> np.ndarray:
    """Dense circulant C_z with C_z[i, j] = z[i - j]"""
    return circulant(np.asarray(first_column, dtype=float))


def circulant_multiply(first_column: np.ndarray, v: np.ndarray) -> np.ndarray:
    """C_z v computed as F^-1 diag(Fz) F v"""
    first_column = as_signal(first_column, "first_column")
    v = np.asarray(v, dtype=float)
    check_same_length(first_column, v)
    # real operands: the product of two conjugate-symmetric spectra is conjugate-symmetric
    return idft(dft(first_column) * dft(v))


def circulant_transpose_multiply(first_column: np.ndarray, v: np.ndarray) -> np.ndarray:
    """C_z^T v computed as F^-1 diag(conj(Fz)) F v"""
    return idft(np.conj(dft(first_column)) * dft(v))


def cross_correlation(candidate: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """corr[l] = <shift(candidate, l), reference> for every l, via FFT; works row-wise on 2-D input"""
    return idft(np.conj(dft(candidate)) * dft(reference))


def align(candidate: np.ndarray, reference: np.ndarray) -> AlignmentResult:
    """Shift of ``candidate`` closest to ``reference``; ties go to the smallest shift"""
    candidate = as_signal(candidate, "candidate")
    reference = as_signal(reference, "reference")
    check_same_length(candidate, reference)

    corr = cross_correlation(candidate, reference)
    scale = max(float(np.linalg.norm(candidate) * np.linalg.norm(reference)), np.finfo(float).tiny)
    best = int(np.flatnonzero(corr >= corr.max() - TIE_TOL * scale)[0])
    aligned = shift(candidate, best)
    return AlignmentResult(shift=best, aligned=aligned, error=float(np.linalg.norm(aligned - reference)))


def align_exhaustive(candidate: np.ndarray, reference: np.ndarray) -> AlignmentResult:
    """O(L^2) scan over all shifts, kept as a reference for align"""
    candidate = as_signal(candidate, "candidate")
    reference = as_signal(reference, "reference")
    L = check_same_length(candidate, reference)

    errors = [np.linalg.norm(shift(candidate, s) - reference) for s in range(L)]
    best = int(np.argmin(errors))
    return AlignmentResult(shift=best, aligned=shift(candidate, best), error=float(errors[best]))


def relative_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    """min_s ||shift(estimate, s) - truth|| / ||truth||"""
    truth = as_signal(truth, "truth")
    norm = float(np.linalg.norm(truth))
    if norm == 0:
        raise ZeroNormError("relative_error needs a nonzero truth")
    return align(estimate, truth).error / norm


def orbit_distance2(estimate: np.ndarray, truth: np.ndarray, normalized: bool = False) -> float:
    """Squared orbit distance, optionally divided by ||truth||^2"""
    error = align(estimate, truth).error ** 2
    if not normalized:
        return float(error)
    norm2 = float(np.dot(truth, truth))
    if norm2 == 0:
        raise ZeroNormError("normalized orbit distance needs a nonzero truth")
    return float(error / norm2)


def align_estimate(x_hat: np.ndarray, rho_hat: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Apply the shift aligning x_hat to x jointly: x_hat moves by s and rho_hat by -s"""
    s = align(x_hat, x).shift
    return shift(x_hat, s), shift(rho_hat, -s)
