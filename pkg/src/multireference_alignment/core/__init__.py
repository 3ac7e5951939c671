"""
Numerical core: cyclic algebra, data model, moments and the recovery algorithms
"""

from .bounds import aperiodic_rate_bound, chi2_leading, first_distinguishing_order, orbit_bound, periodic_rate_bound
from .cyclic import align, circulant_multiply, dft, idft, relative_error, shift
from .em import marginal_log_likelihood, posterior_weights, run_em
from .least_squares import ls_gradient, ls_objective, project_simplex, run_ls
from .model import random_simplex, reshuffle, sample_observations, wrapped_gaussian_distribution
from .moments import (
    directional_derivative,
    moment_tensor_direct,
    moment_tensor_fourier,
    periodic_counterexample,
    population_moments,
    power_spectrum_from_m2,
    sample_moments,
)
from .spectral import invert_moments, recover, recover_half_periodic
from .spiked import predicted_cosine2, sample_threshold, spike_eigenvalue
