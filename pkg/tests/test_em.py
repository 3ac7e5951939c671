import numpy as np
import pytest
from scipy.special import logsumexp

from multireference_alignment.core.cyclic import relative_error, shift
from multireference_alignment.core.em import (
    em_step,
    initial_state,
    marginal_log_likelihood,
    posterior_weights,
    run_em,
    simplex_weighted_log_max,
)
from multireference_alignment.core.model import sample_observations, uniform_distribution
from multireference_alignment.models.options import EmOptions, build_options
from multireference_alignment.models.results import EmState, ObservationSet
from multireference_alignment.utils.errors import ConfigError, DegenerateWeightsError, NonpositiveWeightError
from multireference_alignment.utils.helpers import make_rng


def brute_force_log_terms(x, rho, obs, sigma):
    """log rho[l] - ||y_j - shift(x, l)||^2 / (2 sigma^2) for every row j and shift l"""
    terms = np.empty((obs.N, obs.L))
    for j, y in enumerate(obs.data):
        for ell in range(obs.L):
            residual = y - shift(x, ell)
            terms[j, ell] = np.log(rho[ell]) - residual @ residual / (2 * sigma ** 2)
    return terms


@pytest.fixture
def observations(signal, distribution, rng):
    return sample_observations(signal, distribution, 0.8, 40, rng)


class TestPosterior:
    def test_rows_sum_to_one(self, signal, distribution, observations):
        weights = posterior_weights(signal, distribution, observations)
        assert weights.shape == (observations.N, observations.L)
        np.testing.assert_allclose(weights.sum(axis=1), 1.0)

    def test_matches_brute_force(self, signal, distribution, observations):
        terms = brute_force_log_terms(signal, distribution, observations, observations.sigma)
        expected = np.exp(terms - logsumexp(terms, axis=1, keepdims=True))
        np.testing.assert_allclose(posterior_weights(signal, distribution, observations), expected, atol=1e-10)

    def test_zero_signal_gives_prior(self, distribution, observations):
        zero = np.zeros(observations.L)
        modified = posterior_weights(zero, distribution, observations, "modified")
        uniform = posterior_weights(zero, distribution, observations, "uniform")
        np.testing.assert_allclose(modified, np.tile(distribution, (observations.N, 1)), atol=1e-12)
        np.testing.assert_allclose(uniform, 1.0 / observations.L, atol=1e-12)

    def test_zero_noise_is_degenerate(self, signal, distribution, rng):
        obs = sample_observations(signal, distribution, 0.0, 5, rng)
        with pytest.raises(DegenerateWeightsError):
            posterior_weights(signal, distribution, obs)

    def test_extreme_noise_is_finite(self, signal, distribution, rng):
        obs = sample_observations(signal, distribution, 1e-3, 5, rng)
        weights = posterior_weights(-signal, distribution, obs)
        assert np.all(np.isfinite(weights))


class TestLikelihood:
    def test_single_exact_observation(self, signal):
        rho = np.zeros(signal.size)
        rho[0] = 1.0
        obs = ObservationSet(data=signal[None, :], sigma=0.5)
        expected = -0.5 * signal.size * np.log(2 * np.pi * 0.25)
        assert marginal_log_likelihood(signal, rho, obs) == pytest.approx(expected)

    def test_matches_brute_force(self, signal, distribution, observations):
        sigma = observations.sigma
        terms = brute_force_log_terms(signal, distribution, observations, sigma)
        expected = logsumexp(terms, axis=1).sum() - observations.N * 0.5 * observations.L * np.log(2 * np.pi * sigma ** 2)
        assert marginal_log_likelihood(signal, distribution, observations) == pytest.approx(expected, rel=1e-10)


class TestWeightedLogMax:
    def test_normalizes(self):
        np.testing.assert_allclose(simplex_weighted_log_max([1.0, 1.0]), [0.5, 0.5])
        np.testing.assert_allclose(simplex_weighted_log_max([1.0, 3.0]), [0.25, 0.75])

    def test_rejects_nonpositive(self):
        with pytest.raises(NonpositiveWeightError):
            simplex_weighted_log_max([1.0, 0.0])

    def test_is_the_maximizer(self, rng):
        w = rng.uniform(0.5, 2.0, size=5)
        best = simplex_weighted_log_max(w)
        for _ in range(50):
            q = rng.dirichlet(np.ones(5))
            assert w @ np.log(q) <= w @ np.log(best) + 1e-12


class TestEmStep:
    def test_ascent(self, observations, rng):
        opts = EmOptions()
        state = initial_state(observations, opts, rng)
        for _ in range(25):
            nxt = em_step(state, observations, opts)
            assert nxt.loglik >= state.loglik - 1e-9 * abs(state.loglik)
            state = nxt

    def test_noiseless_fixed_point(self, signal, distribution, rng):
        obs = sample_observations(signal, distribution, 0.0, 30, rng)
        opts = EmOptions(weight_sigma=0.01)
        state = EmState(x=signal.copy(), rho=distribution.copy(), loglik=0.0)
        nxt = em_step(state, obs, opts)
        np.testing.assert_allclose(nxt.x, signal, atol=1e-10)

    def test_uniform_weights_give_uniform_rho(self, observations):
        zero = np.zeros(observations.L)
        state = EmState(x=zero, rho=uniform_distribution(observations.L), loglik=0.0)
        nxt = em_step(state, observations, EmOptions())
        np.testing.assert_allclose(nxt.rho, 1.0 / observations.L, atol=1e-12)

    def test_uniform_variant_keeps_rho_uniform(self, observations, rng):
        opts = EmOptions(variant="uniform")
        state = initial_state(observations, opts, rng)
        nxt = em_step(state, observations, opts)
        np.testing.assert_allclose(nxt.rho, 1.0 / observations.L)
        assert nxt.iteration == 1

    @pytest.mark.parametrize("variant", ["modified", "uniform"])
    @pytest.mark.parametrize("s", [1, 3])
    def test_commutes_with_global_shift(self, observations, rng, variant, s):
        opts = EmOptions(variant=variant)
        state = initial_state(observations, opts, rng)
        shifted_obs = ObservationSet(data=np.array([shift(y, s) for y in observations.data]),
                                     sigma=observations.sigma)
        shifted_state = EmState(x=shift(state.x, s), rho=state.rho.copy(), loglik=state.loglik)

        nxt = em_step(state, observations, opts)
        shifted_nxt = em_step(shifted_state, shifted_obs, opts)
        np.testing.assert_allclose(shifted_nxt.x, shift(nxt.x, s), atol=1e-10)
        np.testing.assert_allclose(shifted_nxt.rho, nxt.rho, atol=1e-12)
        assert shifted_nxt.loglik == pytest.approx(nxt.loglik, rel=1e-10)


class TestRunEm:
    def test_recovers_signal_at_high_snr(self, signal, distribution):
        rng = make_rng(31)
        obs = sample_observations(signal, distribution, 0.1, 500, rng)
        x0 = list(signal + 0.1 * rng.standard_normal(signal.size))
        result = run_em(obs, EmOptions(init="provided", x0=x0, max_iters=200), rng)
        assert relative_error(result.x_hat, signal) < 0.05
        assert np.max(np.abs(result.rho_hat - distribution)) < 0.1
        assert result.method == "em"

    def test_trace_and_diagnostics(self, observations, rng):
        result = run_em(observations, EmOptions(max_iters=30), rng)
        assert len(result.trace) == result.diagnostics["iterations"] + 1
        assert result.diagnostics["loglik"] == result.trace[-1]
        assert result.rho_hat.sum() == pytest.approx(1.0)

    def test_uniform_variant_label(self, observations, rng):
        result = run_em(observations, EmOptions(variant="uniform", max_iters=10), rng)
        assert result.method == "uniform_em"
        np.testing.assert_allclose(result.rho_hat, 1.0 / observations.L)

    def test_warm_start_falls_back_when_spectral_fails(self, signal, distribution, rng):
        obs = sample_observations(signal - signal.mean(), distribution, 0.0, 50, rng)
        result = run_em(obs, EmOptions(init="spectral_warm_start", weight_sigma=0.5, max_iters=5), rng)
        assert np.all(np.isfinite(result.x_hat))

    def test_provided_start_needs_x0(self):
        with pytest.raises(ConfigError):
            build_options(EmOptions, init="provided")

    def test_noiseless_data_from_spectral_warm_start(self, signal, distribution):
        rng = make_rng(12)
        obs = sample_observations(signal, distribution, 0.0, 2000, rng)
        result = run_em(obs, EmOptions(init="spectral_warm_start", weight_sigma=1e-3, max_iters=50), rng)
        assert relative_error(result.x_hat, signal) < 1e-6
