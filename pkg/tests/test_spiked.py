import numpy as np
import pytest

from multireference_alignment.core.cyclic import dft
from multireference_alignment.core.model import uniform_distribution
from multireference_alignment.core.spiked import (
    critical_sigma,
    flat_spectrum_signal,
    predicted_cosine2,
    sample_threshold,
    simulate_spiked_trial,
    spike_eigenvalue,
)
from multireference_alignment.utils.helpers import make_rng


class TestPrediction:
    def test_known_value(self):
        prediction = predicted_cosine2(2.0, 1.0, 1.0)
        assert prediction.cos2 == pytest.approx(0.5)
        assert prediction.above_threshold
        assert prediction.critical_lambda == pytest.approx(1.0)

    def test_zero_at_and_below_threshold(self):
        assert predicted_cosine2(0.5, 1.0, 0.25).cos2 == 0.0
        assert predicted_cosine2(0.1, 1.0, 0.25).cos2 == 0.0

    def test_continuous_and_increasing_in_lambda(self):
        sigma, gamma = 1.3, 0.4
        critical = sigma ** 2 * np.sqrt(gamma)
        assert predicted_cosine2(critical * (1 + 1e-9), sigma, gamma).cos2 < 1e-6
        values = [predicted_cosine2(lam, sigma, gamma).cos2 for lam in np.linspace(critical, 20 * critical, 40)]
        assert np.all(np.diff(values) >= 0)
        assert values[-1] < 1.0

    def test_vanishing_noise(self):
        assert predicted_cosine2(1.0, 1e-4, 0.5).cos2 == pytest.approx(1.0, abs=1e-6)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            predicted_cosine2(1.0, 0.0, 1.0)

    def test_critical_sigma(self):
        lam, gamma = 4.0, 0.16
        sigma = critical_sigma(lam, gamma)
        assert sigma ** 2 * np.sqrt(gamma) == pytest.approx(lam)
        assert predicted_cosine2(lam, 0.99 * sigma, gamma).above_threshold
        assert not predicted_cosine2(lam, 1.01 * sigma, gamma).above_threshold


class TestSpikeScaling:
    def test_spike_eigenvalue(self):
        x = np.zeros(55)
        x[0] = 10.0
        rho = np.ones(55)
        rho[0] = 25.0
        rho /= rho.sum()
        assert rho.max() == pytest.approx(25 / 79)
        assert spike_eigenvalue(x, rho) == pytest.approx(100.0 * 25 / 79)

    def test_uniform_spike_is_small(self, signal):
        expected = signal @ signal / signal.size
        assert spike_eigenvalue(signal, uniform_distribution(signal.size)) == pytest.approx(expected)

    def test_whitening_removes_spectral_color(self, signal, distribution):
        expected = signal @ signal * distribution.max()
        assert spike_eigenvalue(signal, distribution) == pytest.approx(expected, rel=1e-9)

    def test_vanishing_spectrum_uses_closed_form(self, signal, distribution):
        centered = signal - signal.mean()
        expected = centered @ centered * distribution.max()
        assert spike_eigenvalue(centered, distribution) == pytest.approx(expected)

    def test_sample_threshold(self):
        assert sample_threshold(400, 5.5313, 10.0, 25 / 55) == pytest.approx(181.2, rel=1e-3)

    def test_uniform_needs_l_squared_more_samples(self):
        L = 50
        concentrated = sample_threshold(L, 2.0, 1.0, 1.0)
        spread = sample_threshold(L, 2.0, 1.0, 1.0 / L)
        assert spread / concentrated == pytest.approx(L ** 2)

    def test_flat_spectrum_signal(self):
        x = flat_spectrum_signal(16, make_rng(2), norm=3.0)
        assert np.isrealobj(x)
        np.testing.assert_allclose(np.abs(dft(x)), 3.0, rtol=1e-10)
        assert np.linalg.norm(x) == pytest.approx(3.0)


class TestSimulation:
    def test_low_noise_trial_recovers_eigenvector(self):
        rng = make_rng(6)
        L = 20
        x = flat_spectrum_signal(L, rng)
        rho = np.full(L, 0.5 / (L - 1))
        rho[3] = 0.5
        trial = simulate_spiked_trial(x, rho, 0.01, 2000, rng)
        assert trial.empirical_cosine > 0.99
        assert trial.predicted_cosine > 0.99
        assert trial.empirical_mse < 0.05

    def test_heavy_noise_prediction_is_zero(self):
        rng = make_rng(7)
        L = 20
        x = flat_spectrum_signal(L, rng)
        rho = np.full(L, 0.5 / (L - 1))
        rho[0] = 0.5
        trial = simulate_spiked_trial(x, rho, 5.0, 40, rng)
        assert trial.predicted_cosine == 0.0
        assert trial.predicted_mse == pytest.approx(2.0)
        assert 0.0 <= trial.empirical_cosine <= 1.0
