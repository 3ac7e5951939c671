import numpy as np
import pytest

from multireference_alignment.core.cyclic import (
    align,
    align_estimate,
    align_exhaustive,
    circulant_matrix,
    circulant_multiply,
    circulant_transpose_multiply,
    cross_correlation,
    dft,
    idft,
    orbit_distance2,
    relative_error,
    shift,
)
from multireference_alignment.utils.errors import LengthMismatchError, ZeroNormError


class TestShift:
    def test_definition(self):
        np.testing.assert_array_equal(shift(np.array([1, 2, 3, 4]), 1), [4, 1, 2, 3])

    def test_zero_and_full_turn(self, signal):
        np.testing.assert_array_equal(shift(signal, 0), signal)
        np.testing.assert_array_equal(shift(signal, signal.size), signal)

    def test_composition(self, signal):
        np.testing.assert_array_equal(shift(shift(signal, 3), 7), shift(signal, 10 % signal.size))

    def test_negative_shift_inverts(self, signal):
        np.testing.assert_array_equal(shift(shift(signal, 5), -5), signal)


class TestFourier:
    def test_impulse_has_flat_spectrum(self):
        delta = np.zeros(6)
        delta[0] = 1.0
        np.testing.assert_allclose(dft(delta), np.ones(6))

    def test_constant_is_dc_only(self):
        expected = np.zeros(5)
        expected[0] = 2.0 * 5
        np.testing.assert_allclose(dft(np.full(5, 2.0)), expected, atol=1e-12)

    def test_idft_inverts_dft(self, signal):
        np.testing.assert_allclose(idft(dft(signal)), signal, atol=1e-12)


class TestCirculant:
    def test_columns_are_shifts(self, signal):
        C = circulant_matrix(signal)
        for j in range(signal.size):
            np.testing.assert_array_equal(C[:, j], shift(signal, j))

    def test_multiply_matches_dense(self, signal, rng):
        v = rng.standard_normal(signal.size)
        np.testing.assert_allclose(circulant_multiply(signal, v), circulant_matrix(signal) @ v, atol=1e-12)

    def test_transpose_multiply_matches_dense(self, signal, rng):
        v = rng.standard_normal(signal.size)
        np.testing.assert_allclose(circulant_transpose_multiply(signal, v), circulant_matrix(signal).T @ v,
                                   atol=1e-12)

    def test_identity_cases(self, signal):
        delta = np.zeros(signal.size)
        delta[0] = 1.0
        np.testing.assert_allclose(circulant_multiply(delta, signal), signal, atol=1e-12)
        np.testing.assert_allclose(circulant_multiply(signal, delta), signal, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            circulant_multiply(np.ones(4), np.ones(5))


class TestAlignment:
    def test_cross_correlation_definition(self, signal, rng):
        reference = rng.standard_normal(signal.size)
        corr = cross_correlation(signal, reference)
        expected = [shift(signal, ell) @ reference for ell in range(signal.size)]
        np.testing.assert_allclose(corr, expected, atol=1e-12)

    def test_cross_correlation_rowwise(self, signal, rng):
        rows = rng.standard_normal((3, signal.size))
        corr = cross_correlation(signal, rows)
        for j in range(3):
            np.testing.assert_allclose(corr[j], cross_correlation(signal, rows[j]), atol=1e-12)

    def test_align_recovers_shift(self, signal):
        result = align(shift(signal, -3), signal)
        assert result.shift == 3
        assert result.error == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(result.aligned, signal)

    def test_align_identity(self, signal):
        result = align(signal, signal)
        assert result.shift == 0
        assert result.error == pytest.approx(0.0, abs=1e-12)

    def test_ties_go_to_smallest_shift(self):
        assert align(np.ones(6), np.ones(6)).shift == 0
        periodic = np.tile([1.0, -2.0], 3)
        assert align(periodic, periodic).shift == 0

    def test_matches_exhaustive_search(self, rng):
        for _ in range(10):
            candidate, reference = rng.standard_normal(9), rng.standard_normal(9)
            fast, slow = align(candidate, reference), align_exhaustive(candidate, reference)
            assert fast.shift == slow.shift
            assert fast.error == pytest.approx(slow.error, rel=1e-10)


class TestErrors:
    def test_relative_error_values(self, signal):
        assert relative_error(signal, signal) == pytest.approx(0.0, abs=1e-12)
        assert relative_error(2.0 * signal, signal) == pytest.approx(1.0)
        assert relative_error(shift(signal, 5), signal) == pytest.approx(0.0, abs=1e-12)

    def test_zero_truth(self):
        with pytest.raises(ZeroNormError):
            relative_error(np.ones(4), np.zeros(4))
        with pytest.raises(ZeroNormError):
            orbit_distance2(np.ones(4), np.zeros(4), normalized=True)

    def test_orbit_distance_normalization(self, signal):
        raw = orbit_distance2(2.0 * signal, signal)
        assert raw == pytest.approx(signal @ signal)
        assert orbit_distance2(2.0 * signal, signal, normalized=True) == pytest.approx(1.0)

    def test_align_estimate_moves_rho_oppositely(self, signal, distribution):
        x_hat = shift(signal, 2)
        rho_hat = shift(distribution, -2)
        x_aligned, rho_aligned = align_estimate(x_hat, rho_hat, signal)
        np.testing.assert_allclose(x_aligned, signal)
        np.testing.assert_allclose(rho_aligned, distribution)
