import math

import numpy as np
import pytest

from multireference_alignment.core.bounds import (
    aperiodic_rate_bound,
    chi2_leading,
    first_distinguishing_order,
    orbit_bound,
    periodic_rate_bound,
)
from multireference_alignment.core.cyclic import orbit_distance2, shift
from multireference_alignment.core.model import periodic_distribution
from multireference_alignment.core.moments import moment_tensor_direct, periodic_counterexample
from multireference_alignment.utils.errors import IndistinguishablePairError, PeriodError
from multireference_alignment.utils.helpers import make_rng


@pytest.fixture
def counterexample_pair():
    rng = make_rng(15)
    x = rng.standard_normal(15)
    rho = periodic_distribution(15, 5, rng=rng)
    return x, rho, periodic_counterexample(x, 5)


class TestDistinguishingOrder:
    def test_counterexample_differs_at_third_order(self, counterexample_pair):
        x, rho, x_alt = counterexample_pair
        d, k_d = first_distinguishing_order(x, rho, x_alt, rho)
        assert d == 3
        direct = moment_tensor_direct(x, rho, 3).entries - moment_tensor_direct(x_alt, rho, 3).entries
        assert k_d == pytest.approx(np.sum(direct ** 2) / 6, rel=1e-8)

    def test_same_orbit_is_indistinguishable(self, signal, distribution):
        assert first_distinguishing_order(signal, distribution, signal, distribution) == (None, 0.0)
        d, k_d = first_distinguishing_order(signal, distribution, shift(signal, 2), shift(distribution, -2))
        assert d is None and k_d == 0.0

    def test_offset_differs_at_first_order(self, signal, distribution):
        d, k_d = first_distinguishing_order(signal, distribution, signal + 1.0, distribution)
        assert d == 1
        assert k_d == pytest.approx(signal.size)

    def test_order_limit(self, counterexample_pair):
        x, rho, x_alt = counterexample_pair
        assert first_distinguishing_order(x, rho, x_alt, rho, d_max=2) == (None, 0.0)

    def test_symmetric_in_the_two_pairs(self, counterexample_pair, signal, distribution, rng):
        x, rho, x_alt = counterexample_pair
        other = signal + 0.1 * rng.standard_normal(signal.size)
        other_rho = np.roll(distribution, 1)
        for first, second in (((x, rho), (x_alt, rho)), ((signal, distribution), (other, other_rho))):
            d, k_d = first_distinguishing_order(*first, *second)
            d_swapped, k_d_swapped = first_distinguishing_order(*second, *first)
            assert d == d_swapped
            assert k_d == pytest.approx(k_d_swapped, rel=1e-12)


class TestChiSquare:
    def test_leading_term(self, counterexample_pair):
        x, rho, x_alt = counterexample_pair
        _, k_d = first_distinguishing_order(x, rho, x_alt, rho)
        assert chi2_leading(x, rho, x_alt, rho, 2.0) == pytest.approx(k_d / 2.0 ** 6)

    def test_indistinguishable_pair_is_zero(self, signal, distribution):
        assert chi2_leading(signal, distribution, signal, distribution, 1.0) == 0.0


class TestOrbitBound:
    def test_report_fields(self, counterexample_pair):
        x, rho, x_alt = counterexample_pair
        report = orbit_bound(x, rho, x_alt, rho, N=1000, sigma=3.0)
        assert report.d == 3
        assert report.lambda_N == pytest.approx(1000 / 3.0 ** 6)
        assert report.orbit_distance2 == pytest.approx(orbit_distance2(x_alt, x, normalized=True))
        assert report.bound == pytest.approx(report.orbit_distance2 / math.expm1(report.lambda_N * report.k_d))
        assert report.leading_order
        assert report.as_row()["d"] == 3

    def test_composed_bound_is_not_smaller(self, counterexample_pair):
        x, rho, x_alt = counterexample_pair
        for sigma in (1.0, 3.0, 10.0):
            report = orbit_bound(x, rho, x_alt, rho, N=1000, sigma=sigma)
            assert report.bound_composed >= report.bound

    @pytest.mark.parametrize("chi2", [1e-4, 5e-4, 9e-4])
    def test_compositions_agree_for_small_chi2(self, counterexample_pair, chi2):
        x, rho, x_alt = counterexample_pair
        _, k_d = first_distinguishing_order(x, rho, x_alt, rho)
        sigma = (k_d / chi2) ** (1 / 6)
        report = orbit_bound(x, rho, x_alt, rho, N=int(round(1 / chi2)), sigma=sigma)
        assert report.chi2 == pytest.approx(chi2)
        assert report.bound_composed == pytest.approx(report.bound, rel=0.01)

    def test_bound_vanishes_with_many_samples(self, counterexample_pair):
        x, rho, x_alt = counterexample_pair
        report = orbit_bound(x, rho, x_alt, rho, N=10 ** 12, sigma=0.5)
        assert report.bound == 0.0
        assert report.bound_composed == 0.0

    def test_indistinguishable_pair_raises(self, signal, distribution):
        with pytest.raises(IndistinguishablePairError):
            orbit_bound(signal, distribution, signal, distribution, N=100, sigma=1.0)


class TestRateBounds:
    def test_aperiodic(self):
        assert aperiodic_rate_bound(10, 1.0) == pytest.approx(0.0125)

    def test_periodic(self):
        assert periodic_rate_bound(1, 1.0, 15, 5) == pytest.approx(9.259259e-3)

    def test_periodic_needs_short_period(self):
        with pytest.raises(PeriodError):
            periodic_rate_bound(10, 1.0, 15, 8)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            aperiodic_rate_bound(0, 1.0)
