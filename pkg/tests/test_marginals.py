"""Tests for the marginal CDF/PDF estimators and the copula transform."""

import numpy as np
import pytest
from scipy import stats

from ciccg import numkit
from ciccg.exceptions import InvalidParameter, TooFewSamples
from ciccg.marginals import fit_kde, fit_parametric_t


class TestFitKde:
    def test_symmetric_two_point_cdf(self):
        fm = fit_kde(np.array([[-1.0], [1.0]]))
        u, _ = fm.transform(np.array([0.0]))
        assert u[0] == pytest.approx(0.5)

    def test_two_point_density_hand_sum(self):
        """KDE of {-1, 1} with h=1 at 0 equals the two-term kernel sum."""
        fm = fit_kde(np.array([[-1.0], [1.0]]))
        comp = fm.components[0]
        object.__setattr__(comp, "bandwidth", 1.0)
        expected = 0.5 * (stats.norm.pdf(-1.0) + stats.norm.pdf(1.0))
        assert fm.density_diag(np.array([0.0]))[0] == pytest.approx(expected, rel=1e-12)

    def test_cdf_upper_limit(self):
        rng = np.random.default_rng(20)
        samples = rng.normal(size=(50, 1))
        fm = fit_kde(samples)
        spread = samples.std()
        raw = fm.components[0].cdf(np.array([1e6 * spread]))
        assert raw[0] >= 1 - 1e-9

    def test_degenerate_samples_bandwidth_floor(self):
        """All-identical samples fall back to the bandwidth floor; PDF stays finite."""
        fm = fit_kde(np.zeros((10, 1)))
        dens = fm.density_diag(np.array([0.0]))
        assert np.isfinite(dens[0]) and dens[0] > 0
        assert fm.components[0].bandwidth == pytest.approx(1e-6)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            fit_kde(np.zeros((1, 2)))

    def test_densities_nonnegative(self):
        rng = np.random.default_rng(21)
        fm = fit_kde(rng.standard_cauchy(size=(40, 3)))
        dens = fm.density_diag(rng.normal(size=(100, 3)))
        assert np.all(dens >= 0)


class TestFitParametricT:
    def test_cdf_median(self):
        fm = fit_parametric_t(1.0, 1.0, 3)
        u, _ = fm.transform(np.zeros(3))
        np.testing.assert_allclose(u, 0.5)

    def test_cauchy_cdf_value(self):
        fm = fit_parametric_t(1.0, 1.0, 1)
        u, _ = fm.transform(np.array([1.0]))
        assert u[0] == pytest.approx(0.75, abs=1e-12)

    def test_cauchy_density_at_mode(self):
        fm = fit_parametric_t(1.0, 1.0, 1)
        assert fm.density_diag(np.array([0.0]))[0] == pytest.approx(1 / np.pi, rel=1e-12)

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameter):
            fit_parametric_t(-1.0, 1.0, 3)
        with pytest.raises(InvalidParameter):
            fit_parametric_t(1.0, 1.0, 0)


class TestTransform:
    def test_clipping_flags(self):
        """A raw CDF value of ~1e-9 clips to eps with the flag set."""
        fm = fit_parametric_t(1.0, 1.0, 1, clip_eps=1e-6)
        e = numkit.student_t_quantile(1e-9, 1.0)  # far left tail
        u, clipped = fm.transform(np.array([e]))
        assert u[0] == pytest.approx(1e-6)
        assert clipped[0]

    def test_no_clip_flag_in_bulk(self):
        fm = fit_parametric_t(1.0, 1.0, 2)
        u, clipped = fm.transform(np.array([0.3, -0.4]))
        assert not clipped.any()

    def test_bounded_in_clip_interval(self):
        rng = np.random.default_rng(22)
        fm = fit_parametric_t(1.0, 1.0, 3, clip_eps=1e-6)
        u, _ = fm.transform(1e8 * rng.standard_cauchy(size=(500, 3)))
        assert np.all(u >= 1e-6) and np.all(u <= 1 - 1e-6)

    def test_batched_shape(self):
        fm = fit_parametric_t(1.0, 1.0, 3)
        u, clipped = fm.transform(np.zeros((7, 3)))
        assert u.shape == (7, 3) and clipped.shape == (7, 3)

    def test_invalid_eps(self):
        with pytest.raises(InvalidParameter):
            fit_parametric_t(1.0, 1.0, 3, clip_eps=0.7)


class TestEstimatorProperties:
    @pytest.mark.parametrize("family", ["kde", "t"])
    def test_cdf_monotone(self, family):
        """F(a) <= F(b) whenever a <= b, over 1000 random pairs."""
        rng = np.random.default_rng(23)
        if family == "kde":
            fm = fit_kde(rng.standard_cauchy(size=(60, 1)))
        else:
            fm = fit_parametric_t(2.2, 0.7, 1)
        pairs = np.sort(rng.standard_cauchy(size=(1000, 2)) * 3, axis=1)
        comp = fm.components[0]
        assert np.all(comp.cdf(pairs[:, 0]) <= comp.cdf(pairs[:, 1]))

    @pytest.mark.parametrize("family", ["kde", "t"])
    def test_pdf_is_cdf_derivative(self, family):
        """Central difference of the CDF matches the PDF within rel 1e-4."""
        rng = np.random.default_rng(24)
        if family == "kde":
            fm = fit_kde(rng.normal(scale=1.3, size=(80, 1)))
            scale = 1.3
        else:
            fm = fit_parametric_t(2.2, 0.9, 1)
            scale = 0.9
        comp = fm.components[0]
        h = 1e-5 * scale
        points = rng.normal(scale=scale, size=200)
        fd = (comp.cdf(points + h) - comp.cdf(points - h)) / (2 * h)
        dens = comp.pdf(points)
        np.testing.assert_allclose(fd, dens, rtol=1e-4)

    def test_uniformity_of_own_samples(self):
        """Transforming draws from the marginal itself gives uniform u-values."""
        rng = numkit.spawn_rng(25, 0)
        fm = fit_parametric_t(1.0, 1.0, 1)
        e = rng.standard_cauchy(size=(10_000, 1))
        u, _ = fm.transform(e)
        ks = stats.kstest(u[:, 0], "uniform").statistic
        assert ks < 1.63 / np.sqrt(10_000)
