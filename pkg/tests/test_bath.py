import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbattery.bath import (BathSpec, bath_correlation_time, check_weak_coupling, kms_residual,
                           rate_arrays, rate_set, spectral_rate)
from qbattery.errors import DomainError
from qbattery.hamiltonian import DriveSchedule, Ordering

betas = st.floats(0.01, 20.0)
nonzero_omega = st.floats(1e-3, 40.0).flatmap(lambda w: st.sampled_from([w, -w]))


class TestSpectralRate:
    def test_zero_frequency_limit(self, bath):
        assert spectral_rate(bath, 0.0) == pytest.approx(2 * math.pi * 1e-4 * 2.6, rel=1e-14)
        assert spectral_rate(bath, 0.0) == pytest.approx(1.63363e-3, rel=1e-5)

    def test_unit_frequency(self, bath):
        assert spectral_rate(bath, 1.0) == pytest.approx(1.8911e-3, rel=1e-4)

    def test_negative_unit_frequency(self, bath):
        assert spectral_rate(bath, -1.0) == pytest.approx(1.2873e-3, rel=1e-4)
        assert spectral_rate(bath, -1.0) == pytest.approx(math.exp(-1 / 2.6) * spectral_rate(bath, 1.0), rel=1e-13)

    def test_series_branch_is_continuous(self, bath):
        w = np.array([-2e-8, -1e-8 * 2.6 * 0.999, 0.0, 1e-8 * 2.6 * 0.999, 2e-8, 1e-6])
        g = spectral_rate(bath, w)
        assert np.all(np.isfinite(g))
        np.testing.assert_allclose(g, spectral_rate(bath, 0.0), rtol=1e-6)

    def test_vectorised_matches_scalar(self, bath):
        w = np.linspace(-30, 30, 31)
        np.testing.assert_array_equal(spectral_rate(bath, w), [spectral_rate(bath, x) for x in w])

    @given(betas, nonzero_omega)
    def test_positive_and_finite(self, beta, w):
        g = spectral_rate(BathSpec(beta=beta), w)
        assert math.isfinite(g) and g >= 0.0
        if abs(beta * w) < 700:
            assert g > 0.0

    @given(st.floats(0.01, 30.0))
    def test_zero_temperature_limit(self, w):
        cold = BathSpec(beta=1e4)
        expected = 2 * math.pi * cold.eta_g2 * w * math.exp(-w / cold.omega_c)
        assert spectral_rate(cold, w) == pytest.approx(expected, rel=1e-12)
        assert spectral_rate(cold, -w) < 1e-30

    @given(betas, st.floats(-40.0, 40.0), st.floats(1e-12, 1.0))
    def test_linear_in_coupling(self, beta, w, eta):
        assert spectral_rate(BathSpec(eta, beta), w) == pytest.approx(
            eta / 1e-4 * spectral_rate(BathSpec(1e-4, beta), w), rel=1e-12, abs=0)


class TestKMS:
    @pytest.mark.parametrize("beta,w", [(1 / 2.6, 1.0), (1 / 2.6, 0.70711), (13.0, 2.0)])
    def test_examples(self, beta, w):
        assert kms_residual(BathSpec(beta=beta), w) < 1e-12

    def test_zero_frequency_rejected(self, bath):
        with pytest.raises(DomainError):
            kms_residual(bath, 0.0)

    @given(betas, nonzero_omega)
    def test_property(self, beta, w):
        if abs(beta * w) < 50:
            assert kms_residual(BathSpec(beta=beta), w) < 1e-12


class TestCorrelationTime:
    def test_values(self):
        assert bath_correlation_time(BathSpec(beta=1 / 2.6)) == pytest.approx(0.061213, abs=1e-6)
        assert bath_correlation_time(BathSpec(beta=5 / 2.6)) == pytest.approx(0.306067, abs=1e-6)
        assert bath_correlation_time(BathSpec(beta=2 * math.pi)) == pytest.approx(1.0, rel=1e-15)

    def test_warns_for_low_cutoff(self):
        with pytest.warns(RuntimeWarning, match="cutoff"):
            bath_correlation_time(BathSpec(beta=0.1, omega_c=1.0))


class TestBathSpec:
    @pytest.mark.parametrize("kwargs", [dict(eta_g2=-1e-4), dict(beta=0.0), dict(omega_c=-1.0),
                                        dict(beta=math.nan)])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            BathSpec(**kwargs)

    def test_weak_coupling_defaults_quiet(self, sched, bath):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert check_weak_coupling(bath, sched) == []

    def test_weak_coupling_violation_warns(self, sched):
        with pytest.warns(RuntimeWarning):
            assert check_weak_coupling(BathSpec(eta_g2=1.0), sched)


class TestRates:
    def test_equal_amplitudes(self, bath):
        r = rate_set(bath, DriveSchedule(1.0, 1.0, Ordering.CHARGE), 0.5)
        np.testing.assert_array_equal(r.x[[0, 1, 2, 3, 4, 5, 8, 9]], 0.0)
        np.testing.assert_array_equal(r.y[1:], 0.0)
        assert r.x[6] == pytest.approx(0.5 * spectral_rate(bath, 1 / math.sqrt(2)), rel=1e-14)

    def test_zero_coupling(self, sched):
        x, y = rate_arrays(BathSpec(eta_g2=0.0), sched, np.linspace(0, 1, 11))
        assert not x.any() and not y.any()

    def test_kms_example(self, bath):
        sched = DriveSchedule(2.0, 1.0)
        r = rate_set(bath, sched, 0.3)
        gap = math.hypot(*sched.amplitudes(0.3))
        assert r.x[1] == pytest.approx(math.exp(-bath.beta * gap) * r.x[0], rel=1e-13)

    @pytest.mark.parametrize("ordering", list(Ordering))
    def test_kms_pairings_on_grid(self, bath, ordering):
        sched = DriveSchedule(2.0, 1.0, ordering)
        s = np.linspace(0, 1, 1000)
        x, _ = rate_arrays(bath, sched, s)
        gap = np.hypot(*sched.amplitudes(s))
        for up, down, k in [(0, 1, 1), (2, 3, 1), (4, 5, 1), (6, 7, 1), (8, 9, 2)]:
            nz = np.abs(x[:, up]) > 1e-300
            np.testing.assert_allclose(x[nz, down], np.exp(-k * bath.beta * gap[nz]) * x[nz, up],
                                       rtol=1e-12, atol=0)

    def test_explicit_formulas(self, bath):
        sched = DriveSchedule(2.0, 1.0)
        s = 0.4
        a, b = sched.amplitudes(s)
        d = math.hypot(a, b)
        g = lambda w: spectral_rate(bath, w)
        expected_x = [
            (a - b) ** 2 / (4 * d ** 2) * g(d), (a - b) ** 2 / (4 * d ** 2) * g(-d),
            a * b * (a - b) / (math.sqrt(2) * d ** 3) * g(d),
            a * b * (a - b) / (math.sqrt(2) * d ** 3) * g(-d),
            a * b * (a - b) / (math.sqrt(2) * d ** 3) * g(d),
            a * b * (a - b) / (math.sqrt(2) * d ** 3) * g(-d),
            2 * a ** 2 * b ** 2 / d ** 4 * g(d), 2 * a ** 2 * b ** 2 / d ** 4 * g(-d),
            (a ** 2 - b ** 2) ** 2 / (4 * d ** 4) * g(2 * d),
            (a ** 2 - b ** 2) ** 2 / (4 * d ** 4) * g(-2 * d),
        ]
        expected_y = [
            (a + b) ** 2 / (2 * d ** 2) * g(0), (a ** 2 - b ** 2) ** 2 / (4 * d ** 4) * g(0),
            (a + b) * (a ** 2 - b ** 2) / (2 * math.sqrt(2) * d ** 3) * g(0),
            (a + b) * (a ** 2 - b ** 2) / (2 * math.sqrt(2) * d ** 3) * g(0),
        ]
        r = rate_set(bath, sched, s)
        np.testing.assert_allclose(r.x, expected_x, rtol=1e-13)
        np.testing.assert_allclose(r.y, expected_y, rtol=1e-13)

    def test_cross_switch(self, sched):
        x, y = rate_arrays(BathSpec(cross_correlated=False), DriveSchedule(2.0, 1.0), np.linspace(0, 1, 7))
        assert not x[:, 2:6].any() and not y[:, 2:].any()
        assert x[1:-1, [0, 6]].all()

    @given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.0, 1.0), betas)
    def test_rate_matrix_positive(self, wa, wb, s, beta):
        x, y = (v[0] for v in rate_arrays(BathSpec(beta=beta), DriveSchedule(wa, wb), s))
        assert min(x[0], x[1], x[6], x[7], x[8], x[9], y[0], y[1]) >= 0.0
        # the x/z block at each frequency is PSD; with one shared gamma it has rank one
        for xx, xz, zz in [(x[0], x[2], x[6]), (x[1], x[3], x[7]), (y[0], y[2], y[1])]:
            assert xz * xz == pytest.approx(xx * zz, rel=1e-10, abs=1e-30)
        assert x[4] == x[2] and x[5] == x[3] and y[3] == y[2]

    @given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.0, 1.0), st.floats(1e-6, 1e-2))
    def test_linear_in_coupling(self, wa, wb, s, eta):
        sched = DriveSchedule(wa, wb)
        x1, y1 = rate_arrays(BathSpec(eta_g2=eta), sched, s)
        x2, y2 = rate_arrays(BathSpec(eta_g2=2 * eta), sched, s)
        np.testing.assert_allclose(x2, 2 * x1, rtol=1e-14, atol=0)
        np.testing.assert_allclose(y2, 2 * y1, rtol=1e-14, atol=0)
