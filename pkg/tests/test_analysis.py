"""Analysis: coherent statistic, expected lineshape, amplitude fit, bounds."""

import numpy as np
import pytest

from clockdm.analysis import (
    AmplitudeCalibration,
    MeasuredSpectrum,
    ProbeRecord,
    X_DET_95,
    analysis_grid,
    coherent_combine,
    detectable_amplitude_95,
    expected_lineshape,
    fit_amplitude,
    ramsey_analytic_sensitivity,
    uncertainty_ratio,
)
from clockdm.dmfield import DmParameters, deterministic_realization
from clockdm.engine import build_probe_sequences, combine_spectrum, signal_phases
from clockdm.sequences import build_ramsey, quadrature_components


class TestCoherentCombine:
    def test_empty_probe_list(self):
        with pytest.raises(ValueError):
            coherent_combine([], 1.0)

    def test_all_zero_phases(self):
        records = [ProbeRecord(build_ramsey(0.5 + j, 1.0)) for j in range(5)]
        assert coherent_combine(records, 0.3) == 0.0

    def test_deterministic_signal_against_direct_eq(self):
        # closed-form oracle on 10 probes: theta = 0 signal at the analysis
        # frequency; evaluate the double sum by hand
        f = 0.37
        nu_s = 0.8
        seqs = [build_ramsey((j + 0.5) * 1.0, 1.0) for j in range(10)]
        phis = []
        for seq in seqs:
            g = quadrature_components(seq, f)
            phis.append(2 * np.pi * nu_s * g.g_i)
        records = [ProbeRecord(s, phi_s=p) for s, p in zip(seqs, phis)]
        s_i = sum(
            np.sign(quadrature_components(s, f).g_i) * p for s, p in zip(seqs, phis)
        )
        s_q = sum(
            np.sign(quadrature_components(s, f).g_q) * p for s, p in zip(seqs, phis)
        )
        expect = np.sqrt(0.5 * s_i**2 + 0.5 * s_q**2)
        assert coherent_combine(records, f) == pytest.approx(expect, rel=1e-12)
        # and the coherent sum dominates: phi_M >= |sum sgn(g_I) phi| / sqrt(2)
        assert coherent_combine(records, f) >= abs(s_i) / np.sqrt(2) - 1e-12

    def test_incoherent_noise_power(self):
        # white noise adds incoherently: E[phi_M^2] = N_p sigma^2
        rng = np.random.default_rng(123)
        n_p, sigma, trials = 64, 1.3, 10_000
        seqs = build_probe_sequences("ramsey", float(n_p), 1.0, None)
        f = np.array([0.217])
        acc = 0.0
        for _ in range(trials):
            phi = sigma * rng.standard_normal(n_p)
            acc += combine_spectrum(seqs, phi, f)[0] ** 2
        acc /= trials
        expect = n_p * sigma**2
        assert acc == pytest.approx(expect, rel=0.05)


class TestExpectedLineshape:
    def test_sinc_branch_peak(self):
        p = DmParameters(f_dm=1.0)  # tau_c = 1e6 s
        t_m = 0.01 * p.tau_c
        f = np.array([p.f_dm])
        assert expected_lineshape(f, p, t_m)[0] == pytest.approx(1.0)

    def test_sinc_branch_zero(self):
        p = DmParameters(f_dm=1.0)
        t_m = 0.01 * p.tau_c
        f = np.array([p.f_dm, p.f_dm + 1.0 / t_m])
        f_c = expected_lineshape(f, p, t_m)
        assert f_c[1] == pytest.approx(0.0, abs=1e-12)

    def test_convolution_branch_unit_peak_and_width(self):
        p = DmParameters(f_dm=10.0, coherence_periods=100.0)
        t_m = 10.0 * p.tau_c
        grid = analysis_grid(p, t_m, n_points=600)
        f_c = expected_lineshape(grid, p, t_m, integration_points=20_000)
        assert f_c.max() == pytest.approx(1.0)
        # convolved line is wider than the window sinc but of order 1/tau_c
        half = grid[f_c >= 0.5]
        fwhm = half[-1] - half[0]
        assert 0.05 / p.tau_c < fwhm < 10.0 / p.tau_c

    def test_grid_too_coarse(self):
        p = DmParameters(f_dm=1.0)
        t_m = 1e4
        f = np.array([1.0 - 0.1, 1.0, 1.0 + 0.1])  # spacing >> 1/t_m
        with pytest.raises(ValueError):
            expected_lineshape(f, p, t_m)


class TestFitAmplitude:
    def _grid_and_fc(self):
        p = DmParameters(f_dm=1.0)
        t_m = 1000.0
        grid = analysis_grid(p, t_m, n_points=400)
        f_c = expected_lineshape(grid, p, t_m)
        return grid, f_c, t_m

    def test_exact_signal_recovery(self):
        grid, f_c, t_m = self._grid_and_fc()
        p1_true = 37.5
        spec = MeasuredSpectrum(grid, p1_true * f_c, n_probes=100)
        fit = fit_amplitude(spec, f_c, t_m, 10.0)
        assert fit.p1 == pytest.approx(p1_true, rel=1e-6)
        assert fit.p2 == pytest.approx(0.0, abs=1e-3 * p1_true)

    def test_inverse_crime_recovery(self):
        grid, f_c, t_m = self._grid_and_fc()
        p1_true, p2_true = 21.0, 8.0
        phi = np.sqrt(p1_true**2 * f_c**2 + p2_true**2)
        fit = fit_amplitude(MeasuredSpectrum(grid, phi, 100), f_c, t_m, 10.0)
        assert fit.p1 == pytest.approx(p1_true, rel=1e-4)
        assert fit.p2 == pytest.approx(p2_true, rel=1e-4)

    def test_grid_reorder_invariance(self):
        grid, f_c, t_m = self._grid_and_fc()
        rng = np.random.default_rng(6)
        phi = np.sqrt((14.0 * f_c) ** 2 + 25.0) + 0.3 * rng.standard_normal(f_c.size)
        phi = np.abs(phi)
        fit0 = fit_amplitude(MeasuredSpectrum(grid, phi, 100), f_c, t_m, 10.0)
        perm = rng.permutation(f_c.size)
        fit1 = fit_amplitude(
            MeasuredSpectrum(grid[perm], phi[perm], 100), f_c[perm], t_m, 10.0
        )
        assert fit1.p1 == pytest.approx(fit0.p1, rel=1e-6)
        assert fit1.p2 == pytest.approx(fit0.p2, rel=1e-6)

    def test_mismatched_grids(self):
        grid, f_c, t_m = self._grid_and_fc()
        with pytest.raises(ValueError):
            fit_amplitude(MeasuredSpectrum(grid, 0.0 * grid, 10), f_c[:-1], t_m, 10.0)


class TestDetectableAmplitude:
    def test_zero_noise_fits(self):
        from clockdm.analysis import FitResult

        fits = [FitResult(0.0, 0.0, 0.0) for _ in range(200)]
        cal = AmplitudeCalibration(nu_s_injected=1.0, p1=100.0)
        assert detectable_amplitude_95(fits, cal) == 0.0

    def test_gaussian_quantile_oracle(self):
        from clockdm.analysis import FitResult

        rng = np.random.default_rng(17)
        mu, sd, n = 50.0, 5.0, 40_000
        samples = mu + sd * rng.standard_normal(n)
        fits = [FitResult(max(s, 0.0), 0.0, 0.0) for s in samples]
        cal = AmplitudeCalibration(nu_s_injected=2.0, p1=100.0)
        got = detectable_amplitude_95(fits, cal)
        analytic = (mu + 1.6448536 * sd) * 2.0 / 100.0
        assert got == pytest.approx(analytic, rel=0.01)

    def test_insufficient_realizations(self):
        from clockdm.analysis import FitResult

        fits = [FitResult(1.0, 0.0, 0.0)] * 10
        cal = AmplitudeCalibration(1.0, 1.0)
        with pytest.raises(ValueError):
            detectable_amplitude_95(fits, cal)


class TestRamseyAnalytic:
    def test_direct_substitution(self):
        val = ramsey_analytic_sensitivity(1e-3, 100.0, 1e6)
        assert val == pytest.approx(3.95 / (2 * np.pi * 1e4), rel=1e-12)

    def test_x_constant(self):
        assert X_DET_95 == 3.95

    def test_tm_scaling(self):
        a = ramsey_analytic_sensitivity(1e-2, 1.0, 1e4)
        b = ramsey_analytic_sensitivity(1e-2, 1.0, 4e4)
        assert a == pytest.approx(2.0 * b, rel=1e-12)

    def test_out_of_band_warns(self):
        with pytest.warns(UserWarning):
            ramsey_analytic_sensitivity(1.0, 100.0, 1e6)


class TestResponseStructure:
    def test_ds_insensitivity_peaks_at_probe_harmonics(self):
        # signal-to-response ratio dips at f = k/T_p: the deterministic
        # response has local minima (worst sensitivity) at k/T_p
        t_p = 5.0
        t_m = 200.0
        p = DmParameters(f_dm=1.0)
        seqs = build_probe_sequences("ramsey", t_m, t_p, None)
        nu = 1.0
        f_scan = np.linspace(0.02, 0.5, 241)
        resp = np.empty(f_scan.size)
        for i, f in enumerate(f_scan):
            r = deterministic_realization(p, t_m, t_p, nu_s=nu, theta=0.0)
            phi = signal_phases(seqs, r, f_signal=f)
            resp[i] = combine_spectrum(seqs, phi, np.array([f]))[0]
        for k in (1, 2):
            f_k = k / t_p
            at_notch = resp[np.argmin(np.abs(f_scan - f_k))]
            nearby = resp[np.abs(np.abs(f_scan - f_k) - 0.05) < 0.01].max()
            assert at_notch < 0.05 * nearby

    def test_uncertainty_ratio_shape(self):
        noise = np.abs(np.random.default_rng(0).standard_normal((50, 8))) + 0.5
        signal = np.full((20, 8), 4.0)
        sigma = uncertainty_ratio(noise, signal, nu_s=2.0)
        assert sigma.shape == (8,)
        assert np.all(sigma > 0)
