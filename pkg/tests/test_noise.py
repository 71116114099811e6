"""Noise models: state-space flicker generator, DS white noise, QPN."""

import numpy as np
import pytest

from clockdm.noise import (
    NoiseConfig,
    build_mandelbrot,
    ds_effective_noise,
    generate_noise,
    probe_noise_phase,
    sql_allan_deviation,
    step_noise,
)
from clockdm.sequences import build_ramsey
from clockdm.stability import (
    averaged_periodogram,
    log_psd_slope,
    overlapping_allan_deviation,
)


class TestModelConstruction:
    def test_geometry_constants(self):
        model = build_mandelbrot(NoiseConfig(), dt=1e-3)
        # beta = (10 f_max / f_min)^(1/m) = (10^10)^(1/10)
        assert model.beta == pytest.approx(10.0)
        # alpha = beta^(-lambda/2) with lambda = -1
        assert model.alpha == pytest.approx(np.sqrt(10.0))
        assert model.tau == pytest.approx(1.0 / (2 * np.pi * 1e-6))

    def test_transition_entries_in_unit_interval(self):
        model = build_mandelbrot(NoiseConfig(), dt=1e-3)
        assert np.all(model.a_diag > 0.0) and np.all(model.a_diag < 1.0)

    def test_continuous_time_limit(self):
        # dt -> 0: A(i,i) -> 1 and B(i) -> 0
        model = build_mandelbrot(NoiseConfig(), dt=1e-12)
        assert np.all(model.a_diag > 1.0 - 1e-6)
        assert np.all(np.abs(model.b_input) < 1e-6)

    def test_explicit_recursion_values(self):
        cfg = NoiseConfig()
        dt = 1e-3
        model = build_mandelbrot(cfg, dt)
        beta, alpha, tau = model.beta, model.alpha, model.tau
        i = np.arange(1, 11)
        assert np.allclose(model.a_diag, np.exp(-beta ** (i - 1) * dt / (alpha * tau)))
        assert np.allclose(
            model.b_input, (1 - np.exp(-beta ** (i - 1) * dt / (alpha * tau))) / beta ** (i - 1)
        )

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            build_mandelbrot(NoiseConfig(model_size=0), dt=1e-3)
        with pytest.raises(ValueError):
            build_mandelbrot(NoiseConfig(f_min=1.0, f_max=0.1), dt=1e-3)
        with pytest.raises(ValueError):
            build_mandelbrot(NoiseConfig(), dt=0.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            NoiseConfig(sigma_ln=0.0)
        with pytest.raises(ValueError):
            NoiseConfig(scheme="purple")


class TestGenerator:
    def test_zero_state_zero_input(self):
        model = build_mandelbrot(NoiseConfig(), dt=1e-3)

        class ZeroRng:
            def standard_normal(self, n):
                return np.zeros(n)

        assert step_noise(model, ZeroRng()) == 0.0

    def test_step_matches_vectorized(self):
        # same seeds, same draws: the two paths must produce equal samples
        cfg = NoiseConfig()
        m1 = build_mandelbrot(cfg, dt=1e-3)
        m2 = build_mandelbrot(cfg, dt=1e-3)
        r1 = np.random.default_rng(5)
        r2 = np.random.default_rng(5)
        steps = np.array([step_noise(m1, r1) for _ in range(200)])
        vec = generate_noise(m2, 200, r2)
        assert np.allclose(steps, vec, rtol=1e-9, atol=1e-12)

    def test_allan_deviation_flat_at_unity(self):
        # 20 realizations; flicker floor within 20% of 1 before rescaling
        cfg = NoiseConfig()
        rng = np.random.default_rng(77)
        taus = np.array([0.1, 1.0, 10.0])
        devs = []
        for _ in range(20):
            model = build_mandelbrot(cfg, dt=1e-2)
            trace = generate_noise(model, 1 << 15, rng)
            devs.append(overlapping_allan_deviation(trace, 1e-2, taus)[1])
        mean_dev = np.mean(devs, axis=0)
        assert np.all(np.abs(mean_dev - 1.0) < 0.2)

    def test_psd_slope_near_minus_one(self):
        cfg = NoiseConfig()
        rng = np.random.default_rng(13)
        traces = []
        for _ in range(12):
            model = build_mandelbrot(cfg, dt=1e-2)
            traces.append(generate_noise(model, 1 << 16, rng))
        f, psd = averaged_periodogram(traces, 1e-2)
        slope = log_psd_slope(f, psd, 0.01, 5.0)
        assert slope == pytest.approx(-1.0, abs=0.15)

    def test_state_continuity_across_chunks(self):
        # chunked generation equals one long call given the same shocks
        cfg = NoiseConfig()
        m1 = build_mandelbrot(cfg, dt=1e-3)
        m2 = build_mandelbrot(cfg, dt=1e-3)
        r1 = np.random.default_rng(9)
        r2 = np.random.default_rng(9)
        full = generate_noise(m1, 1000, r1)
        parts = np.concatenate([generate_noise(m2, n, r2) for n in (100, 400, 500)])
        assert np.allclose(full, parts, rtol=1e-12)


class TestDsNoise:
    def test_sql_value(self):
        # 1000 atoms, 1 s probe on the 429 THz lattice transition
        sigma = sql_allan_deviation(1000, 1.0)
        assert sigma == pytest.approx(1.0 / (2 * np.pi * 429e12 * np.sqrt(1000)), rel=1e-12)

    def test_atom_number_scaling(self):
        assert sql_allan_deviation(2000, 1.0) == pytest.approx(
            sql_allan_deviation(1000, 1.0) / np.sqrt(2.0)
        )

    def test_infinite_atoms_limit(self):
        assert sql_allan_deviation(1e18, 1.0) < 1e-24

    def test_sample_allan_deviation(self):
        rng = np.random.default_rng(31)
        y = ds_effective_noise(1000, 1.0, rng, n_intervals=100_000)
        tau, dev = overlapping_allan_deviation(y, 1.0, [1.0])
        assert dev[0] == pytest.approx(sql_allan_deviation(1000, 1.0), rel=0.05)

    def test_white_slope(self):
        # Allan deviation follows tau^(-1/2)
        rng = np.random.default_rng(32)
        y = ds_effective_noise(1000, 1.0, rng, n_intervals=200_000)
        tau, dev = overlapping_allan_deviation(y, 1.0, [1.0, 4.0, 16.0, 64.0])
        slope = np.polyfit(np.log10(tau), np.log10(dev), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.05)


class TestProbeNoisePhase:
    def test_zero_trace(self):
        seq = build_ramsey(0.5, 1.0)
        t = np.linspace(0.0, 1.0, 101)
        phi_ln, phi_qpn = probe_noise_phase(seq, t, np.zeros_like(t), np.random.default_rng(0))
        assert phi_ln == 0.0
        assert phi_qpn in (-1.0, 1.0)

    def test_qpn_statistics(self):
        rng = np.random.default_rng(41)
        seq = build_ramsey(0.5, 1.0)
        t = np.linspace(0.0, 1.0, 11)
        z = np.zeros_like(t)
        draws = np.array([probe_noise_phase(seq, t, z, rng)[1] for _ in range(20_000)])
        assert set(np.unique(draws)) == {-1.0, 1.0}
        # symmetric Bernoulli: mean within 3/sqrt(N), variance exactly 1
        assert abs(draws.mean()) < 3.0 / np.sqrt(draws.size)
        assert np.mean(draws**2) == 1.0


class TestIndependence:
    def test_noise_uncorrelated_with_signal_phase(self):
        # sample cross-correlation below 3 sigma over 10^4 probes
        from clockdm.dmfield import DmParameters, synthesize_realization
        from clockdm.engine import qpn_phases, signal_phases, build_probe_sequences

        rng_dm = np.random.default_rng(51)
        rng_qpn = np.random.default_rng(52)
        p = DmParameters(f_dm=10.0, coherence_periods=100.0)
        n = 10_000
        r = synthesize_realization(p, t_m=float(n), t_p=1.0, rng=rng_dm)
        seqs = build_probe_sequences("ramsey", float(n), 1.0, None)
        phi_s = signal_phases(seqs, r)
        phi_n = qpn_phases(n, rng_qpn)
        corr = np.corrcoef(phi_s, phi_n)[0, 1]
        assert abs(corr) < 3.0 / np.sqrt(n)
