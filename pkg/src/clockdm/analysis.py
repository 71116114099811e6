"""Coherent combination of probe phases, lineshape fit, detectability.

A measurement campaign yields one measured phase per probe,
phi_M,j = phi_S,j + phi_LN,j + phi_QPN,j.  At each analysis frequency f
the probes are summed with signs taken from the in-phase and quadrature
components of each probe's sensitivity function, so a signal
oscillating at f adds coherently while noise adds incoherently:

    phi_M(f)^2 = 1/2 (sum_j sgn(g_I,j(f)) phi_M,j)^2
               + 1/2 (sum_j sgn(g_Q,j(f)) phi_M,j)^2

The resulting spectrum is fitted to the expected lineshape F_c with the
two-parameter model sqrt(p1^2 F_c^2 + p2^2) (signal amplitude and
incoherent noise floor) by minimizing the mean square error, and the
95th percentile of noise-only fitted amplitudes — converted to physical
amplitude through a deterministic-injection calibration — is the
detectable amplitude.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize

from .dmfield import DmParameters, lineshape
from .sequences import PulseSequence, quadrature_components

_TWO_PI = 2.0 * np.pi

#: 95%-confidence detection threshold for an oscillation of unknown phase
#: and stochastic amplitude, in units of the incoherent noise level
X_DET_95 = 3.95


@dataclass(frozen=True)
class ProbeRecord:
    """Phases accumulated by one probe, kept with its pulse sequence."""

    sequence: PulseSequence
    phi_s: float = 0.0
    phi_ln: float = 0.0
    phi_qpn: float = 0.0

    @property
    def phi_m(self):
        return self.phi_s + self.phi_ln + self.phi_qpn


@dataclass(frozen=True)
class MeasuredSpectrum:
    """Coherent statistic phi_M over the analysis-frequency grid.

    ``probe_phases`` optionally retains the raw per-probe phi_M,j for
    diagnostics.
    """

    frequencies: np.ndarray
    phi_m: np.ndarray
    n_probes: int
    probe_phases: np.ndarray | None = None

    def __post_init__(self):
        if self.frequencies.shape != self.phi_m.shape:
            raise ValueError("frequency grid and phi_M must have equal shape")


@dataclass(frozen=True)
class FitResult:
    """MSE fit of the measured spectrum to the expected lineshape."""

    p1: float
    p2: float
    mse: float
    converged: bool = True
    restarts: int = 0


def coherent_combine(records, f):
    """Direct evaluation of the coherent statistic at one frequency.

    Reference implementation looping over probes; the campaign engine
    uses the vectorized equivalent in ``engine.py``.
    """
    if not records:
        raise ValueError("cannot combine an empty probe list")
    s_i = 0.0
    s_q = 0.0
    for rec in records:
        g = quadrature_components(rec.sequence, f)
        s_i += np.sign(g.g_i) * rec.phi_m
        s_q += np.sign(g.g_q) * rec.phi_m
    return float(np.sqrt(0.5 * s_i**2 + 0.5 * s_q**2))


def analysis_grid(params: DmParameters, t_m, n_points=1000, halfspan_lobes=5.0):
    """Analysis-frequency grid across the expected line.

    Coherent regime (T_m < 0.1 tau_c): the measurement window dominates,
    so the grid spans f_dm +- halfspan_lobes/T_m.  Otherwise it spans the
    convolved line support.
    """
    f_dm = params.f_dm
    if t_m < 0.1 * params.tau_c:
        lo = f_dm - halfspan_lobes / t_m
        hi = f_dm + halfspan_lobes / t_m
    else:
        f_lo, f_hi = params.line_band()
        lo = f_lo - 3.0 / t_m
        hi = f_hi + 3.0 / t_m
    lo = max(lo, 0.5 / t_m)
    return np.linspace(lo, hi, n_points)


def expected_lineshape(f_grid, params: DmParameters, t_m,
                       integration_points=None):
    """Expected measured line F_c on ``f_grid``, normalized to unit peak.

    Below T_m = 0.1 tau_c the stochastic linewidth is unresolved and F_c
    is the measurement-window response |sinc((f - f_dm) T_m)|.  Otherwise
    the lineshape is convolved with that window numerically (offsets
    from f_dm, integration variable on [-1000/T_m, 1000/T_m]); the
    convolution smears the line's power, and the measured statistic is
    an amplitude, so its square root is the profile the fit uses
    (validated against the Monte Carlo mean of noise-free phi_M).
    """
    f_grid = np.asarray(f_grid, dtype=float)
    if f_grid.size >= 2:
        df = np.min(np.abs(np.diff(f_grid)))
        if df > 2.0 / t_m:
            raise ValueError("analysis grid too coarse to resolve 1/T_m")
    if t_m < 0.1 * params.tau_c:
        return np.abs(np.sinc((f_grid - params.f_dm) * t_m))
    if integration_points is None:
        integration_points = 100_000 if t_m > params.tau_c else 1_000_000
    f_prime = np.linspace(-1000.0 / t_m, 1000.0 / t_m, integration_points)
    kernel = np.abs(np.sinc(f_prime * t_m))
    out = np.empty(f_grid.size)
    chunk = max(1, int(2e7) // integration_points)
    for lo in range(0, f_grid.size, chunk):
        block = f_grid[lo:lo + chunk, np.newaxis]
        line = lineshape(_TWO_PI * (block - f_prime), params)
        out[lo:lo + chunk] = 4.0 * np.pi * trapezoid(line * kernel, f_prime, axis=1)
    peak = out.max()
    if peak <= 0:
        raise ValueError("expected lineshape vanished on the analysis grid")
    return np.sqrt(out / peak)


def _mse(p, f_c, phi_m):
    model = np.sqrt((p[0] * f_c) ** 2 + p[1] ** 2)
    return np.mean((model - phi_m) ** 2)


def fit_amplitude(spectrum: MeasuredSpectrum, f_c, t_m, t_p, max_restarts=5):
    """Fit sqrt(p1^2 F_c^2 + p2^2) to the measured spectrum.

    Bounded local minimization from the standard initial guesses
    (p1 = max(F_c) max(phi_M), p2 = sqrt(T_m/T_p)/4), with up to
    ``max_restarts`` jittered restarts if the optimizer fails.
    """
    f_c = np.asarray(f_c, dtype=float)
    phi_m = spectrum.phi_m
    if f_c.shape != phi_m.shape:
        raise ValueError("expected lineshape and spectrum grids differ")
    p0 = np.array([np.max(f_c) * np.max(phi_m), np.sqrt(t_m / t_p) / 4.0])
    bounds = [(0.0, None), (0.0, None)]
    best = None
    rng = np.random.default_rng(0)
    restarts = 0
    start = p0
    for attempt in range(max_restarts + 1):
        res = minimize(
            _mse, start, args=(f_c, phi_m), method="L-BFGS-B", bounds=bounds,
            options={"ftol": 1e-14, "gtol": 1e-10, "maxiter": 500},
        )
        if best is None or res.fun < best.fun:
            best = res
        if res.success:
            break
        restarts += 1
        start = p0 * rng.uniform(0.5, 2.0, size=2) + 1e-12
    return FitResult(
        p1=float(best.x[0]),
        p2=float(best.x[1]),
        mse=float(best.fun),
        converged=bool(best.success),
        restarts=restarts,
    )


@dataclass(frozen=True)
class AmplitudeCalibration:
    """Fitted p1 produced by a known injected amplitude (noise-free)."""

    nu_s_injected: float
    p1: float

    def amplitude_from_p1(self, p1):
        if self.p1 <= 0:
            raise ValueError("calibration produced a non-positive p1")
        return p1 * self.nu_s_injected / self.p1


def detectable_amplitude_95(fits, calibration: AmplitudeCalibration,
                            min_realizations=100):
    """95th percentile of noise-only fitted amplitudes, in signal units.

    ``fits`` are FitResults from noise-only measurement realizations;
    the calibration converts the p1 quantile into the amplitude a real
    oscillation would need to produce it.
    """
    p1 = np.asarray([f.p1 for f in fits], dtype=float)
    if p1.size < min_realizations:
        raise ValueError(
            f"need at least {min_realizations} realizations, got {p1.size}"
        )
    return calibration.amplitude_from_p1(float(np.percentile(p1, 95.0)))


def ramsey_analytic_sensitivity(f, t_p, t_m):
    """Small-signal detectable fractional amplitude of a Ramsey/DS search.

    X_det,95% / (2 pi sqrt(T_p T_m)), valid for 1/T_m << f << 1/T_p;
    outside that band a warning is emitted and the value still returned.
    """
    if not (10.0 / t_m <= f <= 0.1 / t_p):
        warnings.warn(
            f"f = {f} Hz outside the validity band [{10.0 / t_m}, {0.1 / t_p}] Hz",
            stacklevel=2,
        )
    return X_DET_95 / (_TWO_PI * np.sqrt(t_p * t_m))


def uncertainty_ratio(noise_phi_m, signal_phi_m, nu_s):
    """Fractional uncertainty sqrt(<phi_N^2> / <(phi_S/nu_S)^2>) per frequency.

    ``noise_phi_m`` and ``signal_phi_m`` are stacks of phi_M(f) from
    noise-only and signal-only runs; averages are over realizations.
    """
    noise_sq = np.mean(np.square(noise_phi_m), axis=0)
    signal_sq = np.mean(np.square(signal_phi_m / nu_s), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sqrt(noise_sq / signal_sq)
