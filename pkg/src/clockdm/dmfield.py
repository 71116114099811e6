"""Stochastic dark-matter detuning: lineshape, synthesis, per-probe signal.

The scalar-field detuning is a narrowband random process centered on the
Compton frequency f_DM with coherence time tau_c.  A realization is drawn
in the frequency domain: each bin gets a complex Gaussian coefficient
whose expected squared magnitude follows the lineshape-weighted target
PSD, and the (Hermitian-symmetric) inverse DFT is the real detuning
series.  Only bins inside the line band carry power, so realizations are
stored spectrally; the per-probe oscillation amplitude and phase come
from the complex envelope evaluated exactly at each probe center, and
the full time series is materialized only on demand (tests, dumps).

Amplitudes are carried in the engine's rad-equivalent fractional unit
(Hz at the simulated carrier); see README for the convention.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .sequences import PulseSequence, complex_response

_TWO_PI = 2.0 * np.pi

#: default number of frequency bins across the line
LINE_POINTS = 1000

#: largest N_f for which the time series may be materialized (~64M samples)
MATERIALIZE_LIMIT = 1 << 26


@dataclass(frozen=True)
class DmParameters:
    """Dark-matter field parameters.

    ``coherence_periods`` defaults to the physical 10^6 oscillation
    periods (tau_c * f_dm = 10^6); scaled-down values are used only to
    make ensemble statistics testable at desk scale.
    """

    f_dm: float
    eta: float = 1.0
    phi0: float = 1.0
    rho_dm: float = 0.4
    coherence_periods: float = 1e6
    exponent_convention: str = "as-written"

    def __post_init__(self):
        if self.f_dm <= 0:
            raise ValueError("f_dm must be positive")
        if self.eta <= 0 or self.phi0 < 0:
            raise ValueError("eta must be positive and phi0 non-negative")
        if self.exponent_convention not in ("as-written", "eta-scaled"):
            raise ValueError(f"unknown exponent convention {self.exponent_convention!r}")

    @property
    def tau_c(self):
        """Coherence time (s)."""
        return self.coherence_periods / self.f_dm

    @property
    def dt(self):
        """Field sampling interval, 10 samples per oscillation period."""
        return 0.1 / self.f_dm

    @property
    def omega_dm(self):
        return _TWO_PI * self.f_dm

    def line_band(self):
        """(f_lo, f_hi) in Hz outside which the lineshape is negligible.

        The lower edge is the hard threshold of the density; the upper
        edge is where the exponential tail has fallen ~23 nats below
        the peak region.
        """
        s = self.eta + np.sqrt(self.eta**2 + 2.0 * 23.0)
        u_hi = 0.5 * s**2
        f_lo = self.f_dm - self.eta**2 / (2.0 * self.tau_c) / _TWO_PI
        f_hi = self.f_dm + u_hi / self.tau_c / _TWO_PI
        return max(f_lo, 0.0), f_hi


def lineshape(omega, params: DmParameters):
    """Spectral density shape F(omega) of the scalar-field oscillation.

    Zero below the threshold where the sinh argument would turn
    imaginary; evaluated in log space to stay finite far into the tail.
    """
    omega = np.asarray(omega, dtype=float)
    u = (omega - params.omega_dm) * params.tau_c
    eta = params.eta
    arg = eta**2 + 2.0 * u
    valid = arg > 0.0
    s = np.sqrt(np.where(valid, arg, 1.0))
    x = eta * s
    # log(sinh x) = x - log 2 + log1p(-exp(-2x)), safe for large x
    with np.errstate(divide="ignore"):
        log_sinh = x - np.log(2.0) + np.log1p(-np.exp(-2.0 * x))
    decay = u if params.exponent_convention == "as-written" else u / eta**2
    log_f = (
        -0.5 * np.log(_TWO_PI)
        + np.log(params.tau_c)
        - np.log(eta)
        - eta**2
        - decay
        + log_sinh
    )
    out = np.where(valid & (x > 0.0), np.exp(np.where(valid, log_f, 0.0)), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DmRealization:
    """One draw of the field, reduced to per-probe amplitude and phase."""

    params: DmParameters
    t_m: float
    t_p: float
    nu_s: np.ndarray       # per-probe oscillation amplitude
    theta: np.ndarray      # per-probe oscillation phase (absolute time reference)
    dt: float
    n_f: int
    bins: np.ndarray       # populated frequency-bin indices
    coefficients: np.ndarray  # complex spectral coefficients at those bins

    @property
    def n_probes(self):
        return self.nu_s.size

    @property
    def probe_centers(self):
        return (np.arange(self.n_probes) + 0.5) * self.t_p

    @property
    def bin_frequencies(self):
        return self.bins / (self.n_f * self.dt)

    def envelope(self, t):
        """Complex oscillation envelope at absolute times ``t``.

        The detuning is Re[envelope * exp(i omega_dm t)]; its magnitude
        and angle are the local amplitude and phase.
        """
        return _envelope(self.params, self.n_f, self.dt, self.bins,
                         self.coefficients, t)

    def time_series(self):
        """Materialize the real detuning series (t, nu) on the field grid.

        Only available when the spectral grid is small enough to hold in
        memory; campaign-scale realizations stay spectral.
        """
        if self.n_f > MATERIALIZE_LIMIT:
            raise ValueError(
                f"N_f = {self.n_f} exceeds the materialization limit {MATERIALIZE_LIMIT}"
            )
        half = np.zeros(self.n_f // 2 + 1, dtype=complex)
        half[self.bins] = self.coefficients
        nu = np.fft.irfft(half, n=self.n_f)
        t = np.arange(self.n_f) * self.dt
        return t, nu


def _envelope(params, n_f, dt, bins, coefficients, t, chunk=4096):
    """Complex envelope 2/N_f sum_p phi_p exp(i (omega_p - omega_dm) t)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    domega = _TWO_PI * bins / (n_f * dt) - params.omega_dm
    out = np.empty(t.size, dtype=complex)
    for lo in range(0, t.size, chunk):
        block = t[lo:lo + chunk, np.newaxis]
        out[lo:lo + chunk] = np.exp(1j * block * domega) @ coefficients
    return (2.0 / n_f) * out


def _spectral_grid(params: DmParameters, t_m, line_points):
    """(n_f, bins) for a grid covering T_m with ``line_points`` on the line."""
    dt = params.dt
    f_lo, f_hi = params.line_band()
    width = f_hi - f_lo
    n_min = max(t_m / dt, line_points / (width * dt))
    n_f = next_fast_len(int(np.ceil(n_min)))
    if n_f % 2:
        n_f = next_fast_len(n_f + 1)
    df = 1.0 / (n_f * dt)
    lo = max(int(np.floor(f_lo / df)), 0)
    hi = min(int(np.ceil(f_hi / df)), n_f // 2)
    if hi <= lo:
        raise ValueError("frequency grid does not cover the dark-matter line")
    return n_f, np.arange(lo, hi + 1)


def target_psd(params: DmParameters, n_f, bins):
    """Target <|phi_p|^2> = (pi N_f / dt) Phi_0^2 F(omega_p) per bin."""
    omega = _TWO_PI * bins / (n_f * params.dt)
    return (np.pi * n_f / params.dt) * params.phi0**2 * lineshape(omega, params)


def synthesize_realization(params: DmParameters, t_m, t_p, rng,
                           line_points=LINE_POINTS):
    """Draw one stochastic realization and reduce it to per-probe terms.

    Interior bins receive complex Gaussian coefficients (exponentially
    distributed power, uniform phase); a DC or Nyquist bin, if it ever
    falls inside the band, receives a real Gaussian coefficient at half
    weight, as Hermitian symmetry requires.
    """
    if t_p <= 0 or t_m < t_p:
        raise ValueError("need 0 < t_p <= t_m")
    n_f, bins = _spectral_grid(params, t_m, line_points)
    mean_power = target_psd(params, n_f, bins)
    coeff = np.sqrt(0.5 * mean_power) * (
        rng.standard_normal(bins.size) + 1j * rng.standard_normal(bins.size)
    )
    edge = (bins == 0) | (bins == n_f // 2)
    if np.any(edge):
        coeff[edge] = np.sqrt(mean_power[edge]) * rng.standard_normal(np.count_nonzero(edge))
    n_probes = int(np.floor(t_m / t_p + 1e-9))
    centers = (np.arange(n_probes) + 0.5) * t_p
    env = _envelope(params, n_f, params.dt, bins, coeff, centers)
    return DmRealization(
        params=params, t_m=t_m, t_p=t_p,
        nu_s=np.abs(env), theta=np.angle(env),
        dt=params.dt, n_f=n_f, bins=bins, coefficients=coeff,
    )


def deterministic_realization(params: DmParameters, t_m, t_p, nu_s, theta=0.0):
    """Realization with amplitude and phase pinned on every probe.

    This is the calibration path: a pure deterministic oscillation whose
    probe phases reproduce the closed-form quadrature expression exactly.
    """
    n_probes = int(np.floor(t_m / t_p + 1e-9))
    return DmRealization(
        params=params, t_m=t_m, t_p=t_p,
        nu_s=np.full(n_probes, float(nu_s)),
        theta=np.full(n_probes, float(theta)),
        dt=params.dt, n_f=0, bins=np.empty(0, dtype=int),
        coefficients=np.empty(0, dtype=complex),
    )


def probe_signal_phase(seq: PulseSequence, realization: DmRealization, j, f):
    """Signal phase of probe ``j`` at oscillation frequency ``f``.

    2 pi nu_S,j [g_I(f) cos(theta_j) - g_Q(f) sin(theta_j)], with the
    quadrature components in closed form.
    """
    if j >= realization.n_probes:
        raise IndexError(f"probe index {j} out of range ({realization.n_probes} probes)")
    # G = g_I - i g_Q, so Re(G e^{-i theta}) = g_I cos(theta) - g_Q sin(theta)
    g = complex_response(seq, float(f))
    return _TWO_PI * realization.nu_s[j] * float(
        (g * np.exp(-1j * realization.theta[j])).real
    )


def write_realization_csv(realization: DmRealization, path, seed=None):
    """Dump per-probe rows with a reproducibility header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["# f_dm", realization.params.f_dm])
        writer.writerow(["# dt", realization.dt])
        writer.writerow(["# n_f", realization.n_f])
        writer.writerow(["# seed", "" if seed is None else seed])
        writer.writerow(["probe", "nu_s", "theta"])
        for j in range(realization.n_probes):
            writer.writerow([j, repr(realization.nu_s[j]), repr(realization.theta[j])])
