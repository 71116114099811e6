"""Frequency-stability estimators: Allan deviation and spectral slope."""

from __future__ import annotations

import numpy as np


def overlapping_allan_deviation(y, dt, taus):
    """Overlapping Allan deviation of fractional-frequency samples ``y``.

    ``taus`` are requested averaging times (seconds); each is rounded down
    to an integer multiple of ``dt``.  Returns (tau_used, adev) with
    entries only for taus that fit at least one difference in the data.
    """
    y = np.asarray(y, dtype=float)
    phase = np.concatenate(([0.0], np.cumsum(y))) * dt
    n = phase.size
    out_tau, out_dev = [], []
    for tau in np.atleast_1d(taus):
        m = int(tau / dt)
        if m < 1 or 2 * m >= n:
            continue
        d = phase[2 * m:] - 2.0 * phase[m:-m] + phase[: n - 2 * m]
        avar = 0.5 * np.mean(d**2) / (m * dt) ** 2
        out_tau.append(m * dt)
        out_dev.append(np.sqrt(avar))
    return np.asarray(out_tau), np.asarray(out_dev)


def periodogram(y, dt):
    """One-sided periodogram of ``y``; returns (f, psd) excluding DC."""
    y = np.asarray(y, dtype=float)
    n = y.size
    spec = np.fft.rfft(y)
    psd = (2.0 * dt / n) * np.abs(spec) ** 2
    psd[0] = (dt / n) * np.abs(spec[0]) ** 2
    if n % 2 == 0:
        psd[-1] *= 0.5
    f = np.fft.rfftfreq(n, d=dt)
    return f[1:], psd[1:]


def averaged_periodogram(traces, dt):
    """Periodogram averaged over equal-length realizations."""
    spectra = None
    f = None
    for y in traces:
        f, psd = periodogram(y, dt)
        spectra = psd if spectra is None else spectra + psd
    return f, spectra / len(traces)


def log_psd_slope(f, psd, f_lo, f_hi):
    """Least-squares slope of log10(psd) vs log10(f) on [f_lo, f_hi]."""
    mask = (f >= f_lo) & (f <= f_hi) & (psd > 0)
    if np.count_nonzero(mask) < 4:
        raise ValueError("fewer than 4 spectral points in the fit band")
    coef = np.polyfit(np.log10(f[mask]), np.log10(psd[mask]), 1)
    return float(coef[0])
