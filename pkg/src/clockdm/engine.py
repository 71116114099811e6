"""Vectorized single-measurement simulation.

One "measurement" is a campaign of N_p = T_m/T_p back-to-back probes.
This module draws the per-probe pulse sequences, accumulates signal and
noise phases, and evaluates the coherent statistic phi_M over the whole
analysis-frequency grid.  It is the throughput-critical path: all
segment edges of all probes live in one flat layout, responses are
evaluated chunk-wise with a phase recurrence along the (uniform)
frequency grid, and noise traces are streamed so memory stays bounded
at any T_m.

Everything is a pure function of its RNG streams, which the campaign
keys by (seed, grid index, measurement index) for deterministic,
thread-count-independent results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

from .analysis import MeasuredSpectrum
from .dmfield import DmRealization
from .noise import (
    NoiseConfig,
    build_mandelbrot,
    generate_noise,
    sql_allan_deviation,
)
from .sequences import (
    SCHEME_BBDD,
    SCHEME_NBDD,
    SCHEME_RAMSEY,
    build_bbdd,
    build_nbdd,
    build_ramsey,
)

_TWO_PI = 2.0 * np.pi

DEFAULT_PROBE_CHUNK = 1024


def build_probe_sequences(scheme, t_m, t_p, rng, f_pi=None):
    """Pulse sequences for all probes of one measurement.

    Probes tile [0, T_m] back to back; probe j is centered on
    (j + 1/2) T_p.  NBDD draws a fresh pi-pulse frequency per probe when
    ``f_pi`` is a (lo, hi) range; BBDD draws Poisson pulse times.
    """
    n_probes = int(np.floor(t_m / t_p + 1e-9))
    if n_probes < 1:
        raise ValueError("measurement shorter than one probe")
    centers = (np.arange(n_probes) + 0.5) * t_p
    if scheme in (SCHEME_RAMSEY, "ds"):
        return [build_ramsey(t, t_p) for t in centers]
    if scheme == SCHEME_NBDD:
        if f_pi is None:
            raise ValueError("NBDD requires f_pi (scalar or range)")
        return [build_nbdd(t, t_p, f_pi, rng) for t in centers]
    if scheme == SCHEME_BBDD:
        if f_pi is None:
            raise ValueError("BBDD requires the pi-pulse rate f_pi")
        return [build_bbdd(t, t_p, f_pi, rng) for t in centers]
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class SequenceLayout:
    """Flat segment-edge arrays for a probe batch.

    ``edges`` concatenates every probe's segment boundaries; probe p owns
    edges [offsets[p], offsets[p+1]) and segments [seg_offsets[p],
    seg_offsets[p+1]).  ``seg_edge`` maps each segment to its left-edge
    index and ``signs`` carries the alternating g value per segment.
    """

    edges: np.ndarray
    offsets: np.ndarray
    signs: np.ndarray
    seg_offsets: np.ndarray
    seg_edge: np.ndarray

    @property
    def n_probes(self):
        return self.offsets.size - 1


def sequence_layout(sequences):
    """Flatten a probe list into contiguous edge/sign arrays."""
    n = len(sequences)
    pulse_counts = np.array([seq.pulse_times.size for seq in sequences])
    counts = pulse_counts + 2
    offsets = np.concatenate(([0], np.cumsum(counts)))
    edges = np.empty(offsets[-1])
    starts = np.array([seq.t_center - 0.5 * seq.duration for seq in sequences])
    ends = np.array([seq.t_center + 0.5 * seq.duration for seq in sequences])
    edges[offsets[:-1]] = starts
    edges[offsets[1:] - 1] = ends
    interior = np.ones(offsets[-1], dtype=bool)
    interior[offsets[:-1]] = False
    interior[offsets[1:] - 1] = False
    if pulse_counts.any():
        edges[interior] = (
            np.concatenate([seq.pulse_times for seq in sequences])
            + np.repeat(starts, pulse_counts)
        )
    seg_counts = counts - 1
    seg_offsets = np.concatenate(([0], np.cumsum(seg_counts)))
    seg_index = np.arange(seg_offsets[-1])
    local = seg_index - np.repeat(seg_offsets[:-1], seg_counts)
    signs = np.where(local % 2 == 0, 1.0, -1.0)
    # edge index of segment k of probe p is seg index + p (one extra edge per probe)
    seg_edge = seg_index + np.repeat(np.arange(n), seg_counts)
    return SequenceLayout(
        edges=edges,
        offsets=offsets,
        signs=signs,
        seg_offsets=seg_offsets,
        seg_edge=seg_edge,
    )


def _phase_grid(f_grid, times):
    """exp(-2 pi i f t) on (len(f_grid), len(times)).

    For a uniform frequency grid the rows follow by multiplying a
    constant per-time phase step, replacing most complex exponentials
    with complex multiplies.
    """
    f_grid = np.asarray(f_grid, dtype=float)
    out = np.empty((f_grid.size, times.size), dtype=complex)
    df = np.diff(f_grid)
    uniform = f_grid.size > 8 and np.allclose(df, df[0], rtol=1e-9, atol=0.0)
    if not uniform:
        np.exp((-1j * _TWO_PI) * f_grid[:, np.newaxis] * times, out=out)
        return out
    out[0] = np.exp((-1j * _TWO_PI) * f_grid[0] * times)
    step = np.exp((-1j * _TWO_PI) * df[0] * times)
    for i in range(1, f_grid.size):
        np.multiply(out[i - 1], step, out=out[i])
    return out


def _layout_chunk_totals(layout: SequenceLayout, lo, hi, f_grid):
    """Summed signed phase differences T_j(f) for probes [lo, hi).

    The response is G_j = T_j / (-2 pi i f); with f > 0 that scaling
    preserves all sign information (sgn g_I = -sgn Im T, sgn g_Q =
    -sgn Re T), so the combine path never performs the division.
    """
    e0, e1 = layout.offsets[lo], layout.offsets[hi]
    s0, s1 = layout.seg_offsets[lo], layout.seg_offsets[hi]
    phases = _phase_grid(f_grid, layout.edges[e0:e1])
    diffs = np.diff(phases, axis=1)
    a_idx = layout.seg_edge[s0:s1] - e0
    segments = diffs[:, a_idx] * layout.signs[s0:s1]
    groups = layout.seg_offsets[lo:hi] - s0
    return np.add.reduceat(segments, groups, axis=1)


def _layout_chunk_response(layout: SequenceLayout, lo, hi, f_grid):
    """Complex responses G_j(f) = g_I - i g_Q for probes [lo, hi)."""
    totals = _layout_chunk_totals(layout, lo, hi, f_grid)
    return totals / (-1j * _TWO_PI * np.asarray(f_grid)[:, np.newaxis])


def signal_responses(sequences, f, chunk=DEFAULT_PROBE_CHUNK):
    """G_j(f) at a single frequency for every probe."""
    if float(f) <= 0.0:
        raise ValueError("vectorized responses require strictly positive frequencies")
    layout = sequences if isinstance(sequences, SequenceLayout) else sequence_layout(sequences)
    f_arr = np.array([float(f)])
    out = np.empty(layout.n_probes, dtype=complex)
    for lo in range(0, layout.n_probes, chunk):
        hi = min(lo + chunk, layout.n_probes)
        out[lo:hi] = _layout_chunk_response(layout, lo, hi, f_arr)[0]
    return out


if njit is not None:

    @njit(cache=True)
    def _combine_kernel(edges, offsets, signs, seg_offsets, phi_m, f0, df, nf,
                        s_i, s_q):
        """Sign-weighted accumulation fused per probe.

        For each probe the per-edge phasors at f0 rotate by a constant
        step between consecutive grid frequencies, so the whole grid
        costs one complex multiply per edge per frequency.
        """
        two_pi = 2.0 * np.pi
        n_probes = offsets.size - 1
        for p in range(n_probes):
            e0, e1 = offsets[p], offsets[p + 1]
            k = e1 - e0
            s0 = seg_offsets[p]
            w = phi_m[p]
            cur = np.empty(k, np.complex128)
            step = np.empty(k, np.complex128)
            for s in range(k):
                t = edges[e0 + s]
                cur[s] = np.exp(-1j * two_pi * f0 * t)
                step[s] = np.exp(-1j * two_pi * df * t)
            for i in range(nf):
                t_re = 0.0
                t_im = 0.0
                for s in range(k - 1):
                    sg = signs[s0 + s]
                    t_re += sg * (cur[s + 1].real - cur[s].real)
                    t_im += sg * (cur[s + 1].imag - cur[s].imag)
                # sgn(g_I) = -sgn(Im T), sgn(g_Q) = -sgn(Re T) for f > 0
                if t_im > 0.0:
                    s_i[i] -= w
                elif t_im < 0.0:
                    s_i[i] += w
                if t_re > 0.0:
                    s_q[i] -= w
                elif t_re < 0.0:
                    s_q[i] += w
                for s in range(k):
                    cur[s] = cur[s] * step[s]


def _combine_numpy(layout, phi_m, f_grid, chunk):
    s_i = np.zeros(f_grid.size)
    s_q = np.zeros(f_grid.size)
    for lo in range(0, layout.n_probes, chunk):
        hi = min(lo + chunk, layout.n_probes)
        totals = _layout_chunk_totals(layout, lo, hi, f_grid)
        block = phi_m[lo:hi]
        s_i += np.sign(-totals.imag) @ block
        s_q += np.sign(-totals.real) @ block
    return s_i, s_q


def combine_spectrum(sequences, phi_m, f_grid, chunk=DEFAULT_PROBE_CHUNK):
    """Coherent statistic phi_M(f) over the analysis grid.

    Vectorized equivalent of ``analysis.coherent_combine`` applied to
    every frequency at once: signs of g_I and g_Q weight the per-probe
    phases.  Uniform grids run through a fused kernel when numba is
    available; anything else falls back to chunked numpy.
    """
    f_grid = np.asarray(f_grid, dtype=float)
    if np.any(f_grid <= 0.0):
        raise ValueError("vectorized responses require strictly positive frequencies")
    phi_m = np.asarray(phi_m, dtype=float)
    layout = sequences if isinstance(sequences, SequenceLayout) else sequence_layout(sequences)
    if layout.n_probes != phi_m.size:
        raise ValueError("one phase per probe is required")
    if layout.n_probes == 0:
        raise ValueError("cannot combine an empty probe list")
    uniform = False
    step = 0.0
    if f_grid.size > 1:
        step = (f_grid[-1] - f_grid[0]) / (f_grid.size - 1)
        rebuilt = f_grid[0] + step * np.arange(f_grid.size)
        uniform = np.max(np.abs(rebuilt - f_grid)) <= 1e-9 * f_grid[-1]
    if njit is not None and uniform:
        s_i = np.zeros(f_grid.size)
        s_q = np.zeros(f_grid.size)
        _combine_kernel(
            layout.edges, layout.offsets, layout.signs, layout.seg_offsets,
            phi_m, f_grid[0], step, f_grid.size, s_i, s_q,
        )
    else:
        s_i, s_q = _combine_numpy(layout, phi_m, f_grid, chunk)
    return np.sqrt(0.5 * s_i**2 + 0.5 * s_q**2)


def signal_phases(sequences, realization: DmRealization, f_signal=None):
    """phi_S,j for every probe from the realization's amplitude/phase."""
    layout = sequences if isinstance(sequences, SequenceLayout) else sequence_layout(sequences)
    if layout.n_probes != realization.n_probes:
        raise ValueError("realization and sequence list disagree on probe count")
    f = realization.params.f_dm if f_signal is None else float(f_signal)
    g = signal_responses(layout, f)  # g_I - i g_Q per probe
    return _TWO_PI * realization.nu_s * (g * np.exp(-1j * realization.theta)).real


def qpn_phases(n_probes, rng):
    """Random +-1 rad projection-noise phase per probe."""
    return rng.integers(0, 2, size=n_probes) * 2.0 - 1.0


def laser_noise_dt(f_dm, t_p):
    """Noise-trace step 0.01/f_DM, capped so a probe holds >= 100 samples."""
    return min(0.01 / f_dm, t_p / 100.0)


def flicker_phases(sequences, config: NoiseConfig, dt, rng,
                   chunk=DEFAULT_PROBE_CHUNK):
    """phi_LN,j from a streamed flicker trace scaled by f0 * sigma_LN.

    The trace is generated chunk by chunk with persistent generator
    state, so arbitrarily long measurements never materialize the full
    noise series.
    """
    layout = sequences if isinstance(sequences, SequenceLayout) else sequence_layout(sequences)
    model = build_mandelbrot(config, dt)
    scale = config.f0 * config.sigma_ln
    phi = np.empty(layout.n_probes)
    carry_t = np.empty(0)
    carry_y = np.empty(0)
    produced = 0
    for lo in range(0, layout.n_probes, chunk):
        hi = min(lo + chunk, layout.n_probes)
        t_end = layout.edges[layout.offsets[hi] - 1]
        n_hi = int(np.ceil(t_end / dt)) + 2
        fresh = generate_noise(model, n_hi - produced, rng)
        t = np.concatenate((carry_t, np.arange(produced, n_hi) * dt))
        y = np.concatenate((carry_y, fresh))
        produced = n_hi
        phi[lo:hi] = _trace_phase_batch(layout, lo, hi, t, y)
        carry_t, carry_y = t[-2:], y[-2:]
    return scale * phi


def _trace_phase_batch(layout: SequenceLayout, lo, hi, t, y):
    """2 pi * integral of g * y per probe (trapezoid, split at flips).

    Equivalent to integrating the linear interpolant of the samples
    exactly: the antiderivative is piecewise quadratic, so each segment
    contributes the antiderivative difference of its two edges, signed
    by g.  Vectorized over every segment of every probe in the block.
    """
    dt = t[1] - t[0]
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * dt)))
    e0, e1 = layout.offsets[lo], layout.offsets[hi]
    s0, s1 = layout.seg_offsets[lo], layout.seg_offsets[hi]
    edges = layout.edges[e0:e1]
    k = np.clip(np.searchsorted(t, edges, side="right") - 1, 0, t.size - 2)
    xi = edges - t[k]
    slope = (y[k + 1] - y[k]) / dt
    anti = cum[k] + y[k] * xi + 0.5 * slope * xi**2
    a_idx = layout.seg_edge[s0:s1] - e0
    seg_vals = (anti[a_idx + 1] - anti[a_idx]) * layout.signs[s0:s1]
    groups = layout.seg_offsets[lo:hi] - s0
    return _TWO_PI * np.add.reduceat(seg_vals, groups)


def ds_white_phases(sequences, config: NoiseConfig, rng):
    """phi_LN,j for differential spectroscopy's effective white noise.

    The lattice clock hands the ion probe one fractional offset per
    lattice interval (sample-and-hold); the integral of that staircase
    against g = +1 is exact via its piecewise-linear antiderivative.
    """
    seq_list = list(sequences)
    t_lat = config.t_lattice
    t_end = seq_list[-1].window[1]
    n_int = int(np.ceil(t_end / t_lat))
    sigma = sql_allan_deviation(config.n_atoms, t_lat)
    offsets = sigma * rng.standard_normal(n_int)
    knots = np.arange(n_int + 1) * t_lat
    integral = np.concatenate(([0.0], np.cumsum(offsets) * t_lat))
    phi = np.empty(len(seq_list))
    for j, seq in enumerate(seq_list):
        if seq.pulse_times.size:
            raise ValueError("DS white noise assumes plain Ramsey probes")
        start, end = seq.window
        phi[j] = np.interp(end, knots, integral) - np.interp(start, knots, integral)
    return _TWO_PI * config.f0 * phi


def simulate_measurement(scheme, t_m, t_p, f_grid, rng_seq, rng_qpn, rng_ln,
                         f_pi=None, include_qpn=True, noise=None, ln_dt=None,
                         realization=None, f_signal=None,
                         chunk=DEFAULT_PROBE_CHUNK, keep_probe_phases=False):
    """Simulate one measurement and return its MeasuredSpectrum.

    ``noise`` is a NoiseConfig or None; ``realization`` is a
    DmRealization (stochastic or deterministic) or None for noise-only
    runs.  Separate RNG streams keep noise sources statistically
    independent and individually reproducible.
    """
    sequences = build_probe_sequences(scheme, t_m, t_p, rng_seq, f_pi=f_pi)
    layout = sequence_layout(sequences)
    n_probes = layout.n_probes
    phi = np.zeros(n_probes)
    if realization is not None:
        phi += signal_phases(layout, realization, f_signal=f_signal)
    if noise is not None:
        if noise.scheme == "flicker":
            if ln_dt is None:
                f_ref = (realization.params.f_dm if realization is not None
                         else float(np.mean(f_grid)))
                ln_dt = laser_noise_dt(f_ref, t_p)
            phi += flicker_phases(layout, noise, ln_dt, rng_ln, chunk=chunk)
        else:
            phi += ds_white_phases(sequences, noise, rng_ln)
    if include_qpn:
        phi += qpn_phases(n_probes, rng_qpn)
    spectrum = combine_spectrum(layout, phi, f_grid, chunk=chunk)
    return MeasuredSpectrum(
        frequencies=np.asarray(f_grid, dtype=float),
        phi_m=spectrum,
        n_probes=n_probes,
        probe_phases=phi if keep_probe_phases else None,
    )
