"""Pulse sequences and their sensitivity functions.

A probe is a Ramsey sequence of duration ``T_p`` centered on ``t_j``
(window ``[t_j - T_p/2, t_j + T_p/2]``), optionally with instantaneous
pi pulses that flip the sign of the sensitivity function g(t).  g starts
at +1 and changes sign at every pulse, so it is piecewise constant with
values in {-1, +1}.

Three builders cover the protocols studied here:

- ``build_ramsey``: no pi pulses (differential spectroscopy probes),
- ``build_nbdd``: regularly spaced pulses at frequency ``f_pi`` (CPMG
  placement, lock-in response at f_pi/2),
- ``build_bbdd``: pulses at Poisson-random times of rate ``f_pi``
  (broadband response).

``quadrature_components`` integrates g(t)cos(2 pi f t) and
g(t)sin(2 pi f t) in closed form; ``accumulate_phase`` integrates an
arbitrary sampled detuning against g.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

SCHEME_RAMSEY = "ramsey"
SCHEME_NBDD = "nbdd"
SCHEME_BBDD = "bbdd"

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PulseSequence:
    """One probe: window center, duration, and pi-pulse offsets.

    ``pulse_times`` are offsets from the window start, strictly
    increasing and strictly inside (0, duration).
    """

    scheme: str
    t_center: float
    duration: float
    pulse_times: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"probe duration must be positive, got {self.duration}")
        pulses = np.asarray(self.pulse_times, dtype=float)
        object.__setattr__(self, "pulse_times", pulses)
        prev = 0.0
        for v in pulses.tolist():
            if v <= prev:
                raise ValueError(
                    "pulse times must be strictly increasing and inside (0, duration)"
                )
            prev = v
        if prev >= self.duration:
            raise ValueError("pulse times must lie strictly inside (0, duration)")

    @property
    def window(self):
        """(start, end) of the probe in absolute time."""
        half = 0.5 * self.duration
        return self.t_center - half, self.t_center + half

    def edges(self):
        """Absolute times of all g-segment boundaries, including window ends."""
        start, end = self.window
        return np.concatenate(([start], start + self.pulse_times, [end]))

    def segment_signs(self):
        """Sign of g on each segment between consecutive edges."""
        n_seg = self.pulse_times.size + 1
        return (-1.0) ** np.arange(n_seg)

    def sensitivity(self, t):
        """g(t) evaluated at absolute times ``t`` (0 outside the window)."""
        t = np.asarray(t, dtype=float)
        start, end = self.window
        inside = (t >= start) & (t <= end)
        flips = np.searchsorted(start + self.pulse_times, t, side="right")
        return np.where(inside, (-1.0) ** flips, 0.0)

    def to_record(self):
        """JSON-serializable record {scheme, t_j, T_p, pulse_times[]}."""
        return {
            "scheme": self.scheme,
            "t_j": self.t_center,
            "T_p": self.duration,
            "pulse_times": self.pulse_times.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, record):
        return cls(
            scheme=record["scheme"],
            t_center=record["t_j"],
            duration=record["T_p"],
            pulse_times=np.asarray(record["pulse_times"], dtype=float),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_record(json.loads(text))


@dataclass(frozen=True)
class QuadratureComponents:
    """In-phase/quadrature response of a sequence at one frequency."""

    g_i: float
    g_q: float
    frequency: float

    @property
    def power(self):
        """g_I^2 + g_Q^2, invariant under time translation of the probe."""
        return self.g_i**2 + self.g_q**2


def build_ramsey(t_center, duration):
    """Plain Ramsey probe: g(t) = +1 over the whole window."""
    return PulseSequence(SCHEME_RAMSEY, float(t_center), float(duration))


def build_nbdd(t_center, duration, f_pi, rng=None):
    """Narrowband (CPMG-style) probe with pulse frequency ``f_pi``.

    Pulses sit at (k + 1/2)/f_pi from the window start, k = 0..n-1 with
    n = floor(duration * f_pi), so g is an odd square wave at f_pi/2.
    ``f_pi`` may be a (lo, hi) pair, in which case the frequency is drawn
    uniformly with ``rng`` (the per-probe randomization of the protocol).
    """
    if np.ndim(f_pi) == 1:
        lo, hi = f_pi
        if rng is None:
            raise ValueError("an rng is required to draw f_pi from a range")
        f_pi = rng.uniform(lo, hi)
    f_pi = float(f_pi)
    if f_pi <= 0:
        raise ValueError(f"pi-pulse frequency must be positive, got {f_pi}")
    n_pulses = int(np.floor(duration * f_pi))
    pulses = (np.arange(n_pulses) + 0.5) / f_pi
    pulses = pulses[pulses < duration]  # guard against float roundoff
    return PulseSequence(SCHEME_NBDD, float(t_center), float(duration), pulses)


def build_bbdd(t_center, duration, f_pi, rng):
    """Broadband probe: pi pulses as a Poisson process of rate ``f_pi``."""
    f_pi = float(f_pi)
    if f_pi < 0:
        raise ValueError(f"pi-pulse rate must be non-negative, got {f_pi}")
    n_pulses = rng.poisson(f_pi * duration)
    if n_pulses:
        # set() drops coincident draws (two flips that cancel; measure-zero)
        pulses = np.array(sorted(set(rng.uniform(0.0, duration, size=n_pulses).tolist())))
    else:
        pulses = np.empty(0)
    return PulseSequence(SCHEME_BBDD, float(t_center), float(duration), pulses)


def complex_response(seq: PulseSequence, f):
    """Integral of g(t) exp(-2 pi i f t) over the probe, per frequency.

    Returns g_I - i g_Q evaluated in closed form segment by segment.
    ``f`` may be a scalar or an array.
    """
    f = np.asarray(f, dtype=float)
    edges = seq.edges()
    signs = seq.segment_signs()
    fcol = f[..., np.newaxis]
    phase = np.exp(-1j * _TWO_PI * fcol * edges)
    diffs = phase[..., 1:] - phase[..., :-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        segments = diffs / (-1j * _TWO_PI * fcol)
    # f = 0: the integral of each segment is just its length
    flat = np.broadcast_to(np.diff(edges), segments.shape)
    segments = np.where(fcol == 0.0, flat.astype(complex), segments)
    return np.sum(signs * segments, axis=-1)


def quadrature_components(seq: PulseSequence, f):
    """Closed-form g_I(f), g_Q(f) of the probe's sensitivity function."""
    f = float(f)
    if f < 0:
        raise ValueError(f"analysis frequency must be non-negative, got {f}")
    g = complex_response(seq, f)
    return QuadratureComponents(g_i=float(g.real), g_q=float(-g.imag), frequency=f)


def accumulate_phase(seq: PulseSequence, t, detuning):
    """Phase 2 pi * integral of g(t) * detuning(t) dt over the probe.

    ``t``/``detuning`` sample the detuning on a grid that must cover the
    probe window; integration is trapezoidal on that grid, split at the
    g sign flips (values at segment edges are linearly interpolated).
    """
    t = np.asarray(t, dtype=float)
    nu = np.asarray(detuning, dtype=float)
    start, end = seq.window
    if t[0] > start + 1e-12 * seq.duration or t[-1] < end - 1e-12 * seq.duration:
        raise ValueError(
            f"sampling grid [{t[0]}, {t[-1]}] does not cover probe window [{start}, {end}]"
        )
    edges = seq.edges()
    signs = seq.segment_signs()
    total = 0.0
    for a, b, sign in zip(edges[:-1], edges[1:], signs):
        lo = np.searchsorted(t, a, side="right")
        hi = np.searchsorted(t, b, side="left")
        xs = np.concatenate(([a], t[lo:hi], [b]))
        ys = np.concatenate(
            ([np.interp(a, t, nu)], nu[lo:hi], [np.interp(b, t, nu)])
        )
        total += sign * trapezoid(ys, xs)
    return _TWO_PI * total
