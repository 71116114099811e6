"""Laser and projection noise models.

Flicker (1/f) laser frequency noise is generated with a state-space model:
a bank of ``m`` first-order low-pass sections with geometrically spaced
relaxation rates, driven by independent white noise and summed with
weights chosen so the output PSD approximates S_0^2 * f^lambda between
``f_min`` and ``f_max``.  With lambda = -1 and S_0 = 1/sqrt(2 ln 2) the
output has an Allan deviation of 1 (flicker floor), which a final
calibration pins down exactly; campaigns then rescale by f_0 * sigma_LN.

Differential spectroscopy replaces laser noise with the lattice clock's
projection noise: white Gaussian fractional-frequency offsets at the
standard quantum limit, one per lattice probe interval.

Projection noise of the ion clock itself contributes a random +-1 rad
phase per probe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import lfilter

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

from .constants import CLOCK_FREQUENCY_HZ, SR_LATTICE_FREQUENCY_HZ
from .sequences import PulseSequence, accumulate_phase
from .stability import overlapping_allan_deviation

FLICKER_EXPONENT = -1.0
FLICKER_SCALE = 1.0 / np.sqrt(2.0 * np.log(2.0))

_CALIBRATION_SEED = 0x5EED_CA1
_CALIBRATION_STEPS = 1 << 16


@dataclass
class NoiseConfig:
    """Noise settings for one campaign."""

    sigma_ln: float = 1e-16          # fractional Allan deviation of the flicker floor
    scheme: str = "flicker"          # "flicker" (DD) or "white" (DS feedforward residual)
    f0: float = CLOCK_FREQUENCY_HZ  # carrier converting fractional noise to Hz
    n_atoms: int = 1000              # lattice clock ensemble size (DS)
    t_lattice: float = 1.0           # lattice probe interval (s)
    model_size: int = 10
    f_min: float = 1e-6
    f_max: float = 1e3
    spectral_exponent: float = FLICKER_EXPONENT

    def __post_init__(self):
        if self.sigma_ln <= 0:
            raise ValueError("sigma_ln must be positive")
        if self.scheme not in ("flicker", "white"):
            raise ValueError(f"unknown noise scheme {self.scheme!r}")


@dataclass
class MandelbrotModel:
    """State-space power-law noise generator (diagonal transition matrix)."""

    size: int
    dt: float
    spectral_exponent: float
    f_min: float
    f_max: float
    a_diag: np.ndarray
    b_input: np.ndarray
    c_output: np.ndarray
    calibration: float
    state: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.state.size == 0:
            self.state = np.zeros(self.size)

    @property
    def tau(self):
        return 1.0 / (2.0 * np.pi * self.f_min)

    @property
    def beta(self):
        return (10.0 * self.f_max / self.f_min) ** (1.0 / self.size)

    @property
    def alpha(self):
        return self.beta ** (-self.spectral_exponent / 2.0)


def _model_vectors(m, lam, f_min, f_max, dt):
    """A diagonal, B input and uncalibrated C output vectors."""
    if m < 1:
        raise ValueError("model size must be at least 1")
    if f_max <= f_min:
        raise ValueError("f_max must exceed f_min")
    beta = (10.0 * f_max / f_min) ** (1.0 / m)
    alpha = beta ** (-lam / 2.0)
    tau = 1.0 / (2.0 * np.pi * f_min)
    rates = beta ** np.arange(m)          # beta^(i-1), i = 1..m
    a_diag = np.exp(-rates * dt / (alpha * tau))
    b_input = (1.0 - a_diag) / rates
    # weight of section i: (alpha-1) beta^(i-1) / alpha^m times the
    # Lagrange-style product over the other sections
    c_output = np.empty(m)
    for i in range(m):
        others = np.delete(rates, i)
        ratio = np.prod((alpha * others - rates[i]) / (others - rates[i]))
        c_output[i] = (alpha - 1.0) * rates[i] / alpha**m * ratio
    prefactor = (
        FLICKER_SCALE / np.sqrt(2.0)
        * alpha ** ((6.0 - lam) / 8.0)
        * (f_min * dt) ** (lam / 2.0)
    )
    return a_diag, b_input, prefactor * c_output


def _run_sections(a_diag, b_input, shocks, state):
    """Advance every first-order section over ``shocks`` (shape m x n)."""
    m, n = shocks.shape
    out = np.empty_like(shocks)
    new_state = np.empty(m)
    for i in range(m):
        zi = np.array([a_diag[i] * state[i]])
        out[i], zf = lfilter([b_input[i]], [1.0, -a_diag[i]], shocks[i], zi=zi)
        new_state[i] = out[i, -1]
    return out, new_state


if njit is not None:

    @njit(cache=True)
    def _fused_sections(shocks, a_diag, b_input, c_output, state):
        """One pass over per-step shocks: z = A z + B r, out = C.z."""
        n, m = shocks.shape
        out = np.empty(n)
        z = state.copy()
        for k in range(n):
            acc = 0.0
            for i in range(m):
                z[i] = a_diag[i] * z[i] + b_input[i] * shocks[k, i]
                acc += c_output[i] * z[i]
            out[k] = acc
        return out, z


@lru_cache(maxsize=32)
def _calibration_factor(m, lam, f_min, f_max, dt):
    """Scale making the raw generator's Allan deviation equal 1.

    Uses a fixed internal seed so models are reproducible; the estimate
    averages the overlapping Allan deviation at several taus inside the
    generator's flat band.
    """
    a_diag, b_input, c_output = _model_vectors(m, lam, f_min, f_max, dt)
    rng = np.random.default_rng(np.random.SeedSequence(_CALIBRATION_SEED))
    shocks = rng.standard_normal((m, _CALIBRATION_STEPS))
    sections, _ = _run_sections(a_diag, b_input, shocks, np.zeros(m))
    trace = c_output @ sections
    taus = np.array([16, 64, 256]) * dt
    _, devs = overlapping_allan_deviation(trace, dt, taus)
    level = float(np.exp(np.mean(np.log(devs))))
    return 1.0 / level


def build_mandelbrot(config: NoiseConfig, dt):
    """Build the generator for time step ``dt`` (state starts at zero)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = config.model_size
    lam = config.spectral_exponent
    a_diag, b_input, c_output = _model_vectors(m, lam, config.f_min, config.f_max, dt)
    cal = _calibration_factor(m, lam, config.f_min, config.f_max, dt)
    return MandelbrotModel(
        size=m,
        dt=dt,
        spectral_exponent=lam,
        f_min=config.f_min,
        f_max=config.f_max,
        a_diag=a_diag,
        b_input=b_input,
        c_output=cal * c_output,
        calibration=cal,
    )


def step_noise(model: MandelbrotModel, rng):
    """Advance the state one step (z = A z + B r) and return C.z."""
    r = rng.standard_normal(model.size)
    model.state = model.a_diag * model.state + model.b_input * r
    return float(model.c_output @ model.state)


def generate_noise(model: MandelbrotModel, n, rng):
    """Generate ``n`` consecutive samples, advancing the model state.

    Equivalent to ``n`` calls of ``step_noise`` (same draws from ``rng``,
    same outputs up to summation order) but advances all sections in one
    fused pass over the per-step shock matrix.
    """
    shocks = rng.standard_normal((n, model.size))
    if njit is not None:
        out, new_state = _fused_sections(
            shocks, model.a_diag, model.b_input, model.c_output, model.state
        )
        model.state = new_state
        return out
    sections, new_state = _run_sections(
        model.a_diag, model.b_input, np.ascontiguousarray(shocks.T), model.state
    )
    model.state = new_state
    return model.c_output @ sections


def sql_allan_deviation(n_atoms, t_probe, nu_lattice=SR_LATTICE_FREQUENCY_HZ):
    """Standard-quantum-limit Allan deviation of the lattice clock at t_probe."""
    if n_atoms <= 0 or t_probe <= 0:
        raise ValueError("n_atoms and t_probe must be positive")
    return 1.0 / (2.0 * np.pi * nu_lattice * t_probe * np.sqrt(n_atoms))


def ds_effective_noise(n_atoms, t_p_lattice, rng, n_intervals):
    """Per-interval fractional offsets of the DS feedforward residual.

    Independent Gaussian offsets, one per lattice probe interval of
    duration ``t_p_lattice``, whose Allan deviation is the lattice SQL:
    sigma_y(tau) = sigma_SQL * sqrt(t_p_lattice / tau).
    """
    sigma = sql_allan_deviation(n_atoms, t_p_lattice)
    return sigma * rng.standard_normal(n_intervals)


def probe_noise_phase(seq: PulseSequence, t, detuning, rng):
    """(phi_LN, phi_QPN) for one probe given a sampled noise detuning."""
    phi_ln = accumulate_phase(seq, t, detuning)
    phi_qpn = 1.0 if rng.integers(0, 2) else -1.0
    return phi_ln, phi_qpn


def write_noise_trace_csv(trace, dt, path, sigma_ln=None, seed=None):
    """Dump a noise trace with a reproducibility header (dm-field format)."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["# sigma_ln", "" if sigma_ln is None else sigma_ln])
        writer.writerow(["# dt", dt])
        writer.writerow(["# n", len(trace)])
        writer.writerow(["# seed", "" if seed is None else seed])
        writer.writerow(["sample", "fractional_frequency"])
        for k, y in enumerate(trace):
            writer.writerow([k, repr(float(y))])
