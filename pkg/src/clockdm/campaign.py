"""Campaign orchestration: grid scans, Monte Carlo bounds, persistence.

A campaign scans dark-matter Compton frequencies.  At each grid point it
runs ``n_measurements`` independent simulated measurements (noise-only
by default, or with an injected signal), fits every measured spectrum to
the expected lineshape, and converts the 95th percentile of the fitted
amplitudes into a detectable amplitude via a noise-free deterministic
calibration injection.

Determinism: every measurement owns RNG streams keyed by
(seed, grid index, measurement index, purpose), so results are
bit-identical for any worker count.  Results are persisted as JSON
lines, one completed grid point at a time, with a manifest for resuming
interrupted scans.

Bounds are carried in the engine's rad-equivalent fractional unit
(Hz at the simulated carrier); ``to_exclusion`` converts to the true
dimensionless fractional amplitude and then to the scalar-photon
coupling d_e.
"""

from __future__ import annotations

import dataclasses
import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import constants
from .analysis import (
    AmplitudeCalibration,
    analysis_grid,
    detectable_amplitude_95,
    expected_lineshape,
    fit_amplitude,
)
from .dmfield import DmParameters, deterministic_realization, synthesize_realization
from .engine import laser_noise_dt, simulate_measurement
from .noise import NoiseConfig

SCHEMES = ("ds", "nbdd", "bbdd")

_SCHEME_DEFAULTS = {
    "ds": {"t_p": 100.0, "f_pi": None, "noise_scheme": "white"},
    "nbdd": {"t_p": 1.0, "f_pi": (2.0, 5.0), "noise_scheme": "flicker"},
    "bbdd": {"t_p": 0.25, "f_pi": 20.0, "noise_scheme": "flicker"},
}

WORKERS_ENV = "CLOCKDM_WORKERS"

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_PARTIAL_FAILURE = 2


@dataclass(frozen=True)
class SignalInjection:
    """Optional signal injected into every measurement.

    kind "deterministic": a pure oscillation of the given amplitude at
    the grid point's f_DM (phase ``theta``, or drawn uniformly per
    measurement when None).  kind "stochastic": a fresh field
    realization per measurement with Phi_0 = amplitude.
    """

    kind: str
    amplitude: float
    theta: float | None = 0.0

    def __post_init__(self):
        if self.kind not in ("deterministic", "stochastic"):
            raise ValueError(f"unknown injection kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("injection amplitude must be non-negative")


@dataclass(frozen=True)
class CampaignConfig:
    """Full description of one campaign; see README for a worked example."""

    scheme: str
    f_dm_grid: tuple = ()
    t_m: float = 1e4
    t_p: float | None = None
    n_measurements: int = 100
    sigma_ln: float = 1e-16
    f_pi: object = None              # scalar, (lo, hi), or None for scheme default
    seed: int = 0
    analysis_points: int = 1000
    halfspan_lobes: float = 5.0
    coherence_periods: float = 1e6
    line_points: int = 1000
    include_qpn: bool = True
    include_laser_noise: bool = True
    laser_noise_scheme: str | None = None   # override the scheme default
    injection: SignalInjection | None = None
    nu_calibration: float = 1.0
    overdensity: float = 1.0
    delta_k: float = constants.DEFAULT_DELTA_K
    out_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not self.f_dm_grid:
            raise ValueError("f_dm_grid must be non-empty")
        if any(f <= 0 for f in self.f_dm_grid):
            raise ValueError("f_dm_grid entries must be positive")
        if self.n_measurements < 1:
            raise ValueError("n_measurements must be at least 1")
        object.__setattr__(self, "f_dm_grid", tuple(float(f) for f in self.f_dm_grid))
        defaults = _SCHEME_DEFAULTS[self.scheme]
        if self.t_p is None:
            object.__setattr__(self, "t_p", defaults["t_p"])
        if self.f_pi is None:
            object.__setattr__(self, "f_pi", defaults["f_pi"])
        if self.t_p <= 0 or self.t_p > self.t_m:
            raise ValueError("need 0 < t_p <= t_m")

    @property
    def noise_scheme(self):
        if self.laser_noise_scheme is not None:
            return self.laser_noise_scheme
        return _SCHEME_DEFAULTS[self.scheme]["noise_scheme"]

    def noise_config(self):
        if not self.include_laser_noise:
            return None
        return NoiseConfig(sigma_ln=self.sigma_ln, scheme=self.noise_scheme)

    def dm_parameters(self, f_dm, phi0=1.0):
        return DmParameters(
            f_dm=f_dm, phi0=phi0, coherence_periods=self.coherence_periods
        )


def log_grid(f_min, f_max, points):
    """Log-spaced f_DM grid (the span of the published sensitivity curves)."""
    if f_min <= 0 or f_max < f_min or points < 1:
        raise ValueError("need 0 < f_min <= f_max and points >= 1")
    if points == 1:
        return (float(f_min),)
    return tuple(np.geomspace(f_min, f_max, points))


RESULT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SensitivityResult:
    """Outcome of one grid point, serializable as one JSON line."""

    f_dm: float
    scheme: str
    t_p: float
    t_m: float
    sigma_ln: float
    n_measurements: int
    bound_95: float
    nu_calibration: float
    p1_calibration: float
    p1_95: float
    p2_median: float
    mse_mean: float
    n_unconverged: int
    analysis_points: int
    f_lo: float
    f_hi: float
    seed: int
    grid_index: int
    fitted_p1: tuple = ()
    schema_version: int = RESULT_SCHEMA_VERSION

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        d = self.to_dict()
        d["fitted_p1"] = list(d["fitted_p1"])
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["fitted_p1"] = tuple(d.get("fitted_p1", ()))
        return cls(**d)

    @classmethod
    def from_json(cls, line):
        return cls.from_dict(json.loads(line))


@dataclass(frozen=True)
class ExclusionPoint:
    """One point of the coupling-constant exclusion curve."""

    m_phi_ev: float
    d_e: float
    fractional_amplitude: float
    scheme: str

    def __post_init__(self):
        if self.m_phi_ev <= 0 or self.d_e <= 0 or self.fractional_amplitude <= 0:
            raise ValueError("exclusion point fields must be positive")


def _rng(seed, grid_index, meas_index, purpose):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(grid_index, meas_index, purpose))
    )


# purposes: 0 sequences, 1 qpn, 2 laser noise, 3 dm field / injection phase
_CAL_MEASUREMENT = 1_000_000


def _measurement_task(config: CampaignConfig, grid_index, meas_index, f_dm,
                      f_grid, f_c):
    """Run one measurement and fit it.  Top-level for process pools."""
    rng_seq = _rng(config.seed, grid_index, meas_index, 0)
    rng_qpn = _rng(config.seed, grid_index, meas_index, 1)
    rng_ln = _rng(config.seed, grid_index, meas_index, 2)
    rng_dm = _rng(config.seed, grid_index, meas_index, 3)

    realization = None
    if config.injection is not None:
        params = config.dm_parameters(f_dm, phi0=config.injection.amplitude)
        if config.injection.kind == "stochastic":
            realization = synthesize_realization(
                params, config.t_m, config.t_p, rng_dm,
                line_points=config.line_points,
            )
        else:
            theta = config.injection.theta
            if theta is None:
                theta = rng_dm.uniform(0.0, 2.0 * np.pi)
            realization = deterministic_realization(
                params, config.t_m, config.t_p,
                nu_s=config.injection.amplitude, theta=theta,
            )
    spectrum = simulate_measurement(
        scheme=config.scheme,
        t_m=config.t_m,
        t_p=config.t_p,
        f_grid=f_grid,
        rng_seq=rng_seq,
        rng_qpn=rng_qpn,
        rng_ln=rng_ln,
        f_pi=config.f_pi,
        include_qpn=config.include_qpn,
        noise=config.noise_config(),
        ln_dt=laser_noise_dt(f_dm, config.t_p),
        realization=realization,
        f_signal=f_dm,
    )
    return fit_amplitude(spectrum, f_c, config.t_m, config.t_p)


def _calibration_task(config: CampaignConfig, grid_index, f_dm, f_grid, f_c):
    """Noise-free deterministic injection fixing the p1 <-> amplitude scale.

    The injection phase pi/4 drives the in-phase and quadrature channels
    equally, so the calibration stays finite even for probe layouts
    whose g_I (or g_Q) vanishes identically at f_dm.
    """
    params = config.dm_parameters(f_dm)
    realization = deterministic_realization(
        params, config.t_m, config.t_p, nu_s=config.nu_calibration,
        theta=np.pi / 4.0,
    )
    spectrum = simulate_measurement(
        scheme=config.scheme,
        t_m=config.t_m,
        t_p=config.t_p,
        f_grid=f_grid,
        rng_seq=_rng(config.seed, grid_index, _CAL_MEASUREMENT, 0),
        rng_qpn=_rng(config.seed, grid_index, _CAL_MEASUREMENT, 1),
        rng_ln=_rng(config.seed, grid_index, _CAL_MEASUREMENT, 2),
        f_pi=config.f_pi,
        include_qpn=False,
        noise=None,
        realization=realization,
        f_signal=f_dm,
    )
    fit = fit_amplitude(spectrum, f_c, config.t_m, config.t_p)
    return AmplitudeCalibration(nu_s_injected=config.nu_calibration, p1=fit.p1)


def run_grid_point(config: CampaignConfig, grid_index, executor=None):
    """All measurements, calibration and bound for one f_DM grid point."""
    f_dm = config.f_dm_grid[grid_index]
    params = config.dm_parameters(f_dm)
    f_grid = analysis_grid(
        params, config.t_m,
        n_points=config.analysis_points,
        halfspan_lobes=config.halfspan_lobes,
    )
    f_c = expected_lineshape(f_grid, params, config.t_m)
    calibration = _calibration_task(config, grid_index, f_dm, f_grid, f_c)

    indices = range(config.n_measurements)
    if executor is None:
        fits = [
            _measurement_task(config, grid_index, j, f_dm, f_grid, f_c)
            for j in indices
        ]
    else:
        futures = [
            executor.submit(_measurement_task, config, grid_index, j, f_dm, f_grid, f_c)
            for j in indices
        ]
        fits = [fut.result() for fut in futures]

    p1 = np.array([fit.p1 for fit in fits])
    bound = detectable_amplitude_95(fits, calibration, min_realizations=1)
    if config.n_measurements < 100:
        warnings.warn(
            f"{config.n_measurements} measurements at f_DM = {f_dm} Hz: "
            "the 95th-percentile bound is statistically weak below 100",
            stacklevel=2,
        )
    return SensitivityResult(
        f_dm=f_dm,
        scheme=config.scheme,
        t_p=config.t_p,
        t_m=config.t_m,
        sigma_ln=config.sigma_ln if config.include_laser_noise else 0.0,
        n_measurements=config.n_measurements,
        bound_95=float(bound),
        nu_calibration=config.nu_calibration,
        p1_calibration=calibration.p1,
        p1_95=float(np.percentile(p1, 95.0)),
        p2_median=float(np.median([fit.p2 for fit in fits])),
        mse_mean=float(np.mean([fit.mse for fit in fits])),
        n_unconverged=int(sum(not fit.converged for fit in fits)),
        analysis_points=config.analysis_points,
        f_lo=float(f_grid[0]),
        f_hi=float(f_grid[-1]),
        seed=config.seed,
        grid_index=grid_index,
        fitted_p1=tuple(float(x) for x in p1),
    )


def _manifest_path(out_path):
    return str(out_path) + ".manifest.json"


def _read_manifest(out_path):
    try:
        with open(_manifest_path(out_path)) as fh:
            return json.load(fh)
    except FileNotFoundError:
        return None


def resolve_workers(config_workers=None):
    """Worker count: explicit argument, else env override, else 1."""
    if config_workers:
        return max(1, int(config_workers))
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def run_campaign(config: CampaignConfig, progress=None):
    """Scan the f_DM grid and return one SensitivityResult per point.

    With ``out_path`` set, results append to a JSON-lines file one grid
    point at a time and a manifest tracks the completed prefix so
    interrupted scans resume.  Per-point failures are recorded and do
    not abort the scan; a RuntimeError listing them is raised at the end
    (partial results remain on disk and in the return value).
    """
    workers = resolve_workers(config.workers)
    results = []
    start_index = 0
    out = config.out_path
    if out:
        manifest = _read_manifest(out)
        if manifest and manifest.get("config") == _config_fingerprint(config):
            start_index = manifest["completed"]
            with open(out) as fh:
                results = [SensitivityResult.from_json(line) for line in fh]
            results = results[:start_index]
        else:
            with open(out, "w"):
                pass
            _write_manifest(out, config, 0)

    failures = []
    executor = None
    try:
        if workers > 1:
            executor = ProcessPoolExecutor(max_workers=workers)
        for i in range(start_index, len(config.f_dm_grid)):
            try:
                result = run_grid_point(config, i, executor=executor)
            except Exception as exc:  # isolate per-point failures
                failures.append((i, repr(exc)))
                continue
            results.append(result)
            if out:
                with open(out, "a") as fh:
                    fh.write(result.to_json() + "\n")
                _write_manifest(out, config, i + 1)
            if progress is not None:
                progress(result)
    finally:
        if executor is not None:
            executor.shutdown()
    if failures:
        raise CampaignPartialFailure(failures, results)
    return results


class CampaignPartialFailure(RuntimeError):
    """Some grid points failed; carries the completed results."""

    def __init__(self, failures, results):
        self.failures = failures
        self.results = results
        detail = "; ".join(f"index {i}: {msg}" for i, msg in failures)
        super().__init__(f"{len(failures)} grid point(s) failed: {detail}")


def _config_fingerprint(config: CampaignConfig):
    d = dataclasses.asdict(config)
    d.pop("out_path")
    d.pop("workers")
    return json.dumps(d, sort_keys=True, default=repr)


def _write_manifest(out_path, config, completed):
    with open(_manifest_path(out_path), "w") as fh:
        json.dump(
            {"completed": completed, "config": _config_fingerprint(config)},
            fh,
            sort_keys=True,
        )


def to_exclusion(result: SensitivityResult, delta_k=None, overdensity=1.0,
                 rho_dm=constants.LOCAL_DM_DENSITY_GEV_CM3):
    """Convert a sensitivity bound into a coupling-constant exclusion point."""
    delta_k = constants.DEFAULT_DELTA_K if delta_k is None else delta_k
    fractional = result.bound_95 / constants.CLOCK_FREQUENCY_HZ
    d_e = constants.coupling_from_fractional_amplitude(
        fractional, result.f_dm, delta_k=delta_k,
        rho_gev_cm3=rho_dm, overdensity=overdensity,
    )
    return ExclusionPoint(
        m_phi_ev=constants.mass_ev_from_frequency(result.f_dm),
        d_e=d_e,
        fractional_amplitude=fractional,
        scheme=result.scheme,
    )


def load_results(path):
    """Read a JSON-lines results file."""
    with open(path) as fh:
        return [SensitivityResult.from_json(line) for line in fh if line.strip()]


def export_csv(results, path, exclusion=False, delta_k=None, overdensity=1.0):
    """Two-column CSV export: (f_dm, bound) or (m_phi_ev, d_e)."""
    with open(path, "w") as fh:
        if exclusion:
            fh.write("m_phi_ev,d_e\n")
            for r in results:
                p = to_exclusion(r, delta_k=delta_k, overdensity=overdensity)
                fh.write(f"{p.m_phi_ev!r},{p.d_e!r}\n")
        else:
            fh.write("f_dm_hz,bound_95\n")
            for r in results:
                fh.write(f"{r.f_dm!r},{r.bound_95!r}\n")
