"""Command-line interface.

Subcommands:

- ``run``            scan an f_DM grid and write sensitivity bounds
- ``validate-noise`` flicker-generator self-test (Allan deviation + slope)
- ``validate-dm``    field-synthesis self-test (ensemble PSD + variance)
- ``export``         convert a results file to CSV (bounds or exclusion)
- ``analytic``       closed-form Ramsey/DS sensitivity curve

Campaign parameters come from an optional TOML config file, overridden
by flags.  Exit codes: 0 success, 1 configuration error, 2 partial
failure (some grid points failed or a self-test missed its tolerance).
"""

from __future__ import annotations

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from .analysis import ramsey_analytic_sensitivity
from .campaign import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_PARTIAL_FAILURE,
    CampaignConfig,
    CampaignPartialFailure,
    SignalInjection,
    export_csv,
    load_results,
    log_grid,
    resolve_workers,
    run_campaign,
)
from .dmfield import DmParameters, synthesize_realization, target_psd
from .noise import NoiseConfig, build_mandelbrot, generate_noise
from .stability import averaged_periodogram, log_psd_slope, overlapping_allan_deviation


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="clockdm",
        description="Monte Carlo sensitivity simulations for dark matter searches with clocks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sensitivity campaign")
    run.add_argument("--config", help="TOML config file (flags override)")
    run.add_argument("--scheme", choices=("ds", "nbdd", "bbdd"))
    run.add_argument("--fdm-min", type=float, help="grid start (Hz)")
    run.add_argument("--fdm-max", type=float, help="grid end (Hz)")
    run.add_argument("--fdm-points", type=int, help="log-spaced grid size")
    run.add_argument("--tm", type=float, help="measurement duration (s)")
    run.add_argument("--tp", type=float, help="probe duration (s)")
    run.add_argument("--seed", type=int)
    run.add_argument("--sigma-ln", type=float, help="flicker Allan deviation")
    run.add_argument("--measurements", type=int)
    run.add_argument("--analysis-points", type=int)
    run.add_argument("--coherence-periods", type=float)
    run.add_argument("--f-pi", type=float, help="pi-pulse frequency/rate (Hz)")
    run.add_argument("--no-laser-noise", action="store_true")
    run.add_argument("--no-qpn", action="store_true")
    run.add_argument("--out", help="results JSONL path")
    run.add_argument("--threads", type=int, help="worker processes")

    vn = sub.add_parser("validate-noise", help="flicker generator self-test")
    vn.add_argument("--sigma-ln", type=float, default=1e-16)
    vn.add_argument("--dt", type=float, default=0.01)
    vn.add_argument("--realizations", type=int, default=20)
    vn.add_argument("--samples", type=int, default=1 << 17)
    vn.add_argument("--seed", type=int, default=0)

    vd = sub.add_parser("validate-dm", help="dark-matter field self-test")
    vd.add_argument("--fdm", type=float, default=10.0)
    vd.add_argument("--coherence-periods", type=float, default=1e3)
    vd.add_argument("--realizations", type=int, default=500)
    vd.add_argument("--seed", type=int, default=0)

    ex = sub.add_parser("export", help="convert results JSONL to CSV")
    ex.add_argument("--in", dest="in_path", required=True)
    ex.add_argument("--out", required=True)
    ex.add_argument("--format", choices=("csv",), default="csv")
    ex.add_argument("--exclusion", action="store_true",
                    help="export (m_phi, d_e) instead of (f_dm, bound)")
    ex.add_argument("--delta-k", type=float, default=None)
    ex.add_argument("--overdensity", type=float, default=1.0)

    an = sub.add_parser("analytic", help="closed-form Ramsey/DS sensitivity")
    an.add_argument("--tp", type=float, required=True)
    an.add_argument("--tm", type=float, required=True)
    an.add_argument("--fmin", type=float, default=None)
    an.add_argument("--fmax", type=float, default=None)
    an.add_argument("--points", type=int, default=25)
    return parser


def _load_config_file(path):
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    injection = data.pop("injection", None)
    if injection is not None:
        data["injection"] = SignalInjection(**injection)
    if "f_dm_grid" in data:
        data["f_dm_grid"] = tuple(data["f_dm_grid"])
    if "f_pi" in data and isinstance(data["f_pi"], list):
        data["f_pi"] = tuple(data["f_pi"])
    return data


def _cmd_run(args):
    settings = {}
    if args.config:
        settings.update(_load_config_file(args.config))
    overrides = {
        "scheme": args.scheme,
        "t_m": args.tm,
        "t_p": args.tp,
        "seed": args.seed,
        "sigma_ln": args.sigma_ln,
        "n_measurements": args.measurements,
        "analysis_points": args.analysis_points,
        "coherence_periods": args.coherence_periods,
        "f_pi": args.f_pi,
        "out_path": args.out,
        "workers": args.threads,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if args.fdm_min is not None or args.fdm_max is not None:
        if args.fdm_min is None or args.fdm_max is None:
            raise ValueError("--fdm-min and --fdm-max must be given together")
        settings["f_dm_grid"] = log_grid(args.fdm_min, args.fdm_max, args.fdm_points or 8)
    if args.no_laser_noise:
        settings["include_laser_noise"] = False
    if args.no_qpn:
        settings["include_qpn"] = False
    settings["workers"] = resolve_workers(settings.get("workers"))
    config = CampaignConfig(**settings)

    if config.t_m / config.t_p * config.n_measurements > 1e8:
        print("note: paper-scale workload requested; this will run for a long time",
              file=sys.stderr)

    def progress(result):
        print(f"f_DM = {result.f_dm:.6g} Hz  bound = {result.bound_95:.6g}")

    try:
        results = run_campaign(config, progress=progress)
    except CampaignPartialFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL_FAILURE
    print(f"{len(results)} grid point(s) completed")
    return EXIT_OK


def _cmd_validate_noise(args):
    config = NoiseConfig(sigma_ln=args.sigma_ln)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    traces = []
    for _ in range(args.realizations):
        model = build_mandelbrot(config, args.dt)
        traces.append(args.sigma_ln * generate_noise(model, args.samples, rng))
    taus = np.array([1.0, 10.0, 100.0])
    devs = np.array([
        overlapping_allan_deviation(tr, args.dt, taus)[1] for tr in traces
    ])
    mean_dev = devs.mean(axis=0)
    tau_used = overlapping_allan_deviation(traces[0], args.dt, taus)[0]
    print("tau_s  allan_deviation  target  ratio")
    ok = True
    for tau, dev in zip(tau_used, mean_dev):
        ratio = dev / args.sigma_ln
        ok &= abs(ratio - 1.0) < 0.2
        print(f"{tau:6.1f}  {dev:.4e}  {args.sigma_ln:.1e}  {ratio:.3f}")
    f, psd = averaged_periodogram(traces, args.dt)
    band = (max(10 * config.f_min, 2.0 / (args.samples * args.dt)), 0.5 / args.dt / 10)
    slope = log_psd_slope(f, psd, *band)
    ok &= abs(slope + 1.0) < 0.15
    print(f"psd slope {slope:.3f} (target -1 +- 0.15)")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_PARTIAL_FAILURE


def _cmd_validate_dm(args):
    params = DmParameters(f_dm=args.fdm, coherence_periods=args.coherence_periods)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    t_m = 20.0 * params.tau_c
    accum = None
    mean_sq = 0.0
    n_f = bins = None
    for _ in range(args.realizations):
        r = synthesize_realization(params, t_m, t_m / 10.0, rng)
        power = np.abs(r.coefficients) ** 2
        accum = power if accum is None else accum + power
        n_f, bins = r.n_f, r.bins
        mean_sq += np.sum(power) * 2.0 / n_f**2
    accum /= args.realizations
    mean_sq /= args.realizations
    target = target_psd(params, n_f, bins)
    top = np.argsort(target)[-3:]
    print("bin  psd_ratio(sim/target)")
    ok = True
    for b in top:
        ratio = accum[b] / target[b]
        ok &= abs(ratio - 1.0) < 0.10
        print(f"{bins[b]:8d}  {ratio:.4f}")
    var_ratio = mean_sq / (0.5 * params.phi0**2)
    ok &= abs(var_ratio - 1.0) < 0.05
    print(f"mean-square ratio {var_ratio:.4f} (target 1 +- 0.05)")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_PARTIAL_FAILURE


def _cmd_export(args):
    results = load_results(args.in_path)
    if not results:
        raise ValueError(f"no results in {args.in_path}")
    export_csv(results, args.out, exclusion=args.exclusion,
               delta_k=args.delta_k, overdensity=args.overdensity)
    print(f"wrote {args.out} ({len(results)} rows)")
    return EXIT_OK


def _cmd_analytic(args):
    f_min = args.fmin if args.fmin is not None else 10.0 / args.tm
    f_max = args.fmax if args.fmax is not None else 0.1 / args.tp
    print("f_hz,bound")
    for f in np.geomspace(f_min, f_max, args.points):
        print(f"{float(f)!r},{float(ramsey_analytic_sensitivity(f, args.tp, args.tm))!r}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "validate-noise": _cmd_validate_noise,
    "validate-dm": _cmd_validate_dm,
    "export": _cmd_export,
    "analytic": _cmd_analytic,
}


def cli_main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG_ERROR if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, TypeError, tomllib.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
