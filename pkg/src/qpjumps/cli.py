"""Command-line surface.

Exit codes: 0 success, 1 fit finished with warnings (or other runtime
failure), 2 configuration error, 3 data-format error, 4 fit
non-convergence.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import experiments, io
from .analysis import extract_dwells, log_histogram, poisson_prediction, two_point_filter
from .core import ConfigError, ScenarioConfig, load_config, validate_config
from .fitting import (
    FitConvergenceError,
    FitInputError,
    fit_power_law,
    fit_recovery,
    fit_thermal,
    invert_relaxation,
    periodogram,
)
from .jumpsim import STATE_EXCITED, STATE_GROUND, snr_separation


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario configuration file")
    p.add_argument("--seed", type=int, help="override the configured rng_seed")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes for batch stages")
    p.add_argument("--emit-truth", action="store_true",
                   help="write the ground-truth trajectory sidecar")


def _scenario(args, require_file: bool = True) -> ScenarioConfig:
    if args.config:
        config = load_config(args.config)
    elif require_file:
        raise ConfigError("this command needs --config")
    else:
        config = validate_config("rng_seed = 0\nduration = 1")
    if args.seed is not None:
        config = replace(config, rng_seed=args.seed)
    return config


def _finish_manifest(args, config, outputs, counts, t0, inputs=()):
    manifest = io.RunManifest(
        config_hash=io.config_hash(config),
        rng_seed=config.rng_seed,
        inputs=[str(p) for p in inputs],
        outputs=[os.path.basename(p) for p in outputs],
        wall_clock_s=time.monotonic() - t0,
        record_counts=counts,
    )
    io.write_manifest(os.path.join(args.out, "manifest.json"), manifest)


def cmd_snr(args) -> int:
    config = _scenario(args, require_file=False)
    sep = snr_separation(config.meas)
    print(f"i_over_sigma = {sep:.9g}")
    print(f"peak_separation_2i = {2 * sep:.9g}")
    return 0


def cmd_simulate(args) -> int:
    t0 = time.monotonic()
    config = _scenario(args)
    os.makedirs(args.out, exist_ok=True)
    truth, iq = experiments.run_simulation(config)
    record_path = os.path.join(args.out, "record.iq")
    io.write_iq(record_path, iq)
    outputs = [record_path]
    if args.emit_truth:
        truth_path = os.path.join(args.out, "record.truth")
        io.write_truth_csv(truth_path, truth)
        outputs.append(truth_path)
    _finish_manifest(args, config, outputs,
                     {"events": len(truth), "samples": len(iq)}, t0)
    return 0


def _read_record(path):
    iq = io.read_iq(path)
    if len(iq) == 0:
        raise io.DataFormatError(f"{path}: record holds no samples")
    return iq


def cmd_filter(args) -> int:
    t0 = time.monotonic()
    config = _scenario(args, require_file=False)
    iq = _read_record(args.record)
    sep = args.separation if args.separation is not None else snr_separation(config.meas)
    est = two_point_filter(iq, sep)
    os.makedirs(args.out, exist_ok=True)
    states_path = os.path.join(args.out, "states.csv")
    io.write_states_csv(states_path, est)
    _finish_manifest(args, config, [states_path], {"samples": len(est)}, t0,
                     inputs=[args.record])
    return 0


def cmd_stats(args) -> int:
    t0 = time.monotonic()
    config = _scenario(args, require_file=False)
    iq = _read_record(args.record)
    sep = args.separation if args.separation is not None else snr_separation(config.meas)
    est, report = experiments.run_stats(iq, sep, args.window, args.bins_per_decade)
    os.makedirs(args.out, exist_ok=True)

    outputs = []
    report_path = os.path.join(args.out, "report.csv")
    io.write_report_csv(report_path, report)
    outputs.append(report_path)

    samples = int(round(report.window / est.t_meas))
    states = np.asarray(est.states)
    histograms = 0
    for w in range(len(report)):
        chunk = replace(est, states=states[w * samples:(w + 1) * samples])
        dwells = extract_dwells(chunk)
        for state, durations in ((STATE_GROUND, dwells.ground),
                                 (STATE_EXCITED, dwells.excited)):
            if len(durations) == 0:
                continue
            hist = log_histogram(durations, est.t_meas, args.bins_per_decade, state=state)
            path = os.path.join(
                args.out, f"hist_{w:04d}_{io.STATE_CHARS[state]}.csv")
            io.write_histogram_csv(path, hist, poisson_prediction(hist))
            outputs.append(path)
            histograms += 1

    _finish_manifest(args, config, outputs,
                     {"samples": len(est), "windows": len(report),
                      "histograms": histograms}, t0, inputs=[args.record])
    return 0


def _fit_exit(status: str) -> int:
    return 0 if status == "converged" else 1


def cmd_fit_psd(args) -> int:
    t0 = time.monotonic()
    times, values = io.read_series_csv(args.input)
    dt = float(np.median(np.diff(times)))
    freqs, power = periodogram(values, dt, n_segments=args.segments)
    fit = fit_power_law(freqs, power, n_boot=args.bootstrap, seed=args.seed or 0)
    os.makedirs(args.out, exist_ok=True)
    psd_path = os.path.join(args.out, "psd.csv")
    io.write_series_csv(psd_path, freqs, power, "power")
    fit_path = os.path.join(args.out, "fit.csv")
    io.write_fit_report_csv(fit_path, {
        "a": fit.a, "a_err": fit.a_err, "b": fit.b, "b_err": fit.b_err,
        "alpha": fit.alpha, "alpha_err": fit.alpha_err,
        "c": fit.c, "c_err": fit.c_err, "residual_norm": fit.residual_norm,
        "status": fit.status,
    })
    model = fit.model(freqs)
    resid_path = os.path.join(args.out, "residuals.csv")
    io.write_residuals_csv(resid_path, power, model, power - model)
    config = _scenario(args, require_file=False)
    _finish_manifest(args, config, [psd_path, fit_path, resid_path],
                     {"frequencies": len(freqs)}, t0, inputs=[args.input])
    return _fit_exit(fit.status)


def cmd_fit_recovery(args) -> int:
    t0 = time.monotonic()
    config = _scenario(args, require_file=False)
    times, tau_e = io.read_series_csv(args.input)
    fit = fit_recovery(times, tau_e, config.qubit, n_boot=args.bootstrap,
                       seed=args.seed or 0)
    os.makedirs(args.out, exist_ok=True)
    fit_path = os.path.join(args.out, "fit.csv")
    g_eff = fit.x_steady / fit.tau if not math.isnan(fit.tau) else math.nan
    io.write_fit_report_csv(fit_path, {
        "tau_ss_s": fit.tau, "tau_ss_err_s": fit.tau_err,
        "x_steady": fit.x_steady, "x_steady_err": fit.x_steady_err,
        "x_initial": fit.x_initial, "x_initial_err": fit.x_initial_err,
        "g_eff_per_s": g_eff, "residual_norm": fit.residual_norm,
        "status": fit.status,
    })
    x = invert_relaxation(tau_e, config.qubit)
    model = fit.model(times)
    resid_path = os.path.join(args.out, "residuals.csv")
    io.write_residuals_csv(resid_path, x, model, x - model)
    _finish_manifest(args, config, [fit_path, resid_path],
                     {"bins": len(times)}, t0, inputs=[args.input])
    return _fit_exit(fit.status)


def cmd_fit_thermal(args) -> int:
    t0 = time.monotonic()
    times, temps = io.read_series_csv(args.input)
    fit = fit_thermal(times, temps, n_boot=args.bootstrap, seed=args.seed or 0)
    os.makedirs(args.out, exist_ok=True)
    fit_path = os.path.join(args.out, "fit.csv")
    io.write_fit_report_csv(fit_path, {
        "t_base_k": fit.t_base, "t_base_err_k": fit.t_base_err,
        "delta_t_k": fit.delta_t, "delta_t_err_k": fit.delta_t_err,
        "tau_th_s": fit.tau, "tau_th_err_s": fit.tau_err,
        "residual_norm": fit.residual_norm, "status": fit.status,
    })
    model = fit.model(times)
    resid_path = os.path.join(args.out, "residuals.csv")
    io.write_residuals_csv(resid_path, temps, model, np.asarray(temps) - model)
    config = _scenario(args, require_file=False)
    _finish_manifest(args, config, [fit_path, resid_path],
                     {"points": len(times)}, t0, inputs=[args.input])
    return _fit_exit(fit.status)


def cmd_experiment(args) -> int:
    t0 = time.monotonic()
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    try:
        config = experiments.preset_config(args.name, overrides, seed=args.seed)
    except KeyError:
        names = ", ".join(experiments.experiment_names())
        raise ConfigError(
            f"unknown experiment {args.name!r}; available: {names}"
        ) from None
    outputs, counts = experiments.run_experiment(
        args.name, config, args.out, workers=args.workers)
    _finish_manifest(args, config, outputs, counts, t0)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpjumps",
        description="Simulate and analyze quasiparticle-driven qubit quantum jumps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("snr", help="readout separation for the configured parameters")
    _add_common(p)
    p.set_defaults(func=cmd_snr)

    p = sub.add_parser("simulate", help="run one scenario and write the record")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("filter", help="state estimate from a record")
    _add_common(p)
    p.add_argument("--record", required=True, help="binary .iq record file")
    p.add_argument("--separation", type=float, help="override the configured I/sigma")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("stats", help="windowed dwell statistics from a record")
    _add_common(p)
    p.add_argument("--record", required=True, help="binary .iq record file")
    p.add_argument("--separation", type=float, help="override the configured I/sigma")
    p.add_argument("--window", type=float, default=experiments.DEFAULT_WINDOW,
                   help="window length in seconds")
    p.add_argument("--bins-per-decade", type=int,
                   default=experiments.DEFAULT_BINS_PER_DECADE)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit-psd", help="power-law fit of a series' spectrum")
    _add_common(p)
    p.add_argument("--input", required=True, help="two-column CSV series (t_s,value)")
    p.add_argument("--segments", type=int, default=1,
                   help="averaged spectrum segments (1 = plain periodogram)")
    p.add_argument("--bootstrap", type=int, default=200,
                   help="residual-bootstrap resamples for standard errors")
    p.set_defaults(func=cmd_fit_psd)

    p = sub.add_parser("fit-recovery", help="exponential recovery fit of dwell times")
    _add_common(p)
    p.add_argument("--input", required=True, help="CSV of t_s,tau_e_s")
    p.add_argument("--bootstrap", type=int, default=200,
                   help="residual-bootstrap resamples for standard errors")
    p.set_defaults(func=cmd_fit_recovery)

    p = sub.add_parser("fit-thermal", help="exponential temperature decay fit")
    _add_common(p)
    p.add_argument("--input", required=True, help="CSV of t_s,temperature_K")
    p.add_argument("--bootstrap", type=int, default=200,
                   help="residual-bootstrap resamples for standard errors")
    p.set_defaults(func=cmd_fit_thermal)

    p = sub.add_parser("experiment", help="run a named experiment preset")
    _add_common(p)
    p.add_argument("name", help="one of: " + ", ".join(experiments.experiment_names()))
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a configuration key (repeatable)")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except io.DataFormatError as exc:
        print(f"data format error: {exc}", file=sys.stderr)
        return 3
    except (FitConvergenceError, FitInputError) as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
