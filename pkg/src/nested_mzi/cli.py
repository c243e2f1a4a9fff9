"""Command-line front end.

Subcommands: run, quadcell, fit-p, plot.  Exit codes: 0 success,
2 configuration error, 3 degenerate model.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import spectral as sp
from .errors import (
    AliasingError,
    ConfigError,
    DegenerateConditionError,
    DegenerateProfileError,
    FitDegenerateError,
)
from .harness import (
    QUADCELL_SCENARIOS,
    SCENARIOS,
    RunConfig,
    emit_plot,
    load_config_file,
    run,
    run_quadcell_spectrum,
)
from .optics import fit_p

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def _add_run_flags(parser):
    parser.add_argument("--config", help="flat-key JSON config file")
    parser.add_argument("--scenario", help=f"one of {', '.join(SCENARIOS)}")
    parser.add_argument("--seed", type=int, help="subsampling seed")
    parser.add_argument("--duration", type=float, help="simulated seconds")
    parser.add_argument("--samples", type=int, help="CPSID subsample size")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--freq-min", type=float, help="band lower edge, Hz")
    parser.add_argument("--freq-max", type=float, help="band upper edge, Hz")
    parser.add_argument("--freq-step", type=float, help="band step, Hz")
    parser.add_argument(
        "--emit-plot", action="store_true", default=None, help="also write spectrum.svg"
    )


def _build_config(args, default_scenario: Optional[str] = None) -> RunConfig:
    flat = load_config_file(args.config) if args.config else {}
    overrides = {
        "scenario": args.scenario,
        "seed": args.seed,
        "duration": args.duration,
        "n_samples": args.samples,
        "out_dir": args.out,
        "grid.f_min": args.freq_min,
        "grid.f_max": args.freq_max,
        "grid.step": args.freq_step,
        "emit_plot": args.emit_plot,
    }
    for key, value in overrides.items():
        if value is not None:
            flat[key] = value
    if "scenario" not in flat:
        if default_scenario is None:
            raise ConfigError("a scenario is required (--scenario or config file)")
        flat["scenario"] = default_scenario
    return RunConfig.from_flat(flat)


def _cmd_run(args) -> int:
    config = _build_config(args)
    manifest = run(config)
    print(f"scenario {manifest.scenario} (seed {manifest.seed}) -> {config.out_dir}")
    if manifest.event_count is not None:
        print(f"  events: {manifest.event_count} collected, {manifest.n_samples_used} sampled")
    if manifest.fitted_p is not None:
        print(f"  fitted p: {manifest.fitted_p:.6g} (rms {manifest.fit_residual_rms:.3g})")
    print(f"  peaks: {len(manifest.peaks)}")
    for row in manifest.peaks:
        label = row["label"] or "unlabeled"
        print(f"    {row['freq_hz']:7.1f} Hz  {row['magnitude']:.3e}  {label}")
    return EXIT_OK


def _cmd_quadcell(args) -> int:
    config = _build_config(args)
    if config.scenario not in QUADCELL_SCENARIOS:
        raise ConfigError(
            f"quadcell expects a scenario in {QUADCELL_SCENARIOS}, got {config.scenario!r}"
        )
    spectrum = run_quadcell_spectrum(config)
    print(f"scenario {config.scenario} -> {config.out_dir}")
    for freq in (282.0, 296.0, 307.0, 318.0, 332.0):
        print(f"  |Y({freq:.0f} Hz)| = {spectrum.magnitude_at(freq):.3e}")
    return EXIT_OK


def _cmd_fit_p(args) -> int:
    flat = load_config_file(args.config) if args.config else {}
    flat.setdefault("scenario", "fig1a")
    if args.samples is not None:
        flat["fit_samples"] = args.samples
    if args.duration is not None:
        flat["fit_duration"] = args.duration
    config = RunConfig.from_flat(flat)
    result = fit_p(config.optics, config.resolve_bank(), config.fit_samples, config.fit_duration)
    print(f"p = {result.model.p:.9g}")
    print(f"residual rms = {result.residual_rms:.6g} over {result.n_samples} samples")
    return EXIT_OK


def _cmd_plot(args) -> int:
    spectrum = sp.read_spectrum_csv(args.spectrum)
    peaks = sp.read_peaks_csv(args.peaks) if args.peaks else []
    emit_plot(spectrum, peaks, args.out, title=args.title or "")
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nested-mzi",
        description=(
            "Simulate the five-mirror nested interferometer, record beam "
            "centroids at symmetry instants, and recover the mirror "
            "vibration spectrum."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and write its files")
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_quad = sub.add_parser("quadcell", help="quad-cell spectrum scenarios")
    _add_run_flags(p_quad)
    p_quad.set_defaults(func=_cmd_quadcell)

    p_fit = sub.add_parser("fit-p", help="fit the third-order centroid constant")
    p_fit.add_argument("--config", help="flat-key JSON config file")
    p_fit.add_argument("--samples", type=int, help="fit sample count")
    p_fit.add_argument("--duration", type=float, help="fit window, seconds")
    p_fit.set_defaults(func=_cmd_fit_p)

    p_plot = sub.add_parser("plot", help="render an SVG from saved CSVs")
    p_plot.add_argument("--spectrum", required=True, help="spectrum.csv path")
    p_plot.add_argument("--peaks", help="peaks.csv path")
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.add_argument("--title", help="plot title")
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, AliasingError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateConditionError, DegenerateProfileError, FitDegenerateError) as exc:
        print(f"degenerate model: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
