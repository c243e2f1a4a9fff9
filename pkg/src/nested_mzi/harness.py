"""Scenario runner: wires the pipeline into named, reproducible experiments.

Five scenarios are supported:

  fig1a              centroid records at symmetry instants, canonical bank
  fig1b              same, with mirror A retuned 282 -> 278 Hz
  oracle-compare     fig1a plus the dense closed-form reference spectrum
  danan-baseline     split-detector (quad-cell) spectrum, uniform sampling
  ef-amplitude-sweep quad-cell spectra across mirror-E amplitude multipliers

Each run writes events.csv, spectrum.csv, peaks.csv, manifest.json and an
optional spectrum.svg into the output directory.  Output files are written
atomically and, for a fixed (config, seed), are byte-identical across runs
(the manifest is the one exception: it records wall-clock timings).
"""
from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import events as ev
from . import spectral as sp
from .errors import ConfigError
from .mirrors import MIRRORS, Mirror, MirrorBank, default_bank, modified_bank
from .optics import FitResult, OpticsConfig, fit_p, quad_cell_series
from .svgplot import render_spectrum_svg

SCENARIOS = ("fig1a", "fig1b", "danan-baseline", "ef-amplitude-sweep", "oracle-compare")
CPSID_SCENARIOS = ("fig1a", "fig1b", "oracle-compare")
QUADCELL_SCENARIOS = ("danan-baseline", "ef-amplitude-sweep")

EF_MULTIPLIERS = (1.0, 3.0, 10.0, 30.0)

# Drive phases used by the centroid-record scenarios: the two mirrors that
# bracket the inner loop run in quadrature (cosine drive), the rest at zero.
# With all-zero phases the sampling clock places an exact antiphase
# f_B + f_E - f_A tone on top of the direct f_F tone, burying the F peak
# below the detection threshold, while high-order lattice lines (e.g.
# f_C + 2 f_F - 2 f_E at 335 Hz) ride above it.  Quadrature on E and F keeps
# the F peak low but resolvable, holds the order-5 lines under threshold,
# and preserves the A-retune contrast across subsampling seeds.
FIG1_PHASES = {Mirror.E: math.pi / 2.0, Mirror.F: math.pi / 2.0}

_MODEL_PEAK_FLOOR = 1e-9  # relative magnitude below which model peaks are float dust


@dataclass
class RunConfig:
    """Everything a scenario needs, resolvable to a flat key/value echo."""

    scenario: str
    out_dir: str = "out"
    seed: int = 1
    duration: float = 60.0
    n_samples: int = 2400
    mode: str = "measured"
    emit_plot: bool = False
    amplitude: float = 0.01
    grid: sp.FrequencyGrid = field(default_factory=sp.FrequencyGrid)
    optics: OpticsConfig = field(default_factory=OpticsConfig)
    rootfinder: ev.RootFinderConfig = field(default_factory=ev.RootFinderConfig)
    bank_overrides: Dict[str, float] = field(default_factory=dict)
    quad_rate: float = 10000.0
    model_rate: float = 5000.0
    model_duration: float = 60.0
    fit_samples: int = 4000
    fit_duration: float = 1.0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.duration <= 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if self.n_samples <= 0:
            raise ConfigError(f"n_samples must be positive, got {self.n_samples}")
        if self.mode not in ("measured", "model"):
            raise ConfigError(f"mode must be 'measured' or 'model', got {self.mode!r}")
        if self.quad_rate <= 2.0 * self.grid.f_max:
            raise ConfigError(f"quad_rate must exceed {2 * self.grid.f_max} Hz")
        for key in self.bank_overrides:
            mirror, _, fld = key.partition(".")
            if mirror not in Mirror.__members__ or fld not in (
                "freq_hz",
                "amplitude",
                "phase_rad",
            ):
                raise ConfigError(f"unknown bank override {key!r}")

    def resolve_bank(self) -> MirrorBank:
        """Concrete mirror bank: scenario defaults first, overrides last."""
        phases = FIG1_PHASES if self.scenario in CPSID_SCENARIOS else None
        bank = default_bank(self.amplitude, phases)
        if self.scenario == "fig1b" and "A.freq_hz" not in self.bank_overrides:
            bank = modified_bank(bank)
        for key, value in sorted(self.bank_overrides.items()):
            mirror, _, fld = key.partition(".")
            bank = bank.replace(Mirror(mirror), **{fld: float(value)})
        return bank

    def to_flat(self) -> Dict:
        """Resolved flat-key echo; feeding it back reproduces this run."""
        bank = self.resolve_bank()
        flat = {
            "scenario": self.scenario,
            "out_dir": self.out_dir,
            "seed": self.seed,
            "duration": self.duration,
            "n_samples": self.n_samples,
            "mode": self.mode,
            "emit_plot": self.emit_plot,
            "amplitude": self.amplitude,
            "grid.f_min": self.grid.f_min,
            "grid.f_max": self.grid.f_max,
            "grid.step": self.grid.step,
            "optics.waist": self.optics.waist,
            "optics.grid_halfwidth": self.optics.grid_halfwidth,
            "optics.grid_points": self.optics.grid_points,
            "optics.c_a": self.optics.path_amplitudes[0],
            "optics.c_b": self.optics.path_amplitudes[1],
            "optics.c_c": self.optics.path_amplitudes[2],
            "rootfinder.scan_step": self.rootfinder.scan_step,
            "rootfinder.refine_tol": self.rootfinder.refine_tol,
            "rootfinder.dedupe_window": self.rootfinder.dedupe_window,
            "quad_rate": self.quad_rate,
            "model_rate": self.model_rate,
            "model_duration": self.model_duration,
            "fit_samples": self.fit_samples,
            "fit_duration": self.fit_duration,
        }
        for m in MIRRORS:
            spec = bank[m]
            flat[f"bank.{m}.freq_hz"] = spec.freq_hz
            flat[f"bank.{m}.amplitude"] = spec.amplitude
            flat[f"bank.{m}.phase_rad"] = spec.phase_rad
        return flat

    @classmethod
    def from_flat(cls, flat: Dict) -> "RunConfig":
        """Inverse of to_flat; unknown keys are rejected."""
        flat = dict(flat)

        def pop(key, default=None, cast=None):
            if key in flat:
                value = flat.pop(key)
                return value if (cast is None or value is None) else cast(value)
            return default

        bank_overrides = {}
        for key in list(flat):
            if key.startswith("bank."):
                bank_overrides[key[len("bank."):]] = float(flat.pop(key))
        cfg = cls(
            scenario=pop("scenario", cast=str),
            out_dir=pop("out_dir", "out", str),
            seed=pop("seed", 1, int),
            duration=pop("duration", 60.0, float),
            n_samples=pop("n_samples", 2400, int),
            mode=pop("mode", "measured", str),
            emit_plot=pop("emit_plot", False, bool),
            amplitude=pop("amplitude", 0.01, float),
            grid=sp.FrequencyGrid(
                f_min=pop("grid.f_min", 270.0, float),
                f_max=pop("grid.f_max", 340.0, float),
                step=pop("grid.step", 0.1, float),
            ),
            optics=OpticsConfig(
                waist=pop("optics.waist", 1.0, float),
                grid_halfwidth=pop("optics.grid_halfwidth", 6.0, float),
                grid_points=pop("optics.grid_points", 1024, int),
                path_amplitudes=(
                    pop("optics.c_a", 1.0 / 3.0, float),
                    pop("optics.c_b", -1.0 / 3.0, float),
                    pop("optics.c_c", 1.0 / 3.0, float),
                ),
            ),
            rootfinder=ev.RootFinderConfig(
                scan_step=pop("rootfinder.scan_step", None, float),
                refine_tol=pop("rootfinder.refine_tol", 1e-10, float),
                dedupe_window=pop("rootfinder.dedupe_window", 1e-6, float),
            ),
            bank_overrides=bank_overrides,
            quad_rate=pop("quad_rate", 10000.0, float),
            model_rate=pop("model_rate", 5000.0, float),
            model_duration=pop("model_duration", 60.0, float),
            fit_samples=pop("fit_samples", 4000, int),
            fit_duration=pop("fit_duration", 1.0, float),
        )
        if flat:
            raise ConfigError(f"unknown config keys: {sorted(flat)}")
        return cfg


def load_config_file(path) -> Dict:
    """Read a flat-key JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


@dataclass
class RunManifest:
    """Run record: resolved config, result summary, and the file inventory."""

    scenario: str
    seed: int
    config: Dict
    files: Dict[str, str]
    timings: Dict[str, float]
    event_count: Optional[int] = None
    n_samples_used: Optional[int] = None
    fitted_p: Optional[float] = None
    fit_residual_rms: Optional[float] = None
    peaks: List[Dict] = field(default_factory=list)
    extra: Dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "schema": "nested-mzi/manifest/1",
            "scenario": self.scenario,
            "seed": self.seed,
            "config": self.config,
            "files": self.files,
            "timings": self.timings,
            "event_count": self.event_count,
            "n_samples_used": self.n_samples_used,
            "fitted_p": self.fitted_p,
            "fit_residual_rms": self.fit_residual_rms,
            "peaks": self.peaks,
        }
        payload.update(self.extra)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_csv(path: str, writer, *args) -> None:
    tmp = path + ".tmp"
    writer(*args, tmp)
    os.replace(tmp, path)


def _peak_rows(peaks: List[sp.Peak]) -> List[Dict]:
    rows = []
    for pk in peaks:
        rows.append(
            {
                "freq_hz": pk.freq_hz,
                "magnitude": pk.magnitude,
                "label": pk.label.text() if pk.label else None,
                "order": pk.label.order if pk.label else None,
            }
        )
    return rows


def quadcell_spectrum(
    optics: OpticsConfig,
    bank: MirrorBank,
    duration: float,
    rate: float,
    grid: sp.FrequencyGrid,
) -> sp.Spectrum:
    """Uniformly sampled quad-cell signal, standard DFT, band-limited.

    The signal is mean-subtracted and transformed with the usual FFT; only
    bins inside the analysis band are kept, scaled 1/N to match the
    nonuniform transform's convention.
    """
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    q = quad_cell_series(optics, bank, t)
    amps = np.fft.rfft(q - q.mean()) / n
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    sel = (freqs >= grid.f_min) & (freqs <= grid.f_max)
    return sp.Spectrum(freqs=freqs[sel], amps=amps[sel])


def run_quadcell_spectrum(config: RunConfig) -> sp.Spectrum:
    """Quad-cell recipe entry point; returns the scenario's headline spectrum.

    For the amplitude sweep that is the largest-multiplier spectrum, the one
    where the combination peaks surface.  Output files are written as in
    ``run``.
    """
    if config.scenario not in QUADCELL_SCENARIOS:
        raise ConfigError(
            f"quad-cell spectra are defined for {QUADCELL_SCENARIOS}, got {config.scenario!r}"
        )
    _, headline = _run_quadcell(config)
    return headline


def emit_plot(spectrum: sp.Spectrum, peaks: List[sp.Peak], path, title: str = "") -> None:
    """Write the SVG panel for a spectrum and its labeled peaks."""
    if spectrum.freqs.shape[0] == 0:
        raise ConfigError("cannot plot an empty spectrum")
    _atomic_write(str(path), render_spectrum_svg(spectrum, peaks, title=title))


def run(config: RunConfig) -> RunManifest:
    """Execute one scenario recipe and write its output files."""
    if config.scenario in CPSID_SCENARIOS:
        return _run_cpsid(config)
    return _run_quadcell(config)[0]


def _run_cpsid(config: RunConfig) -> RunManifest:
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    bank = config.resolve_bank()
    timings: Dict[str, float] = {}
    files: Dict[str, str] = {}

    t0 = time.perf_counter()
    fit: FitResult = fit_p(config.optics, bank, config.fit_samples, config.fit_duration)
    timings["fit_p"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    events = ev.collect_events(
        bank,
        config.optics,
        fit.model,
        (0.0, config.duration),
        config.rootfinder,
        mode=config.mode,
    )
    timings["collect_events"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sample = ev.subsample(events, min(config.n_samples, len(events)), config.seed)
    times, values = ev.event_arrays(sample)
    spectrum = sp.nudft(times, values, config.grid)
    peaks = sp.label_peaks(sp.detect_peaks(spectrum), bank, config.grid.step)
    timings["spectrum"] = time.perf_counter() - t0

    _atomic_csv(os.path.join(out, "events.csv"), ev.write_events_csv, sample)
    files["events"] = "events.csv"
    _atomic_csv(os.path.join(out, "spectrum.csv"), sp.write_spectrum_csv, spectrum)
    files["spectrum"] = "spectrum.csv"
    _atomic_csv(os.path.join(out, "peaks.csv"), sp.write_peaks_csv, peaks)
    files["peaks"] = "peaks.csv"

    extra: Dict = {}
    if config.scenario == "oracle-compare":
        t0 = time.perf_counter()
        model_spec = sp.model_spectrum(
            bank, fit.model, config.grid, config.model_duration, config.model_rate
        )
        model_peaks = _pruned_model_peaks(model_spec, bank, config.grid.step)
        timings["model_spectrum"] = time.perf_counter() - t0
        _atomic_csv(os.path.join(out, "model_spectrum.csv"), sp.write_spectrum_csv, model_spec)
        files["model_spectrum"] = "model_spectrum.csv"
        _atomic_csv(os.path.join(out, "model_peaks.csv"), sp.write_peaks_csv, model_peaks)
        files["model_peaks"] = "model_peaks.csv"
        offsets = [
            min(abs(pk.freq_hz - mp.freq_hz) for mp in model_peaks) if model_peaks else math.inf
            for pk in peaks
        ]
        extra["model_peak_count"] = len(model_peaks)
        extra["peak_match_max_offset_hz"] = max(offsets) if offsets else None

    if config.emit_plot:
        emit_plot(
            spectrum,
            peaks,
            os.path.join(out, "spectrum.svg"),
            title=f"{config.scenario} (seed {config.seed})",
        )
        files["plot"] = "spectrum.svg"

    manifest = RunManifest(
        scenario=config.scenario,
        seed=config.seed,
        config=config.to_flat(),
        files=files,
        timings={k: round(v, 6) for k, v in timings.items()},
        event_count=len(events),
        n_samples_used=len(sample),
        fitted_p=fit.model.p,
        fit_residual_rms=fit.residual_rms,
        peaks=_peak_rows(peaks),
        extra=extra,
    )
    _atomic_write(os.path.join(out, "manifest.json"), manifest.to_json())
    return manifest


def _pruned_model_peaks(
    model_spec: sp.Spectrum, bank: MirrorBank, grid_step: float
) -> List[sp.Peak]:
    # uniform commensurate sampling makes off-tone bins pure float dust, so
    # the median threshold alone would admit them; prune relative to the max
    peaks = sp.detect_peaks(model_spec)
    floor = _MODEL_PEAK_FLOOR * float(model_spec.mags.max())
    return sp.label_peaks([pk for pk in peaks if pk.magnitude >= floor], bank, grid_step)


def _run_quadcell(config: RunConfig) -> Tuple[RunManifest, sp.Spectrum]:
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    bank = config.resolve_bank()
    timings: Dict[str, float] = {}
    files: Dict[str, str] = {}
    extra: Dict = {}

    multipliers: Tuple[float, ...] = (
        EF_MULTIPLIERS if config.scenario == "ef-amplitude-sweep" else (1.0,)
    )
    spectra: List[sp.Spectrum] = []
    t0 = time.perf_counter()
    for mult in multipliers:
        swept = bank.replace(Mirror.E, amplitude=bank[Mirror.E].amplitude * mult)
        spectra.append(
            quadcell_spectrum(config.optics, swept, config.duration, config.quad_rate, config.grid)
        )
    timings["quadcell"] = time.perf_counter() - t0

    # spectrum.csv carries the baseline; the sweep adds one file per multiplier
    _atomic_csv(os.path.join(out, "spectrum.csv"), sp.write_spectrum_csv, spectra[0])
    files["spectrum"] = "spectrum.csv"
    if config.scenario == "ef-amplitude-sweep":
        for mult, spec in zip(multipliers, spectra):
            name = f"spectrum_x{mult:g}.csv"
            _atomic_csv(os.path.join(out, name), sp.write_spectrum_csv, spec)
            files[f"spectrum_x{mult:g}"] = name
        extra["sweep_multipliers"] = list(multipliers)
        extra["sweep_magnitude_282"] = [spec.magnitude_at(282.0) for spec in spectra]

    headline = spectra[-1]
    peaks = sp.label_peaks(sp.detect_peaks(headline), bank, config.grid.step)
    _atomic_csv(os.path.join(out, "peaks.csv"), sp.write_peaks_csv, peaks)
    files["peaks"] = "peaks.csv"
    _atomic_csv(os.path.join(out, "events.csv"), ev.write_events_csv, [])
    files["events"] = "events.csv"

    if config.emit_plot:
        emit_plot(
            headline,
            peaks,
            os.path.join(out, "spectrum.svg"),
            title=f"{config.scenario}",
        )
        files["plot"] = "spectrum.svg"

    manifest = RunManifest(
        scenario=config.scenario,
        seed=config.seed,
        config=config.to_flat(),
        files=files,
        timings={k: round(v, 6) for k, v in timings.items()},
        peaks=_peak_rows(peaks),
        extra=extra,
    )
    _atomic_write(os.path.join(out, "manifest.json"), manifest.to_json())
    return manifest, headline
