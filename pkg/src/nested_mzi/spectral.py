"""Nonuniform spectral analysis of the centroid records.

The centroid samples live on the irregular clock of symmetry instants, so
their spectrum is taken by direct evaluation of

    Y(f) = (1/N) * sum_k (y_k - mean) * exp(-i 2 pi f t_k)

on an explicit frequency grid.  Peaks are picked against the median noise
floor and identified as small integer combinations of the five mirror
drive frequencies.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import AliasingError, ConfigError
from .mirrors import MIRRORS, Mirror, MirrorBank, displacements
from .optics import CentroidModel, model_centroid


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform analysis band [f_min, f_max] with the given step, ends included."""

    f_min: float = 270.0
    f_max: float = 340.0
    step: float = 0.1

    def __post_init__(self):
        if not (self.f_min < self.f_max):
            raise ConfigError(f"f_min must be < f_max, got [{self.f_min}, {self.f_max}]")
        if self.step <= 0:
            raise ConfigError(f"step must be positive, got {self.step}")

    def frequencies(self) -> np.ndarray:
        n = int(math.floor((self.f_max - self.f_min) / self.step + 1e-9)) + 1
        return self.f_min + self.step * np.arange(n)


@dataclass
class Spectrum:
    """Complex amplitudes and their magnitudes over a frequency vector."""

    freqs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.freqs.shape != self.amps.shape or self.freqs.ndim != 1:
            raise ConfigError("freqs and amps must be 1-d arrays of equal length")
        self.mags = np.abs(self.amps)

    def magnitude_at(self, freq_hz: float) -> float:
        """Magnitude at the grid point nearest freq_hz."""
        return float(self.mags[int(np.argmin(np.abs(self.freqs - freq_hz)))])


@dataclass(frozen=True)
class ComboLabel:
    """Integer-combination identification of a peak frequency.

    coefficients are ordered (n_A, n_B, n_C, n_E, n_F); matched_freq is the
    exact combination value sum(n_i * f_i); order is sum(|n_i|).
    """

    coefficients: Tuple[int, int, int, int, int]
    matched_freq: float
    order: int

    def text(self) -> str:
        """Compact rendering such as '+A+C-E' or '+2B-E'."""
        parts = []
        for n, mirror in zip(self.coefficients, MIRRORS):
            if n == 0:
                continue
            sign = "+" if n > 0 else "-"
            mult = "" if abs(n) == 1 else str(abs(n))
            parts.append(f"{sign}{mult}{mirror}")
        return "".join(parts)


@dataclass
class Peak:
    """A spectral maximum and its (optional) combination label."""

    freq_hz: float
    magnitude: float
    label: Optional[ComboLabel] = None


def nudft(
    times: np.ndarray,
    values: np.ndarray,
    grid: FrequencyGrid,
    demean: bool = True,
    chunk: int = 8192,
) -> Spectrum:
    """Direct nonuniform discrete Fourier transform onto the grid.

    Mean subtraction is on by default: the records have a nonzero mean that
    would otherwise leak across the whole band through the irregular
    sampling window.  Cost is O(samples x grid points), evaluated in time
    chunks to bound memory.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != y.shape:
        raise ConfigError("times and values must be 1-d arrays of equal length")
    if t.shape[0] < 2:
        raise ConfigError("need at least 2 samples")
    if np.unique(t).shape[0] != t.shape[0]:
        raise ConfigError("duplicate timestamps in sample set")
    if demean:
        y = y - y.mean()
    freqs = grid.frequencies()
    acc = np.zeros(freqs.shape, dtype=complex)
    for i in range(0, t.shape[0], chunk):
        tc = t[i : i + chunk]
        yc = y[i : i + chunk]
        acc += np.exp(-2j * np.pi * freqs[:, None] * tc[None, :]) @ yc
    return Spectrum(freqs=freqs, amps=acc / t.shape[0])


def detect_peaks(
    spectrum: Spectrum,
    rel_threshold: float = 5.0,
    min_separation: float = 1.0,
) -> List[Peak]:
    """Local maxima above rel_threshold x median magnitude, min_separation apart.

    Candidates are taken in descending magnitude; each is kept only if it
    clears every already-kept peak by min_separation.  The returned list is
    frequency-ordered.
    """
    if spectrum.freqs.shape[0] == 0:
        raise ConfigError("spectrum is empty")
    if rel_threshold <= 1:
        raise ConfigError(f"rel_threshold must be > 1, got {rel_threshold}")
    mags = spectrum.mags
    floor = rel_threshold * float(np.median(mags))
    interior = np.arange(1, mags.shape[0] - 1)
    is_max = (mags[interior] > mags[interior - 1]) & (mags[interior] > mags[interior + 1])
    candidates = interior[is_max & (mags[interior] >= floor)]
    candidates = candidates[np.argsort(-mags[candidates], kind="stable")]
    kept: List[int] = []
    for i in candidates:
        if all(abs(spectrum.freqs[i] - spectrum.freqs[j]) >= min_separation for j in kept):
            kept.append(int(i))
    kept.sort()
    return [Peak(freq_hz=float(spectrum.freqs[i]), magnitude=float(mags[i])) for i in kept]


def _combo_table(bank: MirrorBank, max_coeff: int = 2, max_order: int = 3):
    """All integer coefficient vectors with |n_i| <= 2 and 1 <= sum|n_i| <= 3."""
    freqs = bank.frequencies()
    combos = []
    for coeffs in itertools.product(range(-max_coeff, max_coeff + 1), repeat=5):
        order = sum(abs(n) for n in coeffs)
        if 1 <= order <= max_order:
            combos.append((coeffs, float(np.dot(coeffs, freqs)), order))
    return combos


def label_peaks(
    peaks: Sequence[Peak],
    bank: MirrorBank,
    grid_step: float,
) -> List[Peak]:
    """Attach the lowest-order combination matching each peak within grid_step.

    Ties on order break toward the lexicographically smallest coefficient
    vector; peaks with no match within tolerance stay unlabeled.
    """
    table = _combo_table(bank)
    labeled = []
    for pk in peaks:
        best = None
        for coeffs, freq, order in table:
            if abs(freq - pk.freq_hz) <= grid_step:
                key = (order, coeffs)
                if best is None or key < best[0]:
                    best = (key, ComboLabel(coefficients=coeffs, matched_freq=freq, order=order))
        labeled.append(
            Peak(freq_hz=pk.freq_hz, magnitude=pk.magnitude, label=None if best is None else best[1])
        )
    return labeled


def model_spectrum(
    bank: MirrorBank,
    model: CentroidModel,
    grid: FrequencyGrid,
    duration: float = 60.0,
    rate: float = 5000.0,
) -> Spectrum:
    """Spectrum of the closed-form centroid, densely and uniformly sampled.

    This is the continuous-signal reference: its peaks mark every frequency
    the centroid model can place in the band, independent of the irregular
    sampling clock.
    """
    if rate <= 2.0 * grid.f_max:
        raise AliasingError(
            f"rate {rate} Hz too low for band up to {grid.f_max} Hz (need > {2 * grid.f_max})"
        )
    if duration <= 0:
        raise ConfigError(f"duration must be positive, got {duration}")
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    y = model_centroid(displacements(bank, t), model)
    return nudft(t, y, grid, demean=True)


def write_spectrum_csv(spectrum: Spectrum, path) -> None:
    lines = ["freq_hz,magnitude,real,imag"]
    for f, a, m in zip(spectrum.freqs, spectrum.amps, spectrum.mags):
        lines.append(f"{f:.17g},{m:.17g},{a.real:.17g},{a.imag:.17g}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_peaks_csv(peaks: Sequence[Peak], path) -> None:
    lines = ["freq_hz,magnitude,label,order"]
    for pk in peaks:
        label = pk.label.text() if pk.label is not None else ""
        order = str(pk.label.order) if pk.label is not None else ""
        lines.append(f"{pk.freq_hz:.17g},{pk.magnitude:.17g},{label},{order}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_spectrum_csv(path) -> Spectrum:
    freqs = []
    amps = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "freq_hz,magnitude,real,imag":
            raise ConfigError(f"{path} is not a spectrum CSV (header {header!r})")
        for line in fh:
            f, _, re_part, im_part = line.strip().split(",")
            freqs.append(float(f))
            amps.append(complex(float(re_part), float(im_part)))
    return Spectrum(freqs=np.array(freqs), amps=np.array(amps))


_LABEL_TOKEN = re.compile(r"([+-])(\d?)([ABCEF])")


def parse_label_text(text: str) -> Tuple[int, int, int, int, int]:
    """Coefficients from the compact label form, e.g. '+A+C-E' or '+2B-E'."""
    coeffs = dict.fromkeys(MIRRORS, 0)
    consumed = 0
    for sign, mult, mirror_name in _LABEL_TOKEN.findall(text):
        n = int(mult) if mult else 1
        coeffs[Mirror(mirror_name)] += n if sign == "+" else -n
        consumed += len(sign) + len(mult) + len(mirror_name)
    if consumed != len(text):
        raise ConfigError(f"malformed combination label {text!r}")
    return tuple(coeffs[m] for m in MIRRORS)


def read_peaks_csv(path) -> List[Peak]:
    """Peak table reader; labels are reconstructed from their text form.

    The exact combination value is not stored in the CSV, so matched_freq
    is restored as the peak frequency itself (they agree to the grid step).
    """
    peaks = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "freq_hz,magnitude,label,order":
            raise ConfigError(f"{path} is not a peaks CSV (header {header!r})")
        for line in fh:
            f, mag, label, order = line.strip().split(",")
            parsed = None
            if label:
                coeffs = parse_label_text(label)
                parsed = ComboLabel(
                    coefficients=coeffs, matched_freq=float(f), order=int(order)
                )
            peaks.append(Peak(freq_hz=float(f), magnitude=float(mag), label=parsed))
    return peaks
