"""Sinusoidal tilt-displacement model for the five vibrating mirrors.

Mirrors A and B sit inside the inner interferometer, C in the outer arm,
E and F at the entrance and exit of the inner loop.  Each mirror vibrates
as a pure sinusoid; displacements are expressed in beam-waist units so the
optics stays scale-free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

import numpy as np

from .errors import ConfigError


class Mirror(str, Enum):
    """The five mirror labels, ordered A < B < C < E < F."""

    A = "A"
    B = "B"
    C = "C"
    E = "E"
    F = "F"

    def __str__(self):
        return self.value


MIRRORS = tuple(Mirror)

# Default drive frequencies in Hz.  They satisfy three exact integer
# identities that shape the recovered spectrum:
#   f_A + f_C - f_E = 271,  f_B - f_E + f_F = 310,  f_B + f_E - f_A = f_F.
DEFAULT_FREQS_HZ = {
    Mirror.A: 282.0,
    Mirror.B: 296.0,
    Mirror.C: 307.0,
    Mirror.E: 318.0,
    Mirror.F: 332.0,
}

MODIFIED_FREQ_A_HZ = 278.0

DEFAULT_AMPLITUDE = 0.01  # beam-waist units


@dataclass(frozen=True)
class VibrationSpec:
    """One mirror's drive: frequency (Hz), amplitude (waist units), phase (rad)."""

    freq_hz: float
    amplitude: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.freq_hz) and self.freq_hz > 0):
            raise ConfigError(f"freq_hz must be finite and positive, got {self.freq_hz}")
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ConfigError(f"amplitude must be finite and >= 0, got {self.amplitude}")
        if not math.isfinite(self.phase_rad):
            raise ConfigError(f"phase_rad must be finite, got {self.phase_rad}")


@dataclass(frozen=True)
class MirrorBank:
    """Immutable map of all five mirrors to their vibration specs."""

    specs: Mapping[Mirror, VibrationSpec]

    def __post_init__(self):
        missing = [m for m in MIRRORS if m not in self.specs]
        if missing:
            raise ConfigError(f"bank is missing mirrors {missing}")
        object.__setattr__(self, "specs", dict(self.specs))

    def __getitem__(self, mirror: Mirror) -> VibrationSpec:
        return self.specs[Mirror(mirror)]

    def replace(self, mirror: Mirror, **changes) -> "MirrorBank":
        """New bank with one mirror's spec fields replaced."""
        mirror = Mirror(mirror)
        old = self.specs[mirror]
        new = VibrationSpec(
            freq_hz=changes.get("freq_hz", old.freq_hz),
            amplitude=changes.get("amplitude", old.amplitude),
            phase_rad=changes.get("phase_rad", old.phase_rad),
        )
        specs = dict(self.specs)
        specs[mirror] = new
        return MirrorBank(specs)

    def frequencies(self) -> np.ndarray:
        """Drive frequencies in canonical mirror order, shape (5,)."""
        return np.array([self.specs[m].freq_hz for m in MIRRORS])

    def max_freq_hz(self) -> float:
        return max(self.specs[m].freq_hz for m in MIRRORS)


def displacement(bank: MirrorBank, mirror: Mirror, t) -> np.ndarray:
    """Mirror displacement a*sin(2*pi*f*t + phi) at time(s) t, waist units."""
    s = bank[mirror]
    t = np.asarray(t, dtype=float)
    return s.amplitude * np.sin(2.0 * np.pi * s.freq_hz * t + s.phase_rad)


def displacements(bank: MirrorBank, t) -> np.ndarray:
    """All five displacements at time(s) t, ordered (A, B, C, E, F).

    Returns shape (5,) for scalar t, or (5,) + t.shape for array t.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((5,) + t.shape)
    for i, m in enumerate(MIRRORS):
        out[i] = displacement(bank, m, t)
    return out


def default_bank(
    amplitude: float = DEFAULT_AMPLITUDE,
    phases: Optional[Mapping[Mirror, float]] = None,
) -> MirrorBank:
    """Bank with the canonical frequencies, one shared amplitude, phases per policy.

    The default policy is all-zero phases; pass a mapping to override
    individual mirrors.
    """
    if amplitude < 0:
        raise ConfigError(f"amplitude must be >= 0, got {amplitude}")
    phases = {Mirror(k): v for k, v in (phases or {}).items()}
    return MirrorBank(
        {
            m: VibrationSpec(DEFAULT_FREQS_HZ[m], amplitude, phases.get(m, 0.0))
            for m in MIRRORS
        }
    )


def modified_bank(base: MirrorBank) -> MirrorBank:
    """The frequency-shifted variant: mirror A retuned from 282 to 278 Hz.

    Shifting A breaks the coincidence f_F = f_B + f_E - f_A, which is what
    un-buries the F peak in the recovered spectrum.  Only accepts a bank
    still at the canonical A frequency, so applying it twice is an error.
    """
    if base[Mirror.A].freq_hz != DEFAULT_FREQS_HZ[Mirror.A]:
        raise ConfigError(
            "modified_bank expects mirror A at "
            f"{DEFAULT_FREQS_HZ[Mirror.A]} Hz, got {base[Mirror.A].freq_hz}"
        )
    return base.replace(Mirror.A, freq_hz=MODIFIED_FREQ_A_HZ)
