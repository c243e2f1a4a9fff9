"""Output-beam optics: three-path Gaussian superposition and its readouts.

The interferometer output is modelled as three copies of a Gaussian beam
amplitude, one per optical path, each shifted vertically by the mirror
displacements accumulated along that path and weighted so the two inner
paths are destructively aligned:

    E(y) = c_a*psi(y - s_a) + c_b*psi(y - s_b) + c_c*psi(y - s_c)
    psi(y) = exp(-y^2 / (4 w^2)),   I(y) = E(y)^2

With (c_a, c_b, c_c) = (1/3, -1/3, 1/3) the intensity envelope has standard
deviation w and the profile centroid is s_a - s_b + s_c to first order in
the shifts.  The third-order correction carries a triple product of the
three symmetry-condition values; its constant is fitted numerically rather
than hard-coded (the analytic small-shift expansion gives 3/(8 w^2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ConfigError, DegenerateProfileError, FitDegenerateError
from .mirrors import MirrorBank, displacements


@dataclass(frozen=True)
class OpticsConfig:
    """Spatial grid and path weights for the output-beam model.

    waist            Gaussian intensity standard deviation (spatial unit).
    grid_halfwidth   half extent of the sampling grid, in waist units.
    grid_points      even number of grid samples.
    path_amplitudes  field weights (c_a, c_b, c_c) of the three paths.
    """

    waist: float = 1.0
    grid_halfwidth: float = 6.0
    grid_points: int = 1024
    path_amplitudes: Tuple[float, float, float] = (1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0)

    def __post_init__(self):
        if not (math.isfinite(self.waist) and self.waist > 0):
            raise ConfigError(f"waist must be positive, got {self.waist}")
        if self.grid_points < 256 or self.grid_points % 2 != 0:
            raise ConfigError(
                f"grid_points must be an even integer >= 256, got {self.grid_points}"
            )
        if self.grid_halfwidth < 4.0 * self.waist:
            raise ConfigError(
                f"grid_halfwidth must be >= 4*waist, got {self.grid_halfwidth}"
            )
        if sum(abs(c) for c in self.path_amplitudes) == 0:
            raise ConfigError("path_amplitudes must not all be zero")

    def grid(self) -> np.ndarray:
        """Uniform transverse positions, symmetric about 0."""
        return np.linspace(-self.grid_halfwidth, self.grid_halfwidth, self.grid_points)


@dataclass(frozen=True)
class PathDisplacements:
    """Net vertical shift of the beam along each of the three paths."""

    s_a: float
    s_b: float
    s_c: float

    def __post_init__(self):
        for name in ("s_a", "s_b", "s_c"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")


@dataclass
class BeamProfile:
    """Sampled transverse intensity of the output beam on a uniform grid."""

    positions: np.ndarray
    intensity: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.positions.shape != self.intensity.shape or self.positions.ndim != 1:
            raise ConfigError("positions and intensity must be 1-d arrays of equal length")
        if np.any(self.intensity < 0):
            raise ConfigError("intensity must be non-negative")
        steps = np.diff(self.positions)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ConfigError("positions must be strictly increasing and uniform")

    def total_power(self) -> float:
        return float(np.trapezoid(self.intensity, self.positions))


@dataclass(frozen=True)
class CentroidModel:
    """The fitted constant multiplying the third-order centroid correction."""

    p: float

    def __post_init__(self):
        if not math.isfinite(self.p):
            raise ConfigError(f"p must be finite, got {self.p}")


def path_displacements(deltas: np.ndarray) -> PathDisplacements:
    """Compose mirror displacements (A, B, C, E, F) into per-path shifts.

    E and F bracket the inner loop, so they shift both inner paths; C alone
    shifts the outer path.
    """
    d_a, d_b, d_c, d_e, d_f = (float(x) for x in deltas)
    return PathDisplacements(s_a=d_e + d_a + d_f, s_b=d_e + d_b + d_f, s_c=d_c)


def _intensity_rows(cfg: OpticsConfig, s_a, s_b, s_c, positions=None) -> np.ndarray:
    """Intensity sampled on the grid; shifts may be scalars or 1-d arrays.

    Returns shape (grid,) for scalars, (n, grid) for length-n shift arrays.
    """
    y = cfg.grid() if positions is None else positions
    s_a = np.asarray(s_a, dtype=float)
    scalar = s_a.ndim == 0
    s = [np.atleast_1d(np.asarray(v, dtype=float))[:, None] for v in (s_a, s_b, s_c)]
    c = cfg.path_amplitudes
    four_w2 = 4.0 * cfg.waist * cfg.waist
    field = (
        c[0] * np.exp(-((y - s[0]) ** 2) / four_w2)
        + c[1] * np.exp(-((y - s[1]) ** 2) / four_w2)
        + c[2] * np.exp(-((y - s[2]) ** 2) / four_w2)
    )
    rows = field * field
    return rows[0] if scalar else rows


def intensity_profile(cfg: OpticsConfig, s: PathDisplacements) -> BeamProfile:
    """Output-beam intensity for one set of path shifts."""
    y = cfg.grid()
    return BeamProfile(y, _intensity_rows(cfg, s.s_a, s.s_b, s.s_c, positions=y))


def _centroid_rows(positions: np.ndarray, rows: np.ndarray) -> np.ndarray:
    num = np.trapezoid(positions * rows, positions, axis=-1)
    den = np.trapezoid(rows, positions, axis=-1)
    if np.any(den <= 0):
        raise DegenerateProfileError("profile has zero total power")
    return num / den


def centroid(profile: BeamProfile) -> float:
    """Intensity-weighted mean position, by trapezoid quadrature."""
    return float(_centroid_rows(profile.positions, profile.intensity))


def _quad_cell_rows(positions: np.ndarray, rows: np.ndarray) -> np.ndarray:
    n = positions.shape[0]
    mid = n // 2  # grid is symmetric about 0; the cell [mid-1, mid] straddles it
    total = np.trapezoid(rows, positions, axis=-1)
    if np.any(total <= 0):
        raise DegenerateProfileError("profile has zero total power")
    # the straddling cell is split evenly between the halves, so its two
    # contributions cancel in the upper-minus-lower difference
    upper = np.trapezoid(rows[..., mid:], positions[mid:], axis=-1)
    lower = np.trapezoid(rows[..., :mid], positions[:mid], axis=-1)
    return (upper - lower) / total


def quad_cell(profile: BeamProfile) -> float:
    """Normalized upper-minus-lower half power: the split-detector signal."""
    return float(_quad_cell_rows(profile.positions, profile.intensity))


def _golden_min(f, lo: float, hi: float, tol: float):
    """Golden-section minimizer of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def symmetry_residual(profile: BeamProfile) -> Tuple[float, float]:
    """Mirror-asymmetry score of the profile and its best symmetry center.

    For a candidate center c the score is the L1 difference between the
    profile and its reflection about c, normalized by total power; the
    center is searched by golden section within one waist of the centroid.
    Returns (residual, center).
    """
    y = profile.positions
    inten = profile.intensity
    total = np.trapezoid(inten, y)
    if total <= 0:
        raise DegenerateProfileError("profile has zero total power")
    mean = float(np.trapezoid(y * inten, y) / total)
    # search within one beam width of the centroid; the width is read off
    # the profile itself (intensity standard deviation = waist for this model)
    var = float(np.trapezoid((y - mean) ** 2 * inten, y) / total)
    w = math.sqrt(var) if var > 0 else float(y[-1] - y[0])

    def score(c):
        mirrored = np.interp(2.0 * c - y, y, inten, left=0.0, right=0.0)
        return float(np.trapezoid(np.abs(inten - mirrored), y) / total)

    center, residual = _golden_min(score, mean - w, mean + w, tol=1e-12 * max(w, 1.0))
    return residual, center


def model_centroid(deltas: np.ndarray, model: CentroidModel):
    """Closed-form beam centroid from mirror displacements.

    Linear part (d_a - d_b + d_c) plus the fitted third-order correction,
    whose three factors are exactly the symmetry-condition values: the
    correction vanishes identically whenever the profile is symmetric.
    """
    d_a, d_b, d_c, d_e, d_f = deltas
    linear = d_a - d_b + d_c
    return linear + model.p * _condition_product(deltas)


def _condition_product(deltas: np.ndarray):
    d_a, d_b, d_c, d_e, d_f = deltas
    return (
        (d_a - d_b)
        * (d_b - d_c + d_e + d_f)
        * (d_a - 2.0 * d_b + d_c - d_e - d_f)
    )


def measured_centroids(
    cfg: OpticsConfig, bank: MirrorBank, times: np.ndarray, chunk: int = 4096
) -> np.ndarray:
    """Profile centroids at many instants, evaluated in grid-row chunks."""
    times = np.asarray(times, dtype=float)
    y = cfg.grid()
    out = np.empty(times.shape)
    for i in range(0, times.shape[0], chunk):
        d = displacements(bank, times[i : i + chunk])
        rows = _intensity_rows(
            cfg, d[3] + d[0] + d[4], d[3] + d[1] + d[4], d[2], positions=y
        )
        out[i : i + chunk] = _centroid_rows(y, rows)
    return out


def quad_cell_series(
    cfg: OpticsConfig, bank: MirrorBank, times: np.ndarray, chunk: int = 4096
) -> np.ndarray:
    """Split-detector signal at many instants, evaluated in grid-row chunks."""
    times = np.asarray(times, dtype=float)
    y = cfg.grid()
    out = np.empty(times.shape)
    for i in range(0, times.shape[0], chunk):
        d = displacements(bank, times[i : i + chunk])
        rows = _intensity_rows(
            cfg, d[3] + d[0] + d[4], d[3] + d[1] + d[4], d[2], positions=y
        )
        out[i : i + chunk] = _quad_cell_rows(y, rows)
    return out


@dataclass(frozen=True)
class FitResult:
    """Outcome of the one-parameter centroid-model fit."""

    model: CentroidModel
    residual_rms: float
    n_samples: int


def fit_p(
    cfg: OpticsConfig,
    bank: MirrorBank,
    n_samples: int = 4000,
    duration: float = 1.0,
) -> FitResult:
    """Least-squares fit of the third-order centroid constant.

    Samples the measured centroid uniformly over [0, duration], subtracts
    the linear term, and solves the closed-form one-parameter least-squares
    problem against the triple-product regressor.
    """
    if n_samples < 100:
        raise ConfigError(f"n_samples must be >= 100, got {n_samples}")
    if duration <= 0:
        raise ConfigError(f"duration must be positive, got {duration}")
    t = np.arange(n_samples) * (duration / n_samples)
    d = displacements(bank, t)
    measured = measured_centroids(cfg, bank, t)
    linear = d[0] - d[1] + d[2]
    regressor = _condition_product(d)
    denom = float(np.dot(regressor, regressor))
    if denom <= 0 or not math.isfinite(denom):
        raise FitDegenerateError("product-term regressor is numerically zero")
    p = float(np.dot(regressor, measured - linear) / denom)
    resid = measured - linear - p * regressor
    rms = float(np.sqrt(np.mean(resid * resid)))
    return FitResult(model=CentroidModel(p=p), residual_rms=rms, n_samples=n_samples)


def write_profile_csv(profile: BeamProfile, path) -> None:
    """Debug export: position, intensity columns (not a stable format)."""
    lines = ["position,intensity"]
    for y, v in zip(profile.positions, profile.intensity):
        lines.append(f"{y:.17g},{v:.17g}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
