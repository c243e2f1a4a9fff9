"""Symmetry-instant detection: roots of the three profile-symmetry conditions.

The output profile is vertically symmetric exactly when one of three
algebraic relations between the mirror displacements holds.  Each relation
is a five-tone sinusoid in time whose sign-change roots are found by a
dense scan plus bisection; the merged, deduplicated root set is the
nonuniform sampling clock for the centroid records.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DegenerateConditionError
from .mirrors import MirrorBank, displacements
from .optics import CentroidModel, OpticsConfig, measured_centroids, model_centroid


class Condition(str, Enum):
    """The three symmetry relations between mirror displacements.

    I   : d_A = d_B                      (inner paths coincide)
    II  : d_C = d_B + d_E + d_F          (outer path meets inner path B)
    III : d_A + d_C = 2 d_B + d_E + d_F  (path B midway between A and C)
    """

    I = "I"
    II = "II"
    III = "III"

    def __str__(self):
        return self.value


CONDITIONS = tuple(Condition)


@dataclass(frozen=True)
class RootFinderConfig:
    """Scan/refine/dedupe controls for the root search.

    scan_step of None resolves to 1/(50 * f_max) at call time: at least 25
    scan samples per half-period of the fastest tone, so a sign change
    between consecutive samples cannot straddle two roots.
    """

    scan_step: Optional[float] = None
    refine_tol: float = 1e-10
    dedupe_window: float = 1e-6

    def __post_init__(self):
        if self.scan_step is not None and self.scan_step <= 0:
            raise ConfigError(f"scan_step must be positive, got {self.scan_step}")
        if self.refine_tol <= 0:
            raise ConfigError(f"refine_tol must be positive, got {self.refine_tol}")
        if self.scan_step is not None and self.refine_tol >= self.scan_step:
            raise ConfigError("refine_tol must be smaller than scan_step")
        if self.dedupe_window < self.refine_tol:
            raise ConfigError("dedupe_window must be >= refine_tol")

    def resolved_step(self, bank: MirrorBank) -> float:
        if self.scan_step is not None:
            return self.scan_step
        return 1.0 / (50.0 * bank.max_freq_hz())


@dataclass(frozen=True)
class SymmetryEvent:
    """One symmetry instant: time, triggering condition(s), centroid value.

    ``condition`` is the tag of the earliest root in the deduplication
    cluster; near-coincident roots of other conditions are kept in ``also``.
    """

    t: float
    condition: Condition
    y_value: float
    also: Tuple[Condition, ...] = field(default=())

    def tags(self) -> Tuple[Condition, ...]:
        return (self.condition,) + self.also


_COND_INDEX = {Condition.I: 0, Condition.II: 1, Condition.III: 2}


def condition_value(bank: MirrorBank, t, condition: Condition):
    """Signed value of one symmetry condition at time(s) t.

    The signs match the three factors of the third-order centroid
    correction, so the correction vanishes exactly at every root.
    """
    d = displacements(bank, t)
    return _condition_rows(d)[_COND_INDEX[Condition(condition)]]


def _condition_rows(d: np.ndarray):
    d_a, d_b, d_c, d_e, d_f = d
    g1 = d_a - d_b
    g2 = d_b - d_c + d_e + d_f
    g3 = d_a - 2.0 * d_b + d_c - d_e - d_f
    return g1, g2, g3


def find_roots(
    bank: MirrorBank,
    condition: Condition,
    interval: Tuple[float, float],
    cfg: Optional[RootFinderConfig] = None,
) -> np.ndarray:
    """All sign-change roots of one condition on [t0, t1], sorted.

    Scans at the configured step, brackets every sign change, then bisects
    each bracket in lockstep down to float time resolution (the bracket is
    guaranteed narrower than refine_tol well before that).  Scan samples
    that are exactly zero are taken as roots directly.
    """
    t0, t1 = interval
    if not (t1 > t0):
        raise ConfigError(f"interval must satisfy t1 > t0, got [{t0}, {t1}]")
    cfg = cfg or RootFinderConfig()
    step = cfg.resolved_step(bank)
    condition = Condition(condition)

    def g(ts):
        return condition_value(bank, ts, condition)

    n = int(math.ceil((t1 - t0) / step)) + 1
    ts = t0 + step * np.arange(n)
    ts[-1] = t1
    vals = g(ts)
    if not np.any(vals):
        raise DegenerateConditionError(condition)

    exact = ts[vals == 0.0]
    signs = np.sign(vals)
    bracket = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    lo = ts[bracket]
    hi = ts[bracket + 1]
    f_lo = vals[bracket]
    # 40 lockstep bisections reach float resolution from any sane scan step;
    # stop early once no midpoint is distinct from its bracket ends
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        alive = (mid > lo) & (mid < hi)
        if not np.any(alive):
            break
        f_mid = g(mid)
        go_left = f_lo * f_mid <= 0
        hi = np.where(alive & go_left, mid, hi)
        new_lo = np.where(alive & ~go_left, mid, lo)
        f_lo = np.where(alive & ~go_left, f_mid, f_lo)
        lo = new_lo
    refined = 0.5 * (lo + hi)

    roots = np.sort(np.concatenate([exact, refined]))
    if roots.size > 1:
        keep = np.concatenate([[True], np.diff(roots) > cfg.refine_tol])
        roots = roots[keep]
    return roots


def collect_events(
    bank: MirrorBank,
    optics: OpticsConfig,
    model: Optional[CentroidModel],
    interval: Tuple[float, float],
    cfg: Optional[RootFinderConfig] = None,
    mode: str = "measured",
) -> List[SymmetryEvent]:
    """Merged, deduplicated symmetry events with centroid values attached.

    mode="measured" reads the centroid off the sampled intensity profile;
    mode="model" evaluates the fitted closed-form centroid instead.  Roots
    of all three conditions closer than the dedupe window collapse into one
    event keeping the earliest time and all condition tags.
    """
    if mode not in ("measured", "model"):
        raise ConfigError(f"mode must be 'measured' or 'model', got {mode!r}")
    if mode == "model" and model is None:
        raise ConfigError("model mode requires a CentroidModel")
    cfg = cfg or RootFinderConfig()

    times_parts = []
    tag_parts = []
    for idx, condition in enumerate(CONDITIONS):
        roots = find_roots(bank, condition, interval, cfg)
        times_parts.append(roots)
        tag_parts.append(np.full(roots.shape, idx, dtype=np.int8))
    times = np.concatenate(times_parts)
    tags = np.concatenate(tag_parts)
    order = np.argsort(times, kind="stable")
    times = times[order]
    tags = tags[order]

    # chain-cluster anything closer than the dedupe window
    new_cluster = np.concatenate([[True], np.diff(times) >= cfg.dedupe_window])
    cluster = np.cumsum(new_cluster) - 1
    n_clusters = int(cluster[-1]) + 1
    first = np.searchsorted(cluster, np.arange(n_clusters))
    kept_times = times[first]

    if mode == "measured":
        y_values = measured_centroids(optics, bank, kept_times)
    else:
        y_values = model_centroid(displacements(bank, kept_times), model)

    events: List[SymmetryEvent] = []
    bounds = np.append(first, times.shape[0])
    for k in range(n_clusters):
        members = tags[bounds[k] : bounds[k + 1]]
        primary = CONDITIONS[members[0]]
        extra = tuple(
            CONDITIONS[i] for i in sorted(set(int(m) for m in members)) if CONDITIONS[i] != primary
        )
        events.append(
            SymmetryEvent(
                t=float(kept_times[k]),
                condition=primary,
                y_value=float(y_values[k]),
                also=extra,
            )
        )
    return events


def subsample(events: Sequence[SymmetryEvent], n: int, seed: int) -> List[SymmetryEvent]:
    """Seeded uniform sample of n events without replacement, time-ordered.

    Uses numpy's PCG64 generator: a full index permutation is drawn and its
    first n entries kept, so the selection is reproducible from the seed
    alone (given the event list).
    """
    if not (0 < n <= len(events)):
        raise ConfigError(f"sample size {n} not in 1..{len(events)}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.permutation(len(events))[:n])
    return [events[i] for i in idx]


def event_arrays(events: Sequence[SymmetryEvent]) -> Tuple[np.ndarray, np.ndarray]:
    """(times, values) arrays from an event list."""
    t = np.array([e.t for e in events])
    y = np.array([e.y_value for e in events])
    return t, y


def write_events_csv(events: Sequence[SymmetryEvent], path) -> None:
    """Event export: t to 17 significant digits, merged tags joined by '+'."""
    lines = ["t_seconds,condition,y_value"]
    for e in events:
        tag = "+".join(str(c) for c in e.tags())
        lines.append(f"{e.t:.17g},{tag},{e.y_value:.17g}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
