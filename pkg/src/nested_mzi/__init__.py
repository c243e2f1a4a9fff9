"""Nested Mach-Zehnder interferometer simulation and spectral recovery.

Pipeline: five vibrating mirrors drive a three-path Gaussian output beam;
the beam centroid is recorded at the instants its profile is vertically
symmetric; a nonuniform discrete Fourier transform of those records
recovers all five drive frequencies plus their combination tones.
"""

from .errors import (
    AliasingError,
    ConfigError,
    DegenerateConditionError,
    DegenerateProfileError,
    FitDegenerateError,
)
from .mirrors import (
    DEFAULT_AMPLITUDE,
    DEFAULT_FREQS_HZ,
    MIRRORS,
    Mirror,
    MirrorBank,
    VibrationSpec,
    default_bank,
    displacement,
    displacements,
    modified_bank,
)
from .optics import (
    BeamProfile,
    CentroidModel,
    FitResult,
    OpticsConfig,
    PathDisplacements,
    centroid,
    fit_p,
    intensity_profile,
    model_centroid,
    path_displacements,
    quad_cell,
    symmetry_residual,
)
from .events import (
    CONDITIONS,
    Condition,
    RootFinderConfig,
    SymmetryEvent,
    collect_events,
    condition_value,
    event_arrays,
    find_roots,
    subsample,
)
from .spectral import (
    ComboLabel,
    FrequencyGrid,
    Peak,
    Spectrum,
    detect_peaks,
    label_peaks,
    model_spectrum,
    nudft,
)
from .harness import (
    CPSID_SCENARIOS,
    EF_MULTIPLIERS,
    QUADCELL_SCENARIOS,
    SCENARIOS,
    RunConfig,
    RunManifest,
    emit_plot,
    quadcell_spectrum,
    run,
    run_quadcell_spectrum,
)

__version__ = "0.1.0"
