"""Exception types shared across the simulation pipeline.

The CLI maps these to exit codes: ConfigError -> 2, the degenerate-model
family -> 3.
"""


class ConfigError(ValueError):
    """A configuration value violates an invariant; message names the field."""


class DegenerateProfileError(ValueError):
    """Beam profile has zero total power; centroid and quad-cell are undefined."""


class DegenerateConditionError(RuntimeError):
    """A symmetry condition is identically zero on the scanned interval."""

    def __init__(self, condition):
        self.condition = condition
        super().__init__(
            f"symmetry condition {condition} is identically zero; "
            "its roots are the whole interval"
        )


class FitDegenerateError(RuntimeError):
    """All product-term regressors are numerically zero; p cannot be fitted."""


class AliasingError(ValueError):
    """Sampling rate too low for the requested frequency band."""
