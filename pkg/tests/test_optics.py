"""Optics model: profile, centroid, quad-cell, symmetry residual, p fit.

Independent oracles used here: the pairwise-Gaussian closed form for the
centroid (overlap integrals of Gaussian products have exact expressions),
an 8x refined grid, and the Gaussian half-integral for the quad-cell.
"""
import numpy as np
import pytest

from nested_mzi import (
    CentroidModel,
    ConfigError,
    DegenerateProfileError,
    FitDegenerateError,
    OpticsConfig,
    PathDisplacements,
    centroid,
    default_bank,
    displacements,
    fit_p,
    intensity_profile,
    model_centroid,
    path_displacements,
    quad_cell,
    symmetry_residual,
)
from nested_mzi.errors import ConfigError as _CfgErr
from nested_mzi.optics import _condition_product


def exact_centroid(cfg, s_a, s_b, s_c):
    """Closed-form centroid of the three-Gaussian intensity.

    Uses the identity psi(y-a) psi(y-b) = gaussian centered at (a+b)/2
    scaled by exp(-(a-b)^2 / (8 w^2)); the centroid is a weighted mean of
    the pair centers.
    """
    s = np.array([s_a, s_b, s_c])
    c = np.asarray(cfg.path_amplitudes)
    w2 = cfg.waist * cfg.waist
    num = 0.0
    den = 0.0
    for i in range(3):
        for j in range(3):
            overlap = np.exp(-((s[i] - s[j]) ** 2) / (8.0 * w2))
            num += c[i] * c[j] * 0.5 * (s[i] + s[j]) * overlap
            den += c[i] * c[j] * overlap
    return num / den


# ---------------------------------------------------------------------------
# path composition
# ---------------------------------------------------------------------------
class TestPathDisplacements:
    def test_all_zero(self):
        s = path_displacements(np.zeros(5))
        assert (s.s_a, s.s_b, s.s_c) == (0.0, 0.0, 0.0)

    def test_entry_mirror_shifts_both_inner_paths(self):
        s = path_displacements(np.array([0.0, 0.0, 0.0, 0.01, 0.0]))
        assert s.s_a == s.s_b == 0.01
        assert s.s_c == 0.0

    def test_additivity(self):
        s = path_displacements(np.array([0.02, 0.0, 0.0, 0.0, 0.03]))
        assert s.s_a == pytest.approx(0.05)
        assert s.s_b == pytest.approx(0.03)
        assert s.s_c == 0.0


# ---------------------------------------------------------------------------
# intensity profile
# ---------------------------------------------------------------------------
class TestIntensityProfile:
    def test_coincident_paths_give_scaled_gaussian(self, optics):
        prof = intensity_profile(optics, PathDisplacements(0.0, 0.0, 0.0))
        y = prof.positions
        expected = (1.0 / 9.0) * np.exp(-(y**2) / (2.0 * optics.waist**2))
        np.testing.assert_allclose(prof.intensity, expected, rtol=0, atol=1e-15)

    def test_single_path_is_shifted_gaussian(self):
        cfg = OpticsConfig(path_amplitudes=(1.0, 0.0, 0.0))
        prof = intensity_profile(cfg, PathDisplacements(0.5, 0.0, 0.0))
        i_max = int(np.argmax(prof.intensity))
        assert abs(prof.positions[i_max] - 0.5) < 2 * (12.0 / 1023)
        # tail truncation at 6 waists costs ~1e-7 for a half-waist shift
        assert centroid(prof) == pytest.approx(0.5, abs=1e-6)

    def test_first_order_centroid(self, optics):
        """centroid ~ s_a - s_b + s_c with an O(a^2)-small correction."""
        s = PathDisplacements(0.01, -0.01, 0.005)
        prof = intensity_profile(optics, s)
        assert centroid(prof) == pytest.approx(0.025, abs=1e-4)
        # and exactly matches the analytic three-Gaussian value
        assert centroid(prof) == pytest.approx(
            exact_centroid(optics, 0.01, -0.01, 0.005), abs=1e-8
        )

    def test_invalid_config_rejected(self):
        with pytest.raises(ConfigError):
            OpticsConfig(grid_points=100)
        with pytest.raises(ConfigError):
            OpticsConfig(grid_points=1001)
        with pytest.raises(ConfigError):
            OpticsConfig(grid_halfwidth=2.0)
        with pytest.raises(ConfigError):
            OpticsConfig(path_amplitudes=(0.0, 0.0, 0.0))


# ---------------------------------------------------------------------------
# centroid
# ---------------------------------------------------------------------------
class TestCentroid:
    def test_symmetric_profile_centroid_zero(self, optics):
        prof = intensity_profile(optics, PathDisplacements(0.0, 0.0, 0.0))
        assert abs(centroid(prof)) < 1e-12

    def test_translation_covariance(self):
        """Shifting every path by d shifts the centroid by exactly d.

        Uses a wider grid: at the default 6-waist halfwidth the Gaussian
        tail truncation already costs ~1e-8 for quarter-waist shifts.
        """
        cfg = OpticsConfig(grid_halfwidth=8.0)
        rng = np.random.default_rng(3)
        s = rng.uniform(-0.03, 0.03, 3)
        d = 0.25
        c0 = centroid(intensity_profile(cfg, PathDisplacements(*s)))
        c1 = centroid(intensity_profile(cfg, PathDisplacements(*(s + d))))
        assert abs(c1 - c0 - d) < 1e-10

    def test_matches_refined_grid(self, optics):
        """8x finer quadrature as the independent oracle."""
        fine = OpticsConfig(grid_points=8192)
        s = PathDisplacements(0.01, -0.01, 0.005)
        c_coarse = centroid(intensity_profile(optics, s))
        c_fine = centroid(intensity_profile(fine, s))
        assert abs(c_coarse - c_fine) < 1e-8

    def test_matches_analytic_oracle_randomized(self, optics):
        rng = np.random.default_rng(11)
        for _ in range(20):
            s = rng.uniform(-0.05, 0.05, 3)
            prof = intensity_profile(optics, PathDisplacements(*s))
            assert centroid(prof) == pytest.approx(exact_centroid(optics, *s), abs=1e-8)

    def test_zero_power_raises(self):
        cfg = OpticsConfig(path_amplitudes=(0.5, -0.5, 0.0))
        prof = intensity_profile(cfg, PathDisplacements(0.1, 0.1, 0.0))
        with pytest.raises(DegenerateProfileError):
            centroid(prof)

    def test_total_power_captured_by_grid(self, optics):
        """Quadrature power equals the closed-form power to 1e-6 relative.

        The true power does vary with the pairwise path separations (the
        negative-weight path interferes), so the oracle is the analytic
        pairwise-overlap sum, not a constant.
        """
        c = np.asarray(optics.path_amplitudes)
        w = optics.waist
        rng = np.random.default_rng(5)
        for _ in range(10):
            s = rng.uniform(-0.1, 0.1, 3)
            analytic = 0.0
            for i in range(3):
                for j in range(3):
                    analytic += (
                        c[i]
                        * c[j]
                        * np.sqrt(2.0 * np.pi)
                        * w
                        * np.exp(-((s[i] - s[j]) ** 2) / (8.0 * w * w))
                    )
            power = intensity_profile(optics, PathDisplacements(*s)).total_power()
            assert power == pytest.approx(analytic, rel=1e-6)

    def test_inner_path_power_fraction_constant(self, optics):
        c = optics.path_amplitudes
        assert c[0] ** 2 + c[1] ** 2 == pytest.approx(2.0 / 9.0, rel=0, abs=1e-15)


# ---------------------------------------------------------------------------
# quad-cell signal
# ---------------------------------------------------------------------------
class TestQuadCell:
    def test_symmetric_profile_zero(self, optics):
        prof = intensity_profile(optics, PathDisplacements(0.0, 0.0, 0.0))
        assert abs(quad_cell(prof)) < 1e-12

    def test_small_shift_closed_form(self):
        """Single Gaussian shifted by s: signal = erf-like ~ s*sqrt(2/pi)/w."""
        cfg = OpticsConfig(path_amplitudes=(1.0, 0.0, 0.0))
        for s in (0.001, 0.01, 0.05):
            prof = intensity_profile(cfg, PathDisplacements(s, 0.0, 0.0))
            expected = s * np.sqrt(2.0 / np.pi) / cfg.waist
            assert quad_cell(prof) == pytest.approx(expected, rel=2e-3)

    def test_positive_shift_positive_signal(self, optics):
        prof = intensity_profile(optics, PathDisplacements(0.02, 0.02, 0.02))
        assert quad_cell(prof) > 0

    def test_zero_power_raises(self):
        cfg = OpticsConfig(path_amplitudes=(0.5, -0.5, 0.0))
        prof = intensity_profile(cfg, PathDisplacements(0.0, 0.0, 0.0))
        with pytest.raises(DegenerateProfileError):
            quad_cell(prof)


# ---------------------------------------------------------------------------
# symmetry residual
# ---------------------------------------------------------------------------
class TestSymmetryResidual:
    def test_single_gaussian_exact_symmetry(self):
        """Gaussian at the grid's own symmetry point: residual ~ 0."""
        cfg = OpticsConfig(path_amplitudes=(1.0, 0.0, 0.0))
        prof = intensity_profile(cfg, PathDisplacements(0.0, 0.0, 0.0))
        residual, center = symmetry_residual(prof)
        assert residual < 1e-10
        assert abs(center) < 1e-10

    def test_root_below_tolerance_generic_above(self, optics):
        """Profile is symmetric at a condition-I root, asymmetric away from it.

        With zero phases condition I factorizes; its roots sit exactly at
        odd multiples of 1/(2(f_A+f_B)).  The drive amplitude is raised to
        0.15 so that generic instants are visibly asymmetric (the asymmetry
        is third-order in the amplitude).
        """
        bank = default_bank(amplitude=0.15)
        t_root = 1.0 / (2.0 * (282.0 + 296.0))
        prof = intensity_profile(optics, path_displacements(displacements(bank, t_root)))
        residual_root, _ = symmetry_residual(prof)
        assert residual_root < 1e-4

        # pick the scan instant farthest from all three symmetry conditions
        from nested_mzi import condition_value, CONDITIONS

        tt = np.linspace(0.0, 0.02, 2001)
        dist = np.min(
            np.abs([condition_value(bank, tt, c) for c in CONDITIONS]), axis=0
        )
        t_generic = float(tt[int(np.argmax(dist))])
        prof = intensity_profile(optics, path_displacements(displacements(bank, t_generic)))
        residual_generic, _ = symmetry_residual(prof)
        assert residual_generic > 1e-4

    def test_translation_leaves_residual_unchanged(self):
        """Whole-lattice translation: residual invariant to 1e-10."""
        cfg = OpticsConfig(grid_halfwidth=8.0)
        dy = 16.0 / (cfg.grid_points - 1)
        d = 16 * dy
        s = np.array([0.021, -0.013, 0.008])
        r0, _ = symmetry_residual(intensity_profile(cfg, PathDisplacements(*s)))
        r1, _ = symmetry_residual(intensity_profile(cfg, PathDisplacements(*(s + d))))
        assert abs(r1 - r0) < 1e-10


# ---------------------------------------------------------------------------
# closed-form centroid model
# ---------------------------------------------------------------------------
class TestModelCentroid:
    def test_condition_one_kills_product(self):
        deltas = np.array([0.01, 0.01, 0.004, 0.002, -0.003])
        model = CentroidModel(p=0.7)
        assert model_centroid(deltas, model) == deltas[0] - deltas[1] + deltas[2]

    def test_condition_two_kills_product(self):
        d_b, d_e, d_f = 0.003, 0.001, -0.002
        deltas = np.array([0.01, d_b, d_b + d_e + d_f, d_e, d_f])
        model = CentroidModel(p=1.3)
        expected = deltas[0] - deltas[1] + deltas[2]
        assert model_centroid(deltas, model) == pytest.approx(expected, abs=1e-18)

    def test_p_zero_is_linear(self):
        rng = np.random.default_rng(2)
        deltas = rng.uniform(-0.01, 0.01, 5)
        assert model_centroid(deltas, CentroidModel(p=0.0)) == (
            deltas[0] - deltas[1] + deltas[2]
        )

    def test_each_condition_zeroes_its_factor(self, bank):
        """Analytic identity: at a root of condition c the product term is 0."""
        from nested_mzi import Condition, find_roots

        for cond in (Condition.I, Condition.II, Condition.III):
            roots = find_roots(bank, cond, (0.001, 0.02))
            deltas = displacements(bank, roots)
            product = _condition_product(deltas)
            assert np.max(np.abs(product)) < 1e-12


# ---------------------------------------------------------------------------
# p fit
# ---------------------------------------------------------------------------
class TestFitP:
    def test_p_stable_under_amplitude_halving(self, optics):
        fit1 = fit_p(optics, default_bank(amplitude=0.01))
        fit2 = fit_p(optics, default_bank(amplitude=0.005))
        assert fit2.model.p == pytest.approx(fit1.model.p, rel=0.10)

    def test_fit_matches_small_shift_expansion(self, optics, fitted):
        """Third-order expansion of the three-Gaussian centroid: p = 3/(8 w^2)."""
        assert fitted.model.p == pytest.approx(3.0 / 8.0, rel=0.01)

    def test_residual_small_relative_to_signal(self, optics):
        bank = default_bank(amplitude=0.01)
        fit = fit_p(optics, bank)
        t = np.arange(4000) / 4000.0
        d = displacements(bank, t)
        max_centroid = np.max(np.abs(d[0] - d[1] + d[2]))  # leading term scale
        assert fit.residual_rms <= 1e-3 * max_centroid

    def test_forced_zero_p_is_worse(self, optics):
        """Least-squares dominance: the fitted p beats p = 0."""
        bank = default_bank(amplitude=0.01)
        fit = fit_p(optics, bank)
        from nested_mzi.optics import measured_centroids

        t = np.arange(fit.n_samples) * (1.0 / fit.n_samples)
        d = displacements(bank, t)
        measured = measured_centroids(optics, bank, t)
        linear = d[0] - d[1] + d[2]
        rms_zero = float(np.sqrt(np.mean((measured - linear) ** 2)))
        assert fit.residual_rms < rms_zero

    def test_degenerate_regressor_raises(self, optics):
        with pytest.raises(FitDegenerateError):
            fit_p(optics, default_bank(amplitude=0.0))

    def test_sample_count_validated(self, optics, bank):
        with pytest.raises(_CfgErr):
            fit_p(optics, bank, n_samples=10)


# ---------------------------------------------------------------------------
# scaling of the first-order law
# ---------------------------------------------------------------------------
class TestFirstOrderLaw:
    def test_halving_reduces_error_cubically(self, optics):
        """The profile obeys I(-y; -s) = I(y; s), so the centroid is an odd
        function of the shifts and the error after the linear term is
        third-order: halving the drive divides the max error by ~8.
        """
        errors = {}
        for amp in (0.01, 0.005):
            bank = default_bank(amplitude=amp)
            t = np.linspace(0.0, 1.0 / 7.0, 2001)  # one beat of the 7 Hz envelope
            d = displacements(bank, t)
            from nested_mzi.optics import measured_centroids

            cen = measured_centroids(optics, bank, t)
            errors[amp] = np.max(np.abs(cen - (d[0] - d[1] + d[2])))
        ratio = errors[0.01] / errors[0.005]
        assert 7.0 < ratio < 9.0
