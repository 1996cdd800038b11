import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError

from lg_superpositions.decompose import label_mode, overlap_coefficient
from lg_superpositions.hologram import apply_hologram
from lg_superpositions.lg_field import power, sample_mode
from lg_superpositions.models import (
    ArmSpec,
    GridSpec,
    HologramSpec,
    LGModeSpec,
    SuperpositionSpec,
)
from lg_superpositions.superpose import (
    compare_with_prediction,
    find_singularities,
    has_singularity,
    mach_zehnder,
    make_superposition,
    mixture_intensity,
    singularity_prediction,
    singularity_sweep,
    superposition_amplitude,
)

GAMMAS = (0.5, 1.0, 2.0)
PHASES = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
RADIAL_TOL = 1.0 / 200.0
ANGULAR_TOL = math.radians(2.0)


def angle_between(a: float, b: float) -> float:
    return abs(math.remainder(a - b, 2.0 * math.pi))


@pytest.fixture
def grid() -> GridSpec:
    return GridSpec(n=512, extent=4.0)


@pytest.fixture
def u00() -> LGModeSpec:
    return LGModeSpec(p=0, l=0)


@pytest.fixture
def u01() -> LGModeSpec:
    return LGModeSpec(p=0, l=1)


class TestSuperpositionSpec:
    """Normalized amplitude pairs."""

    def test_from_ratio(self):
        spec = SuperpositionSpec.from_ratio(2.0, math.pi / 3)
        assert spec.gamma == pytest.approx(2.0)
        assert spec.phase == pytest.approx(math.pi / 3)
        assert abs(spec.alpha) ** 2 + abs(spec.beta) ** 2 == pytest.approx(1.0)

    def test_pure_doughnut_is_representable(self):
        spec = SuperpositionSpec(alpha=0, beta=1j)
        assert spec.gamma == math.inf

    def test_from_coefficients_normalizes(self):
        spec = SuperpositionSpec.from_coefficients(3.0, 4.0j)
        assert spec.alpha == pytest.approx(0.6)
        assert spec.beta == pytest.approx(0.8j)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            SuperpositionSpec(alpha=1.0, beta=0.1)

    def test_rejects_vanishing_pair(self):
        with pytest.raises(ValueError):
            SuperpositionSpec.from_coefficients(0, 0)


class TestMakeSuperposition:
    """Direct construction α·u00 + β·u01."""

    def test_pure_gaussian(self, grid, u00, u01):
        field = make_superposition(SuperpositionSpec(alpha=1, beta=0), u00, u01, grid)
        np.testing.assert_allclose(
            field.values, sample_mode(u00, grid).values, rtol=0, atol=1e-15
        )

    def test_pure_doughnut(self, grid, u00, u01):
        field = make_superposition(SuperpositionSpec(alpha=0, beta=1), u00, u01, grid)
        np.testing.assert_allclose(
            field.values, sample_mode(u01, grid).values, rtol=0, atol=1e-15
        )

    def test_unit_power(self, u00, u01):
        spec = SuperpositionSpec.from_ratio(1.0, 0.7)
        field = make_superposition(spec, u00, u01, GridSpec(n=256, extent=8.0))
        assert power(field) == pytest.approx(1.0, abs=1e-4)

    def test_zero_sits_on_prediction(self, grid, u00, u01):
        spec = SuperpositionSpec.from_ratio(1.0, 0.0)
        r, theta = singularity_prediction(1.0, 0.0, 1.0)
        assert r == pytest.approx(1.0 / math.sqrt(2.0))
        field = make_superposition(spec, u00, u01, grid)
        value = superposition_amplitude(
            spec, u00, u01, r * math.cos(theta), r * math.sin(theta)
        )
        assert abs(value) ** 2 < 1e-20 * field.intensity.max()

    def test_rejects_mismatched_beams(self, grid, u00):
        with pytest.raises(ValueError):
            make_superposition(
                SuperpositionSpec.from_ratio(1.0, 0.0), u00, LGModeSpec(l=1, w0=2.0), grid
            )

    def test_rejects_wrong_indices(self, grid, u00, u01):
        spec = SuperpositionSpec.from_ratio(1.0, 0.0)
        with pytest.raises(ValueError):
            make_superposition(spec, u01, u01, grid)
        with pytest.raises(ValueError):
            make_superposition(spec, u00, LGModeSpec(l=2), grid)


class TestSingularityPrediction:
    """Radius and azimuth of the single zero."""

    def test_unit_ratio(self):
        r, theta = singularity_prediction(1.0, 0.0, 1.0)
        assert r == pytest.approx(1.0 / math.sqrt(2.0))
        assert angle_between(theta, math.pi) < 1e-12

    def test_ratio_two_half_turn(self):
        r, theta = singularity_prediction(2.0, math.pi, 1.0)
        assert r == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)))
        assert angle_between(theta, 0.0) < 1e-12

    def test_dominant_vortex_limit(self):
        r, _ = singularity_prediction(100.0, 0.3, 1.0)
        assert r == pytest.approx(1.0 / (100.0 * math.sqrt(2.0)))

    def test_opposite_handedness(self):
        _, theta_plus = singularity_prediction(1.0, 0.4, 1.0, l=1)
        _, theta_minus = singularity_prediction(1.0, 0.4, 1.0, l=-1)
        assert angle_between(theta_plus, math.pi + 0.4) < 1e-12
        assert angle_between(theta_minus, math.pi - 0.4) < 1e-12

    @pytest.mark.parametrize("gamma", [0.0, -1.0])
    def test_rejects_non_positive_gamma(self, gamma):
        with pytest.raises(ValueError):
            singularity_prediction(gamma, 0.0, 1.0)


class TestFindSingularities:
    """Winding-cell search with sub-pixel refinement."""

    def test_pure_doughnut(self, grid, u01):
        report = find_singularities(sample_mode(u01, grid))
        assert len(report.found) == 1
        vortex = report.found[0]
        assert math.hypot(vortex.x, vortex.y) < grid.spacing
        # e^{-iθ} circulates clockwise.
        assert vortex.winding == -1

    def test_reported_label_winds_positive(self, grid):
        report = find_singularities(sample_mode(label_mode(0, 1), grid))
        assert [s.winding for s in report.found] == [1]

    @pytest.mark.parametrize("n", [255, 257])
    def test_vortex_on_a_sample(self, u01, n):
        # Odd grids put the zero exactly on the central sample.
        report = find_singularities(sample_mode(u01, GridSpec(n=n, extent=4.0)))
        assert len(report.found) == 1
        assert report.total_winding == -1
        vortex = report.found[0]
        assert math.hypot(vortex.x, vortex.y) < 1e-9

    @pytest.mark.parametrize("n", [255, 257])
    def test_odd_grid_superposition(self, u00, u01, n):
        spec = SuperpositionSpec.from_ratio(1.0, 0.4)
        field = make_superposition(spec, u00, u01, GridSpec(n=n, extent=4.0))
        report = find_singularities(field)
        assert len(report.found) == 1
        assert report.total_winding == -1

    def test_pure_gaussian(self, grid, u00):
        report = find_singularities(sample_mode(u00, grid))
        assert report.found == []
        assert not has_singularity(sample_mode(u00, grid))

    def test_quarter_phase(self, grid, u00, u01):
        spec = SuperpositionSpec.from_ratio(1.0, math.pi / 2)
        report = find_singularities(make_superposition(spec, u00, u01, grid))
        r, theta = singularity_prediction(1.0, math.pi / 2, 1.0)
        vortex = report.nearest(r * math.cos(theta), r * math.sin(theta))
        assert vortex is not None
        assert abs(vortex.r - r) < RADIAL_TOL
        assert angle_between(vortex.theta, theta) < ANGULAR_TOL

    @pytest.mark.parametrize("gamma", [0.5, 2.0])
    def test_winding_conservation(self, grid, u00, u01, gamma):
        spec = SuperpositionSpec.from_ratio(gamma, 0.3)
        report = find_singularities(make_superposition(spec, u00, u01, grid))
        assert report.total_winding == -1

    def test_phase_rotates_azimuth(self, grid, u00, u01):
        def azimuth(phase: float) -> float:
            spec = SuperpositionSpec.from_ratio(1.0, phase)
            found = find_singularities(make_superposition(spec, u00, u01, grid)).found
            assert len(found) == 1
            return found[0].theta

        base = azimuth(0.2)
        for delta in (0.5, 1.7, 3.0):
            assert angle_between(azimuth(0.2 + delta) - base, delta) < ANGULAR_TOL

    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_coherence_discriminator(self, grid, u00, u01, gamma):
        spec = SuperpositionSpec.from_ratio(gamma, 1.1)
        mixture = mixture_intensity(spec, u00, u01, grid)
        assert mixture.min() > 0.0
        coherent = make_superposition(spec, u00, u01, grid)
        found = find_singularities(coherent).found
        assert len(found) == 1
        at_zero = superposition_amplitude(spec, u00, u01, found[0].x, found[0].y)
        assert abs(at_zero) ** 2 < 1e-6 * coherent.intensity.max()
        # The incoherent sum stays bright where the coherent field vanishes.
        axis = grid.axis()
        i = int(np.argmin(np.abs(axis - found[0].y)))
        j = int(np.argmin(np.abs(axis - found[0].x)))
        assert mixture[i, j] > 1e-2 * mixture.max()

    @pytest.mark.asyncio
    @pytest.mark.parametrize("n", [512, 1024])
    async def test_sweep_matches_prediction(self, u00, u01, n):
        grid = GridSpec(n=n, extent=4.0)
        rows = await singularity_sweep(GAMMAS, PHASES, u00, u01, grid)
        assert len(rows) == 12
        assert [(row.gamma, row.phase_rad) for row in rows] == sorted(
            (g, p) for g in GAMMAS for p in PHASES
        )
        for row in rows:
            assert row.r_found is not None and row.theta_found is not None
            assert abs(row.r_found - row.r_pred) < RADIAL_TOL
            assert angle_between(row.theta_found, row.theta_pred) < ANGULAR_TOL
            assert row.winding == -1

    def test_prediction_outside_window(self, u00, u01):
        small = GridSpec(n=64, extent=4.0)
        row = compare_with_prediction(0.1, 0.0, u00, u01, small)
        assert row.r_pred == pytest.approx(1.0 / (0.1 * math.sqrt(2.0)))
        assert row.r_found is None
        assert row.theta_found is None
        assert row.winding == 0


class TestMachZehnder:
    """Ideal 50:50 interferometer, one output port."""

    @pytest.fixture
    def incoming(self, u00):
        return sample_mode(u00, GridSpec(n=256, extent=8.0))

    def test_balanced_empty_arms(self, incoming):
        out = mach_zehnder(incoming, ArmSpec(), ArmSpec())
        np.testing.assert_allclose(out.values, incoming.values, rtol=0, atol=1e-15)

    def test_destructive_port(self, incoming):
        out = mach_zehnder(incoming, ArmSpec(), ArmSpec(phase=math.pi))
        assert np.max(np.abs(out.values)) < 1e-12

    def test_rejects_invalid_attenuation(self):
        with pytest.raises(ValidationError):
            ArmSpec(attenuation=1.5)
        with pytest.raises(ValidationError):
            ArmSpec(attenuation=-0.1)

    @pytest.mark.parametrize(
        "t_a,t_b,phase", [(1.0, 1.0, 0.0), (0.5, 1.0, math.pi / 2), (1.0, 0.3, math.pi)]
    )
    def test_matches_direct_superposition(self, incoming, u00, t_a, t_b, phase):
        arm_a = ArmSpec(attenuation=t_a, phase=0.2)
        arm_b = ArmSpec(
            attenuation=t_b, phase=0.2 + phase, hologram=HologramSpec(dm=1), order=1
        )
        out = mach_zehnder(incoming, arm_a, arm_b)
        doughnut = label_mode(0, 1)
        a0 = overlap_coefficient(out, u00)
        a1 = overlap_coefficient(out, doughnut)

        # Analytic arm amplitudes: the converted arm couples √π/2 into the doughnut.
        assert a0 == pytest.approx(0.5 * t_a * cmath.exp(0.2j), abs=1e-6)
        expected_a1 = 0.5 * t_b * cmath.exp(1j * (0.2 + phase)) * math.sqrt(math.pi) / 2
        assert a1 == pytest.approx(expected_a1, abs=1e-3)

        spec = SuperpositionSpec.from_coefficients(a0, a1)
        direct = make_superposition(spec, u00, doughnut, incoming.grid)
        b0 = overlap_coefficient(direct, u00)
        b1 = overlap_coefficient(direct, doughnut)
        assert b0 == pytest.approx(spec.alpha, abs=1e-6)
        assert b1 == pytest.approx(spec.beta, abs=1e-6)

    @pytest.mark.parametrize("d", [0.3, 0.5, 1.0])
    def test_displaced_hologram_route_agrees(self, incoming, u00, d):
        doughnut = label_mode(0, 1)
        shifted = apply_hologram(incoming, HologramSpec(dm=1).displaced(d, 0.0), 1)
        a0 = overlap_coefficient(shifted, u00)
        a1 = overlap_coefficient(shifted, doughnut)
        gamma = abs(a1 / a0)

        # Same ratio from the interferometer: the converted arm couples √π/2.
        coupling = math.sqrt(math.pi) / 2
        if gamma < coupling:
            t_a, t_b = 1.0, gamma / coupling
        else:
            t_a, t_b = coupling / gamma, 1.0
        arm_a = ArmSpec(attenuation=t_a, phase=cmath.phase(a0))
        arm_b = ArmSpec(
            attenuation=t_b, phase=cmath.phase(a1), hologram=HologramSpec(dm=1), order=1
        )
        out = mach_zehnder(incoming, arm_a, arm_b)
        b0 = overlap_coefficient(out, u00)
        b1 = overlap_coefficient(out, doughnut)
        assert abs(b1 / b0) == pytest.approx(gamma, rel=2e-3)

        prepared = SuperpositionSpec.from_coefficients(a0, a1)
        interfered = SuperpositionSpec.from_coefficients(b0, b1)
        assert interfered.alpha == pytest.approx(prepared.alpha, abs=1e-3)
        assert interfered.beta == pytest.approx(prepared.beta, abs=1e-3)
