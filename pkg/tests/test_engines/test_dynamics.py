"""
Tests for DynamicsEngine and the pure map operations.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from purification.engines.base import UnreachableTargetError
from purification.engines.dynamics import (
    FIRST_ORDER_SLOPES,
    BoundVariant,
    DynamicsEngine,
    apply_map,
    best_upper_bound,
    iterate,
    recurrence_gap,
    single_double_gap,
    upper_bound_first_order,
)
from purification.schemas import BellVector, Scheme
from purification.tools.bellalgebra import channel_initial_vector, family_noise, kay_noise, uniform_noise


@pytest.fixture
def engine():
    """Engine with default settings."""
    return DynamicsEngine()


class TestMapOperations:
    """Tests for apply_map and iterate."""

    def test_perfect_state_is_fixed(self, engine):
        """Ideal maps keep (1, 0, 0, 0) with certainty."""
        for scheme in Scheme:
            m = engine.build_map(scheme, uniform_noise(0.0))
            out, p = apply_map(m, BellVector(f=(1.0, 0.0, 0.0, 0.0)))
            assert out.fidelity == pytest.approx(1.0)
            assert p == pytest.approx(1.0)

    def test_mixed_state_is_fixed(self, engine):
        """The completely mixed vector maps to itself."""
        for scheme in Scheme:
            m = engine.build_map(scheme, uniform_noise(0.02, 0.01))
            out, _ = apply_map(m, BellVector(f=(0.25, 0.25, 0.25, 0.25)))
            assert out.f == pytest.approx((0.25,) * 4, abs=1e-12)

    def test_one_round_purifies(self, engine):
        """A channel-shaped input above F_min gains fidelity."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.0))
        out, p = apply_map(m, channel_initial_vector(0.8))
        assert out.fidelity > 0.8
        assert 0.0 < p < 1.0

    def test_iterate_stops_at_fixed_point(self, engine):
        """A converged trajectory stops before max_rounds."""
        m = engine.build_map(Scheme.DOUBLE, uniform_noise(0.0))
        trajectory = iterate(m, BellVector(f=(1.0, 0.0, 0.0, 0.0)), max_rounds=50)
        assert len(trajectory) == 1

    def test_iterate_length(self, engine):
        """Trajectories have at most max_rounds entries."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.02, 0.02))
        trajectory = iterate(m, channel_initial_vector(0.8), max_rounds=3)
        assert len(trajectory) == 3
        assert trajectory[-1][0].fidelity > trajectory[0][0].fidelity

    def test_iterate_rejects_zero_rounds(self, engine):
        """max_rounds must be at least 1."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.0))
        with pytest.raises(ValueError):
            iterate(m, channel_initial_vector(0.8), max_rounds=0)

    def test_iterate_collapses_outside_working_range(self, engine):
        """Far outside the working range the trajectory ends at F_mix."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.1, 0.1))
        trajectory = iterate(m, channel_initial_vector(0.9), max_rounds=5000)
        final = trajectory[-1][0]
        assert final.f == pytest.approx((0.25,) * 4, abs=1e-6)


class TestFixedPoints:
    """Tests for fixed point location."""

    @pytest.mark.parametrize("scheme", [Scheme.SINGLE, Scheme.DOUBLE])
    def test_ideal_fixed_points(self, engine, scheme):
        """Perfect operations give F_max = 1, F_min = 1/2, F_mix = 1/4."""
        report = engine.fixed_points(engine.build_map(scheme, uniform_noise(0.0)))
        assert report.f_max.fidelity == pytest.approx(1.0, abs=1e-6)
        assert report.f_min == pytest.approx(0.5, abs=1e-6)
        assert report.f_mix.fidelity == pytest.approx(0.25)

    def test_double_beats_single(self, engine):
        """At the same noise double selection reaches a higher F_max."""
        noise = uniform_noise(0.02, 0.02)
        single = engine.fixed_points(engine.build_map(Scheme.SINGLE, noise), with_fmin=False)
        double = engine.fixed_points(engine.build_map(Scheme.DOUBLE, noise), with_fmin=False)
        assert double.f_max.fidelity > single.f_max.fidelity

    def test_noise_window(self, engine):
        """With noise, F_mix < F_min < F_max < 1."""
        report = engine.run(engine.build_map(Scheme.SINGLE, uniform_noise(0.02, 0.02)))
        assert 0.25 < report.f_min < report.f_max.fidelity < 1.0

    def test_outside_working_range(self, engine):
        """Heavy noise leaves only the mixed state."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.3, 0.2))
        report = engine.fixed_points(m)
        assert report.f_max is None
        assert report.f_min is None
        assert not engine.has_purified_point(m)

    @pytest.mark.parametrize("scheme", [Scheme.SINGLE, Scheme.DOUBLE])
    def test_f_max_is_fixed(self, engine, scheme):
        """One more application leaves F_max where it is."""
        m = engine.build_map(scheme, uniform_noise(0.02, 0.02))
        report = engine.fixed_points(m, with_fmin=False)
        out, _ = apply_map(m, report.f_max)
        assert out.f == pytest.approx(report.f_max.f, abs=1e-9)

    @pytest.mark.parametrize("scheme", [Scheme.SINGLE, Scheme.DOUBLE])
    def test_ideal_curve_crosses_at_half(self, engine, scheme):
        """Ideal curves lose fidelity below 1/2 and gain above it."""
        m = engine.build_map(scheme, uniform_noise(0.0))
        for f_in in (0.3, 0.35, 0.4, 0.45, 0.48):
            assert engine.curve_gain(m, f_in) < 0.0, f_in
        for f_in in (0.52, 0.6, 0.7, 0.8, 0.9, 0.95):
            assert engine.curve_gain(m, f_in) > 0.0, f_in

    @pytest.mark.parametrize("scheme", [Scheme.SINGLE, Scheme.DOUBLE])
    def test_ideal_channel_inputs_reach_one(self, engine, scheme):
        """Every channel input above 1/2 is driven to the perfect state."""
        m = engine.build_map(scheme, uniform_noise(0.0))
        for f_ch in (0.6, 0.7, 0.8, 0.9):
            trajectory = iterate(m, channel_initial_vector(f_ch), max_rounds=200)
            assert trajectory[-1][0].fidelity == pytest.approx(1.0, abs=1e-6), f_ch

    def test_measurement_noise_alone_can_destroy_fixed_point(self, engine):
        """At p_g = 0 and p_m = 0.45 single selection has no purified fixed point."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.0, 0.45))
        assert not engine.has_purified_point(m)
        assert engine.fixed_points(m).f_max is None

    def test_fidelity_vs_noise(self, engine):
        """Diagonal scan: ideal point, noisy point inside, heavy noise outside."""
        points = engine.fidelity_vs_noise(Scheme.DOUBLE, [0.0, 0.01, 0.2])
        assert [point.p for point in points] == [0.0, 0.01, 0.2]
        assert points[0].f_max == pytest.approx(1.0, abs=1e-6)
        assert points[0].f_min == pytest.approx(0.5, abs=1e-6)
        assert points[1].inside
        assert 0.5 < points[1].f_min < points[1].f_max < 1.0
        assert not points[2].inside
        assert points[2].f_max is None

    def test_fmin_optional(self, engine):
        """with_fmin=False skips the curve crossing."""
        report = engine.fixed_points(engine.build_map(Scheme.DOUBLE, uniform_noise(0.01)), with_fmin=False)
        assert report.f_max is not None
        assert report.f_min is None


class TestYield:
    """Tests for round counts and yields."""

    @pytest.mark.parametrize(
        "p,scheme,rounds",
        [
            (0.02, Scheme.SINGLE, 4),
            (0.02, Scheme.DOUBLE, 2),
            (0.04, Scheme.SINGLE, 16),
            (0.04, Scheme.DOUBLE, 4),
        ],
    )
    def test_round_counts(self, engine, p, scheme, rounds):
        """Rounds to lift F_ch = 0.8 to 0.9 at p_g = p_m = p."""
        m = engine.build_map(scheme, uniform_noise(p, p))
        report = engine.compute_yield(m, target_f=0.9, f_ch=0.8)
        assert report.n_rounds == rounds
        assert report.final.fidelity >= 0.9

    def test_yield_bound(self, engine):
        """yield <= (1/N_A)^n and equals the product of p_A / N_A."""
        m = engine.build_map(Scheme.DOUBLE, uniform_noise(0.02, 0.02))
        report = engine.compute_yield(m, target_f=0.9, f_ch=0.8)
        assert report.yield_ <= (1.0 / 3.0) ** report.n_rounds
        expected = np.prod([p / 3.0 for p in report.per_round_success])
        assert report.yield_ == pytest.approx(expected)

    def test_already_at_target(self, engine):
        """No rounds are needed when F_ch reaches the target."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.0))
        report = engine.compute_yield(m, target_f=0.8, f_ch=0.8)
        assert report.n_rounds == 0
        assert report.yield_ == 1.0

    def test_unreachable_target(self, engine):
        """A target above F_max raises."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.04, 0.04))
        with pytest.raises(UnreachableTargetError):
            engine.compute_yield(m, target_f=0.999, f_ch=0.8)

    def test_yield_curve_skips_unreachable(self, engine):
        """yield_curve keeps only reachable targets."""
        m = engine.build_map(Scheme.SINGLE, uniform_noise(0.04, 0.04))
        reports = engine.yield_curve(m, f_ch=0.8, targets=[0.85, 0.999])
        assert [r.target_f for r in reports] == [0.85]


class TestBounds:
    """Tests for the first-order bounds."""

    def test_uniform_value(self):
        """uniform p_g = 0.03 gives 1 - 2 * 4 * 0.002 = 0.984 for both variants."""
        noise = uniform_noise(0.03)
        assert upper_bound_first_order(noise, BoundVariant.A) == pytest.approx(0.984)
        assert upper_bound_first_order(noise, BoundVariant.B) == pytest.approx(0.984)

    def test_variants_differ(self):
        """The variants pick p_30 or p_10."""
        noise = kay_noise((0.02, 0.0, 0.0))
        a = upper_bound_first_order(noise, BoundVariant.A)
        b = upper_bound_first_order(noise, BoundVariant.B)
        assert a > b
        assert best_upper_bound(noise) == a

    def test_gap(self):
        """The single/double gap is 8/15 p_g."""
        assert single_double_gap(0.03) == pytest.approx(0.016)


class TestSlopes:
    """First-order behaviour of 1 - F_max near p_g = 0."""

    P_GRID = [0.001 * k for k in range(1, 11)]

    def test_double_slope(self, engine):
        """Double selection loses 8/15 p_g."""
        slope = engine.measure_first_order_slope(Scheme.DOUBLE, self.P_GRID)
        assert slope == pytest.approx(8.0 / 15.0, rel=0.1)

    def test_single_slope(self, engine):
        """Single selection loses 20/15 p_g, ancilla Z errors included."""
        slope = engine.measure_first_order_slope(Scheme.SINGLE, self.P_GRID)
        assert slope == pytest.approx(FIRST_ORDER_SLOPES[Scheme.SINGLE], rel=0.1)

    def test_recurrence_gap(self, engine):
        """At p_g = 0.005 double selection leads by about (4/5) p_g."""
        p_g = 0.005
        fidelities = {
            scheme: engine.fixed_points(
                engine.build_map(scheme, uniform_noise(p_g, 0.0)), with_fmin=False
            ).f_max.fidelity
            for scheme in Scheme
        }
        gap = fidelities[Scheme.DOUBLE] - fidelities[Scheme.SINGLE]
        assert gap == pytest.approx(recurrence_gap(p_g), rel=0.15)
        assert gap > single_double_gap(p_g)


class TestWorkingRange:
    """Tests for thresholds and working-range scans."""

    def test_scan_shape(self, engine):
        """One row per grid point with p_m varying fastest."""
        rows = engine.scan_working_range(Scheme.SINGLE, [0.0, 0.3], [0.0, 0.01])
        assert [(r.p_g, r.p_m) for r in rows] == [(0.0, 0.0), (0.0, 0.01), (0.3, 0.0), (0.3, 0.01)]
        assert rows[0].inside
        assert not rows[-1].inside

    def test_threshold_none_when_lower_edge_outside(self, engine):
        """No threshold when even p_g at the lower edge fails."""
        assert engine.threshold_for(Scheme.SINGLE, 0.45, pg_range=(0.0, 0.1)) is None

    def test_measurement_threshold_exists(self, engine):
        """The p_m threshold at p_g = 0 is finite and below 1/2."""
        threshold = engine.measurement_threshold(Scheme.SINGLE)
        assert threshold is not None
        assert 0.15 < threshold < 0.25

    def test_working_range_thresholds(self, engine):
        """Bisection stays inside the p_g span and reports None outside."""
        points = engine.working_range(Scheme.SINGLE, [0.0, 0.05, 0.1], [0.0, 0.45])
        assert [point.p_m for point in points] == [0.0, 0.45]
        assert 0.0 < points[0].p_g_threshold <= 0.1
        assert points[1].p_g_threshold is None

    def test_threshold_curve_double_above_single(self, engine):
        """Double selection tolerates at least as much gate noise as single."""
        pm_grid = [0.0, 0.01]
        single = engine.threshold_curve(Scheme.SINGLE, pm_grid, pg_range=(0.0, 0.1))
        double = engine.threshold_curve(Scheme.DOUBLE, pm_grid, pg_range=(0.0, 0.1))
        for s, d in zip(single, double):
            assert s.p_g_threshold is not None
            assert d.p_g_threshold >= s.p_g_threshold

    @pytest.mark.slow
    def test_kay_thresholds(self, engine):
        """Kay-distributed noise at p_m = 0 brackets both thresholds below 0.053."""
        single = engine.threshold_for(Scheme.SINGLE, 0.0, noise_kind="kay")
        double = engine.threshold_for(Scheme.DOUBLE, 0.0, noise_kind="kay")
        assert 0.03 <= single <= 0.04
        assert 0.04 <= double <= 0.05
        assert double < 0.053

    @pytest.mark.slow
    def test_double_dominates(self, engine):
        """Every grid point inside for single selection is inside for double."""
        pg_grid = list(np.linspace(0.0, 0.1, 50))
        pm_grid = list(np.linspace(0.0, 0.05, 50))
        single = engine.scan_working_range(Scheme.SINGLE, pg_grid, pm_grid)
        double = engine.scan_working_range(Scheme.DOUBLE, pg_grid, pm_grid)
        for s, d in zip(single, double):
            if s.inside:
                assert d.inside, (s.p_g, s.p_m)
