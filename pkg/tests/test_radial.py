from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cknlab.errors import NoLimit
from cknlab.radial import (
    RadialMeasure,
    ball_volume,
    doubling_constant,
    log_grid,
    normalize,
    origin_density,
    parse_model_spec,
)

STEP = RadialMeasure.tabulated(4, (1.0, 1.01), (1.0, 2.0))


def scipy_volume(model, R):
    pts = [k for k in model.knots if k < R]
    return integrate.quad(model.sigma, 0.0, R, points=pts or None, epsabs=0,
                          epsrel=1e-13, limit=200)[0]


class TestBallVolume:
    def test_euclidean(self):
        assert ball_volume(RadialMeasure.euclidean(3), 2.0) == pytest.approx(4 * math.pi / 3 * 8,
                                                                             rel=1e-15)

    def test_cone(self):
        assert ball_volume(RadialMeasure.cone(3, 0.5), 2.0) == pytest.approx(2 * math.pi / 3 * 8,
                                                                             rel=1e-15)

    def test_envelope(self):
        assert ball_volume(RadialMeasure.envelope_ricci(2, 1.0), 1.0) == pytest.approx(
            math.e * math.pi, rel=1e-15)

    @pytest.mark.parametrize("R", [0.3, 1.0, 1.005, 1.01, 3.0, 40.0])
    def test_tabulated_matches_scipy(self, R):
        assert ball_volume(STEP, R) == pytest.approx(scipy_volume(STEP, R), rel=1e-11)

    def test_vectorised_matches_scalar(self):
        radii = np.geomspace(0.01, 50, 97)
        scalar = np.array([STEP.ball_volume(R) for R in radii])
        np.testing.assert_allclose(STEP.ball_volumes(radii), scalar, rtol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.01, 100), min_size=2, max_size=20, unique=True))
    def test_strictly_increasing(self, radii):
        radii = np.sort(radii)
        for model in (RadialMeasure.euclidean(4), STEP, RadialMeasure.envelope_ricci(4, 0.3)):
            assert np.all(np.diff(model.ball_volumes(radii)) > 0)

    def test_envelope_exact_growth(self):
        m = RadialMeasure.envelope_ricci(4, 0.3)
        assert m.ball_volume(3.0) / m.ball_volume(1.5) == pytest.approx(2.0**4, rel=1e-15)
        assert m.ball_volume(2.0) == pytest.approx(math.exp(0.9) * m.omega * 16, rel=1e-15)


class TestDoubling:
    def test_euclidean_is_one(self):
        assert doubling_constant(RadialMeasure.euclidean(4)) == pytest.approx(1.0, rel=1e-14)

    def test_cone_is_one(self):
        assert doubling_constant(RadialMeasure.cone(4, 0.3)) == pytest.approx(1.0, rel=1e-14)

    def test_step_model_brute_force(self):
        grid = log_grid()
        got = doubling_constant(STEP, grid)
        vols = [scipy_volume(STEP, R) for R in grid]
        want = max(vols[j] / vols[i] * (grid[i] / grid[j]) ** 4
                   for j in range(grid.size) for i in range(j))
        assert 1 < got <= 2
        assert got == pytest.approx(want, rel=1e-10)

    def test_invariant_under_scaling(self):
        scaled = RadialMeasure.tabulated(4, STEP.knots, [7 * d for d in STEP.densities])
        assert doubling_constant(scaled) == pytest.approx(doubling_constant(STEP), rel=1e-14)

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            doubling_constant(STEP, [2.0, 1.0])

    def test_single_radius(self):
        assert doubling_constant(STEP, [1.0]) == 1.0


class TestOriginDensity:
    def test_values(self):
        assert origin_density(RadialMeasure.euclidean(4)) == pytest.approx(1.0, rel=1e-14)
        assert origin_density(RadialMeasure.cone(4, 0.7)) == pytest.approx(0.7, rel=1e-14)
        assert origin_density(RadialMeasure.envelope_ricci(4, 0.2)) == pytest.approx(
            math.exp(0.6), rel=1e-14)

    def test_tabulated_uses_first_density(self):
        assert origin_density(STEP) == pytest.approx(1.0, rel=1e-12)

    def test_normalize(self):
        assert normalize(RadialMeasure.cone(4, 0.5)).power_factor == pytest.approx(1.0)
        assert normalize(RadialMeasure.euclidean(4)) == RadialMeasure.euclidean(4)
        env = normalize(RadialMeasure.envelope_ricci(2, 1.0))
        assert env.kind == "cone" and env.c == pytest.approx(1.0, rel=1e-14)
        tab = normalize(RadialMeasure.tabulated(3, (0.5, 2.0), (3.0, 1.0)))
        assert origin_density(tab) == pytest.approx(1.0, abs=1e-9)

    def test_no_limit_is_numerical_error(self):
        # a density that keeps changing down to 2**-40 never settles
        knots = tuple(2.0 ** -k for k in range(60, 0, -1))
        dens = tuple(1.0 + (k % 2) for k in range(60, 0, -1))
        with pytest.raises(NoLimit):
            origin_density(RadialMeasure.tabulated(3, knots, dens))


class TestParsing:
    @pytest.mark.parametrize("text, kind", [
        ("euclidean:n=4", "euclidean"), ("cone:n=4,c=0.5", "cone"),
        ("envelope:n=4,b0=0.3", "envelope_ricci")])
    def test_inline(self, text, kind):
        assert parse_model_spec(text).kind == kind

    def test_table(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("t,relative_density\n1,1\n1.01,2\n")
        assert parse_model_spec(f"table:{path},n=4") == STEP

    def test_table_needs_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,1\n2,2\n")
        with pytest.raises(ValueError):
            RadialMeasure.from_csv(path, 4)

    def test_table_rejects_unsorted(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("t,d\n2,1\n1,2\n")
        with pytest.raises(ValueError):
            RadialMeasure.from_csv(path, 4)

    @pytest.mark.parametrize("text", ["cone:c=0.5", "sphere:n=3", "cone:n=4,c=-1"])
    def test_bad_specs(self, text):
        with pytest.raises((ValueError, KeyError)):
            parse_model_spec(text)

    def test_describe_round_trip(self):
        for m in (RadialMeasure.cone(4, 0.5), RadialMeasure.envelope_ricci(4, 0.3)):
            assert parse_model_spec(m.describe()) == m

    def test_cone_above_one_is_flagged(self):
        assert RadialMeasure.cone(4, 1.5).flags
