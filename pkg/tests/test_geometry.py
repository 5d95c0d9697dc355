import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazedepth.geometry import (
    GazeSample,
    GeometryConfig,
    ParallelRaysError,
    Ray,
    Validity,
    depth_to_diopters,
    diopters_to_depth,
    estimate_depth,
    fixation_sample,
    normalize,
    ray_closest_points,
)


from oracles import grid_search_closest


class TestRayClosestPoints:
    def test_exact_intersection_symmetric(self):
        target = (0.0, 0.0, 1.0)
        sample = fixation_sample(target, ipd=0.063)
        s, t, midpoint, gap = ray_closest_points(sample.left, sample.right)
        eye_to_target = math.sqrt(0.0315**2 + 1.0**2)
        assert s == pytest.approx(eye_to_target, abs=1e-12)
        assert t == pytest.approx(eye_to_target, abs=1e-12)
        assert midpoint == pytest.approx(target, abs=1e-12)
        assert gap == pytest.approx(0.0, abs=1e-12)

    def test_identical_directions_raise_parallel(self):
        left = Ray((-0.0315, 0.0, 0.0), (0.0, 0.0, 1.0))
        right = Ray((0.0315, 0.0, 0.0), (0.0, 0.0, 1.0))
        with pytest.raises(ParallelRaysError):
            ray_closest_points(left, right)

    def test_skew_rays_match_grid_oracle(self):
        # Rays aimed at (0, +5mm, 1m) and (0, -5mm, 1m): genuinely skew.
        left = Ray((-0.03, 0.0, 0.0), normalize((0.03, 0.005, 1.0)))
        right = Ray((0.03, 0.0, 0.0), normalize((-0.03, -0.005, 1.0)))
        s, t, midpoint, gap = ray_closest_points(left, right)

        # Values frozen from the grid oracle (and the by-hand closed form:
        # midpoint z = 36/37, gap = sqrt(0.1332)/37).
        assert midpoint[0] == pytest.approx(0.0, abs=1e-12)
        assert midpoint[1] == pytest.approx(0.0, abs=1e-12)
        assert midpoint[2] == pytest.approx(0.972972972972973, abs=1e-9)
        assert gap == pytest.approx(0.009863939238321437, abs=1e-12)

        gs, gt, gmid, ggap = grid_search_closest(left, right)
        assert s == pytest.approx(gs, abs=2e-4)
        assert t == pytest.approx(gt, abs=2e-4)
        assert np.allclose(midpoint, gmid, atol=2e-4)
        assert gap == pytest.approx(ggap, abs=2e-4)

    def test_random_skew_rays_match_grid_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            tgt_l = (rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.5, 1.5))
            tgt_r = (tgt_l[0] + rng.uniform(-0.01, 0.01), tgt_l[1] + rng.uniform(-0.01, 0.01), tgt_l[2])
            left = Ray((-0.0315, 0.0, 0.0), normalize((tgt_l[0] + 0.0315, tgt_l[1], tgt_l[2])))
            right = Ray((0.0315, 0.0, 0.0), normalize((tgt_r[0] - 0.0315, tgt_r[1], tgt_r[2])))
            s, t, midpoint, gap = ray_closest_points(left, right)
            gs, gt, gmid, ggap = grid_search_closest(left, right, lo=0.0, hi=2.0)
            assert s == pytest.approx(gs, abs=2e-4)
            assert t == pytest.approx(gt, abs=2e-4)
            assert gap == pytest.approx(ggap, abs=2e-4)


class TestEstimateDepth:
    def test_symmetric_fixation_half_meter(self):
        est = estimate_depth(fixation_sample((0.0, 0.0, 0.5)))
        assert est.validity is Validity.VALID
        assert est.depth == pytest.approx(0.5, rel=1e-9)

    def test_symmetric_fixation_two_meters(self):
        est = estimate_depth(fixation_sample((0.0, 0.0, 2.0)))
        assert est.validity is Validity.VALID
        assert est.depth == pytest.approx(2.0, rel=1e-9)

    def test_wall_eyed_is_divergent(self):
        left = Ray((-0.0315, 0.0, 0.0), normalize((-0.05, 0.0, 1.0)))
        right = Ray((0.0315, 0.0, 0.0), normalize((0.05, 0.0, 1.0)))
        est = estimate_depth(GazeSample(0.0, left, right))
        assert est.validity is Validity.DIVERGENT

    def test_parallel_directions_classified(self):
        left = Ray((-0.0315, 0.0, 0.0), (0.0, 0.0, 1.0))
        right = Ray((0.0315, 0.0, 0.0), (0.0, 0.0, 1.0))
        est = estimate_depth(GazeSample(0.0, left, right))
        assert est.validity is Validity.PARALLEL
        assert est.ray_gap == pytest.approx(0.063, abs=1e-12)

    def test_far_fixation_is_out_of_range(self):
        # 20 m is beyond max_depth but not below the parallel tolerance
        est = estimate_depth(fixation_sample((0.0, 0.0, 20.0)))
        assert est.validity is Validity.OUT_OF_RANGE

    def test_too_close_fixation_is_out_of_range(self):
        est = estimate_depth(fixation_sample((0.0, 0.0, 0.04)))
        assert est.validity is Validity.OUT_OF_RANGE

    def test_large_gap_classified(self):
        # Rays missing each other vertically by ~8 cm near z=1
        left = Ray((-0.0315, 0.0, 0.0), normalize((0.0315, 0.04, 1.0)))
        right = Ray((0.0315, 0.0, 0.0), normalize((-0.0315, -0.04, 1.0)))
        est = estimate_depth(GazeSample(0.0, left, right))
        assert est.validity is Validity.EXCESSIVE_GAP

    def test_valid_estimate_vergence_consistent(self):
        est = estimate_depth(fixation_sample((0.1, -0.2, 1.3)))
        assert est.validity is Validity.VALID
        assert est.vergence * est.depth == pytest.approx(1.0, abs=1e-9)

    def test_pure_function_bit_identical(self):
        sample = fixation_sample((0.05, 0.02, 0.9), ipd=0.061)
        a = estimate_depth(sample)
        b = estimate_depth(sample)
        assert (a.depth, a.vergence, a.ray_gap) == (b.depth, b.vergence, b.ray_gap)


class TestExactnessGrids:
    def test_symmetric_exactness_over_depth_and_ipd(self):
        depths = np.geomspace(0.1, 10.0, 25)
        for ipd in (0.05, 0.063, 0.08):
            for d in depths:
                est = estimate_depth(fixation_sample((0.0, 0.0, float(d)), ipd=ipd))
                assert est.validity is Validity.VALID
                assert abs(est.depth - d) / d < 1e-9

    def test_off_axis_exactness(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            d = float(rng.uniform(0.1, 10.0))
            x = float(rng.uniform(-0.5, 0.5))
            y = float(rng.uniform(-0.5, 0.5))
            ipd = float(rng.uniform(0.05, 0.08))
            est = estimate_depth(fixation_sample((x, y, d), ipd=ipd))
            assert est.validity is Validity.VALID
            assert abs(est.depth - d) / d < 1e-9

    def test_noise_amplification_grows_with_depth(self):
        # Fixed angular perturbation produces a larger depth spread at 2 m
        # than at 0.5 m.
        rng = np.random.default_rng(123)
        sigma = 0.0035

        def depth_std(d, n=1500):
            vals = []
            half = 0.063 / 2
            for _ in range(n):
                eps = rng.normal(0.0, sigma, size=4)
                left_dir = normalize((half + eps[0] * d, eps[1] * d, d))
                right_dir = normalize((-half + eps[2] * d, eps[3] * d, d))
                sample = GazeSample(0.0, Ray((-half, 0.0, 0.0), left_dir), Ray((half, 0.0, 0.0), right_dir))
                est = estimate_depth(sample, GeometryConfig(max_depth=100.0))
                if est.validity is Validity.VALID:
                    vals.append(est.depth)
            return float(np.std(vals))

        assert depth_std(2.0) > depth_std(0.5)


class TestDiopters:
    @pytest.mark.parametrize("depth,expected", [(0.5, 2.0), (2.0, 0.5), (1.0, 1.0)])
    def test_known_values(self, depth, expected):
        assert depth_to_diopters(depth) == expected

    def test_domain_error(self):
        with pytest.raises(ValueError):
            depth_to_diopters(0.0)
        with pytest.raises(ValueError):
            depth_to_diopters(-1.0)
        with pytest.raises(ValueError):
            diopters_to_depth(0.0)

    @given(st.floats(min_value=0.1, max_value=10.0, allow_nan=False))
    @settings(max_examples=200)
    def test_round_trip(self, d):
        assert diopters_to_depth(depth_to_diopters(d)) == pytest.approx(d, rel=1e-12)

    def test_strictly_decreasing(self):
        depths = np.linspace(0.1, 10.0, 100)
        verg = [depth_to_diopters(float(d)) for d in depths]
        assert all(a > b for a, b in zip(verg, verg[1:]))


class TestDomainTypes:
    def test_ray_rejects_non_unit_direction(self):
        with pytest.raises(ValueError):
            Ray((0.0, 0.0, 0.0), (0.0, 0.0, 2.0))

    def test_ray_rejects_off_plane_origin(self):
        with pytest.raises(ValueError):
            Ray((0.0, 0.0, 0.1), (0.0, 0.0, 1.0))

    def test_sample_rejects_swapped_eyes(self):
        left = Ray((0.0315, 0.0, 0.0), (0.0, 0.0, 1.0))
        right = Ray((-0.0315, 0.0, 0.0), (0.0, 0.0, 1.0))
        with pytest.raises(ValueError):
            GazeSample(0.0, left, right)

    def test_sample_rejects_bad_ipd(self):
        left = Ray((-0.1, 0.0, 0.0), (0.0, 0.0, 1.0))
        right = Ray((0.1, 0.0, 0.0), (0.0, 0.0, 1.0))
        with pytest.raises(ValueError):
            GazeSample(0.0, left, right)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GeometryConfig(min_depth=1.0, max_depth=0.5)
        with pytest.raises(ValueError):
            GeometryConfig(parallel_tolerance=0.0)
