import math

import numpy as np
import pytest

from conftest import smooth_random_image
from oracles import zncc_surface_bruteforce
from smallprint import (Image, ZnccConfig, correlation_surface, rotate_image,
                        zncc_score)
from smallprint.errors import DegenerateInputError, ParameterError


class TestConfig:
    def test_default_sweep_angles(self):
        cfg = ZnccConfig()
        assert cfg.angles_deg() == [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0,
                                    0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]

    def test_invalid_configs_rejected(self):
        with pytest.raises(ParameterError):
            ZnccConfig(rotation_min=10, rotation_max=-10)
        with pytest.raises(ParameterError):
            ZnccConfig(rotation_step=0)
        with pytest.raises(ParameterError):
            ZnccConfig(min_overlap_fraction=0.0)


class TestCorrelationSurface:
    def test_self_correlation_peak_is_one(self, rng):
        e = Image(rng.random((10, 10)))
        surface = correlation_surface(e, e, 0.25)
        gamma, u, v = surface.max_valid()
        assert (u, v) == (0, 0)
        assert gamma == pytest.approx(1.0, abs=1e-9)

    def test_inverted_candidate_gives_minus_one(self, rng):
        e = Image(rng.random((10, 10)))
        c = Image(-e.pixels + 2.0)
        surface = correlation_surface(e, c, 0.25)
        iu = 0 - surface.u_range[0]
        iv = 0 - surface.v_range[0]
        assert surface.valid[iv, iu]
        assert surface.values[iv, iu] == pytest.approx(-1.0, abs=1e-9)

    def test_translation_peak_found_by_bruteforce_comparison(self, rng):
        e = Image(rng.random((12, 12)))
        c = Image(e.pixels[5:, 3:])  # e(x, y) == c(x - 3, y - 5)
        surface = correlation_surface(e, c, 0.1)
        gamma, u, v = surface.max_valid()
        assert (u, v) == (3, 5)
        assert gamma == pytest.approx(1.0, abs=1e-9)

    def test_matches_bruteforce_oracle_random_pairs(self, rng):
        for _ in range(5):
            e = Image(rng.random((12, 12)))
            c = Image(rng.random((12, 12)))
            ref_vals, ref_valid, ref_counts = zncc_surface_bruteforce(
                e.pixels, e.mask(), c.pixels, c.mask(), 0.25)
            surface = correlation_surface(e, c, 0.25)
            assert np.array_equal(surface.valid, ref_valid)
            assert np.array_equal(surface.overlap_counts, ref_counts)
            assert np.abs(surface.values[ref_valid]
                          - ref_vals[ref_valid]).max() < 1e-9

    def test_surface_values_within_unit_interval(self, rng):
        e = Image(rng.random((14, 10)))
        c = Image(rng.random((9, 12)))
        surface = correlation_surface(e, c, 0.25)
        vals = surface.values[surface.valid]
        assert vals.max() <= 1.0 + 1e-9
        assert vals.min() >= -1.0 - 1e-9

    def test_low_overlap_entries_invalid(self, rng):
        e = Image(rng.random((8, 8)))
        c = Image(rng.random((8, 8)))
        surface = correlation_surface(e, c, 0.5)
        need = 0.5 * 64
        assert not surface.valid[surface.overlap_counts < need].any()

    def test_constant_candidate_degenerate(self, rng):
        e = Image(rng.random((8, 8)))
        with pytest.raises(DegenerateInputError):
            correlation_surface(e, Image(np.full((8, 8), 0.5)), 0.25)

    def test_peak_antisymmetry_on_shifted_pair(self, rng):
        e = Image(rng.random((11, 11)))
        c = Image(e.pixels[2:, 4:])
        _, u1, v1 = correlation_surface(e, c, 0.1).max_valid()
        _, u2, v2 = correlation_surface(c, e, 0.1).max_valid()
        assert (u2, v2) == (-u1, -v1)


class TestZnccScore:
    def test_identical_images_score_one(self, rng):
        e = smooth_random_image(rng, (32, 32))
        result = zncc_score(e, e)
        assert result.score == pytest.approx(1.0, abs=1e-9)
        assert result.best_angle_deg == 0.0
        assert not result.degenerate

    def test_rotation_by_sweep_angle_recovered(self, rng):
        from smallprint.synthetic import generate_synthetic_finger
        e, _ = generate_synthetic_finger(11, 70)
        c = rotate_image(e, math.radians(15.0))
        result = zncc_score(e, c)
        assert result.score >= 0.9
        assert result.best_angle_deg == pytest.approx(-15.0, abs=10.0)

    def test_constant_candidate_degenerate_zero(self, rng):
        e = Image(rng.random((16, 16)))
        result = zncc_score(e, Image(np.full((16, 16), 0.3)))
        assert result.score == 0.0
        assert result.degenerate

    def test_affine_intensity_invariance(self, rng):
        e = smooth_random_image(rng, (24, 24))
        c = smooth_random_image(np.random.default_rng(5), (24, 24))
        base = zncc_score(e, c)
        scaled = zncc_score(e, Image(0.5 * c.pixels + 0.2))
        assert scaled.score == pytest.approx(base.score, abs=1e-6)

    def test_scores_within_unit_interval(self, rng):
        for seed in range(3):
            e = smooth_random_image(np.random.default_rng(seed), (20, 20))
            c = smooth_random_image(np.random.default_rng(seed + 50), (20, 20))
            s = zncc_score(e, c).score
            assert -1.0 - 1e-9 <= s <= 1.0 + 1e-9
