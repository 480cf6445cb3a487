import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import png_bytes
from mmdq.errors import InconsistentLMax, UndecodableImage
from mmdq.imgqual import (
    FACTORS,
    ImageQualityConfig,
    brightness_score,
    color_constancy_score,
    contrast_score,
    decode_luma,
    image_quality,
    laplacian_response,
    ocr_text_score,
    resolution_score,
    sharpness_score,
)


def luma_of(color, width=8, height=8):
    plane, _ = decode_luma(png_bytes(width, height, color))
    return plane


class TestDecode:
    def test_pure_red_luma(self):
        # 0.299 * 255
        plane = luma_of((255, 0, 0))
        assert plane.values.ravel().tolist() == pytest.approx([76.245] * 64)

    def test_channel_means(self):
        _, means = decode_luma(png_bytes(4, 4, (10, 20, 30)))
        assert means == pytest.approx((10.0, 20.0, 30.0))

    def test_dimensions(self):
        plane = luma_of((0, 0, 0), width=5, height=3)
        assert (plane.width, plane.height) == (5, 3)

    def test_garbage_rejected(self):
        with pytest.raises(UndecodableImage):
            decode_luma(b"not an image at all")


class TestResolution:
    @pytest.mark.parametrize(
        "w,h,t,expected",
        [
            (400, 300, 200, 1.0),
            (100, 800, 200, 0.5),
            (200, 200, 200, 1.0),
            (50, 400, 200, 0.25),
            (1, 1, 200, 0.005),
        ],
    )
    def test_cases(self, w, h, t, expected):
        assert resolution_score(w, h, t) == pytest.approx(expected, abs=0)

    @given(st.integers(1, 4000), st.integers(1, 4000), st.integers(1, 1000))
    def test_range_and_linearity(self, w, h, t):
        s = resolution_score(w, h, t)
        assert 0.0 < s <= 1.0
        if min(w, h) < t:
            assert s == min(w, h) / t


class TestOcrText:
    @pytest.mark.parametrize(
        "length,t,l_max,expected",
        [
            (200, 200, 1000, 1.0),
            (500, 200, 1000, 0.5),
            (0, 200, 1000, 1.0),
            (1000, 200, 1000, 0.0),
            (300, 200, 400, 0.25),
        ],
    )
    def test_cases(self, length, t, l_max, expected):
        assert ocr_text_score(length, t, l_max) == pytest.approx(expected, abs=0)

    def test_length_above_corpus_max_rejected(self):
        with pytest.raises(InconsistentLMax):
            ocr_text_score(500, 200, 400)

    def test_negative_length_rejected(self):
        with pytest.raises(InconsistentLMax):
            ocr_text_score(-1, 200, 400)

    @given(st.integers(0, 5000), st.integers(1, 500), st.integers(1, 5000))
    def test_monotone_nonincreasing(self, length, t, l_max):
        length = min(length, l_max)
        s = ocr_text_score(length, t, l_max)
        assert 0.0 <= s <= 1.0
        if length + 1 <= l_max:
            assert ocr_text_score(length + 1, t, l_max) <= s


class TestBrightness:
    @pytest.mark.parametrize(
        "color,expected",
        [
            ((0, 0, 0), 0.0),
            ((255, 255, 255), 0.0),
            # gray 64: 1 - |64 - 127.5| / 127.5
            ((64, 64, 64), 0.5019607843137255),
        ],
    )
    def test_extremes_and_midtone(self, color, expected):
        assert brightness_score(luma_of(color)) == pytest.approx(expected)

    def test_ideal_midpoint(self):
        # half 127, half 128 averages exactly 127.5
        pixels = np.zeros((2, 2, 3), dtype=np.uint8)
        pixels[0] = 127
        pixels[1] = 128
        plane, _ = decode_luma(png_bytes(2, 2, pixels=pixels))
        assert brightness_score(plane) == pytest.approx(1.0)


class TestContrast:
    def test_flat_is_zero(self):
        assert contrast_score(luma_of((90, 90, 90)), 40.0) == 0.0

    def test_half_threshold(self):
        # two-level plane: std = 50 -> capped at 1 for t=40, 0.5 for t=100
        pixels = np.zeros((2, 2, 3), dtype=np.uint8)
        pixels[0] = 50
        pixels[1] = 150
        plane, _ = decode_luma(png_bytes(2, 2, pixels=pixels))
        assert contrast_score(plane, 40.0) == 1.0
        assert contrast_score(plane, 100.0) == pytest.approx(0.5)


def loop_laplacian(vals: np.ndarray) -> np.ndarray:
    """Straight-loop 3x3 Laplacian with replicated borders."""
    h, w = vals.shape
    out = np.zeros_like(vals)
    for y in range(h):
        for x in range(w):
            up = vals[max(y - 1, 0), x]
            down = vals[min(y + 1, h - 1), x]
            left = vals[y, max(x - 1, 0)]
            right = vals[y, min(x + 1, w - 1)]
            out[y, x] = up + down + left + right - 4 * vals[y, x]
    return out


class TestSharpness:
    def test_flat_is_zero(self):
        assert sharpness_score(luma_of((128, 128, 128)), 100.0) == 0.0

    def test_checkerboard_saturates(self):
        pixels = np.indices((8, 8)).sum(axis=0) % 2 * 255
        plane, _ = decode_luma(png_bytes(8, 8, pixels=np.repeat(pixels[:, :, None], 3, axis=2)))
        assert sharpness_score(plane, 100.0) == 1.0

    @given(
        arrays(
            np.float64,
            st.tuples(st.integers(1, 7), st.integers(1, 7)),
            elements=st.floats(0, 255, allow_nan=False),
        )
    )
    @settings(max_examples=50)
    def test_matches_loop_oracle(self, vals):
        from mmdq.imgqual import LumaPlane

        plane = LumaPlane(width=vals.shape[1], height=vals.shape[0], values=vals)
        got = laplacian_response(plane)
        np.testing.assert_allclose(got, loop_laplacian(vals), atol=1e-9)


class TestColorConstancy:
    def test_equal_means_is_one(self):
        assert color_constancy_score((120.0, 120.0, 120.0), 0.6) == 1.0

    def test_partial_cast(self):
        # d = (200-100)/200 = 0.5; 1 - 0.5/0.6
        assert color_constancy_score((200.0, 150.0, 100.0), 0.6) == pytest.approx(
            0.16666666666666663
        )

    def test_extreme_cast_clamps_to_zero(self):
        assert color_constancy_score((255.0, 0.0, 0.0), 0.6) == 0.0


class TestImageQuality:
    def test_all_factors_reported(self):
        report = image_quality(png_bytes(300, 300), ocr_length=0, l_max=0)
        assert set(report.per_factor) == set(FACTORS)
        assert report.w_image == pytest.approx(
            sum(report.per_factor.values()) / len(FACTORS)
        )

    def test_subset_mean(self):
        config = ImageQualityConfig(enabled_factors=frozenset({"resolution", "brightness"}))
        report = image_quality(png_bytes(300, 300, (128, 128, 128)), 0, 0, config)
        assert set(report.per_factor) == {"resolution", "brightness"}
        expected = (report.per_factor["resolution"] + report.per_factor["brightness"]) / 2
        assert report.w_image == pytest.approx(expected)

    def test_scores_bounded(self, rng):
        for _ in range(5):
            pixels = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
            report = image_quality(png_bytes(16, 16, pixels=pixels), 40, 100)
            for name, score in report.per_factor.items():
                assert 0.0 <= score <= 1.0, name
            assert 0.0 <= report.w_image <= 1.0

    def test_empty_factor_set_rejected(self):
        with pytest.raises(ValueError):
            ImageQualityConfig(enabled_factors=frozenset())
