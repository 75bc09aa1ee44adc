from __future__ import annotations

import math

import numpy as np
import pytest
from PIL import Image

from pneumotex.errors import BoundsError, ImageDimensionError, ImageFormatError, ParameterError
from pneumotex.imaging import GrayImage, NeighborhoodSpec, crop, load_gray, sample_neighbors


def save_png(path, arr):
    Image.fromarray(arr).save(path)
    return path


class TestGrayImage:
    def test_copies_and_freezes_pixels(self):
        src = np.zeros((3, 3))
        img = GrayImage(src)
        src[0, 0] = 9.0
        assert img.pixels[0, 0] == 0.0
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1.0

    def test_width_height(self):
        img = GrayImage(np.zeros((4, 7)))
        assert img.width == 7
        assert img.height == 4

    def test_too_small(self):
        with pytest.raises(ImageDimensionError):
            GrayImage(np.zeros((2, 5)))
        with pytest.raises(ImageDimensionError):
            GrayImage(np.zeros((5, 2)))

    def test_wrong_rank(self):
        with pytest.raises(ImageDimensionError):
            GrayImage(np.zeros((3, 3, 3)))

    def test_out_of_range(self):
        with pytest.raises(ImageDimensionError):
            GrayImage(np.full((3, 3), -1.0))
        with pytest.raises(ImageDimensionError):
            GrayImage(np.full((3, 3), 256.0))

    def test_non_finite(self):
        bad = np.zeros((3, 3))
        bad[1, 1] = np.nan
        with pytest.raises(ImageDimensionError):
            GrayImage(bad)

    def test_shifted_clips(self):
        img = GrayImage(np.array([[0.0, 100.0, 250.0]] * 3))
        up = img.shifted(10.0)
        assert list(up.pixels[0]) == [10.0, 110.0, 255.0]
        down = img.shifted(-10.0)
        assert list(down.pixels[0]) == [0.0, 90.0, 240.0]


class TestLoadGray:
    def test_black_png(self, tmp_path):
        p = save_png(tmp_path / "z.png", np.zeros((3, 3), np.uint8))
        img = load_gray(p)
        assert img.pixels.shape == (3, 3)
        assert np.all(img.pixels == 0.0)

    def test_gray_values_used_verbatim(self, tmp_path):
        arr = np.arange(9, dtype=np.uint8).reshape(3, 3) * 20
        img = load_gray(save_png(tmp_path / "g.png", arr))
        assert np.array_equal(img.pixels, arr.astype(np.float64))

    def test_rgb_red_luma(self, tmp_path):
        arr = np.zeros((3, 3, 3), np.uint8)
        arr[..., 0] = 255
        img = load_gray(save_png(tmp_path / "r.png", arr))
        assert img.pixels[0, 0] == pytest.approx(54.213, abs=1e-9)

    def test_rgb_white_luma(self, tmp_path):
        arr = np.full((3, 3, 3), 255, np.uint8)
        img = load_gray(save_png(tmp_path / "w.png", arr))
        # weights sum to 1 so white maps back to 255
        assert img.pixels[1, 1] == pytest.approx(255.0, abs=1e-9)

    def test_rgba_alpha_dropped(self, tmp_path):
        arr = np.zeros((3, 3, 4), np.uint8)
        arr[..., 1] = 255
        arr[..., 3] = 7
        img = load_gray(save_png(tmp_path / "a.png", arr))
        assert img.pixels[0, 0] == pytest.approx(0.7152 * 255, abs=1e-9)

    def test_la_alpha_dropped(self, tmp_path):
        arr = np.zeros((3, 3, 2), np.uint8)
        arr[..., 0] = 77
        img = load_gray(save_png(tmp_path / "la.png", arr))
        assert np.all(img.pixels == 77.0)

    def test_sixteen_bit_rescaled(self, tmp_path):
        arr = np.full((3, 3), 65535, np.uint16)
        img = load_gray(save_png(tmp_path / "deep.png", arr))
        assert img.pixels[0, 0] == pytest.approx(255.0, abs=1e-9)

    def test_palette_via_rgb(self, tmp_path):
        im = Image.new("P", (3, 3))
        im.putpalette([0, 0, 0] + [255, 0, 0] + [0] * 759)
        im.putpixel((0, 0), 1)
        p = tmp_path / "p.png"
        im.save(p)
        img = load_gray(p)
        assert img.pixels[0, 0] == pytest.approx(54.213, abs=1e-9)
        assert img.pixels[1, 1] == 0.0

    def test_one_by_one_rejected(self, tmp_path):
        p = save_png(tmp_path / "tiny.png", np.zeros((1, 1), np.uint8))
        with pytest.raises(ImageDimensionError):
            load_gray(p)

    def test_garbage_bytes(self, tmp_path):
        p = tmp_path / "junk.png"
        p.write_bytes(b"this is not an image")
        with pytest.raises(ImageFormatError):
            load_gray(p)

    def test_unsupported_mode(self, tmp_path):
        p = tmp_path / "f.tiff"
        Image.fromarray(np.zeros((3, 3), np.float32)).save(p)
        with pytest.raises(ImageFormatError):
            load_gray(p)

    def test_missing_file_passes_through(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_gray(tmp_path / "absent.png")


class TestNeighborhoodSpec:
    def test_count_floor(self):
        with pytest.raises(ParameterError):
            NeighborhoodSpec.circle(3, 1.0)

    def test_axes_positive(self):
        with pytest.raises(ParameterError):
            NeighborhoodSpec.ellipse(8, 0.0, 1.0)
        with pytest.raises(ParameterError):
            NeighborhoodSpec.ellipse(8, 1.0, -2.0)

    def test_offsets_shape_and_radius(self):
        offs = NeighborhoodSpec.circle(8, 2.0).offsets()
        assert offs.shape == (8, 2)
        assert np.allclose(np.hypot(offs[:, 0], offs[:, 1]), 2.0)

    def test_first_point_east(self):
        offs = NeighborhoodSpec.circle(4, 1.0).offsets()
        assert offs[0, 0] == 1.0
        assert offs[0, 1] == 0.0

    def test_offset_rotates(self):
        offs = NeighborhoodSpec.circle(4, 1.0, offset=math.pi / 2).offsets()
        assert offs[0, 0] == pytest.approx(0.0, abs=1e-12)
        assert offs[0, 1] == pytest.approx(1.0)


class TestSampleNeighbors:
    def test_constant_image(self):
        img = GrayImage(np.full((5, 5), 7.0))
        out = sample_neighbors(img, 2.0, 2.0, NeighborhoodSpec.circle(8, 2.0))
        assert np.array_equal(out, np.full(8, 7.0))

    def test_axial_points_hit_pixels(self):
        rng = np.random.default_rng(5)
        img = GrayImage(rng.integers(0, 256, size=(5, 5)).astype(np.float64))
        out = sample_neighbors(img, 2.0, 2.0, NeighborhoodSpec.circle(4, 1.0))
        expected = np.array(
            [img.pixels[2, 3], img.pixels[3, 2], img.pixels[2, 1], img.pixels[1, 2]]
        )
        assert np.allclose(out, expected, atol=1e-12)

    def test_ramp_is_sampled_exactly(self):
        # bilinear interpolation reproduces a plane; I(x, y) = x
        img = GrayImage(np.tile(np.arange(9.0), (9, 1)))
        spec = NeighborhoodSpec.circle(8, 2.0)
        out = sample_neighbors(img, 4.0, 4.0, spec)
        theta = 0.0 + 2.0 * math.pi * np.arange(8, dtype=np.float64) / 8
        assert np.array_equal(out, 4.0 + 2.0 * np.cos(theta))

    def test_edge_replication(self):
        img = GrayImage(np.tile(np.arange(5.0), (5, 1)))
        out = sample_neighbors(img, 4.0, 2.0, NeighborhoodSpec.circle(4, 2.0))
        # the eastern point clamps onto column 4
        assert out[0] == 4.0

    def test_center_outside(self):
        img = GrayImage(np.zeros((5, 5)))
        with pytest.raises(BoundsError):
            sample_neighbors(img, 5.0, 2.0, NeighborhoodSpec.circle(4, 1.0))
        with pytest.raises(BoundsError):
            sample_neighbors(img, 2.0, -0.5, NeighborhoodSpec.circle(4, 1.0))

    def test_counter_clockwise_order(self):
        img = GrayImage(np.tile(np.arange(5.0).reshape(5, 1), (1, 5)) * 10)
        out = sample_neighbors(img, 2.0, 2.0, NeighborhoodSpec.circle(4, 1.0))
        # y grows downward, so the second point (angle pi/2) is one row down
        assert out[1] == pytest.approx(30.0, abs=1e-9)
        assert out[3] == pytest.approx(10.0, abs=1e-9)


class TestCrop:
    def test_identity(self):
        img = GrayImage(np.arange(25.0).reshape(5, 5))
        out = crop(img, 0, 0, 5, 5)
        assert np.array_equal(out.pixels, img.pixels)

    def test_center_window(self):
        img = GrayImage(np.arange(25.0).reshape(5, 5))
        out = crop(img, 1, 1, 3, 3)
        assert np.array_equal(out.pixels, img.pixels[1:4, 1:4])

    def test_out_of_bounds(self):
        img = GrayImage(np.zeros((5, 5)))
        with pytest.raises(BoundsError):
            crop(img, 3, 0, 3, 3)
        with pytest.raises(BoundsError):
            crop(img, -1, 0, 3, 3)

    def test_minimum_size(self):
        img = GrayImage(np.zeros((5, 5)))
        with pytest.raises(ImageDimensionError):
            crop(img, 0, 0, 2, 3)

    def test_composition(self):
        rng = np.random.default_rng(11)
        img = GrayImage(rng.uniform(0, 255, size=(9, 9)))
        inner = crop(crop(img, 1, 2, 6, 6), 2, 1, 3, 4)
        direct = crop(img, 3, 3, 3, 4)
        assert np.array_equal(inner.pixels, direct.pixels)
