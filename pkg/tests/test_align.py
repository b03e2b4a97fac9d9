"""Aspect padding, bbox resampling, control signals, and the full chain."""

import numpy as np
import pytest

import oracles
from viewcraft.align import (ASPECT_TOLERANCE, COLOR_CELL, ControlSignals,
                             ObjectCrop, align_to_bbox, crop_object,
                             extract_color_map, extract_edges,
                             make_control_signals, pad_to_aspect,
                             resize_to_bbox)
from viewcraft.backends.render import render, silhouette_mask
from viewcraft.backends.types import ProceduralObjectSpec
from viewcraft.errors import AspectMismatch, EmptyMask
from viewcraft.geometry import BoundingBox, SphericalView
from viewcraft.imagebuf import ImageBuffer


def blob_crop(rng, min_side=32, max_side=200):
    """Random RGBA crop with an elliptical mask, tightened."""
    h = int(rng.integers(min_side, max_side))
    w = int(rng.integers(min_side, max_side))
    rgba = rng.integers(0, 256, (h, w, 4), dtype=np.uint8)
    yy, xx = np.mgrid[0:h, 0:w]
    cy, cx = h / 2.0, w / 2.0
    ry = rng.uniform(0.25, 0.5) * h
    rx = rng.uniform(0.25, 0.5) * w
    mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    image = ImageBuffer.from_array(rgba)
    return crop_object(image, mask, BoundingBox(0, 0, w, h))


class TestRandomPairSuite:
    def test_thousand_pairs_pad_exact_and_resize_exact_size(self):
        rng = np.random.default_rng(777)
        for _ in range(1000):
            crop = blob_crop(rng)
            target = BoundingBox(0, 0, int(rng.integers(32, 257)),
                                 int(rng.integers(32, 257)))
            padded = pad_to_aspect(crop, target.aspect)
            assert padded.mask.sum() == crop.mask.sum()
            out = resize_to_bbox(padded, target)
            assert (out.width, out.height) == (target.width, target.height)
            assert out.image.pixels.shape == (target.height, target.width, 4)
            assert out.origin_bbox == target


class TestPadToAspect:
    def make(self, w, h):
        rgba = np.zeros((h, w, 4), dtype=np.uint8)
        rgba[..., 3] = 255
        mask = np.ones((h, w), dtype=bool)
        return ObjectCrop(ImageBuffer.from_array(rgba), mask,
                          BoundingBox(0, 0, w, h))

    def test_tall_crop_splits_columns_odd_to_the_right(self):
        crop = self.make(10, 21)
        padded = pad_to_aspect(crop, 1.0)
        assert (padded.width, padded.height) == (21, 21)
        cols = np.flatnonzero(padded.mask.any(axis=0))
        assert cols[0] == 5 and cols[-1] == 14  # left 5, right 6

    def test_wide_crop_pads_top_only(self):
        crop = self.make(20, 10)
        padded = pad_to_aspect(crop, 1.0)
        assert (padded.width, padded.height) == (20, 20)
        rows = np.flatnonzero(padded.mask.any(axis=1))
        assert rows[0] == 10 and rows[-1] == 19  # content rests at the bottom

    def test_matching_aspect_is_identity(self):
        crop = self.make(16, 16)
        assert pad_to_aspect(crop, 1.0) is crop

    def test_padding_is_transparent(self):
        padded = pad_to_aspect(self.make(10, 20), 1.0)
        border = padded.image.pixels[:, 0, 3]
        assert (border == 0).all()

    def test_tightness_lost_by_padding(self):
        crop = self.make(10, 20)
        assert crop.is_tight
        assert not pad_to_aspect(crop, 1.0).is_tight

    def test_rejects_bad_aspect(self):
        with pytest.raises(ValueError):
            pad_to_aspect(self.make(4, 4), 0.0)


class TestResizeToBbox:
    def test_aspect_mismatch_beyond_tolerance(self):
        rng = np.random.default_rng(3)
        crop = blob_crop(rng, 64, 65)  # exactly 64x64
        with pytest.raises(AspectMismatch):
            resize_to_bbox(crop, BoundingBox(0, 0, 128, 64))

    def test_tolerance_parameter_loosens_the_gate(self):
        rgba = np.zeros((100, 103, 4), dtype=np.uint8)
        rgba[..., 3] = 255
        crop = ObjectCrop(ImageBuffer.from_array(rgba), np.ones((100, 103), bool),
                          BoundingBox(0, 0, 103, 100))
        target = BoundingBox(0, 0, 100, 100)
        with pytest.raises(AspectMismatch):
            resize_to_bbox(crop, target)
        out = resize_to_bbox(crop, target, tolerance=0.05)
        assert (out.width, out.height) == (100, 100)

    def test_identity_resize_preserves_pixels(self):
        rng = np.random.default_rng(4)
        crop = blob_crop(rng, 48, 49)
        out = resize_to_bbox(crop, BoundingBox(5, 9, crop.width, crop.height))
        assert np.array_equal(out.image.pixels, crop.image.pixels)
        assert np.array_equal(out.mask, crop.mask)


class TestCropObject:
    def test_tightens_and_sets_origin(self):
        img = ImageBuffer.from_array(np.full((40, 40, 3), 30, dtype=np.uint8))
        mask = np.zeros((40, 40), dtype=bool)
        mask[10:20, 15:30] = True
        crop = crop_object(img, mask, BoundingBox(0, 0, 40, 40))
        assert crop.origin_bbox == BoundingBox(15, 10, 15, 10)
        assert crop.is_tight

    def test_background_alpha_zero(self):
        img = ImageBuffer.from_array(np.full((20, 20, 3), 99, dtype=np.uint8))
        mask = np.zeros((20, 20), dtype=bool)
        mask[5:15, 5:15] = True
        mask[5, 5] = False
        crop = crop_object(img, mask, BoundingBox(0, 0, 20, 20))
        assert crop.image.pixels[0, 0, 3] == 0
        assert crop.image.pixels[1, 1, 3] == 255

    def test_empty_mask_raises(self):
        img = ImageBuffer.from_array(np.zeros((10, 10, 3), dtype=np.uint8))
        with pytest.raises(EmptyMask):
            crop_object(img, np.zeros((10, 10), bool), BoundingBox(0, 0, 10, 10))

    def test_mask_outside_bbox_ignored(self):
        img = ImageBuffer.from_array(np.zeros((30, 30, 3), dtype=np.uint8))
        mask = np.zeros((30, 30), dtype=bool)
        mask[2:6, 2:6] = True      # outside the bbox below
        mask[20:25, 20:25] = True
        crop = crop_object(img, mask, BoundingBox(15, 15, 15, 15))
        assert crop.origin_bbox == BoundingBox(20, 20, 5, 5)

    def test_save_load_round_trip(self, tmp_path):
        rng = np.random.default_rng(6)
        crop = blob_crop(rng, 40, 60)
        crop.save(tmp_path / "crop")
        loaded = ObjectCrop.load(tmp_path / "crop")
        assert np.array_equal(loaded.image.pixels, crop.image.pixels)
        assert np.array_equal(loaded.mask, crop.mask)
        assert loaded.origin_bbox == crop.origin_bbox


class TestControlSignals:
    def test_edges_binary_and_sized(self):
        rng = np.random.default_rng(8)
        img = ImageBuffer.from_array(
            rng.integers(0, 256, (64, 80, 3), dtype=np.uint8))
        sig = make_control_signals(img)
        assert sig.edge_map.shape == (64, 80)
        assert set(np.unique(sig.edge_map)) <= {0, 255}
        assert (sig.color_map.height, sig.color_map.width) == (64, 80)

    def test_flat_image_has_no_edges(self):
        img = ImageBuffer.from_array(np.full((32, 32, 3), 180, dtype=np.uint8))
        assert not extract_edges(img).any()

    def test_step_edge_detected_at_the_step(self):
        arr = np.full((32, 32, 3), 20, dtype=np.uint8)
        arr[:, 16:] = 230
        edges = extract_edges(ImageBuffer.from_array(arr))
        assert edges[:, 15].all()          # forward difference lands here
        assert not edges[:, :14].any() and not edges[:, 17:].any()

    def test_color_map_matches_loop_reference(self):
        rng = np.random.default_rng(9)
        arr = rng.integers(0, 256, (100, 90, 3), dtype=np.uint8)
        ours = extract_color_map(ImageBuffer.from_array(arr), cell=32)
        ref = oracles.block_mean_reference(arr, 32)
        assert np.array_equal(np.asarray(ours.pixels), ref)

    def test_default_cell_size(self):
        rng = np.random.default_rng(10)
        arr = rng.integers(0, 256, (COLOR_CELL * 2, COLOR_CELL, 3), dtype=np.uint8)
        cmap = np.asarray(extract_color_map(ImageBuffer.from_array(arr)).pixels)
        top = cmap[:COLOR_CELL]
        assert (top == top[0, 0]).all()

    def test_validation_rejects_nonbinary(self):
        with pytest.raises(ValueError):
            ControlSignals(np.full((4, 4), 7, dtype=np.uint8),
                           ImageBuffer.from_array(np.zeros((4, 4, 3), np.uint8)))

    def test_edge_image_three_channels(self):
        sig = ControlSignals(np.zeros((4, 4), dtype=np.uint8),
                             ImageBuffer.from_array(np.zeros((4, 4, 3), np.uint8)))
        assert sig.edge_image().channels == 3


class TestFullChain:
    SPEC = ProceduralObjectSpec("cuboid", (1.3, 0.8, 0.9), ((170, 80, 60),),
                                texture_seed=3)
    BASE = SphericalView(15.0, 10.0, 1.0)

    def chain_iou(self, d_az, d_el):
        target = SphericalView(self.BASE.azimuth + d_az,
                               self.BASE.elevation + d_el, 1.0)
        src = render(self.SPEC, self.BASE, (512, 512))
        fg = (np.asarray(src.pixels) < 250).any(axis=2)
        rows = np.flatnonzero(fg.any(axis=1))
        cols = np.flatnonzero(fg.any(axis=0))
        bbox = BoundingBox(int(cols[0]), int(rows[0]),
                           int(cols[-1] - cols[0] + 1),
                           int(rows[-1] - rows[0] + 1))

        synth = render(self.SPEC, target, (512, 512), frame="fit").to_rgba()
        sfg = (np.asarray(synth.pixels)[:, :, :3] < 250).any(axis=2)
        srows = np.flatnonzero(sfg.any(axis=1))
        scols = np.flatnonzero(sfg.any(axis=0))
        sbox = BoundingBox(int(scols[0]), int(srows[0]),
                           int(scols[-1] - scols[0] + 1),
                           int(srows[-1] - srows[0] + 1))
        aligned = align_to_bbox(crop_object(synth, sfg, sbox), bbox)

        sil = silhouette_mask(self.SPEC, target, (512, 512), frame="fit")
        oracle_mask = oracles.letterbox_mask(sil, bbox.width, bbox.height)
        return oracles.iou(aligned.mask, oracle_mask)

    @pytest.mark.parametrize("d_az,d_el", [
        (30.0, 0.0), (-45.0, 8.0), (12.0, -12.0), (70.0, 15.0),
    ])
    def test_chain_iou_against_direct_render(self, d_az, d_el):
        assert self.chain_iou(d_az, d_el) >= 0.98
