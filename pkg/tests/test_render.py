"""Procedural renderer: determinism, silhouettes, framing, bad input."""

import numpy as np
import pytest

from viewcraft.backends.render import (analytic_silhouette_bbox, render,
                                       silhouette_mask)
from viewcraft.backends.types import PrimitivePart, ProceduralObjectSpec
from viewcraft.errors import RenderFailure
from viewcraft.geometry import BoundingBox, SphericalView

BOX = ProceduralObjectSpec("cuboid", (1.2, 0.8, 1.0), ((180, 90, 60),),
                           texture_seed=2)
VIEW = SphericalView(33.0, 22.0, 1.0)


def mask_bbox(mask):
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return BoundingBox(int(cols[0]), int(rows[0]),
                       int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))


class TestDeterminism:
    def test_identical_bytes_for_identical_inputs(self):
        assert render(BOX, VIEW).to_png() == render(BOX, VIEW).to_png()

    def test_azimuth_period(self):
        turned = SphericalView(VIEW.azimuth + 360.0, VIEW.elevation, VIEW.radius)
        assert render(BOX, turned).to_png() == render(BOX, VIEW).to_png()

    def test_different_views_differ(self):
        other = SphericalView(VIEW.azimuth + 25.0, VIEW.elevation, VIEW.radius)
        assert render(BOX, other).to_png() != render(BOX, VIEW).to_png()


class TestSilhouette:
    def test_rendered_foreground_inside_silhouette(self):
        img = render(BOX, VIEW, (128, 128))
        sil = silhouette_mask(BOX, VIEW, (128, 128))
        fg = (np.asarray(img.pixels) < 250).any(axis=2)
        assert fg.any()
        assert not (fg & ~sil).any()

    def test_analytic_bbox_brackets_the_raster(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            v = SphericalView(rng.uniform(-180, 180), rng.uniform(-60, 60), 1.0)
            raster = mask_bbox(silhouette_mask(BOX, v, (128, 128)))
            analytic = analytic_silhouette_bbox(BOX, v, (128, 128))
            # Analytic prediction comes from continuous vertex bounds; it
            # may overshoot by a border pixel but never undershoots.
            assert analytic.x0 <= raster.x0 <= raster.x1 <= analytic.x1
            assert analytic.y0 <= raster.y0 <= raster.y1 <= analytic.y1
            assert analytic.width - raster.width <= 2
            assert analytic.height - raster.height <= 2

    def test_fit_frame_fills_one_axis(self):
        # Aspect-preserving fit: the limiting axis spans the whole frame.
        sil = silhouette_mask(BOX, VIEW, (96, 96), frame="fit")
        fills_rows = sil[0].any() and sil[-1].any()
        fills_cols = sil[:, 0].any() and sil[:, -1].any()
        assert fills_rows or fills_cols


class TestShapes:
    @pytest.mark.parametrize("shape,dims", [
        ("cuboid", (1.0, 0.7, 0.9)),
        ("cylinder", (0.8, 0.8, 1.4)),
        ("cone", (1.0, 1.0, 1.2)),
    ])
    def test_primitives_render_nonempty(self, shape, dims):
        spec = ProceduralObjectSpec(shape, dims, ((120, 140, 200),))
        img = render(spec, SphericalView(30, 20, 1.0), (96, 96))
        assert (np.asarray(img.pixels) < 250).any()

    def test_composite_parts_stack(self):
        base = PrimitivePart("cuboid", (1.0, 1.0, 0.6), ((100, 100, 100),),
                             (0.0, 0.0, 0.0))
        mast = PrimitivePart("cylinder", (0.3, 0.3, 0.9), ((200, 60, 60),),
                             (0.0, 0.0, 0.75))
        spec = ProceduralObjectSpec("composite", (1.0, 1.0, 1.5),
                                    ((100, 100, 100),), parts=(base, mast))
        solo = ProceduralObjectSpec("composite", (1.0, 1.0, 0.6),
                                    ((100, 100, 100),), parts=(base,))
        both = silhouette_mask(spec, SphericalView(0, 5, 1.0), (128, 128))
        one = silhouette_mask(solo, SphericalView(0, 5, 1.0), (128, 128))
        assert both.sum() > one.sum()

    def test_elevated_view_sees_the_footprint(self):
        # Straight above (just off the pole), azimuth 0: screen x tracks
        # world y (0.8), screen y tracks world x (1.2).
        top = silhouette_mask(BOX, SphericalView(0, 85, 1.0), (128, 128))
        assert abs(mask_bbox(top).aspect - 0.8 / 1.2) < 0.15


class TestBadInput:
    def test_zero_canvas_raises(self):
        with pytest.raises(RenderFailure):
            render(BOX, VIEW, (0, 64))

    def test_unknown_frame_mode(self):
        with pytest.raises(ValueError):
            render(BOX, VIEW, frame="stretch")
