"""Geometric alignment of a synthesized object to a source-image region.

Pads a transparent-background crop to the target aspect, resizes it onto
the target bounding box, and derives the edge/color control signals handed
to the inpainting backend.  Everything here is pure pixel arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import AspectMismatch, EmptyMask
from .geometry import BoundingBox
from .imagebuf import ImageBuffer, luminance_u8

EDGE_LOW = 100
EDGE_HIGH = 200
COLOR_CELL = 64
ASPECT_TOLERANCE = 0.02


@dataclass(frozen=True)
class ObjectCrop:
    """An object cut out of its image: RGBA pixels, binary mask, source box.

    ``origin_bbox`` is where the content sits in the source image.  Crops
    from ``crop_object`` are tight (every border row/column touches the
    mask); padding deliberately relaxes that, so tightness is a property,
    not a constructor invariant.
    """

    image: ImageBuffer
    mask: np.ndarray
    origin_bbox: BoundingBox

    def __post_init__(self):
        if self.image.channels != 4:
            raise ValueError("ObjectCrop image must be RGBA")
        mask = np.ascontiguousarray(self.mask, dtype=bool)
        if mask.shape != (self.image.height, self.image.width):
            raise ValueError(
                f"mask shape {mask.shape} does not match image "
                f"{self.image.height}x{self.image.width}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height

    @property
    def aspect(self) -> float:
        return self.width / self.height

    @property
    def is_tight(self) -> bool:
        m = self.mask
        return bool(m.any() and m[0].any() and m[-1].any()
                    and m[:, 0].any() and m[:, -1].any())

    def save(self, path_base: str | Path) -> None:
        """Write ``<base>.png`` (RGBA) and ``<base>.json`` (origin bbox)."""
        base = Path(path_base)
        base.with_suffix(".png").write_bytes(self.image.to_png())
        sidecar = {"origin_bbox": self.origin_bbox.to_json()}
        base.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")

    @staticmethod
    def load(path_base: str | Path) -> "ObjectCrop":
        base = Path(path_base)
        image = ImageBuffer.from_png(base.with_suffix(".png").read_bytes()).to_rgba()
        sidecar = json.loads(base.with_suffix(".json").read_text())
        mask = np.asarray(image.pixels)[:, :, 3] >= 128
        return ObjectCrop(image, mask, BoundingBox.from_json(sidecar["origin_bbox"]))


@dataclass(frozen=True)
class ControlSignals:
    """Inpainting guidance: binary edge map and block-averaged color map."""

    edge_map: np.ndarray
    color_map: ImageBuffer

    def __post_init__(self):
        edges = np.ascontiguousarray(self.edge_map, dtype=np.uint8)
        if edges.ndim != 2:
            raise ValueError("edge_map must be single-channel (H, W)")
        if not np.isin(edges, (0, 255)).all():
            raise ValueError("edge_map values must be 0 or 255")
        if edges.shape != (self.color_map.height, self.color_map.width):
            raise ValueError("edge_map and color_map sizes differ")
        edges.setflags(write=False)
        object.__setattr__(self, "edge_map", edges)

    def edge_image(self) -> ImageBuffer:
        return ImageBuffer.from_array(np.stack([self.edge_map] * 3, axis=-1))


def crop_object(image: ImageBuffer, mask: np.ndarray,
                bbox: BoundingBox) -> ObjectCrop:
    """Cut the masked object out of ``bbox``, tightened to the mask bounds.

    Background pixels get alpha 0; the returned ``origin_bbox`` is the
    tightened box in source-image coordinates.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (image.height, image.width):
        raise ValueError("mask must match the source image size")
    if not bbox.fits_image(image.width, image.height):
        raise ValueError(f"bbox {bbox.to_json()} outside image bounds")
    sub = mask[bbox.y0:bbox.y0 + bbox.height, bbox.x0:bbox.x0 + bbox.width]
    if not sub.any():
        raise EmptyMask(f"no masked pixels inside {bbox.to_json()}")
    rows = np.flatnonzero(sub.any(axis=1))
    cols = np.flatnonzero(sub.any(axis=0))
    tight = BoundingBox(bbox.x0 + int(cols[0]), bbox.y0 + int(rows[0]),
                        int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))
    tile = image.pixels[tight.y0:tight.y0 + tight.height,
                        tight.x0:tight.x0 + tight.width, :3]
    tile_mask = mask[tight.y0:tight.y0 + tight.height,
                     tight.x0:tight.x0 + tight.width]
    alpha = np.where(tile_mask, 255, 0).astype(np.uint8)[..., None]
    rgba = np.concatenate([tile, alpha], axis=2)
    return ObjectCrop(ImageBuffer.from_array(rgba), tile_mask, tight)


def pad_to_aspect(crop: ObjectCrop, target_aspect: float) -> ObjectCrop:
    """Pad with transparent pixels until width/height reaches the target.

    Too-tall crops gain columns split evenly left/right (odd pixel to the
    right); too-wide crops gain rows on top only, so objects keep resting
    on their lower contour.  Content pixels are translated, never altered.
    """
    if target_aspect <= 0:
        raise ValueError("target_aspect must be positive")
    w, h = crop.width, crop.height
    pad_left = pad_top = 0
    new_w, new_h = w, h
    if w / h < target_aspect:
        new_w = max(w, int(math.floor(h * target_aspect + 0.5)))
        pad_left = (new_w - w) // 2
    elif w / h > target_aspect:
        new_h = max(h, int(math.floor(w / target_aspect + 0.5)))
        pad_top = new_h - h
    if (new_w, new_h) == (w, h):
        return crop
    canvas = np.zeros((new_h, new_w, 4), dtype=np.uint8)
    canvas[pad_top:pad_top + h, pad_left:pad_left + w] = crop.image.pixels
    mask = np.zeros((new_h, new_w), dtype=bool)
    mask[pad_top:pad_top + h, pad_left:pad_left + w] = crop.mask
    return ObjectCrop(ImageBuffer.from_array(canvas), mask, crop.origin_bbox)


def resize_to_bbox(crop: ObjectCrop, target: BoundingBox,
                   tolerance: float = ASPECT_TOLERANCE) -> ObjectCrop:
    """Bilinear-resample the crop to exactly the target box dimensions."""
    crop_aspect = crop.aspect
    target_aspect = target.aspect
    if abs(crop_aspect - target_aspect) / target_aspect > tolerance:
        raise AspectMismatch(crop_aspect, target_aspect, tolerance)
    src = crop.image.pixels.astype(np.float64)
    out = np.empty((target.height, target.width, 4), dtype=np.uint8)
    for ch in range(4):
        resampled = kernels.bilinear_resize(src[..., ch], target.height, target.width)
        out[..., ch] = np.clip(np.floor(resampled + 0.5), 0, 255).astype(np.uint8)
    mask_f = kernels.bilinear_resize(crop.mask.astype(np.float64),
                                     target.height, target.width)
    mask = mask_f >= 0.5
    return ObjectCrop(ImageBuffer.from_array(out), mask, target)


def align_to_bbox(crop: ObjectCrop, target: BoundingBox,
                  tolerance: float = ASPECT_TOLERANCE) -> ObjectCrop:
    """The full alignment chain: pad to the target aspect, then resize."""
    return resize_to_bbox(pad_to_aspect(crop, target.aspect), target, tolerance)


def extract_edges(image: ImageBuffer, low: int = EDGE_LOW,
                  high: int = EDGE_HIGH) -> np.ndarray:
    """Binary edge map: gradient magnitude + double-threshold hysteresis."""
    mag = kernels.grad_mag_u8(luminance_u8(image))
    return kernels.hysteresis_u8(mag, low, high)


def extract_color_map(image: ImageBuffer, cell: int = COLOR_CELL) -> ImageBuffer:
    """Block-mean color map: each cell filled with its own mean color."""
    if cell <= 0:
        raise ValueError("cell size must be positive")
    return ImageBuffer.from_array(kernels.block_mean_u8(image.pixels[..., :3], cell))


def make_control_signals(image: ImageBuffer, cell: int = COLOR_CELL,
                         low: int = EDGE_LOW, high: int = EDGE_HIGH) -> ControlSignals:
    """Edge and color guidance sized to the source image."""
    return ControlSignals(extract_edges(image, low, high),
                          extract_color_map(image, cell))
