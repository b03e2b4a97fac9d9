"""8-bit sRGB image buffer plus a deterministic PNG codec.

Encoding is done by our own minimal writer (fixed zlib level, filter 0, no
ancillary chunks) so identical pixels always give identical bytes; the wire
protocol and the golden fixtures rely on that.  Decoding accepts arbitrary
PNGs via Pillow.
"""

from __future__ import annotations

import hashlib
import io
import struct
import zlib
from dataclasses import dataclass

import numpy as np
from PIL import Image

_PNG_SIG = b"\x89PNG\r\n\x1a\n"
_COLOR_TYPE = {1: 0, 3: 2, 4: 6}


def encode_png(arr: np.ndarray) -> bytes:
    """Deterministically encode a uint8 array (H,W), (H,W,3) or (H,W,4)."""
    a = np.ascontiguousarray(arr, dtype=np.uint8)
    if a.ndim == 2:
        a = a[:, :, None]
    h, w, c = a.shape
    if c not in _COLOR_TYPE:
        raise ValueError(f"unsupported channel count {c}")

    raw = bytearray()
    for i in range(h):
        raw.append(0)  # filter type: none
        raw.extend(a[i].tobytes())
    idat = zlib.compress(bytes(raw), 6)

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (struct.pack(">I", len(data)) + tag + data
                + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF))

    ihdr = struct.pack(">IIBBBBB", w, h, 8, _COLOR_TYPE[c], 0, 0, 0)
    return _PNG_SIG + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")


def decode_png(data: bytes) -> np.ndarray:
    """Decode any PNG (or other Pillow-readable format) to uint8 RGB/RGBA."""
    with Image.open(io.BytesIO(data)) as im:
        if im.mode in ("RGBA", "LA") or (im.mode == "P" and "transparency" in im.info):
            im = im.convert("RGBA")
        elif im.mode == "L":
            return np.array(im, dtype=np.uint8)
        else:
            im = im.convert("RGB")
        return np.array(im, dtype=np.uint8)


@dataclass(frozen=True)
class ImageBuffer:
    """Immutable uint8 image, RGB or RGBA, sRGB color space."""

    pixels: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if a.ndim != 3 or a.shape[2] not in (3, 4):
            raise ValueError(f"expected (H, W, 3|4) uint8, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "pixels", a)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def mode(self) -> str:
        return "RGB" if self.channels == 3 else "RGBA"

    def to_png(self) -> bytes:
        return encode_png(self.pixels)

    @staticmethod
    def from_png(data: bytes) -> "ImageBuffer":
        arr = decode_png(data)
        if arr.ndim == 2:
            arr = np.stack([arr] * 3, axis=-1)
        return ImageBuffer(arr)

    @staticmethod
    def from_array(arr: np.ndarray) -> "ImageBuffer":
        return ImageBuffer(np.asarray(arr, dtype=np.uint8))

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}x{self.channels}:".encode())
        h.update(self.pixels.tobytes())
        return h.hexdigest()

    def to_rgb(self, background: int = 255) -> "ImageBuffer":
        """Drop alpha by compositing over a constant background."""
        if self.channels == 3:
            return self
        a = self.pixels[..., 3].astype(np.float64)[..., None] / 255.0
        rgb = self.pixels[..., :3].astype(np.float64)
        val = rgb * a + float(background) * (1.0 - a)
        return ImageBuffer(np.floor(val + 0.5).astype(np.uint8))

    def to_rgba(self) -> "ImageBuffer":
        if self.channels == 4:
            return self
        alpha = np.full(self.pixels.shape[:2] + (1,), 255, dtype=np.uint8)
        return ImageBuffer(np.concatenate([self.pixels, alpha], axis=2))

    def same_pixels(self, other: "ImageBuffer") -> bool:
        return (self.pixels.shape == other.pixels.shape
                and np.array_equal(self.pixels, other.pixels))


def luminance_u8(image: ImageBuffer) -> np.ndarray:
    """Rec.601 luma of the RGB channels, rounded to uint8."""
    rgb = image.pixels[..., :3].astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(y + 0.5).astype(np.uint8)
