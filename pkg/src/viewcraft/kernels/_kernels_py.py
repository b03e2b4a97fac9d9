"""Pure-numpy implementations of the per-pixel kernels.

These are the fallback twins of ``_kernels_cy``; both backends must produce
bit-identical outputs.  Every formula below is written so that each output
element is an independent chain of IEEE-754 double operations in a fixed
order (no reductions whose association order could differ), or exact integer
arithmetic.
"""

from __future__ import annotations

import math

import numpy as np


def convex_mask(height: int, width: int, pts) -> np.ndarray:
    """Boolean mask of pixel centers inside a convex polygon.

    Pixel (row i, col j) has center (j + 0.5, i + 0.5).  Points exactly on an
    edge count as inside.  Degenerate polygons give an empty mask.
    """
    pts = np.asarray(pts, dtype=np.float64)
    mask = np.zeros((height, width), dtype=bool)
    n = pts.shape[0]
    if n < 3:
        return mask
    area2 = 0.0
    for k in range(n):
        x0, y0 = pts[k, 0], pts[k, 1]
        x1, y1 = pts[(k + 1) % n, 0], pts[(k + 1) % n, 1]
        area2 += x0 * y1 - x1 * y0
    if area2 == 0.0:
        return mask
    if area2 < 0.0:
        pts = pts[::-1]

    j0 = max(0, int(math.floor(pts[:, 0].min())) - 1)
    j1 = min(width, int(math.ceil(pts[:, 0].max())) + 1)
    i0 = max(0, int(math.floor(pts[:, 1].min())) - 1)
    i1 = min(height, int(math.ceil(pts[:, 1].max())) + 1)
    if j0 >= j1 or i0 >= i1:
        return mask

    px = np.arange(j0, j1, dtype=np.float64) + 0.5
    py = np.arange(i0, i1, dtype=np.float64) + 0.5
    inside = np.ones((i1 - i0, j1 - j0), dtype=bool)
    for k in range(n):
        x0, y0 = pts[k, 0], pts[k, 1]
        x1, y1 = pts[(k + 1) % n, 0], pts[(k + 1) % n, 1]
        ex, ey = x1 - x0, y1 - y0
        cross = ex * (py[:, None] - y0) - ey * (px[None, :] - x0)
        inside &= cross >= 0.0
    mask[i0:i1, j0:j1] = inside
    return mask


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Center-aligned bilinear resample; returns float64, caller rounds."""
    src = np.asarray(src, dtype=np.float64)
    h, w = src.shape[:2]
    scale_y = h / out_h
    scale_x = w / out_w

    sy = (np.arange(out_h, dtype=np.float64) + 0.5) * scale_y - 0.5
    sx = (np.arange(out_w, dtype=np.float64) + 0.5) * scale_x - 0.5
    y0f = np.floor(sy)
    x0f = np.floor(sx)
    fy = sy - y0f
    fx = sx - x0f
    y0 = np.clip(y0f.astype(np.int64), 0, h - 1)
    y1 = np.clip(y0f.astype(np.int64) + 1, 0, h - 1)
    x0 = np.clip(x0f.astype(np.int64), 0, w - 1)
    x1 = np.clip(x0f.astype(np.int64) + 1, 0, w - 1)

    p00 = src[y0][:, x0]
    p01 = src[y0][:, x1]
    p10 = src[y1][:, x0]
    p11 = src[y1][:, x1]
    if src.ndim == 3:
        fx_r = fx[None, :, None]
        fy_r = fy[:, None, None]
    else:
        fx_r = fx[None, :]
        fy_r = fy[:, None]
    top = (1.0 - fx_r) * p00 + fx_r * p01
    bot = (1.0 - fx_r) * p10 + fx_r * p11
    return (1.0 - fy_r) * top + fy_r * bot


def grad_mag_u8(gray: np.ndarray) -> np.ndarray:
    """Forward-difference gradient magnitude, rounded and capped at 255."""
    g = np.asarray(gray, dtype=np.int64)
    h, w = g.shape
    gx = np.zeros((h, w), dtype=np.int64)
    gy = np.zeros((h, w), dtype=np.int64)
    gx[:, : w - 1] = g[:, 1:] - g[:, : w - 1]
    gy[: h - 1, :] = g[1:, :] - g[: h - 1, :]
    mag = np.sqrt((gx * gx + gy * gy).astype(np.float64))
    return np.minimum(255.0, np.floor(mag + 0.5)).astype(np.uint8)


def hysteresis_u8(mag: np.ndarray, low: int, high: int) -> np.ndarray:
    """Double-threshold hysteresis: weak pixels 8-connected to strong survive."""
    m = np.asarray(mag)
    strong = m >= high
    weak = m >= low
    cur = strong & weak
    while True:
        grown = cur.copy()
        grown[1:, :] |= cur[:-1, :]
        grown[:-1, :] |= cur[1:, :]
        grown[:, 1:] |= cur[:, :-1]
        grown[:, :-1] |= cur[:, 1:]
        grown[1:, 1:] |= cur[:-1, :-1]
        grown[:-1, :-1] |= cur[1:, 1:]
        grown[1:, :-1] |= cur[:-1, 1:]
        grown[:-1, 1:] |= cur[1:, :-1]
        grown &= weak
        grown |= cur
        if np.array_equal(grown, cur):
            break
        cur = grown
    return cur.astype(np.uint8) * 255


def block_mean_u8(img: np.ndarray, cell: int) -> np.ndarray:
    """Mean color per cell x cell block (edge blocks smaller), round-half-up."""
    img = np.asarray(img)
    h, w = img.shape[:2]
    flat = img.reshape(h, w, -1).astype(np.int64)
    ys = np.arange(0, h, cell)
    xs = np.arange(0, w, cell)
    colsum = np.add.reduceat(flat, ys, axis=0)
    blocksum = np.add.reduceat(colsum, xs, axis=1)
    bh = np.minimum(ys + cell, h) - ys
    bw = np.minimum(xs + cell, w) - xs
    count = (bh[:, None] * bw[None, :])[..., None]
    mean = (2 * blocksum + count) // (2 * count)
    out = np.repeat(np.repeat(mean, bh, axis=0), bw, axis=1).astype(np.uint8)
    return out.reshape(img.shape)


def feather_composite(dst: np.ndarray, ref: np.ndarray, x0: int, y0: int,
                      feather: int) -> np.ndarray:
    """Alpha-composite RGBA ``ref`` onto RGB ``dst`` at (x0, y0).

    Blend weight ramps linearly from 0 at the box border to 1 after
    ``feather`` pixels, multiplied by the reference alpha.  ``feather <= 0``
    is plain alpha-over.  The box must lie inside ``dst``.
    """
    out = np.array(dst, dtype=np.uint8, copy=True)
    bh, bw = ref.shape[:2]
    i = np.arange(bh, dtype=np.float64)[:, None]
    j = np.arange(bw, dtype=np.float64)[None, :]
    d = np.minimum(np.minimum(i, bh - 1 - i), np.minimum(j, bw - 1 - j))
    if feather > 0:
        t = np.minimum(1.0, d / float(feather))
    else:
        t = np.ones_like(d)
    a = ref[..., 3].astype(np.float64) / 255.0
    m = (t * a)[..., None]
    region = out[y0:y0 + bh, x0:x0 + bw].astype(np.float64)
    val = region * (1.0 - m) + ref[..., :3].astype(np.float64) * m
    out[y0:y0 + bh, x0:x0 + bw] = np.floor(val + 0.5).astype(np.uint8)
    return out
