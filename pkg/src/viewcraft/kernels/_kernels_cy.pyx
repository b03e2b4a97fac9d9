# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the per-pixel kernels.

Bit-identical twin of ``_kernels_py``: every formula mirrors the numpy
fallback operation-for-operation so both backends agree exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor, sqrt

cnp.import_array()


def convex_mask(Py_ssize_t height, Py_ssize_t width, pts):
    """Boolean mask of pixel centers inside a convex polygon."""
    cdef cnp.ndarray[cnp.npy_bool, ndim=2] mask = np.zeros((height, width), dtype=bool)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    if n < 3:
        return mask

    cdef double area2 = 0.0
    cdef Py_ssize_t k, k1
    cdef double x0, y0, x1, y1
    for k in range(n):
        k1 = (k + 1) % n
        x0 = p[k, 0]; y0 = p[k, 1]
        x1 = p[k1, 0]; y1 = p[k1, 1]
        area2 += x0 * y1 - x1 * y0
    if area2 == 0.0:
        return mask
    if area2 < 0.0:
        p = np.ascontiguousarray(p[::-1])

    cdef double xmin = p[0, 0], xmax = p[0, 0], ymin = p[0, 1], ymax = p[0, 1]
    for k in range(1, n):
        if p[k, 0] < xmin: xmin = p[k, 0]
        if p[k, 0] > xmax: xmax = p[k, 0]
        if p[k, 1] < ymin: ymin = p[k, 1]
        if p[k, 1] > ymax: ymax = p[k, 1]

    cdef Py_ssize_t j0 = <Py_ssize_t>floor(xmin) - 1
    cdef Py_ssize_t j1 = <Py_ssize_t>ceil(xmax) + 1
    cdef Py_ssize_t i0 = <Py_ssize_t>floor(ymin) - 1
    cdef Py_ssize_t i1 = <Py_ssize_t>ceil(ymax) + 1
    if j0 < 0: j0 = 0
    if i0 < 0: i0 = 0
    if j1 > width: j1 = width
    if i1 > height: i1 = height
    if j0 >= j1 or i0 >= i1:
        return mask

    cdef Py_ssize_t i, j
    cdef double px, py, ex, ey, cross
    cdef bint ok
    for i in range(i0, i1):
        py = (<double>i) + 0.5
        for j in range(j0, j1):
            px = (<double>j) + 0.5
            ok = True
            for k in range(n):
                k1 = (k + 1) % n
                x0 = p[k, 0]; y0 = p[k, 1]
                x1 = p[k1, 0]; y1 = p[k1, 1]
                ex = x1 - x0; ey = y1 - y0
                cross = ex * (py - y0) - ey * (px - x0)
                if not cross >= 0.0:
                    ok = False
                    break
            if ok:
                mask[i, j] = True
    return mask


def bilinear_resize(src, Py_ssize_t out_h, Py_ssize_t out_w):
    """Center-aligned bilinear resample; returns float64, caller rounds."""
    cdef cnp.ndarray s3 = np.ascontiguousarray(src, dtype=np.float64)
    cdef bint flat = s3.ndim == 2
    if flat:
        s3 = s3.reshape(s3.shape[0], s3.shape[1], 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] s = s3
    cdef Py_ssize_t h = s.shape[0], w = s.shape[1], c = s.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((out_h, out_w, c), dtype=np.float64)
    cdef double scale_y = (<double>h) / (<double>out_h)
    cdef double scale_x = (<double>w) / (<double>out_w)
    cdef Py_ssize_t oy, ox, ch, y0, y1, x0, x1
    cdef double sy, sx, fy, fx, y0f, x0f, top, bot
    for oy in range(out_h):
        sy = ((<double>oy) + 0.5) * scale_y - 0.5
        y0f = floor(sy)
        fy = sy - y0f
        y0 = <Py_ssize_t>y0f
        y1 = y0 + 1
        if y0 < 0: y0 = 0
        if y0 > h - 1: y0 = h - 1
        if y1 < 0: y1 = 0
        if y1 > h - 1: y1 = h - 1
        for ox in range(out_w):
            sx = ((<double>ox) + 0.5) * scale_x - 0.5
            x0f = floor(sx)
            fx = sx - x0f
            x0 = <Py_ssize_t>x0f
            x1 = x0 + 1
            if x0 < 0: x0 = 0
            if x0 > w - 1: x0 = w - 1
            if x1 < 0: x1 = 0
            if x1 > w - 1: x1 = w - 1
            for ch in range(c):
                top = (1.0 - fx) * s[y0, x0, ch] + fx * s[y0, x1, ch]
                bot = (1.0 - fx) * s[y1, x0, ch] + fx * s[y1, x1, ch]
                out[oy, ox, ch] = (1.0 - fy) * top + fy * bot
    if flat:
        return out.reshape(out_h, out_w)
    return out


def grad_mag_u8(gray):
    """Forward-difference gradient magnitude, rounded and capped at 255."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] g = np.ascontiguousarray(gray, dtype=np.uint8)
    cdef Py_ssize_t h = g.shape[0], w = g.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty((h, w), dtype=np.uint8)
    cdef Py_ssize_t i, j
    cdef long gx, gy
    cdef double mag, v
    for i in range(h):
        for j in range(w):
            gx = (<long>g[i, j + 1] - <long>g[i, j]) if j < w - 1 else 0
            gy = (<long>g[i + 1, j] - <long>g[i, j]) if i < h - 1 else 0
            mag = sqrt(<double>(gx * gx + gy * gy))
            v = floor(mag + 0.5)
            if v > 255.0:
                v = 255.0
            out[i, j] = <cnp.uint8_t>v
    return out


def hysteresis_u8(mag, int low, int high):
    """Double-threshold hysteresis: weak pixels 8-connected to strong survive."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mag, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack = np.empty(h * w, dtype=np.int64)
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t i, j, ni, nj, di, dj
    for i in range(h):
        for j in range(w):
            if m[i, j] >= high and m[i, j] >= low:
                out[i, j] = 255
                stack[top] = i * w + j
                top += 1
    while top > 0:
        top -= 1
        i = stack[top] // w
        j = stack[top] % w
        for di in range(-1, 2):
            for dj in range(-1, 2):
                if di == 0 and dj == 0:
                    continue
                ni = i + di
                nj = j + dj
                if 0 <= ni < h and 0 <= nj < w:
                    if out[ni, nj] == 0 and m[ni, nj] >= low:
                        out[ni, nj] = 255
                        stack[top] = ni * w + nj
                        top += 1
    return out


def block_mean_u8(img, Py_ssize_t cell):
    """Mean color per cell x cell block (edge blocks smaller), round-half-up."""
    cdef cnp.ndarray a = np.ascontiguousarray(img, dtype=np.uint8)
    cdef bint flat = a.ndim == 2
    if flat:
        a = a.reshape(a.shape[0], a.shape[1], 1)
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] im = a
    cdef Py_ssize_t h = im.shape[0], w = im.shape[1], c = im.shape[2]
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] out = np.empty((h, w, c), dtype=np.uint8)
    cdef Py_ssize_t by, bx, ch, i, j, y_end, x_end
    cdef long long s, cnt, mean
    for by in range(0, h, cell):
        y_end = by + cell
        if y_end > h: y_end = h
        for bx in range(0, w, cell):
            x_end = bx + cell
            if x_end > w: x_end = w
            cnt = <long long>(y_end - by) * <long long>(x_end - bx)
            for ch in range(c):
                s = 0
                for i in range(by, y_end):
                    for j in range(bx, x_end):
                        s += im[i, j, ch]
                mean = (2 * s + cnt) // (2 * cnt)
                for i in range(by, y_end):
                    for j in range(bx, x_end):
                        out[i, j, ch] = <cnp.uint8_t>mean
    if flat:
        return np.asarray(out).reshape(h, w)
    return np.asarray(out)


def feather_composite(dst, ref, Py_ssize_t x0, Py_ssize_t y0, int feather):
    """Alpha-composite RGBA ``ref`` onto RGB ``dst`` with a linear edge ramp."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] out = np.array(dst, dtype=np.uint8, copy=True)
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] r = np.ascontiguousarray(ref, dtype=np.uint8)
    cdef Py_ssize_t bh = r.shape[0], bw = r.shape[1]
    cdef Py_ssize_t i, j, ch
    cdef double d, di, dj, t, a, m, val, f
    f = <double>feather
    for i in range(bh):
        for j in range(bw):
            di = <double>i if i < bh - 1 - i else <double>(bh - 1 - i)
            dj = <double>j if j < bw - 1 - j else <double>(bw - 1 - j)
            d = di if di < dj else dj
            if feather > 0:
                t = d / f
                if t > 1.0:
                    t = 1.0
            else:
                t = 1.0
            a = (<double>r[i, j, 3]) / 255.0
            m = t * a
            for ch in range(3):
                val = (<double>out[y0 + i, x0 + j, ch]) * (1.0 - m) \
                    + (<double>r[i, j, ch]) * m
                out[y0 + i, x0 + j, ch] = <cnp.uint8_t>floor(val + 0.5)
    return np.asarray(out)
