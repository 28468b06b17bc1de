"""Hot numeric kernels: convolution, its gradients, bilinear resampling.

Each kernel has two implementations: a loop version compiled with numba's
@njit and a vectorized pure-numpy fallback. The active path is picked once
at import time: numpy when the environment variable GANSPECTRA_DISABLE_NUMBA
is set to 1/true/yes, or when numba is not importable; numba otherwise.
``benchmarks/bench_kernels.py`` times the two paths against each other.

All kernels work on single-channel 2D float64 arrays; callers handle the
channel loop. Convolution uses true convolution semantics,

    out[i, j] = sum_{u, v} k[u, v] * img[i - u + ay, j - v + ax]

with (ay, ax) the kernel anchor and out-of-range indices wrapped (circular)
or treated as zero (zero padding).
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("GANSPECTRA_DISABLE_NUMBA", "").strip().lower()
_want_numba = _flag not in ("1", "true", "yes")

if _want_numba:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):  # identity decorator so both paths always exist
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# ---------------------------------------------------------------- numba path


@njit(cache=True)
def _conv2d_circular_nb(img, k, ay, ax):
    h, w = img.shape
    kh, kw = k.shape
    out = np.zeros((h, w), dtype=np.float64)
    # tap-major accumulation with branch wrapping; per-pixel tap order
    # matches the numpy fallback, so both paths sum in the same order
    for u in range(kh):
        sy = (ay - u) % h
        for v in range(kw):
            sx = (ax - v) % w
            c = k[u, v]
            for i in range(h):
                ii = i + sy
                if ii >= h:
                    ii -= h
                for j in range(w):
                    jj = j + sx
                    if jj >= w:
                        jj -= w
                    out[i, j] += c * img[ii, jj]
    return out


@njit(cache=True)
def _conv2d_zero_nb(img, k, ay, ax):
    h, w = img.shape
    kh, kw = k.shape
    out = np.zeros((h, w), dtype=np.float64)
    for u in range(kh):
        dy = u - ay
        i0 = 0 if dy < 0 else dy
        i1 = h if dy > 0 else h + dy
        for v in range(kw):
            dx = v - ax
            j0 = 0 if dx < 0 else dx
            j1 = w if dx > 0 else w + dx
            c = k[u, v]
            for i in range(i0, i1):
                for j in range(j0, j1):
                    out[i, j] += c * img[i - dy, j - dx]
    return out


@njit(cache=True)
def _conv2d_input_grad_nb(g, k, ay, ax):
    h, w = g.shape
    kh, kw = k.shape
    dz = np.zeros((h, w), dtype=np.float64)
    for u in range(kh):
        dy = u - ay
        p0 = 0 if dy > 0 else -dy
        p1 = h if dy < 0 else h - dy
        for v in range(kw):
            dx = v - ax
            q0 = 0 if dx > 0 else -dx
            q1 = w if dx < 0 else w - dx
            c = k[u, v]
            for p in range(p0, p1):
                for q in range(q0, q1):
                    dz[p, q] += c * g[p + dy, q + dx]
    return dz


@njit(cache=True)
def _conv2d_kernel_grad_nb(z, g, kh, kw, ay, ax):
    h, w = g.shape
    dk = np.zeros((kh, kw), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            acc = 0.0
            for i in range(h):
                ii = i - u + ay
                if ii < 0 or ii >= h:
                    continue
                for j in range(w):
                    jj = j - v + ax
                    if 0 <= jj < w:
                        acc += g[i, j] * z[ii, jj]
            dk[u, v] = acc
    return dk


@njit(cache=True)
def _resize_bilinear_nb(img, nh, nw):
    h, w = img.shape
    out = np.empty((nh, nw), dtype=np.float64)
    sy = h / nh
    sx = w / nw
    for i in range(nh):
        y = (i + 0.5) * sy - 0.5
        if y < 0.0:
            y = 0.0
        if y > h - 1.0:
            y = h - 1.0
        y0 = int(y)
        y1 = y0 + 1 if y0 + 1 < h else h - 1
        fy = y - y0
        for j in range(nw):
            x = (j + 0.5) * sx - 0.5
            if x < 0.0:
                x = 0.0
            if x > w - 1.0:
                x = w - 1.0
            x0 = int(x)
            x1 = x0 + 1 if x0 + 1 < w else w - 1
            fx = x - x0
            top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
            bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
            out[i, j] = top * (1.0 - fy) + bot * fy
    return out


# ---------------------------------------------------------------- numpy path


def _conv2d_circular_np(img, k, ay, ax):
    h, w = img.shape
    kh, kw = k.shape
    out = np.zeros((h, w), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            out += k[u, v] * np.roll(img, (u - ay, v - ax), axis=(0, 1))
    return out


def _conv2d_zero_np(img, k, ay, ax):
    h, w = img.shape
    kh, kw = k.shape
    padded = np.zeros((h + kh - 1, w + kw - 1), dtype=np.float64)
    padded[kh - 1 - ay : kh - 1 - ay + h, kw - 1 - ax : kw - 1 - ax + w] = img
    out = np.zeros((h, w), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            out += k[u, v] * padded[kh - 1 - u : kh - 1 - u + h, kw - 1 - v : kw - 1 - v + w]
    return out


def _conv2d_input_grad_np(g, k, ay, ax):
    h, w = g.shape
    kh, kw = k.shape
    padded = np.zeros((h + kh - 1, w + kw - 1), dtype=np.float64)
    padded[ay : ay + h, ax : ax + w] = g
    dz = np.zeros((h, w), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            dz += k[u, v] * padded[u : u + h, v : v + w]
    return dz


def _conv2d_kernel_grad_np(z, g, kh, kw, ay, ax):
    h, w = g.shape
    padded = np.zeros((h + kh - 1, w + kw - 1), dtype=np.float64)
    padded[kh - 1 - ay : kh - 1 - ay + h, kw - 1 - ax : kw - 1 - ax + w] = z
    dk = np.zeros((kh, kw), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            dk[u, v] = np.sum(g * padded[kh - 1 - u : kh - 1 - u + h, kw - 1 - v : kw - 1 - v + w])
    return dk


def _resize_bilinear_np(img, nh, nw):
    h, w = img.shape
    y = np.clip((np.arange(nh, dtype=np.float64) + 0.5) * (h / nh) - 0.5, 0.0, h - 1.0)
    x = np.clip((np.arange(nw, dtype=np.float64) + 0.5) * (w / nw) - 0.5, 0.0, w - 1.0)
    y0 = y.astype(np.int64)
    x0 = x.astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (y - y0)[:, None]
    fx = (x - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1.0 - fx) + img[np.ix_(y0, x1)] * fx
    bot = img[np.ix_(y1, x0)] * (1.0 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1.0 - fy) + bot * fy


if NUMBA_ENABLED:
    conv2d_circular = _conv2d_circular_nb
    conv2d_zero = _conv2d_zero_nb
    conv2d_input_grad = _conv2d_input_grad_nb
    conv2d_kernel_grad = _conv2d_kernel_grad_nb
    resize_bilinear_2d = _resize_bilinear_nb
else:
    conv2d_circular = _conv2d_circular_np
    conv2d_zero = _conv2d_zero_np
    conv2d_input_grad = _conv2d_input_grad_np
    conv2d_kernel_grad = _conv2d_kernel_grad_np
    resize_bilinear_2d = _resize_bilinear_np


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs so later calls run at speed."""
    img = np.ones((4, 4))
    k = np.ones((2, 2))
    conv2d_circular(img, k, 0, 0)
    conv2d_zero(img, k, 0, 0)
    conv2d_input_grad(img, k, 0, 0)
    conv2d_kernel_grad(img, img, 2, 2, 0, 0)
    resize_bilinear_2d(img, 3, 5)
