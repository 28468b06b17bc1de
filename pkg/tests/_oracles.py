"""Independent oracles for the test suite.

These implement the operations straight from their definitions (literal
summations, nested loops, hand derivations) and deliberately share no code
with the production paths they check.
"""

import cmath

import numpy as np


def dft1d_loops(x, inverse=False):
    """Literal O(N^2) summation from the transform definition."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    sign = 1.0 if inverse else -1.0
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        acc = 0.0 + 0.0j
        for m in range(n):
            acc += x[m] * cmath.exp(sign * 2j * cmath.pi * k * m / n)
        out[k] = acc
    return out / n if inverse else out


def dft_matrix(n, inverse=False):
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    sign = 1.0 if inverse else -1.0
    return np.exp(sign * 2j * np.pi * k * m / n)


def dft1d_matrix(x, inverse=False):
    """Direct summation via the DFT matrix (no fast algorithm)."""
    x = np.asarray(x, dtype=np.complex128)
    out = dft_matrix(x.size, inverse) @ x
    return out / x.size if inverse else out


def dft2d_matrix(plane, inverse=False):
    """Direct double summation of a 2D transform via row/column matrices."""
    plane = np.asarray(plane, dtype=np.complex128)
    h, w = plane.shape
    out = dft_matrix(h, inverse) @ plane @ dft_matrix(w, inverse).T
    return out / (h * w) if inverse else out


def conv2d_circular_loops(img, k, ay, ax):
    """Brute-force cyclic convolution, O(H W kh kw)."""
    h, w = img.shape
    kh, kw = k.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            for u in range(kh):
                for v in range(kw):
                    out[i, j] += k[u, v] * img[(i - u + ay) % h, (j - v + ax) % w]
    return out


def conv2d_zero_loops(img, k, ay, ax):
    h, w = img.shape
    kh, kw = k.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            for u in range(kh):
                for v in range(kw):
                    ii, jj = i - u + ay, j - v + ax
                    if 0 <= ii < h and 0 <= jj < w:
                        out[i, j] += k[u, v] * img[ii, jj]
    return out


def replicate_pixels(img, m):
    """Nested-loop nearest-neighbor up-sampling: every sample copied into
    an m x m block."""
    img = np.asarray(img)
    plane = img if img.ndim == 3 else img[:, :, None]
    h, w, c = plane.shape
    out = np.zeros((m * h, m * w, c), dtype=plane.dtype)
    for i in range(h):
        for j in range(w):
            for di in range(m):
                for dj in range(m):
                    out[m * i + di, m * j + dj, :] = plane[i, j, :]
    return out if img.ndim == 3 else out[:, :, 0]


def central_difference(f, x, step=1e-5):
    """Central finite differences of scalar f over every entry of array x."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    base = x.copy().ravel()
    for i in range(base.size):
        xp = base.copy()
        xm = base.copy()
        xp[i] += step
        xm[i] -= step
        flat[i] = (f(xp.reshape(x.shape)) - f(xm.reshape(x.shape))) / (2 * step)
    return grad


def relative_error(a, b, floor=1e-8):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(float(np.max(np.abs(b))), floor)
    return float(np.max(np.abs(a - b))) / denom
