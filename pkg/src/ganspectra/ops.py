"""Core image operations: convolution, sampling, cropping, grayscale.

Convolution anchor convention: the kernel anchor sits at tap
(floor((kh-1)/2), floor((kw-1)/2)). A 1x1 or 2x2 kernel anchors at (0, 0),
a 3x3 kernel at its center. Circular padding gives exact cyclic convolution
so DFT identities hold; zero padding treats everything outside the image
as zero. All functions are pure.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .rng import SplitMix64
from .tensor import channel_stack, like_input, validate_image

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


def kernel_anchor(kh: int, kw: int) -> tuple[int, int]:
    return (kh - 1) // 2, (kw - 1) // 2


def validate_kernel(k: np.ndarray) -> np.ndarray:
    arr = np.asarray(k, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"kernel must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("kernel contains NaN or Inf")
    return arr


def conv2d(img: np.ndarray, k: np.ndarray, padding: str = "circular") -> np.ndarray:
    """Convolve each channel with k, output size unchanged.

    padding="circular" wraps indices (cyclic convolution), padding="zero"
    reads zeros outside the image.
    """
    img = validate_image(img)
    k = validate_kernel(k)
    kh, kw = k.shape
    stacked = channel_stack(img)
    h, w, c = stacked.shape
    if padding == "circular":
        if kh > h or kw > w:
            raise ValueError(f"kernel {kh}x{kw} larger than image {h}x{w} with circular padding")
        fn = kernels.conv2d_circular
    elif padding == "zero":
        fn = kernels.conv2d_zero
    else:
        raise ValueError(f"unknown padding {padding!r}")
    ay, ax = kernel_anchor(kh, kw)
    out = np.empty_like(stacked)
    for ch in range(c):
        out[:, :, ch] = fn(np.ascontiguousarray(stacked[:, :, ch]), k, ay, ax)
    return like_input(out, img)


def embed_kernel(k: np.ndarray, h: int, w: int) -> np.ndarray:
    """Place kernel taps on an h x w grid so that cyclic convolution with the
    embedded kernel equals conv2d(..., padding="circular").

    Tap (u, v) lands at ((u - ay) mod h, (v - ax) mod w).
    """
    k = validate_kernel(k)
    kh, kw = k.shape
    if kh > h or kw > w:
        raise ValueError(f"kernel {kh}x{kw} does not fit on {h}x{w} grid")
    ay, ax = kernel_anchor(kh, kw)
    out = np.zeros((h, w), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            out[(u - ay) % h, (v - ax) % w] += k[u, v]
    return out


def downsample(img: np.ndarray, m: int, mode: str = "stride") -> np.ndarray:
    """Shrink by integer factor m; "stride" keeps sample (m*i, m*j),
    "average" takes the mean of each m x m block."""
    img = validate_image(img)
    if m < 1:
        raise ValueError("factor must be >= 1")
    stacked = channel_stack(img)
    h, w, c = stacked.shape
    if h % m or w % m:
        raise ValueError(f"image {h}x{w} not divisible by factor {m}")
    if mode == "stride":
        out = stacked[::m, ::m, :].copy()
    elif mode == "average":
        out = stacked.reshape(h // m, m, w // m, m, c).mean(axis=(1, 3))
    else:
        raise ValueError(f"unknown downsample mode {mode!r}")
    return like_input(out, img)


def to_gray(img: np.ndarray) -> np.ndarray:
    """Luma conversion with weights 0.299 / 0.587 / 0.114."""
    img = validate_image(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"to_gray expects 3 channels, got shape {img.shape}")
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * img[:, :, 0] + wg * img[:, :, 1] + wb * img[:, :, 2]
    return gray[:, :, None]


def crop(img: np.ndarray, size: int, mode: str = "center", rng: SplitMix64 | None = None) -> np.ndarray:
    """size x size window; "center" uses offsets ((H-size)//2, (W-size)//2),
    "random" draws row then column offsets uniformly from the valid range."""
    img = validate_image(img)
    stacked = channel_stack(img)
    h, w, _ = stacked.shape
    if size > h or size > w:
        raise ValueError(f"crop size {size} exceeds image {h}x{w}")
    if mode == "center":
        oy, ox = (h - size) // 2, (w - size) // 2
    elif mode == "random":
        if rng is None:
            raise ValueError("random crop needs an rng")
        oy = rng.below(h - size + 1)
        ox = rng.below(w - size + 1)
    else:
        raise ValueError(f"unknown crop mode {mode!r}")
    return like_input(stacked[oy : oy + size, ox : ox + size, :].copy(), img)


def resize_bilinear(img: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel-center alignment:
    source coordinate of output pixel i is (i + 0.5) * (H / newH) - 0.5,
    clamped to the image. Same-size resize is the identity."""
    img = validate_image(img)
    if new_h < 1 or new_w < 1:
        raise ValueError("target size must be >= 1")
    stacked = channel_stack(img)
    c = stacked.shape[2]
    out = np.empty((new_h, new_w, c), dtype=np.float64)
    for ch in range(c):
        out[:, :, ch] = kernels.resize_bilinear_2d(
            np.ascontiguousarray(stacked[:, :, ch]), new_h, new_w
        )
    return like_input(out, img)
