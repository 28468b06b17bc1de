"""Image tensor conventions and the RT01 raw dump format.

Images are numpy float64 arrays, either (H, W) for a single channel or
(H, W, C) with C in {1, 3}, row-major, values finite. Public operations
accept both layouts and preserve the layout of their input.

RT01 files: magic ``RT01``, then H, W, C as little-endian uint32, then
H*W*C float32 little-endian samples in row-major order.
"""

from __future__ import annotations

import struct

import numpy as np

RT01_MAGIC = b"RT01"


def validate_image(img: np.ndarray, name: str = "image") -> np.ndarray:
    """Return img as a float64 array after checking shape and finiteness."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        pass
    elif arr.ndim == 3:
        if arr.shape[2] not in (1, 3):
            raise ValueError(f"{name}: channel count must be 1 or 3, got {arr.shape[2]}")
    else:
        raise ValueError(f"{name}: expected 2 or 3 dims, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty spatial dims {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or Inf")
    return arr


def channel_stack(img: np.ndarray) -> np.ndarray:
    """View of img as (H, W, C) regardless of input layout."""
    if img.ndim == 2:
        return img[:, :, None]
    return img


def like_input(stacked: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Collapse a (H, W, 1) result back to 2D when the reference was 2D."""
    if reference.ndim == 2:
        return stacked[:, :, 0]
    return stacked


def write_rt01(path, img: np.ndarray) -> None:
    arr = channel_stack(validate_image(img))
    h, w, c = arr.shape
    with open(path, "wb") as f:
        f.write(RT01_MAGIC)
        f.write(struct.pack("<III", h, w, c))
        f.write(arr.astype("<f4").tobytes())


def read_rt01(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != RT01_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected RT01")
        h, w, c = struct.unpack("<III", f.read(12))
        raw = f.read(4 * h * w * c)
        if len(raw) != 4 * h * w * c:
            raise ValueError(f"{path}: truncated payload")
    data = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    return data.reshape(h, w, c)
