"""DFT machinery, spectrum features, and frequency-band partitioning.

Transform convention: forward is the unnormalized sum
X(k) = sum_n x(n) exp(-i 2 pi k n / N); the inverse carries the 1/N factor.
The production transform runs on numpy's FFT; the test suite pins it to a
naive direct-summation oracle.

The spectrum feature of an image is, per channel: magnitude of the 2D DFT,
log(magnitude + 1e-10), shifted so DC sits at (H//2, W//2), then the
channel's [min, max] mapped affinely onto [-1, 1]. A degenerate channel
(constant pixels, or a flat log spectrum) maps to all zeros, which keeps
the [-1, 1] range invariant meaningful for arbitrary inputs. Normalization
is per channel so one hot channel cannot flatten the others.
"""

from __future__ import annotations

import struct
from functools import lru_cache

import numpy as np

from .tensor import channel_stack, validate_image

LOG_EPS = 1e-10

SF01_MAGIC = b"SF01"

BAND_LOW, BAND_MID, BAND_HIGH = 0, 1, 2
BAND_NAMES = {"low": BAND_LOW, "mid": BAND_MID, "high": BAND_HIGH}


def dft1d(signal: np.ndarray, inverse: bool = False) -> np.ndarray:
    """1D DFT of a length-N sequence (real or complex)."""
    arr = np.asarray(signal)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"dft1d expects a 1D sequence, got shape {arr.shape}")
    if inverse:
        return np.fft.ifft(arr).astype(np.complex128)
    return np.fft.fft(arr).astype(np.complex128)


def dft2d(img: np.ndarray, inverse: bool = False) -> list[np.ndarray]:
    """Separable 2D DFT per channel: rows first, then columns.

    Returns one (H, W) complex array per channel.
    """
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"dft2d expects an image, got shape {arr.shape}")
    out = []
    for ch in range(arr.shape[2]):
        plane = arr[:, :, ch]
        if inverse:
            spec = np.fft.ifft(np.fft.ifft(plane, axis=1), axis=0)
        else:
            spec = np.fft.fft(np.fft.fft(plane, axis=1), axis=0)
        out.append(spec.astype(np.complex128))
    return out


def fftshift(spec: np.ndarray) -> np.ndarray:
    """Circular shift by (H//2, W//2) per axis, moving DC to the center."""
    arr = np.asarray(spec)
    shifts = [s // 2 for s in arr.shape[:2]]
    return np.roll(arr, shifts, axis=(0, 1))


def ifftshift(spec: np.ndarray) -> np.ndarray:
    """Inverse of fftshift (exact for odd sizes too)."""
    arr = np.asarray(spec)
    shifts = [-(s // 2) for s in arr.shape[:2]]
    return np.roll(arr, shifts, axis=(0, 1))


def log_spectrum(img: np.ndarray) -> np.ndarray:
    """Normalized log-magnitude spectrum feature, DC-centered, in [-1, 1].

    Output is (H, W, C) float64. See the module docstring for the exact
    per-channel pipeline and the degenerate-channel rule.
    """
    img = validate_image(img)
    stacked = channel_stack(img)
    h, w, c = stacked.shape
    feat = np.zeros((h, w, c), dtype=np.float64)
    specs = dft2d(stacked)
    for ch in range(c):
        pixels = stacked[:, :, ch]
        if pixels.max() == pixels.min():
            continue  # constant channel: no structure, feature stays zero
        logmag = np.log(np.abs(specs[ch]) + LOG_EPS)
        logmag = fftshift(logmag)
        lo, hi = logmag.min(), logmag.max()
        if hi == lo:
            continue
        feat[:, :, ch] = 2.0 * (logmag - lo) / (hi - lo) - 1.0
    return feat


@lru_cache(maxsize=32)
def band_partition(h: int, w: int) -> np.ndarray:
    """Label every bin of a DC-centered h x w spectrum as 0=low, 1=mid,
    2=high by Euclidean distance from the DC bin at (h//2, w//2).

    Bins are sorted by (radius, row-major index); the three bands take the
    first, second and last near-equal third (earlier bands get the
    remainder), so band sizes differ by at most 1.
    """
    if h < 3 or w < 3:
        raise ValueError("band partition needs at least a 3x3 grid")
    cy, cx = h // 2, w // 2
    yy, xx = np.meshgrid(np.arange(h) - cy, np.arange(w) - cx, indexing="ij")
    radius = np.sqrt((yy * yy + xx * xx).astype(np.float64)).ravel()
    order = np.lexsort((np.arange(h * w), radius))
    n = h * w
    base, rem = divmod(n, 3)
    sizes = [base + (1 if i < rem else 0) for i in range(3)]
    labels = np.empty(n, dtype=np.int64)
    labels[order[: sizes[0]]] = BAND_LOW
    labels[order[sizes[0] : sizes[0] + sizes[1]]] = BAND_MID
    labels[order[sizes[0] + sizes[1] :]] = BAND_HIGH
    labels = labels.reshape(h, w)
    labels.setflags(write=False)
    return labels


def apply_band(feat: np.ndarray, labels: np.ndarray, band: str | int) -> np.ndarray:
    """Zero every bin outside the selected band; in-band values unchanged."""
    arr = np.asarray(feat, dtype=np.float64)
    stacked = channel_stack(arr)
    if labels.shape != stacked.shape[:2]:
        raise ValueError(f"band labels {labels.shape} do not match feature {stacked.shape[:2]}")
    band_id = BAND_NAMES[band] if isinstance(band, str) else band
    masked = np.where((labels == band_id)[:, :, None], stacked, 0.0)
    if arr.ndim == 2:
        return masked[:, :, 0]
    return masked


def verify_replication(signal: np.ndarray, m: int = 2) -> float:
    """Max |X'(k) - X(k mod N)| where X' is the DFT of the zero-inserted
    signal of length m*N. Exact spectrum replication means a zero return
    up to roundoff."""
    from .upsampler import zero_insert_1d

    x = np.asarray(signal, dtype=np.float64).ravel()
    big = dft1d(zero_insert_1d(x, m))
    small = dft1d(x)
    n = x.size
    idx = np.arange(m * n) % n
    return float(np.max(np.abs(big - small[idx]))) if n else 0.0


def verify_replication_2d(img: np.ndarray, m: int = 2) -> float:
    """2D analogue: zero-insert both axes, compare against the m x m tiling
    of the original spectrum."""
    from .upsampler import zero_insert

    arr = channel_stack(validate_image(img))
    worst = 0.0
    for ch in range(arr.shape[2]):
        plane = arr[:, :, ch]
        h, w = plane.shape
        big = dft2d(zero_insert(plane, m))[0]
        small = dft2d(plane)[0]
        tiled = small[np.arange(m * h)[:, None] % h, np.arange(m * w)[None, :] % w]
        worst = max(worst, float(np.max(np.abs(big - tiled))))
    return worst


# ------------------------------------------------------------------- file IO


def write_sf01(path, feat: np.ndarray, dc_centered: bool = True) -> None:
    arr = channel_stack(np.asarray(feat, dtype=np.float64))
    if np.any(arr < -1.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise ValueError("spectrum feature values must be finite and within [-1, 1]")
    h, w, c = arr.shape
    with open(path, "wb") as f:
        f.write(SF01_MAGIC)
        f.write(struct.pack("<IIIB", h, w, c, 1 if dc_centered else 0))
        f.write(arr.astype("<f4").tobytes())


def read_sf01(path) -> tuple[np.ndarray, bool]:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != SF01_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected SF01")
        h, w, c, flag = struct.unpack("<IIIB", f.read(13))
        raw = f.read(4 * h * w * c)
        if len(raw) != 4 * h * w * c:
            raise ValueError(f"{path}: truncated payload")
    data = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(h, w, c)
    return data, bool(flag)


def write_pgm(path, feat: np.ndarray) -> None:
    """8-bit binary PGM of a feature map, [-1, 1] mapped linearly onto
    [0, 255]. Multi-channel features are flattened to their channel mean."""
    arr = channel_stack(np.asarray(feat, dtype=np.float64))
    plane = arr[:, :, 0] if arr.shape[2] == 1 else arr.mean(axis=2)
    h, w = plane.shape
    scaled = np.clip(np.rint((plane + 1.0) * 127.5), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(scaled.tobytes())
