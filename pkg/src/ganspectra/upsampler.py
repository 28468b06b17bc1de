"""Up-samplers decomposed as zero-insertion followed by convolution.

Both common up-samplers share the same structure: insert zeros between
samples to stretch the grid by an integer factor m, then convolve. The
nearest-neighbor variant fixes the kernel to the m x m all-ones box (which
makes it exact pixel replication under the (0, 0) anchor used for
even-sized kernels); the transposed-convolution variant carries an
arbitrary, possibly learned kernel that nothing forces to be low-pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ops import conv2d, embed_kernel, validate_kernel
from .spectral import BAND_HIGH, BAND_LOW, band_partition, dft2d, fftshift
from .tensor import channel_stack, like_input, validate_image

KINDS = ("transposed", "nearest", "learned")


def make_nn_kernel(m: int) -> np.ndarray:
    """The fixed nearest-neighbor kernel: an m x m box of ones."""
    if m < 2:
        raise ValueError("up-sampling factor must be >= 2")
    return np.ones((m, m), dtype=np.float64)


@dataclass(frozen=True)
class UpsamplerSpec:
    """Up-sampler parameterization: kind, factor, kernel, padding mode."""

    kind: str
    factor: int = 2
    kernel: np.ndarray = field(default=None)  # type: ignore[assignment]
    padding: str = "circular"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown up-sampler kind {self.kind!r}")
        if self.factor < 2:
            raise ValueError("up-sampling factor must be >= 2")
        if self.kind == "nearest":
            box = make_nn_kernel(self.factor)
            if self.kernel is None:
                object.__setattr__(self, "kernel", box)
            elif self.kernel.shape != box.shape or not np.array_equal(self.kernel, box):
                raise ValueError("nearest kind requires the all-ones box kernel")
        elif self.kernel is None:
            raise ValueError(f"{self.kind} kind needs an explicit kernel")
        else:
            object.__setattr__(self, "kernel", validate_kernel(self.kernel))


def zero_insert_1d(x: np.ndarray, m: int = 2) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros(m * x.size, dtype=np.float64)
    out[::m] = x
    return out


def zero_insert(img: np.ndarray, m: int = 2) -> np.ndarray:
    """Stretch to (mH, mW): out[m*i, m*j] = in[i, j], all other samples 0."""
    img = validate_image(img)
    if m < 1:
        raise ValueError("factor must be >= 1")
    stacked = channel_stack(img)
    h, w, c = stacked.shape
    out = np.zeros((m * h, m * w, c), dtype=np.float64)
    out[::m, ::m, :] = stacked
    return like_input(out, img)


def upsample(img: np.ndarray, spec: UpsamplerSpec) -> np.ndarray:
    """zero_insert by spec.factor, then convolve with spec.kernel."""
    return conv2d(zero_insert(img, spec.factor), spec.kernel, spec.padding)


def kernel_frequency_response(k: np.ndarray, h: int, w: int) -> np.ndarray:
    """Magnitude of the kernel's DFT on an h x w grid, DC-centered."""
    grid = embed_kernel(k, h, w)
    return fftshift(np.abs(dft2d(grid)[0]))


def is_low_pass(k: np.ndarray, h: int, w: int, threshold: float = 0.5) -> bool:
    """True when the mean response over the high band is at most
    threshold times the mean response over the low band."""
    resp = kernel_frequency_response(k, h, w)
    labels = band_partition(h, w)
    low = resp[labels == BAND_LOW].mean()
    high = resp[labels == BAND_HIGH].mean()
    return bool(high <= threshold * low)


# ------------------------------------------------------- kernel text format


def write_kernel_text(path, k: np.ndarray) -> None:
    """Human-editable kernel file: first line "kh kw", then one row of
    whitespace-separated decimal taps per line."""
    k = validate_kernel(k)
    kh, kw = k.shape
    lines = [f"{kh} {kw}"]
    for row in k:
        lines.append(" ".join(repr(float(t)) for t in row))
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def read_kernel_text(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing kernel header")
    kh, kw = int(tokens[0]), int(tokens[1])
    taps = tokens[2:]
    if len(taps) != kh * kw:
        raise ValueError(f"{path}: expected {kh * kw} taps, found {len(taps)}")
    return np.array([float(t) for t in taps], dtype=np.float64).reshape(kh, kw)
