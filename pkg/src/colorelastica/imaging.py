"""Image I/O, noise synthesis, and quality metrics.

Images are float arrays in [0, 1], shape (M, N, 3).  PNG files are 8-bit
RGB; byte values map linearly to [0, 1] on read and are rounded half-up on
write.  Noise generation uses numpy's seeded PCG64 generator, so identical
seeds give identical streams.
"""

from __future__ import annotations

import math

import numpy as np
from PIL import Image
from scipy import ndimage


def make_rng(seed) -> np.random.Generator:
    """Seeded generator; passes an existing Generator through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def add_gaussian_noise(
    f: np.ndarray, sd: float, rng, clamp: bool = True
) -> np.ndarray:
    """Add i.i.d. N(0, sd^2) noise per pixel and channel.

    With clamp=True (the default) the result is clipped to [0, 1], matching
    what an 8-bit store would hold; clamp=False keeps the analytic
    distribution, which metric calibration tests rely on.
    """
    if sd < 0:
        raise ValueError(f"sd must be nonnegative, got {sd}")
    if sd == 0:
        return f.astype(float).copy()
    out = f + make_rng(rng).normal(0.0, sd, size=f.shape)
    if clamp:
        np.clip(out, 0.0, 1.0, out=out)
    return out


def psnr(u: np.ndarray, ref: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB, peak 1, MSE pooled over channels.

    Returns +inf when the images are identical.
    """
    if u.shape != ref.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {ref.shape}")
    mse = float(np.mean((u - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    w1 = np.exp(-(x * x) / (2.0 * sigma * sigma))
    w = np.outer(w1, w1)
    return w / w.sum()


def ssim(
    u: np.ndarray,
    ref: np.ndarray,
    window_size: int = 11,
    sigma: float = 1.5,
    k1: float = 0.01,
    k2: float = 0.03,
    dynamic_range: float = 1.0,
) -> float:
    """Mean structural similarity with a Gaussian window, averaged over channels.

    The window is applied with periodic wrapping, so the score is exactly
    invariant under a simultaneous cyclic shift of both images.
    """
    if u.shape != ref.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {ref.shape}")
    if min(u.shape[0], u.shape[1]) < window_size:
        raise ValueError(
            f"image {u.shape[0]}x{u.shape[1]} is smaller than the {window_size}-pixel window"
        )
    win = _gaussian_window(window_size, sigma)
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2

    def filt(img):
        return ndimage.convolve(img, win, mode="wrap")

    scores = []
    for k in range(u.shape[2]) if u.ndim == 3 else [None]:
        x = u[:, :, k] if k is not None else u
        y = ref[:, :, k] if k is not None else ref
        mx = filt(x)
        my = filt(y)
        vx = filt(x * x) - mx * mx
        vy = filt(y * y) - my * my
        cxy = filt(x * y) - mx * my
        num = (2.0 * mx * my + c1) * (2.0 * cxy + c2)
        den = (mx * mx + my * my + c1) * (vx + vy + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


def read_png(path) -> np.ndarray:
    """Load an 8-bit RGB PNG as an (M, N, 3) float array in [0, 1]."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        return np.asarray(rgb, dtype=float) / 255.0


def write_png(path, f: np.ndarray) -> None:
    """Write an (M, N, 3) float image as 8-bit RGB, rounding half-up."""
    if f.ndim != 3 or f.shape[2] != 3:
        raise ValueError(f"expected an (M, N, 3) image, got shape {f.shape}")
    scaled = np.clip(f, 0.0, 1.0) * 255.0
    data = np.floor(scaled + 0.5).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")
