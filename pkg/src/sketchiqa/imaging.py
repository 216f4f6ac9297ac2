"""Grayscale image primitives: conversion, filtering, gradients, decimation, file IO.

Images are plain 2-D ``float64`` numpy arrays holding luminance in [0, 255].
Filtering is correlation-style (kernels are not flipped).
"""
from __future__ import annotations

import enum
import math
import os
import tempfile
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import FormatError, ParameterError, ShapeError, SizeError

__all__ = [
    "BorderMode",
    "PREWITT_X",
    "SCHARR_X",
    "as_image",
    "to_gray",
    "convolve_2d",
    "correlate_separable",
    "gaussian_kernel",
    "gaussian_taps",
    "gaussian_blur",
    "downsample2",
    "block_average",
    "gradient_magnitude",
    "load_image",
    "save_png",
]


class BorderMode(enum.Enum):
    VALID = "valid"
    REPLICATE = "replicate"
    SYMMETRIC = "symmetric"


# scipy.ndimage names; VALID computes with zero fill and crops the border away.
_NDIMAGE_MODE = {
    BorderMode.VALID: "constant",
    BorderMode.REPLICATE: "nearest",
    BorderMode.SYMMETRIC: "reflect",
}

PREWITT_X = np.array([[1.0, 0.0, -1.0]] * 3) / 3.0
SCHARR_X = np.array([[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]]) / 16.0
_GRADIENT_TAPS = {"prewitt": PREWITT_X, "scharr": SCHARR_X}


def as_image(img, name: str = "image") -> np.ndarray:
    """Validate and promote ``img`` to a 2-D float64 array with finite values."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


def to_gray(red, green, blue) -> np.ndarray:
    """Luma combination 0.299 R + 0.587 G + 0.114 B of three equally sized planes."""
    r, g, b = (np.asarray(p, dtype=np.float64) for p in (red, green, blue))
    if not (r.shape == g.shape == b.shape):
        raise ShapeError(f"plane shapes differ: {r.shape}, {g.shape}, {b.shape}")
    return as_image(0.299 * r + 0.587 * g + 0.114 * b)


def _check_kernel(k) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
        raise ParameterError(f"kernel must be square with odd size, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise ParameterError("kernel taps must be finite")
    return k


def _crop_valid(out: np.ndarray, half_r: int, half_c: int) -> np.ndarray:
    return out[half_r:out.shape[0] - half_r, half_c:out.shape[1] - half_c]


def convolve_2d(img, k, mode: BorderMode = BorderMode.REPLICATE) -> np.ndarray:
    """Slide ``k`` over ``img`` without flipping it.

    VALID returns ``(rows - size + 1, cols - size + 1)``; the padded modes keep
    the input shape.
    """
    img = as_image(img)
    k = _check_kernel(k)
    mode = BorderMode(mode)
    size = k.shape[0]
    if mode is BorderMode.VALID and (img.shape[0] < size or img.shape[1] < size):
        raise SizeError(f"image {img.shape} smaller than {size}x{size} kernel in valid mode")
    out = ndimage.correlate(img, k, mode=_NDIMAGE_MODE[mode], cval=0.0)
    if mode is BorderMode.VALID:
        out = _crop_valid(out, size // 2, size // 2)
    return out


def correlate_separable(img: np.ndarray, taps: np.ndarray, mode: BorderMode) -> np.ndarray:
    """Correlate with ``outer(taps, taps)`` as two 1-D passes (rows then columns).

    Internal fast path for the Gaussian windows used by the metrics; no input
    validation beyond the valid-size check.
    """
    size = taps.shape[0]
    if mode is BorderMode.VALID and (img.shape[0] < size or img.shape[1] < size):
        raise SizeError(f"image {img.shape} smaller than {size}x{size} window in valid mode")
    nd_mode = _NDIMAGE_MODE[mode]
    out = ndimage.correlate1d(img, taps, axis=0, mode=nd_mode, cval=0.0)
    out = ndimage.correlate1d(out, taps, axis=1, mode=nd_mode, cval=0.0)
    if mode is BorderMode.VALID:
        out = _crop_valid(out, size // 2, size // 2)
    return out


def _check_gaussian(size: int, sigma: float) -> None:
    if int(size) != size or size < 1 or size % 2 == 0:
        raise ParameterError(f"kernel size must be a positive odd integer, got {size}")
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ParameterError(f"sigma must be positive, got {sigma}")


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalized ``size x size`` Gaussian window centred on the middle tap."""
    _check_gaussian(size, sigma)
    half = size // 2
    d = np.arange(-half, half + 1, dtype=np.float64)
    dy, dx = np.meshgrid(d, d, indexing="ij")
    taps = np.exp(-(dx**2 + dy**2) / (2.0 * sigma**2))
    return taps / taps.sum()


def gaussian_taps(size: int, sigma: float) -> np.ndarray:
    """1-D normalized Gaussian; ``outer(t, t)`` equals :func:`gaussian_kernel`."""
    _check_gaussian(size, sigma)
    half = size // 2
    d = np.arange(-half, half + 1, dtype=np.float64)
    taps = np.exp(-(d**2) / (2.0 * sigma**2))
    return taps / taps.sum()


def gaussian_blur(img, sigma: float) -> np.ndarray:
    """Shape-preserving blur with a ``2*ceil(3 sigma)+1`` window and symmetric borders."""
    img = as_image(img)
    size = 2 * int(math.ceil(3.0 * sigma)) + 1
    return correlate_separable(img, gaussian_taps(size, sigma), BorderMode.SYMMETRIC)


def block_average(img, factor: int) -> np.ndarray:
    """Average disjoint ``factor x factor`` blocks; trailing partial blocks are dropped."""
    img = as_image(img)
    if factor < 1:
        raise ParameterError(f"factor must be >= 1, got {factor}")
    if factor == 1:
        return img.copy()
    rows, cols = img.shape[0] // factor, img.shape[1] // factor
    if rows < 1 or cols < 1:
        raise SizeError(f"image {img.shape} smaller than one {factor}x{factor} block")
    trimmed = img[: rows * factor, : cols * factor]
    return trimmed.reshape(rows, factor, cols, factor).mean(axis=(1, 3))


def downsample2(img) -> np.ndarray:
    img = as_image(img)
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise SizeError(f"downsample2 needs at least 2x2, got {img.shape}")
    return block_average(img, 2)


def gradient_magnitude(img, operator: str = "prewitt") -> np.ndarray:
    """sqrt(gx^2 + gy^2) with Prewitt or Scharr taps and replicated borders."""
    img = as_image(img)
    try:
        kx = _GRADIENT_TAPS[operator.lower()]
    except KeyError:
        raise ParameterError(f"unknown gradient operator {operator!r}") from None
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise SizeError(f"gradient needs at least 3x3, got {img.shape}")
    gx = ndimage.correlate(img, kx, mode="nearest")
    gy = ndimage.correlate(img, kx.T, mode="nearest")
    return np.sqrt(gx**2 + gy**2)


# -- file IO -----------------------------------------------------------------

def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or 24-bit RGB PNG / binary PGM / binary PPM file."""
    from PIL import Image, UnidentifiedImageError

    path = Path(path)
    try:
        with Image.open(path) as im:
            fmt, mode = im.format, im.mode
            if fmt not in ("PNG", "PPM"):
                raise FormatError(f"{path}: unsupported container {fmt}")
            if fmt == "PPM":
                with open(path, "rb") as fh:
                    magic = fh.read(2)
                if magic not in (b"P5", b"P6"):
                    raise FormatError(f"{path}: only binary P5/P6 netpbm is supported")
            if mode == "L":
                return as_image(np.asarray(im, dtype=np.float64), name=str(path))
            if mode == "RGB":
                rgb = np.asarray(im, dtype=np.float64)
                return to_gray(rgb[..., 0], rgb[..., 1], rgb[..., 2])
            raise FormatError(f"{path}: unsupported pixel mode {mode} (need 8-bit L or RGB)")
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as exc:
        raise FormatError(f"{path}: cannot decode image ({exc})") from exc


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the target directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_png(img, path) -> None:
    """Round half-to-even, clip to [0, 255] and store as 8-bit grayscale PNG."""
    import io

    from PIL import Image

    arr = np.clip(np.rint(as_image(img)), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())
