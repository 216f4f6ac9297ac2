"""Structural similarity with an 11x11 Gaussian window (valid region only)."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import SizeError
from ..imaging import BorderMode, as_image, correlate_separable, gaussian_taps
from ._common import check_pair, check_same_shape
from .params import SSIMParams


class SSIMFeatures(NamedTuple):
    image: np.ndarray
    mu: np.ndarray
    var: np.ndarray


def ssim_features(img, p: SSIMParams = SSIMParams()) -> SSIMFeatures:
    """Per-image local mean and variance, reusable across many comparisons."""
    img = as_image(img)
    n = p.window_size
    if img.shape[0] < n or img.shape[1] < n:
        raise SizeError(f"SSIM needs at least {n}x{n}, got {img.shape}")
    taps = gaussian_taps(n, p.sigma)
    mu = correlate_separable(img, taps, BorderMode.VALID)
    var = correlate_separable(img * img, taps, BorderMode.VALID) - mu * mu
    return SSIMFeatures(img, mu, np.maximum(var, 0.0))


def ssim_map_from_features(fx: SSIMFeatures, fy: SSIMFeatures, p: SSIMParams = SSIMParams()) -> np.ndarray:
    check_same_shape(fx.image, fy.image)
    taps = gaussian_taps(p.window_size, p.sigma)
    cov = correlate_separable(fx.image * fy.image, taps, BorderMode.VALID) - fx.mu * fy.mu
    c1 = (p.k1 * p.dynamic_range) ** 2
    c2 = (p.k2 * p.dynamic_range) ** 2
    num = (2.0 * fx.mu * fy.mu + c1) * (2.0 * cov + c2)
    den = (fx.mu**2 + fy.mu**2 + c1) * (fx.var + fy.var + c2)
    return num / den


def ssim_map(ref, dist, p: SSIMParams = SSIMParams()) -> np.ndarray:
    ref, dist = check_pair(ref, dist)
    return ssim_map_from_features(ssim_features(ref, p), ssim_features(dist, p), p)


def ssim_value(ref, dist, p: SSIMParams = SSIMParams()) -> float:
    return float(ssim_map(ref, dist, p).mean())
