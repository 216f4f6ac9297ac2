"""Pixel-domain multi-scale visual information fidelity.

Scale ``s`` (1-based) uses a Gaussian window of size ``2**(S - s + 1) + 1`` with
sigma ``size / 5``. Before scales 2..S the images are smoothed with the current
scale's window (valid region) and decimated by two.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import SizeError
from ..imaging import BorderMode, as_image, correlate_separable, gaussian_taps
from ._common import check_pair, check_same_shape
from .params import VIFParams


def window_sizes(p: VIFParams) -> list[int]:
    return [2 ** (p.scales - s + 1) + 1 for s in range(1, p.scales + 1)]


def _decimate(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    return correlate_separable(img, taps, BorderMode.VALID)[::2, ::2]


class VIFLevel(NamedTuple):
    image: np.ndarray
    taps: np.ndarray
    mu: np.ndarray
    var: np.ndarray


def vif_features(img, p: VIFParams = VIFParams()) -> list[VIFLevel]:
    img = as_image(img)
    levels = []
    cur = img
    for s, n in enumerate(window_sizes(p)):
        taps = gaussian_taps(n, n / 5.0)
        if s > 0:
            if min(cur.shape) < n:
                raise SizeError(f"VIF pyramid too small at scale {s + 1}: {cur.shape} < {n}")
            cur = _decimate(cur, taps)
        if min(cur.shape) < n:
            raise SizeError(f"VIF pyramid too small at scale {s + 1}: {cur.shape} < {n}")
        mu = correlate_separable(cur, taps, BorderMode.VALID)
        var = correlate_separable(cur * cur, taps, BorderMode.VALID) - mu * mu
        levels.append(VIFLevel(cur, taps, mu, np.maximum(var, 0.0)))
    return levels


def vif_scale_terms(ref: VIFLevel, dist: VIFLevel, p: VIFParams) -> tuple[float, float]:
    """Information (numerator, denominator) contributed by one scale."""
    eps = p.eps
    cov = correlate_separable(ref.image * dist.image, ref.taps, BorderMode.VALID) - ref.mu * dist.mu
    var_x = ref.var.copy()
    var_y = dist.var

    g = cov / (var_x + eps)
    sv = var_y - g * cov

    flat_x = var_x < eps
    g[flat_x] = 0.0
    sv[flat_x] = var_y[flat_x]
    var_x[flat_x] = 0.0

    flat_y = var_y < eps
    g[flat_y] = 0.0
    sv[flat_y] = 0.0

    neg = g < 0
    sv[neg] = var_y[neg]
    g[neg] = 0.0
    sv = np.maximum(sv, eps)

    num = np.sum(np.log10(1.0 + g * g * var_x / (sv + p.noise_variance)))
    den = np.sum(np.log10(1.0 + var_x / p.noise_variance))
    return float(num), float(den)


def vif_from_features(fx: list[VIFLevel], fy: list[VIFLevel], p: VIFParams = VIFParams()) -> float:
    check_same_shape(fx[0].image, fy[0].image)
    num = den = 0.0
    for lx, ly in zip(fx, fy):
        n, d = vif_scale_terms(lx, ly, p)
        num += n
        den += d
    if den == 0.0:
        # Reference carries no signal at any scale; only a perfect copy is faithful.
        return 1.0 if all(np.array_equal(a.image, b.image) for a, b in zip(fx, fy)) else 0.0
    return num / den


def vif_value(ref, dist, p: VIFParams = VIFParams()) -> float:
    ref, dist = check_pair(ref, dist)
    return vif_from_features(vif_features(ref, p), vif_features(dist, p), p)
