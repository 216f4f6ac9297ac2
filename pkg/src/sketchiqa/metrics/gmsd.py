"""Gradient magnitude similarity deviation (lower is better)."""
from __future__ import annotations

import numpy as np

from ..errors import SizeError
from ..imaging import as_image, downsample2, gradient_magnitude
from ._common import check_pair, check_same_shape
from .params import GMSDParams


def gmsd_features(img) -> np.ndarray:
    """Prewitt gradient magnitude of the 2x2-averaged image."""
    img = as_image(img)
    if img.shape[0] < 6 or img.shape[1] < 6:
        raise SizeError(f"GMSD needs at least 6x6 so the half-size image supports 3x3 gradients, got {img.shape}")
    return gradient_magnitude(downsample2(img), "prewitt")


def gms_map(g1: np.ndarray, g2: np.ndarray, p: GMSDParams = GMSDParams()) -> np.ndarray:
    check_same_shape(g1, g2)
    return (2.0 * g1 * g2 + p.c) / (g1 * g1 + g2 * g2 + p.c)


def gmsd_from_features(g1: np.ndarray, g2: np.ndarray, p: GMSDParams = GMSDParams()) -> float:
    return float(np.std(gms_map(g1, g2, p)))


def gmsd_value(ref, dist, p: GMSDParams = GMSDParams()) -> float:
    ref, dist = check_pair(ref, dist)
    return gmsd_from_features(gmsd_features(ref), gmsd_features(dist), p)
