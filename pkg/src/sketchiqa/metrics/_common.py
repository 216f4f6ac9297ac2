from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..imaging import as_image


def check_pair(ref, dist) -> tuple[np.ndarray, np.ndarray]:
    ref = as_image(ref, "reference")
    dist = as_image(dist, "distorted")
    if ref.shape != dist.shape:
        raise ShapeError(f"reference {ref.shape} and distorted {dist.shape} differ in shape")
    return ref, dist


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
