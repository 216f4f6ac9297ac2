"""Exemplar-based LLE sketch synthesis with overlap averaging.

Each overlapping patch of the input photo is matched against photo patches of
the training pairs located within ``search_radius`` pixels of the same place.
The K nearest candidates are combined with affine LLE weights, the weights are
applied to the mated sketch patches, and overlapping output patches are averaged.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    ConfigurationError,
    DataError,
    NumericalError,
    ParameterError,
    ShapeError,
    SizeError,
)
from .imaging import as_image


@dataclass(frozen=True)
class TrainingPair:
    photo: np.ndarray
    sketch: np.ndarray
    id: str

    def __post_init__(self):
        photo = as_image(self.photo, "training photo")
        sketch = as_image(self.sketch, "training sketch")
        if photo.shape != sketch.shape:
            raise ShapeError(f"pair {self.id!r}: photo {photo.shape} != sketch {sketch.shape}")
        if not self.id:
            raise DataError("training pair id must be nonempty")
        object.__setattr__(self, "photo", photo)
        object.__setattr__(self, "sketch", sketch)


@dataclass(frozen=True)
class SynthesisParams:
    patch_size: int = 8
    overlap: int = 4
    k: int = 5
    search_radius: int = 5
    lam: float = 1e-4

    def __post_init__(self):
        if self.patch_size < 1:
            raise ParameterError(f"patch_size must be positive, got {self.patch_size}")
        if not 0 <= self.overlap < self.patch_size:
            raise ParameterError(f"overlap must lie in [0, patch_size), got {self.overlap}")
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.search_radius < 0:
            raise ParameterError(f"search_radius must be >= 0, got {self.search_radius}")
        if not self.lam >= 0:
            raise ParameterError(f"lam must be >= 0, got {self.lam}")

    @property
    def stride(self) -> int:
        return self.patch_size - self.overlap


class PatchGrid(NamedTuple):
    patch_size: int
    stride: int
    row_anchors: tuple[int, ...]
    col_anchors: tuple[int, ...]

    @property
    def anchors(self) -> list[tuple[int, int]]:
        return [(r, c) for r in self.row_anchors for c in self.col_anchors]


def _axis_anchors(length: int, patch: int, stride: int) -> tuple[int, ...]:
    last = length - patch
    anchors = list(range(0, last + 1, stride))
    if anchors[-1] != last:
        anchors.append(last)
    return tuple(anchors)


def build_grid(rows: int, cols: int, params: SynthesisParams = SynthesisParams()) -> PatchGrid:
    p = params.patch_size
    if rows < p or cols < p:
        raise SizeError(f"image {rows}x{cols} smaller than patch size {p}")
    return PatchGrid(p, params.stride, _axis_anchors(rows, p, params.stride), _axis_anchors(cols, p, params.stride))


class Neighbor(NamedTuple):
    pair_index: int
    anchor: tuple[int, int]
    distance: float


class _TrainingIndex:
    """Sliding-window views over the stacked training photos and sketches."""

    def __init__(self, training: Sequence[TrainingPair], patch: int):
        if not training:
            raise ConfigurationError("training set is empty")
        shapes = {t.photo.shape for t in training}
        if len(shapes) != 1:
            raise ShapeError(f"training pairs have mixed dimensions: {sorted(shapes)}")
        ids = [t.id for t in training]
        if len(set(ids)) != len(ids):
            raise DataError("training pair ids are not unique")
        self.shape = shapes.pop()
        self.patch = patch
        photos = np.stack([t.photo for t in training])
        sketches = np.stack([t.sketch for t in training])
        # (pairs, anchor_rows, anchor_cols, patch, patch)
        self.photo_windows = sliding_window_view(photos, (patch, patch), axis=(1, 2))
        self.sketch_windows = sliding_window_view(sketches, (patch, patch), axis=(1, 2))

    def candidate_box(self, row: int, col: int, radius: int) -> tuple[slice, slice]:
        max_r, max_c = self.photo_windows.shape[1] - 1, self.photo_windows.shape[2] - 1
        return (
            slice(max(0, row - radius), min(max_r, row + radius) + 1),
            slice(max(0, col - radius), min(max_c, col + radius) + 1),
        )

    def search(self, test_patch: np.ndarray, row: int, col: int, params: SynthesisParams):
        """K nearest candidates as (pair, anchor row, anchor col, distance, photo patch) arrays."""
        rs, cs = self.candidate_box(row, col, params.search_radius)
        cands = self.photo_windows[:, rs, cs]
        n, a, b = cands.shape[:3]
        if n * a * b == 0:
            raise ConfigurationError(f"no training patches within radius of ({row}, {col})")
        flat = cands.reshape(n * a * b, -1)
        diff = flat - test_patch.reshape(1, -1)
        dist2 = np.einsum("ij,ij->i", diff, diff)
        order = np.argsort(dist2, kind="stable")[: params.k]
        pair_idx, rem = np.divmod(order, a * b)
        dr, dc = np.divmod(rem, b)
        anchor_r = dr + rs.start
        anchor_c = dc + cs.start
        return pair_idx, anchor_r, anchor_c, np.sqrt(dist2[order]), flat[order]


def find_neighbors(
    test_patch,
    position: tuple[int, int],
    training: Sequence[TrainingPair],
    params: SynthesisParams = SynthesisParams(),
) -> list[Neighbor]:
    """K nearest training photo patches anchored within ``search_radius`` (Chebyshev).

    Ties are resolved by (pair index, anchor row, anchor col).
    """
    test_patch = np.asarray(test_patch, dtype=np.float64)
    index = _TrainingIndex(training, params.patch_size)
    if test_patch.size != params.patch_size**2:
        raise ShapeError(f"test patch has {test_patch.size} values, expected {params.patch_size**2}")
    pair_idx, ar, ac, dist, _ = index.search(test_patch, position[0], position[1], params)
    return [Neighbor(int(i), (int(r), int(c)), float(d)) for i, r, c, d in zip(pair_idx, ar, ac, dist)]


def lle_weights(test_patch, neighbors, lam: float = 1e-4) -> np.ndarray:
    """Affine reconstruction weights of ``test_patch`` from the rows of ``neighbors``.

    Solves ``(G + lam * trace(G) / K * I) w = 1`` on the local Gram matrix of
    the differences ``n_i - test`` and rescales ``w`` to sum to one. Weights
    may be negative.
    """
    x = np.asarray(test_patch, dtype=np.float64).ravel()
    nb = np.asarray(neighbors, dtype=np.float64)
    nb = nb.reshape(nb.shape[0], -1) if nb.ndim > 1 else nb.reshape(1, -1)
    k = nb.shape[0]
    if k < 1:
        raise ParameterError("need at least one neighbor")
    if nb.shape[1] != x.size:
        raise ShapeError(f"neighbor length {nb.shape[1]} != test length {x.size}")
    if lam < 0:
        raise ParameterError(f"lam must be >= 0, got {lam}")
    if k == 1:
        return np.ones(1)
    diff = nb - x
    gram = diff @ diff.T
    trace = np.trace(gram)
    if trace == 0.0:
        # Every neighbor coincides with the test patch; any affine weights reconstruct it exactly.
        return np.full(k, 1.0 / k)
    system = gram + (lam * trace / k) * np.eye(k)
    if np.linalg.cond(system) > 1.0 / np.finfo(np.float64).eps:
        raise NumericalError("LLE Gram system is singular; use a regularizer lam > 0")
    w = np.linalg.solve(system, np.ones(k))
    total = w.sum()
    if total == 0.0 or not np.isfinite(total):
        raise NumericalError("LLE weights cannot be normalized; use a regularizer lam > 0")
    return w / total


def synthesize_sketch(
    photo,
    training: Sequence[TrainingPair],
    params: SynthesisParams = SynthesisParams(),
) -> np.ndarray:
    """Render ``photo`` as a sketch from the training exemplars."""
    return _synthesize(photo, _TrainingIndex(training, params.patch_size), params)


def _synthesize(photo, index: _TrainingIndex, params: SynthesisParams) -> np.ndarray:
    photo = as_image(photo, "photo")
    if index.shape != photo.shape:
        raise ShapeError(f"photo {photo.shape} does not match training dimensions {index.shape}")
    grid = build_grid(*photo.shape, params)
    p = params.patch_size
    acc = np.zeros(photo.shape)
    count = np.zeros(photo.shape)
    # Grid order (row-major anchors) fixes the accumulation order.
    for r, c in grid.anchors:
        test = photo[r:r + p, c:c + p]
        pair_idx, ar, ac, _, photo_patches = index.search(test, r, c, params)
        w = lle_weights(test, photo_patches, params.lam)
        sketch_patches = index.sketch_windows[pair_idx, ar, ac]
        acc[r:r + p, c:c + p] += np.tensordot(w, sketch_patches, axes=1)
        count[r:r + p, c:c + p] += 1.0
    return np.clip(acc / count, 0.0, 255.0)


def build_gallery(
    photos: Sequence[tuple[str, np.ndarray]],
    training: Sequence[TrainingPair],
    params: SynthesisParams = SynthesisParams(),
):
    """Synthesize a sketch for each ``(id, photo)`` and wrap them as a gallery."""
    from .recognition import Gallery, GalleryKind

    ids = [pid for pid, _ in photos]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DataError(f"duplicate identity labels: {dupes}")
    if not photos:
        return Gallery([], GalleryKind.SYNTHESIZED)
    index = _TrainingIndex(training, params.patch_size)
    entries = [(pid, _synthesize(img, index, params)) for pid, img in photos]
    return Gallery(entries, GalleryKind.SYNTHESIZED)
