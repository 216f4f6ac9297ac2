"""Identification engines.

* :func:`match_probe` scores a probe sketch (reference) against every gallery
  image (distorted) with an IQA metric and ranks best-first.
* :func:`knn_direct` ranks by Euclidean pixel distance.
* :func:`eigenface_train` / :func:`eigenface_match` are the PCA baseline.

Rankings are stable: equal scores keep gallery insertion order.
"""
from __future__ import annotations

import enum
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DataError, DegenerateDataError, ParameterError, ShapeError
from .imaging import as_image
from .metrics import MetricKind, MetricParams, Polarity, POLARITY, compare, prepare

KNN = "knn"
EIGENFACE = "eigenface"


class GalleryKind(str, enum.Enum):
    PHOTOS = "photos"
    SYNTHESIZED = "synthesized"


class Gallery:
    """Ordered, immutable list of ``(id, image)`` entries of one shape.

    Per-metric image features are cached on first use so repeated probes only
    pay for the pairwise part of each metric.
    """

    def __init__(self, entries: Sequence[tuple[str, np.ndarray]], kind: GalleryKind = GalleryKind.SYNTHESIZED):
        ids = [str(i) for i, _ in entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DataError(f"duplicate gallery ids: {dupes}")
        images = []
        for gid, img in entries:
            arr = as_image(img, f"gallery image {gid!r}").copy()
            arr.setflags(write=False)
            images.append(arr)
        shapes = {im.shape for im in images}
        if len(shapes) > 1:
            raise ShapeError(f"gallery images have mixed dimensions: {sorted(shapes)}")
        self.ids: tuple[str, ...] = tuple(ids)
        self.images: tuple[np.ndarray, ...] = tuple(images)
        self.kind = GalleryKind(kind)
        self._features: dict = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(zip(self.ids, self.images))

    def __repr__(self) -> str:
        return f"Gallery({len(self)} entries, kind={self.kind.value})"

    @property
    def shape(self) -> tuple[int, int] | None:
        return self.images[0].shape if self.images else None

    def subset(self, ids: Sequence[str]) -> "Gallery":
        lookup = dict(zip(self.ids, self.images))
        missing = [i for i in ids if i not in lookup]
        if missing:
            raise DataError(f"ids not in gallery: {missing}")
        return Gallery([(i, lookup[i]) for i in ids], self.kind)

    def features(self, kind: MetricKind, p: MetricParams) -> list:
        key = (kind, p)
        with self._lock:
            cached = self._features.get(key)
        if cached is None:
            cached = [prepare(kind, img, p) for img in self.images]
            with self._lock:
                self._features.setdefault(key, cached)
        return cached


@dataclass(frozen=True)
class MatchResult:
    probe_id: str | None
    ranking: list[tuple[str, float]]
    metric: str

    @property
    def ids(self) -> list[str]:
        return [gid for gid, _ in self.ranking]

    def rank_of(self, gallery_id: str) -> int:
        """1-based rank of ``gallery_id``."""
        for pos, (gid, _) in enumerate(self.ranking, start=1):
            if gid == gallery_id:
                return pos
        raise DataError(f"id {gallery_id!r} absent from ranking of probe {self.probe_id!r}")


def rank_scores(ids: Sequence[str], scores, higher_is_better: bool) -> list[tuple[str, float]]:
    scores = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-scores if higher_is_better else scores, kind="stable")
    return [(ids[i], float(scores[i])) for i in order]


def _check_probe(probe, gallery: Gallery) -> np.ndarray:
    if len(gallery) == 0:
        raise ConfigurationError("gallery is empty")
    probe = as_image(probe, "probe")
    if probe.shape != gallery.shape:
        raise ShapeError(f"probe {probe.shape} does not match gallery images {gallery.shape}")
    return probe


def match_probe(
    probe,
    gallery: Gallery,
    kind,
    p: MetricParams = MetricParams(),
    probe_id: str | None = None,
    workers: int = 1,
) -> MatchResult:
    """Rank the gallery for one probe; the probe is the metric's reference image."""
    kind = MetricKind.parse(kind)
    probe = _check_probe(probe, gallery)
    ref = prepare(kind, probe, p)
    feats = gallery.features(kind, p)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(lambda f: compare(kind, ref, f, p).value, feats))
    else:
        scores = [compare(kind, ref, f, p).value for f in feats]
    ranking = rank_scores(gallery.ids, scores, POLARITY[kind] is Polarity.SIMILARITY)
    return MatchResult(probe_id, ranking, kind.value)


def knn_direct(probe, gallery: Gallery, probe_id: str | None = None) -> MatchResult:
    probe = _check_probe(probe, gallery)
    stack = np.stack(gallery.images).reshape(len(gallery), -1)
    diff = stack - probe.reshape(1, -1)
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return MatchResult(probe_id, rank_scores(gallery.ids, dist, False), KNN)


# -- Eigenface ---------------------------------------------------------------

@dataclass(frozen=True)
class EigenfaceModel:
    mean: np.ndarray
    basis: np.ndarray  # (components, pixels), rows orthonormal, all positive-eigenvalue directions
    eigenvalues: np.ndarray  # covariance eigenvalues, nonincreasing
    dim: int
    shape: tuple[int, int] = field(default=(0, 0))

    @property
    def retained(self) -> np.ndarray:
        return self.basis[: self.dim]

    def with_dim(self, dim: int) -> "EigenfaceModel":
        if not 1 <= dim <= self.basis.shape[0]:
            raise ParameterError(f"dim must lie in [1, {self.basis.shape[0]}], got {dim}")
        return EigenfaceModel(self.mean, self.basis, self.eigenvalues, dim, self.shape)

    def project(self, images) -> np.ndarray:
        flat = np.stack([as_image(im).ravel() for im in images])
        if flat.shape[1] != self.mean.size:
            raise ShapeError(f"image size {flat.shape[1]} does not match model size {self.mean.size}")
        return (flat - self.mean) @ self.retained.T

    def reconstruct(self, coefficients: np.ndarray) -> np.ndarray:
        return coefficients @ self.retained + self.mean


def eigenface_train(images: Sequence[np.ndarray], retain: float = 0.99, dim: int | None = None) -> EigenfaceModel:
    """PCA through the N x N Gram matrix of the centered images.

    ``dim`` overrides the retained-variance rule when given.
    """
    if len(images) < 2:
        raise ConfigurationError("eigenface training needs at least 2 images")
    if not 0 < retain <= 1:
        raise ParameterError(f"retain must lie in (0, 1], got {retain}")
    imgs = [as_image(im) for im in images]
    shapes = {im.shape for im in imgs}
    if len(shapes) != 1:
        raise ShapeError(f"training images have mixed dimensions: {sorted(shapes)}")
    x = np.stack([im.ravel() for im in imgs])
    mean = x.mean(axis=0)
    xc = x - mean
    gram = xc @ xc.T
    vals, vecs = np.linalg.eigh(gram)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    if vals[0] <= 0:
        raise DegenerateDataError("training images are identical (zero total variance)")
    keep = vals > 1e-10 * vals[0]
    vals, vecs = vals[keep], vecs[:, keep]
    basis = (xc.T @ vecs) / np.sqrt(vals)
    q, r = np.linalg.qr(basis)
    q *= np.sign(np.diag(r))
    eigenvalues = vals / (len(imgs) - 1)

    if dim is None:
        cum = np.cumsum(eigenvalues)
        target = retain * cum[-1]
        dim = int(np.searchsorted(cum, target * (1 - 1e-12)) + 1)
        dim = min(dim, eigenvalues.size)
    model = EigenfaceModel(mean, q.T.copy(), eigenvalues, eigenvalues.size, shapes.pop())
    return model.with_dim(dim)


def eigenface_match(probe, gallery: Gallery, model: EigenfaceModel, probe_id: str | None = None) -> MatchResult:
    probe = _check_probe(probe, gallery)
    if probe.shape != model.shape:
        raise ShapeError(f"probe {probe.shape} does not match model dimensions {model.shape}")
    coeffs = model.project(gallery.images)
    pc = model.project([probe])[0]
    dist = np.sqrt(np.sum((coeffs - pc) ** 2, axis=1))
    return MatchResult(probe_id, rank_scores(gallery.ids, dist, False), EIGENFACE)
