"""Corpus layout on disk and a seeded synthetic stand-in for real face data.

Directory convention::

    root/photos/<id>.png          mug-shot photos
    root/sketches/<id>.png        drawn sketches (same ids as photos)
    root/synth/<method>/<id>.png  optional pre-synthesized galleries
    root/splits/train.txt         optional, one training id per line

The ``flat`` adapter instead reads ``<id>_photo.<ext>`` / ``<id>_sketch.<ext>``
pairs from a single directory. Ids are sorted lexicographically everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, ParameterError, ShapeError
from .imaging import gradient_magnitude, load_image, save_png

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm")


@dataclass
class Corpus:
    photos: dict[str, np.ndarray]
    drawn: dict[str, np.ndarray]
    synthesized: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    train_ids: list[str] | None = None
    root: Path | None = None

    @property
    def ids(self) -> list[str]:
        return list(self.photos)

    def labeled(self, collection: dict[str, np.ndarray], ids=None) -> list[tuple[str, np.ndarray]]:
        ids = list(collection) if ids is None else ids
        return [(i, collection[i]) for i in ids]


def _uniform(images: dict[str, np.ndarray], files: dict[str, Path], what: str) -> None:
    first = None
    for key, img in images.items():
        if first is None:
            first = (key, img.shape)
        elif img.shape != first[1]:
            raise ShapeError(
                f"{files[key]}: {what} image has shape {img.shape}, expected {first[1]} like {files[first[0]]}"
            )


def _read_dir(directory: Path, what: str) -> tuple[dict[str, np.ndarray], dict[str, Path]]:
    if not directory.is_dir():
        raise DataError(f"missing {what} directory {directory}")
    files: dict[str, Path] = {}
    for path in sorted(directory.iterdir()):
        if path.name.startswith(".") or path.is_dir():
            continue
        if path.suffix.lower() not in IMAGE_SUFFIXES:
            raise FormatError(f"{path}: not a supported image file")
        if path.stem in files:
            raise DataError(f"id {path.stem!r} appears twice in {directory}")
        files[path.stem] = path
    images = {key: load_image(files[key]) for key in sorted(files)}
    _uniform(images, files, what)
    return images, files


def _read_flat(root: Path):
    photo_files: dict[str, Path] = {}
    sketch_files: dict[str, Path] = {}
    for path in sorted(root.iterdir()):
        if path.name.startswith(".") or path.is_dir():
            continue
        if path.suffix.lower() not in IMAGE_SUFFIXES:
            raise FormatError(f"{path}: not a supported image file")
        stem = path.stem
        if stem.endswith("_photo"):
            photo_files[stem[: -len("_photo")]] = path
        elif stem.endswith("_sketch"):
            sketch_files[stem[: -len("_sketch")]] = path
        else:
            raise DataError(f"{path}: flat layout expects <id>_photo or <id>_sketch names")
    photos = {k: load_image(photo_files[k]) for k in sorted(photo_files)}
    sketches = {k: load_image(sketch_files[k]) for k in sorted(sketch_files)}
    _uniform(photos, photo_files, "photo")
    _uniform(sketches, sketch_files, "sketch")
    return photos, sketches


def load_corpus(root, adapter: str = "dirs") -> Corpus:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"corpus root {root} is not a directory")
    if adapter == "dirs":
        photos, _ = _read_dir(root / "photos", "photo")
        drawn, _ = _read_dir(root / "sketches", "sketch")
    elif adapter == "flat":
        photos, drawn = _read_flat(root)
    else:
        raise ParameterError(f"unknown corpus adapter {adapter!r}")

    for key in photos:
        if key not in drawn:
            raise DataError(f"photo {key!r} has no drawn sketch")
    for key in drawn:
        if key not in photos:
            raise DataError(f"sketch {key!r} has no photo")

    synthesized: dict[str, dict[str, np.ndarray]] = {}
    synth_root = root / "synth"
    if adapter == "dirs" and synth_root.is_dir():
        for method_dir in sorted(p for p in synth_root.iterdir() if p.is_dir()):
            images, _ = _read_dir(method_dir, f"{method_dir.name} synthesized")
            extra = [k for k in images if k not in photos]
            if extra:
                raise DataError(f"synth/{method_dir.name} has ids without photos: {extra}")
            synthesized[method_dir.name] = images

    train_ids = None
    train_file = root / "splits" / "train.txt"
    if train_file.is_file():
        train_ids = [line.strip() for line in train_file.read_text().splitlines() if line.strip()]
        unknown = [i for i in train_ids if i not in photos]
        if unknown:
            raise DataError(f"{train_file}: unknown ids {unknown}")
    return Corpus(photos, drawn, synthesized, train_ids, root)


# -- synthetic corpus --------------------------------------------------------

def edge_sketch(photo: np.ndarray) -> np.ndarray:
    """Deterministic stand-in artist: 255 minus the peak-normalized Scharr gradient."""
    g = gradient_magnitude(photo, "scharr")
    peak = g.max()
    if peak == 0:
        return np.full(photo.shape, 255.0)
    return 255.0 - 255.0 * g / peak


def _texture(rng: np.random.Generator, size: int) -> np.ndarray:
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.full((size, size), 128.0)
    for _ in range(8):
        fx, fy = rng.uniform(-0.12, 0.12, size=2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        img += rng.uniform(8.0, 24.0) * np.sin(2.0 * np.pi * (fx * x + fy * y) + phase)
    img += rng.normal(0.0, 2.0, size=(size, size))
    return np.clip(img, 0.0, 255.0)


def make_synthetic_corpus(identities: int, size: int = 64, seed: int = 0) -> Corpus:
    """Seeded smooth random textures as photos, with edge-map "sketches"."""
    if identities < 2:
        raise ParameterError(f"need at least 2 identities, got {identities}")
    if size < 32:
        raise ParameterError(f"size must be >= 32, got {size}")
    rng = np.random.Generator(np.random.PCG64(seed))
    width = len(str(identities - 1))
    photos, drawn = {}, {}
    for n in range(identities):
        key = f"id{n:0{width}d}"
        photo = _texture(rng, size)
        photos[key] = photo
        drawn[key] = edge_sketch(photo)
    return Corpus(photos, drawn)


def write_corpus(corpus: Corpus, root) -> None:
    root = Path(root)
    (root / "photos").mkdir(parents=True, exist_ok=True)
    (root / "sketches").mkdir(parents=True, exist_ok=True)
    for key, img in corpus.photos.items():
        save_png(img, root / "photos" / f"{key}.png")
    for key, img in corpus.drawn.items():
        save_png(img, root / "sketches" / f"{key}.png")
    for method, images in corpus.synthesized.items():
        (root / "synth" / method).mkdir(parents=True, exist_ok=True)
        for key, img in images.items():
            save_png(img, root / "synth" / method / f"{key}.png")
    if corpus.train_ids is not None:
        (root / "splits").mkdir(exist_ok=True)
        (root / "splits" / "train.txt").write_text("".join(f"{i}\n" for i in corpus.train_ids))
