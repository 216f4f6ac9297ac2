"""CMC curves, the repeated random-split protocol, and CSV/JSON reports."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, ParameterError, ShapeError
from .imaging import atomic_write_bytes
from .metrics import POLARITY, MetricKind, MetricParams, Polarity, compare, prepare
from .recognition import (
    EIGENFACE,
    KNN,
    Gallery,
    MatchResult,
    eigenface_train,
    knn_direct,
    match_probe,
)

Labeled = Sequence[tuple[str, np.ndarray]]


@dataclass(frozen=True)
class CMCCurve:
    """Cumulative match characteristic stored as integer hit counts per rank."""

    hits: tuple[int, ...]  # hits[k-1] = probes whose mate is at rank <= k
    probe_count: int

    def __post_init__(self):
        if self.probe_count < 1:
            raise ParameterError("probe_count must be positive")
        if any(b < a for a, b in zip(self.hits, self.hits[1:])):
            raise DataError("CMC hit counts must be nondecreasing")

    @property
    def accuracies(self) -> np.ndarray:
        return np.asarray(self.hits, dtype=np.float64) / self.probe_count

    def rank(self, k: int) -> float:
        return self.hits[k - 1] / self.probe_count


def cmc(results: Sequence[MatchResult], truth: Mapping[str, str] | None = None) -> CMCCurve:
    """Cumulative rank-k identification rates.

    ``truth`` maps probe id to gallery id; by default a probe's mate shares its id.
    """
    if not results:
        raise DataError("no match results")
    size = len(results[0].ranking)
    counts = np.zeros(size, dtype=np.int64)
    for res in results:
        if len(res.ranking) != size:
            raise DataError("rankings have different lengths")
        if truth is None:
            mate = res.probe_id
        elif res.probe_id in truth:
            mate = truth[res.probe_id]
        else:
            raise DataError(f"probe {res.probe_id!r} has no truth entry")
        counts[res.rank_of(mate) - 1] += 1
    return CMCCurve(tuple(int(c) for c in np.cumsum(counts)), len(results))


@dataclass(frozen=True)
class SplitStats:
    hits: tuple[int, ...]  # rank-1 hits per repeat
    probe_count: int
    detail: dict = field(default_factory=dict)

    @property
    def rank1(self) -> np.ndarray:
        return np.asarray(self.hits, dtype=np.float64) / self.probe_count

    @property
    def mean(self) -> float:
        return float(self.rank1.mean())

    @property
    def std(self) -> float:
        return float(self.rank1.std())


@dataclass
class EvalReport:
    curves: dict[tuple[str, str], CMCCurve] = field(default_factory=dict)
    splits: dict[tuple[str, str], SplitStats] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def merge(self, other: "EvalReport") -> "EvalReport":
        clash = (set(self.curves) & set(other.curves)) | (set(self.splits) & set(other.splits))
        if clash:
            raise DataError(f"duplicate (method, metric) entries: {sorted(clash)}")
        self.curves.update(other.curves)
        self.splits.update(other.splits)
        return self


def params_hash(config: Mapping) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _metadata(p: MetricParams, **extra) -> dict:
    config = {"metrics": p.to_dict(), **extra}
    return {"config": config, "params_hash": params_hash(config)}


def _check_probes(probes: Labeled, gallery: Gallery) -> None:
    known = set(gallery.ids)
    missing = [pid for pid, _ in probes if pid not in known]
    if missing:
        raise DataError(f"probe ids without a gallery mate: {missing}")
    for pid, img in probes:
        if np.shape(img) != gallery.shape:
            raise ShapeError(f"probe {pid!r} shape {np.shape(img)} != gallery {gallery.shape}")


def evaluate_framework(
    probes: Labeled,
    gallery: Gallery,
    kinds: Iterable,
    p: MetricParams = MetricParams(),
    method: str = "gallery",
    workers: int = 1,
) -> EvalReport:
    """CMC per IQA metric plus the pixel K-NN baseline on one gallery."""
    _check_probes(probes, gallery)
    kinds = [MetricKind.parse(k) for k in kinds]

    def run(fn) -> list[MatchResult]:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(fn, probes))
        return [fn(pr) for pr in probes]

    report = EvalReport(metadata=_metadata(p, kinds=[k.value for k in kinds]))
    for kind in kinds:
        gallery.features(kind, p)  # warm the cache before any threads start
        results = run(lambda pr, kind=kind: match_probe(pr[1], gallery, kind, p, probe_id=pr[0]))
        report.curves[(method, kind.value)] = cmc(results)
    results = run(lambda pr: knn_direct(pr[1], gallery, probe_id=pr[0]))
    report.curves[(method, KNN)] = cmc(results)
    return report


def compare_methods(
    galleries: Mapping[str, Gallery] | Sequence[tuple[str, Gallery]],
    probes: Labeled,
    kinds: Iterable,
    p: MetricParams = MetricParams(),
    workers: int = 1,
) -> EvalReport:
    """Method x metric CMC grid over several galleries built from different synthesizers."""
    items = list(galleries.items()) if isinstance(galleries, Mapping) else list(galleries)
    kinds = [MetricKind.parse(k) for k in kinds]
    report = EvalReport(metadata=_metadata(p, kinds=[k.value for k in kinds], galleries=[n for n, _ in items]))
    for name, gallery in items:
        report.merge(evaluate_framework(probes, gallery, kinds, p, method=name, workers=workers))
    return report


# -- repeated random splits --------------------------------------------------

@dataclass(frozen=True)
class SplitProtocol:
    train_count: int = 150
    repeats: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.train_count < 1:
            raise ParameterError(f"train_count must be positive, got {self.train_count}")
        if self.repeats < 1:
            raise ParameterError(f"repeats must be >= 1, got {self.repeats}")

    def split(self, ids: Sequence[str], repeat: int) -> tuple[list[str], list[str]]:
        """Train/test identities for one repeat; both lists keep the order of ``ids``."""
        if self.train_count >= len(ids):
            raise ParameterError(f"train_count {self.train_count} must be below identity count {len(ids)}")
        rng = np.random.Generator(np.random.PCG64(self.seed + repeat))
        chosen = set(rng.permutation(len(ids))[: self.train_count].tolist())
        train = [i for n, i in enumerate(ids) if n in chosen]
        test = [i for n, i in enumerate(ids) if n not in chosen]
        return train, test


@dataclass(frozen=True)
class EigenfaceSpec:
    """Eigenface configuration: fixed retained variance, or a sweep over dimensions."""

    retain: float = 0.99
    sweep: bool = False
    sweep_step: int = 5


def _rank1_hits(scores: np.ndarray, higher_is_better: bool) -> int:
    """Probe i's mate is column i; ties go to the earliest column."""
    best = np.argmax(scores, axis=1) if higher_is_better else np.argmin(scores, axis=1)
    return int(np.sum(best == np.arange(scores.shape[0])))


def _score_matrix(kind: MetricKind, probes: Sequence[np.ndarray], gallery: Sequence[np.ndarray], p: MetricParams) -> np.ndarray:
    gfeat = [prepare(kind, g, p) for g in gallery]
    out = np.empty((len(probes), len(gallery)))
    for i, probe in enumerate(probes):
        ref = prepare(kind, probe, p)
        out[i] = [compare(kind, ref, f, p).value for f in gfeat]
    return out


def _sweep_dims(full: int, step: int) -> list[int]:
    return sorted(set(list(range(step, full, step)) + [full]))


def _eigen_repeat(
    synth_imgs: np.ndarray,
    drawn_imgs: np.ndarray,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    spec: EigenfaceSpec,
) -> dict[int, int]:
    """Rank-1 hits keyed by retained dimension (a single key unless sweeping)."""
    pooled = np.concatenate([synth_imgs[train_idx], drawn_imgs[train_idx]])
    model = eigenface_train(list(pooled), retain=spec.retain)
    dims = _sweep_dims(model.basis.shape[0], spec.sweep_step) if spec.sweep else [model.dim]
    gallery = synth_imgs[test_idx].reshape(len(test_idx), -1) - model.mean
    probes = drawn_imgs[test_idx].reshape(len(test_idx), -1) - model.mean
    gcoef_full = gallery @ model.basis.T
    pcoef_full = probes @ model.basis.T
    hits = {}
    for d in dims:
        g, q = gcoef_full[:, :d], pcoef_full[:, :d]
        dist = np.sqrt(((q[:, None, :] - g[None, :, :]) ** 2).sum(axis=2))
        hits[d] = _rank1_hits(dist, higher_is_better=False)
    return hits


def repeated_split_eval(
    synth: Labeled,
    drawn: Labeled,
    protocol: SplitProtocol,
    kinds: Iterable = (),
    eigenface: EigenfaceSpec | None = EigenfaceSpec(),
    p: MetricParams = MetricParams(),
    method: str = "synth",
    workers: int = 1,
) -> EvalReport:
    """Average rank-1 over seeded random splits.

    Each repeat draws ``train_count`` identities with generator seed
    ``seed + repeat``; Eigenface trains on their synthesized and drawn sketches
    pooled, and every method is scored on the held-out identities with the
    synthesized sketches as gallery and the drawn sketches as probes.
    """
    synth_map, drawn_map = dict(synth), dict(drawn)
    if len(synth_map) != len(synth) or len(drawn_map) != len(drawn):
        raise DataError("duplicate identity labels")
    if set(synth_map) != set(drawn_map):
        diff = sorted(set(synth_map) ^ set(drawn_map))
        raise DataError(f"synthesized and drawn identity sets differ: {diff}")
    ids = [i for i, _ in synth]
    kinds = [MetricKind.parse(k) for k in kinds]
    synth_imgs = np.stack([np.asarray(synth_map[i], dtype=np.float64) for i in ids])
    drawn_imgs = np.stack([np.asarray(drawn_map[i], dtype=np.float64) for i in ids])
    position = {i: n for n, i in enumerate(ids)}
    splits = [protocol.split(ids, r) for r in range(protocol.repeats)]

    # IQA scores do not depend on the split: score every (probe, gallery) pair once.
    matrices = {k: _score_matrix(k, drawn_imgs, synth_imgs, p) for k in kinds}

    def one_repeat(r: int):
        train, test = splits[r]
        test_idx = np.array([position[i] for i in test])
        out = {}
        for k, mat in matrices.items():
            out[k.value] = _rank1_hits(mat[np.ix_(test_idx, test_idx)], POLARITY[k] is Polarity.SIMILARITY)
        if eigenface is not None:
            train_idx = np.array([position[i] for i in train])
            out[EIGENFACE] = _eigen_repeat(synth_imgs, drawn_imgs, train_idx, test_idx, eigenface)
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_repeat = list(pool.map(one_repeat, range(protocol.repeats)))
    else:
        per_repeat = [one_repeat(r) for r in range(protocol.repeats)]

    test_count = len(ids) - protocol.train_count
    report = EvalReport(
        metadata=_metadata(
            p,
            kinds=[k.value for k in kinds],
            protocol={"train_count": protocol.train_count, "repeats": protocol.repeats, "seed": protocol.seed},
            eigenface=None if eigenface is None else vars(eigenface),
        )
    )
    report.metadata["seed"] = protocol.seed
    for k in kinds:
        report.splits[(method, k.value)] = SplitStats(tuple(rep[k.value] for rep in per_repeat), test_count)
    if eigenface is not None:
        if eigenface.sweep:
            # Dimensions available in every repeat; report the best mean.
            common = sorted(set.intersection(*(set(rep[EIGENFACE]) for rep in per_repeat)))
            means = {d: np.mean([rep[EIGENFACE][d] for rep in per_repeat]) for d in common}
            best = max(common, key=lambda d: (means[d], -d))
            hits = tuple(rep[EIGENFACE][best] for rep in per_repeat)
            detail = {"dim": best, "sweep": {str(d): means[d] / test_count for d in common}}
        else:
            hits = tuple(next(iter(rep[EIGENFACE].values())) for rep in per_repeat)
            detail = {"retain": eigenface.retain}
        report.splits[(method, EIGENFACE)] = SplitStats(hits, test_count, detail)
    return report


# -- export ------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def report_to_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "metric", "rank", "accuracy"])
    for (method, metric), curve in report.curves.items():
        for k, acc in enumerate(curve.accuracies, start=1):
            writer.writerow([method, metric, k, _fmt(acc)])
    for (method, metric), stats in report.splits.items():
        writer.writerow([method, metric, 1, _fmt(stats.mean)])
    return buf.getvalue()


def _round6(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round6(v) for v in obj]
    return obj


def report_to_json(report: EvalReport) -> str:
    doc = {
        "version": 1,
        "metadata": report.metadata,
        "curves": [
            {
                "method": method,
                "metric": metric,
                "probe_count": c.probe_count,
                "hits": list(c.hits),
                "accuracies": [float(_fmt(a)) for a in c.accuracies],
            }
            for (method, metric), c in report.curves.items()
        ],
        "splits": [
            {
                "method": method,
                "metric": metric,
                "probe_count": s.probe_count,
                "hits": list(s.hits),
                "mean": float(_fmt(s.mean)),
                "std": float(_fmt(s.std)),
                "detail": _round6(s.detail),
            }
            for (method, metric), s in report.splits.items()
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def export_report(report: EvalReport, fmt: str, path) -> None:
    """Write ``report`` as CSV (``method,metric,rank,accuracy``) or JSON, atomically."""
    fmt = fmt.lower()
    if fmt == "csv":
        text = report_to_csv(report)
    elif fmt == "json":
        text = report_to_json(report)
    else:
        raise ParameterError(f"unknown report format {fmt!r}")
    path = Path(path)
    try:
        atomic_write_bytes(path, text.encode())
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def load_report(path) -> EvalReport:
    """Re-import a JSON report; curves and split counts are restored exactly."""
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != 1:
        raise DataError(f"{path}: unsupported report version {doc.get('version')!r}")
    report = EvalReport(metadata=doc.get("metadata", {}))
    for c in doc["curves"]:
        report.curves[(c["method"], c["metric"])] = CMCCurve(tuple(c["hits"]), c["probe_count"])
    for s in doc["splits"]:
        report.splits[(s["method"], s["metric"])] = SplitStats(tuple(s["hits"]), s["probe_count"], s.get("detail", {}))
    return report
