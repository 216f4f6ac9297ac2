"""Acceptance suite: one test per criterion, one PASS/FAIL/SKIP line each.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines appear in the
"acceptance criteria" summary section) or ``python3 tests/test_acceptance.py``.
Criterion 10 needs real CUFS data: point SKETCHIQA_CUFS_ROOT at a corpus root whose
synth/ holds the mwf, lle, ssd and mrf galleries.
"""
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles
from conftest import ACCEPTANCE_LINES, make_texture
from sketchiqa.cli import run
from sketchiqa.corpus import load_corpus, make_synthetic_corpus
from sketchiqa.evaluation import (
    EigenfaceSpec,
    SplitProtocol,
    cmc,
    compare_methods,
    evaluate_framework,
    repeated_split_eval,
)
from sketchiqa.imaging import gaussian_blur
from sketchiqa.metrics import MetricKind, compute_metric
from sketchiqa.recognition import Gallery, MatchResult, eigenface_train
from sketchiqa.synthesis import lle_weights

DATA_ENV = "SKETCHIQA_CUFS_ROOT"


def record(number, ok, detail, skipped=False):
    status = "SKIP" if skipped else ("PASS" if ok else "FAIL")
    line = f"[{status}] criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    if not skipped:
        assert ok, line


def test_01_metric_identity():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = {k: 0.0 for k in MetricKind}
    for _ in range(20):
        x = rng.uniform(0, 255, (64, 64))
        for k in MetricKind:
            target = 0.0 if k is MetricKind.GMSD else 1.0
            worst[k] = max(worst[k], abs(compute_metric(k, x, x.copy()).value - target))
    elapsed = time.perf_counter() - start
    ok = (worst[MetricKind.SSIM] <= 1e-9 and worst[MetricKind.FSIM] <= 1e-6
          and worst[MetricKind.VIF] <= 1e-6 and worst[MetricKind.GMSD] <= 1e-12 and elapsed < 10)
    errs = " ".join(f"{k.value}={v:.1e}" for k, v in worst.items())
    record(1, ok, f"identity over 20 images, max error {errs}, {elapsed:.1f}s")


def test_02_oracle_equivalence():
    rng = np.random.default_rng(2)
    cases = [
        (MetricKind.SSIM, 64, oracles.ssim_oracle, 1e-10),
        (MetricKind.GMSD, 64, oracles.gmsd_oracle, 1e-10),
        (MetricKind.VIF, 128, oracles.vif_oracle, 1e-8),
        (MetricKind.FSIM, 128, oracles.fsim_oracle, 1e-6),
    ]
    worst = {}
    for kind, size, oracle, _ in cases:
        err = 0.0
        for _ in range(10):
            ref = make_texture(rng, size)
            dist = np.clip(ref + rng.normal(0, 15, ref.shape), 0, 255)
            err = max(err, abs(compute_metric(kind, ref, dist).value - oracle(ref, dist)))
        worst[kind] = err
    ok = all(worst[k] <= tol for k, _, _, tol in cases)
    record(2, ok, "max |impl - oracle| " + " ".join(f"{k.value}={v:.1e}" for k, v in worst.items()))


def test_03_monotone_degradation():
    rng = np.random.default_rng(3)
    sigmas = (0.5, 1.0, 2.0, 4.0)
    good = {k: 0 for k in MetricKind}
    for _ in range(10):
        ref = make_texture(rng, 64)
        blurred = [gaussian_blur(ref, s) for s in sigmas]
        for k in MetricKind:
            v = np.array([compute_metric(k, ref, b).value for b in blurred])
            step = np.diff(v)
            good[k] += bool(np.all(step > 0) if k is MetricKind.GMSD else np.all(step < 0))
    ok = all(n >= 9 for n in good.values())
    record(3, ok, "monotone references out of 10: " + " ".join(f"{k.value}={n}" for k, n in good.items()))


def test_04_recognition_sanity():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    entries = [(f"t{i:03d}", make_texture(rng, 64)) for i in range(100)]
    probes = [(i, img + rng.normal(0, 2.0, img.shape)) for i, img in entries]
    report = evaluate_framework(probes, Gallery(entries), list(MetricKind))
    elapsed = time.perf_counter() - start
    rank1 = {m: c.rank(1) for (_, m), c in report.curves.items()}
    ok = all(v == 1.0 for v in rank1.values()) and len(rank1) == 5 and elapsed < 60
    record(4, ok, "rank-1 " + " ".join(f"{m}={v:.2f}" for m, v in rank1.items()) + f", {elapsed:.1f}s")


def _pipeline(root: Path) -> bytes:
    assert run(["gen-testdata", "--out", str(root), "--identities", "60", "--size", "64", "--seed", "5"]) == 0
    ids = sorted(p.stem for p in (root / "photos").iterdir())
    (root / "splits").mkdir()
    (root / "splits" / "train.txt").write_text("".join(f"{i}\n" for i in ids[:30]))
    assert run(["synthesize", "--corpus", str(root), "--out", str(root / "synth" / "lle")]) == 0
    out = root / "cmc.json"
    argv = ["evaluate", "--corpus", str(root), "--galleries", "lle,photos",
            "--metrics", "ssim,vif,fsim,gmsd", "--out", str(out)]
    assert run(argv) == 0
    return out.read_bytes()


@pytest.mark.slow
def test_05_end_to_end_pipeline(tmp_path):
    first = _pipeline(tmp_path / "a")
    second = _pipeline(tmp_path / "b")
    synth_a = sorted((tmp_path / "a" / "synth" / "lle").iterdir())
    synth_b = sorted((tmp_path / "b" / "synth" / "lle").iterdir())
    same_synth = [p.read_bytes() for p in synth_a] == [p.read_bytes() for p in synth_b]
    import json

    doc = json.loads(first)
    curves = {(c["method"], c["metric"]): np.array(c["hits"]) / c["probe_count"] for c in doc["curves"]}
    shaped = all(np.all(np.diff(a) >= 0) and a[-1] == 1.0 and len(a) == 30 for a in curves.values())
    knn_photos = curves[("photos", "knn")][0]
    iqa = {m: curves[("lle", m)][0] for m in ("ssim", "vif", "fsim", "gmsd")}
    dominates = all(v >= knn_photos for v in iqa.values())
    ok = shaped and dominates and first == second and same_synth
    record(5, ok, "lle rank-1 " + " ".join(f"{m}={v:.3f}" for m, v in iqa.items())
           + f" vs knn-to-photos {knn_photos:.3f}; curves ok={shaped}; byte-identical={first == second and same_synth}")


def test_06_lle_weights():
    rng = np.random.default_rng(6)
    err = sum_err = 0.0
    for _ in range(100):
        test = rng.uniform(0, 255, 64)
        nb = rng.uniform(0, 255, (5, 64))
        w = lle_weights(test, nb, 1e-4)
        err = max(err, np.max(np.abs(w - oracles.kkt_weights(test, nb, 1e-4))))
        sum_err = max(sum_err, abs(w.sum() - 1.0))
    record(6, err <= 1e-9 and sum_err <= 1e-9, f"max |w - kkt| {err:.1e}, max |sum - 1| {sum_err:.1e}")


def test_07_eigenface():
    rng = np.random.default_rng(7)
    imgs = [make_texture(rng, 32) for _ in range(20)]
    model = eigenface_train(imgs, retain=1.0)
    gram_err = np.max(np.abs(model.basis @ model.basis.T - np.eye(model.basis.shape[0])))
    recon = 0.0
    for im in imgs:
        c = im.ravel() - model.mean
        back = model.reconstruct(model.project([im]))[0] - model.mean
        recon = max(recon, np.linalg.norm(back - c) / np.linalg.norm(c))
    v = rng.normal(size=1024)
    v /= np.linalg.norm(v)
    mean = rng.uniform(50, 200, 1024)
    line = eigenface_train([(mean + t * v).reshape(32, 32) for t in rng.normal(0, 20, 12)])
    cosine = abs(float(line.retained[0] @ v))
    ok = gram_err <= 1e-8 and recon <= 1e-6 and cosine >= 1 - 1e-6 and line.dim == 1
    record(7, ok, f"gram error {gram_err:.1e}, reconstruction {recon:.1e}, 1-D |cos| {cosine:.9f}")


def test_08_cmc_random_rankings():
    rng = np.random.default_rng(8)
    ids = [f"g{i}" for i in range(100)]
    results = []
    for n in range(1000):
        order = rng.permutation(100)
        results.append(MatchResult(ids[n % 100], [(ids[j], 0.0) for j in order], "random"))
    acc = cmc(results).accuracies
    devs = {k: abs(acc[k - 1] - k / 100) for k in (1, 10, 50)}
    record(8, all(d <= 0.03 for d in devs.values()),
           "rank-k accuracy " + " ".join(f"k={k}:{acc[k - 1]:.3f}" for k in devs))


@pytest.mark.slow
def test_09_split_protocol():
    corpus = make_synthetic_corpus(50, 64, seed=9)
    rng = np.random.default_rng(9)
    # Stand-in synthesizer: a blurred, noisy version of the drawn sketch.
    synth = [(i, np.clip(gaussian_blur(corpus.drawn[i], 1.0) + rng.normal(0, 8, (64, 64)), 0, 255)) for i in corpus.ids]
    drawn = corpus.labeled(corpus.drawn)
    protocol = SplitProtocol(train_count=20, repeats=25, seed=9)
    eig = EigenfaceSpec(sweep=True)
    start = time.perf_counter()
    a = repeated_split_eval(synth, drawn, protocol, list(MetricKind), eig)
    elapsed = time.perf_counter() - start
    b = repeated_split_eval(synth, drawn, protocol, list(MetricKind), eig, workers=4)
    c = repeated_split_eval(synth, drawn, protocol, list(MetricKind), eig, workers=1)
    same = a.splits == b.splits == c.splits and a.metadata == b.metadata == c.metadata
    ok = same and elapsed < 300
    means = " ".join(f"{m}={s.mean:.3f}" for (_, m), s in a.splits.items())
    record(9, ok, f"20/30 x 25 repeats in {elapsed:.1f}s, identical across runs/threads={same}; mean rank-1 {means}")


def test_10_cufs_regression():
    root = os.environ.get(DATA_ENV)
    if not root:
        record(10, True, f"needs published CUFS galleries; set {DATA_ENV} to run", skipped=True)
        pytest.skip(f"{DATA_ENV} not set")
    corpus = load_corpus(root)
    methods = [m for m in ("mwf", "lle", "ssd", "mrf") if m in corpus.synthesized]
    if "mwf" not in methods or len(methods) < 2:
        record(10, False, f"{root} lacks synth/mwf plus at least one of lle/ssd/mrf")
    ids = sorted(set.intersection(*(set(corpus.synthesized[m]) for m in methods)))
    galleries = [(m, Gallery([(i, corpus.synthesized[m][i]) for i in ids])) for m in methods]
    report = compare_methods(galleries, corpus.labeled(corpus.drawn, ids), ["ssim", "vif"])
    ssim = {m: report.curves[(m, "ssim")].rank(1) for m in methods}
    vif_mwf = report.curves[("mwf", "vif")].rank(1)
    ordering = all(ssim["mwf"] >= v for v in ssim.values())
    headline = abs(100 * vif_mwf - 84.91) <= 1.5
    record(10, ordering and headline,
           "ssim rank-1 " + " ".join(f"{m}={100 * v:.2f}%" for m, v in ssim.items())
           + f"; vif+mwf {100 * vif_mwf:.2f}% (target 84.91 +- 1.5)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
