"""Command line interface.

    sketchiqa metric --kind ssim --ref a.png --dist b.png
    sketchiqa gen-testdata --out corpus --identities 60 --size 64 --seed 7
    sketchiqa synthesize --corpus corpus --out corpus/synth/lle [--params cfg.json]
    sketchiqa match --corpus corpus --gallery lle --metric fsim --probe probe.png
    sketchiqa evaluate --corpus corpus --galleries lle,photos --metrics ssim,gmsd --out cmc.csv
    sketchiqa evaluate ... --protocol split --train-count 20 --repeats 25 --seed 1 --out split.json

Exit status is 0 on success, 1 on a domain error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .config import DEFAULT_SEED, RunConfig
from .corpus import Corpus, load_corpus, make_synthetic_corpus, write_corpus
from .errors import DataError, SketchIQAError
from .evaluation import SplitProtocol, compare_methods, export_report, repeated_split_eval
from .imaging import load_image, save_png
from .metrics import MetricKind, compute_metric
from .recognition import Gallery, GalleryKind, knn_direct, match_probe
from .synthesis import TrainingPair, _TrainingIndex, _synthesize

log = logging.getLogger("sketchiqa")

PHOTOS = "photos"


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sketchiqa", description="IQA-based synthesized face sketch recognition")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="score one reference/distorted pair")
    p.add_argument("--kind", required=True, choices=[k.value for k in MetricKind])
    p.add_argument("--ref", required=True, type=Path)
    p.add_argument("--dist", required=True, type=Path)
    p.add_argument("--config", type=Path)

    p = sub.add_parser("synthesize", help="render every corpus photo as an LLE sketch")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--params", type=Path, help="JSON run config (synthesis block is used)")
    p.add_argument("--adapter", choices=["dirs", "flat"], default="dirs")

    p = sub.add_parser("match", help="rank a gallery against one probe sketch")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--gallery", required=True, help=f"synth method name or '{PHOTOS}'")
    p.add_argument("--metric", required=True, choices=[k.value for k in MetricKind] + ["knn"])
    p.add_argument("--probe", required=True, type=Path)
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--config", type=Path)
    p.add_argument("--adapter", choices=["dirs", "flat"], default="dirs")

    p = sub.add_parser("evaluate", help="CMC curves or the repeated-split protocol")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--galleries", required=True, type=_csv_list)
    p.add_argument("--metrics", required=True, type=_csv_list)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--format", choices=["csv", "json"], help="default: from --out suffix")
    p.add_argument("--protocol", choices=["framework", "split"], default="framework")
    p.add_argument("--train-count", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--eigenface-sweep", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", type=Path)
    p.add_argument("--adapter", choices=["dirs", "flat"], default="dirs")

    p = sub.add_parser("gen-testdata", help="write a seeded synthetic corpus")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--identities", type=int, default=60)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def _config(path: Path | None) -> RunConfig:
    return RunConfig.load(path) if path is not None else RunConfig()


def _gallery(corpus: Corpus, name: str, ids=None) -> Gallery:
    if name == PHOTOS:
        images, kind = corpus.photos, GalleryKind.PHOTOS
    elif name in corpus.synthesized:
        images, kind = corpus.synthesized[name], GalleryKind.SYNTHESIZED
    else:
        raise DataError(f"unknown gallery {name!r}; available: {[PHOTOS, *corpus.synthesized]}")
    keys = [i for i in images if ids is None or i in ids]
    return Gallery([(i, images[i]) for i in keys], kind)


def cmd_metric(args) -> int:
    cfg = _config(args.config)
    score = compute_metric(args.kind, load_image(args.ref), load_image(args.dist), cfg.metrics)
    print(f"{args.kind} {score.value:.6f} {score.polarity.value}")
    return 0


def cmd_synthesize(args) -> int:
    cfg = _config(args.params)
    corpus = load_corpus(args.corpus, args.adapter)
    train_ids = corpus.train_ids if corpus.train_ids is not None else corpus.ids
    pairs = {i: TrainingPair(corpus.photos[i], corpus.drawn[i], i) for i in train_ids}
    shared = _TrainingIndex(list(pairs.values()), cfg.synthesis.patch_size)
    args.out.mkdir(parents=True, exist_ok=True)
    for pid, photo in corpus.photos.items():
        if pid in pairs:
            # Never let a photo see its own drawn sketch.
            index = _TrainingIndex([p for k, p in pairs.items() if k != pid], cfg.synthesis.patch_size)
        else:
            index = shared
        save_png(_synthesize(photo, index, cfg.synthesis), args.out / f"{pid}.png")
        log.info("synthesized %s", pid)
    return 0


def cmd_match(args) -> int:
    cfg = _config(args.config)
    corpus = load_corpus(args.corpus, args.adapter)
    gallery = _gallery(corpus, args.gallery)
    probe = load_image(args.probe)
    if args.metric == "knn":
        result = knn_direct(probe, gallery, probe_id=args.probe.stem)
    else:
        result = match_probe(probe, gallery, args.metric, cfg.metrics, probe_id=args.probe.stem)
    for rank, (gid, score) in enumerate(result.ranking[: args.top], start=1):
        print(f"{rank} {gid} {score:.6f}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args.config)
    corpus = load_corpus(args.corpus, args.adapter)
    kinds = [MetricKind.parse(m) for m in args.metrics]
    fmt = args.format or ("json" if args.out.suffix.lower() == ".json" else "csv")
    held_out = [i for i in corpus.ids if corpus.train_ids is None or i not in corpus.train_ids]

    if args.protocol == "split":
        protocol = SplitProtocol(
            train_count=args.train_count if args.train_count is not None else cfg.protocol.train_count,
            repeats=args.repeats if args.repeats is not None else cfg.protocol.repeats,
            seed=args.seed if args.seed is not None else cfg.protocol.seed,
        )
        eigen = dataclasses.replace(cfg.eigenface, sweep=cfg.eigenface.sweep or args.eigenface_sweep)
        report = None
        for name in args.galleries:
            gallery = _gallery(corpus, name)
            probes = corpus.labeled(corpus.drawn, list(gallery.ids))
            part = repeated_split_eval(
                list(gallery), probes, protocol, kinds, eigen, cfg.metrics, method=name, workers=args.workers
            )
            report = part if report is None else report.merge(part)
    else:
        galleries = [(name, _gallery(corpus, name, set(held_out))) for name in args.galleries]
        ids = [i for i in held_out if all(i in g.ids for _, g in galleries)]
        report = compare_methods(galleries, corpus.labeled(corpus.drawn, ids), kinds, cfg.metrics, workers=args.workers)
    report.metadata["run_config"] = cfg.to_dict()
    export_report(report, fmt, args.out)
    return 0


def cmd_gen_testdata(args) -> int:
    corpus = make_synthetic_corpus(args.identities, args.size, args.seed)
    write_corpus(corpus, args.out)
    return 0


COMMANDS = {
    "metric": cmd_metric,
    "synthesize": cmd_synthesize,
    "match": cmd_match,
    "evaluate": cmd_evaluate,
    "gen-testdata": cmd_gen_testdata,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (SketchIQAError, OSError) as exc:
        print(f"sketchiqa: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
