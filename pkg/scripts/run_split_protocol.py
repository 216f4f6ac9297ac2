"""Repeated random-split protocol on a corpus directory (or a synthetic one).

With --corpus, the synthesized gallery is read from <corpus>/synth/<method>/;
without it a synthetic corpus is generated and an LLE gallery is built for
every identity from the others (leave-one-out), which is slow but honest.

    python3 scripts/run_split_protocol.py --corpus data/cufs --method mwf --train-count 150 --repeats 100
    python3 scripts/run_split_protocol.py --identities 50 --train-count 20 --repeats 25 --sweep
"""
import argparse
import logging
import time

from sketchiqa.corpus import load_corpus, make_synthetic_corpus
from sketchiqa.evaluation import EigenfaceSpec, SplitProtocol, export_report, repeated_split_eval
from sketchiqa.metrics import MetricKind
from sketchiqa.synthesis import TrainingPair, _TrainingIndex, _synthesize, SynthesisParams


def loo_gallery(corpus):
    params = SynthesisParams()
    pairs = {i: TrainingPair(corpus.photos[i], corpus.drawn[i], i) for i in corpus.ids}
    out = []
    for i in corpus.ids:
        index = _TrainingIndex([p for k, p in pairs.items() if k != i], params.patch_size)
        out.append((i, _synthesize(corpus.photos[i], index, params)))
        logging.info("synthesized %s", i)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--corpus", default=None)
    ap.add_argument("--method", default="lle")
    ap.add_argument("--identities", type=int, default=50)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--train-count", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=25)
    ap.add_argument("--seed", type=int, default=20160501)
    ap.add_argument("--metrics", default="ssim,vif,fsim,gmsd")
    ap.add_argument("--retain", type=float, default=0.99)
    ap.add_argument("--sweep", action="store_true", help="report the best Eigenface dimension")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    if args.corpus:
        corpus = load_corpus(args.corpus)
        synth = list(corpus.synthesized[args.method].items())
    else:
        corpus = make_synthetic_corpus(args.identities, args.size, args.seed)
        synth = loo_gallery(corpus)
    ids = [i for i, _ in synth]
    drawn = corpus.labeled(corpus.drawn, ids)

    protocol = SplitProtocol(args.train_count, args.repeats, args.seed)
    kinds = [MetricKind.parse(m) for m in args.metrics.split(",") if m]
    t0 = time.perf_counter()
    report = repeated_split_eval(synth, drawn, protocol, kinds, EigenfaceSpec(args.retain, args.sweep),
                                 method=args.method, workers=args.workers)
    logging.info("%d repeats in %.1fs", args.repeats, time.perf_counter() - t0)

    for (method, metric), stats in report.splits.items():
        extra = f"  dim={stats.detail['dim']}" if "dim" in stats.detail else ""
        print(f"{method:8s} {metric:10s} mean={100 * stats.mean:6.2f}%  std={100 * stats.std:5.2f}{extra}")
    if args.out:
        export_report(report, "json" if args.out.endswith(".json") else "csv", args.out)


if __name__ == "__main__":
    main()
