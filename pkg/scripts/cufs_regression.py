"""Method x metric rank-1 table on a real photo/sketch corpus.

Expects the directory layout read by ``load_corpus`` with one synth/<method>/
folder per synthesis method (for example mwf, lle, ssd, mrf). Prints rank-1 and
rank-10 accuracies for every (method, metric) cell plus the pixel 1-NN column.

    python3 scripts/cufs_regression.py --corpus data/cufs --out results/table.csv
"""
import argparse
import logging

from sketchiqa.corpus import load_corpus
from sketchiqa.evaluation import compare_methods, export_report
from sketchiqa.metrics import MetricKind
from sketchiqa.recognition import Gallery


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--methods", default=None, help="comma list; default: every synth/ folder")
    ap.add_argument("--metrics", default="ssim,vif,fsim,gmsd")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    corpus = load_corpus(args.corpus)
    methods = args.methods.split(",") if args.methods else list(corpus.synthesized)
    if not methods:
        raise SystemExit(f"{args.corpus}: no synth/<method>/ folders found")
    ids = sorted(set.intersection(*(set(corpus.synthesized[m]) for m in methods)))
    galleries = [(m, Gallery([(i, corpus.synthesized[m][i]) for i in ids])) for m in methods]
    kinds = [MetricKind.parse(k) for k in args.metrics.split(",")]
    report = compare_methods(galleries, corpus.labeled(corpus.drawn, ids), kinds, workers=args.workers)

    cols = [k.value for k in kinds] + ["knn"]
    print(f"{len(ids)} probes")
    print(f"{'method':8s} " + " ".join(f"{c:>12s}" for c in cols))
    for m in methods:
        cells = []
        for c in cols:
            curve = report.curves[(m, c)]
            cells.append(f"{100 * curve.rank(1):5.2f}/{100 * curve.rank(min(10, len(curve.hits))):5.2f}")
        print(f"{m:8s} " + " ".join(f"{c:>12s}" for c in cells))
    if args.out:
        export_report(report, "json" if args.out.endswith(".json") else "csv", args.out)


if __name__ == "__main__":
    main()
