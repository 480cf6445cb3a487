#!/usr/bin/env python3
"""Generate a small demo corpus and walk it through the whole CLI pipeline.

Leaves a browsable directory tree behind: corpus files, per-sample score
report, weight histogram on stdout, and trained models.
"""

import argparse
import sys

from mmdq.cli import main as mmdq


def run(argv):
    code = mmdq(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_corpus")
    parser.add_argument("--n", type=int, default=120)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    corpus = f"{args.out}/corpus"
    assess = f"{args.out}/assess"
    train = f"{args.out}/train"

    run(["synth", "--out", corpus, "--n", str(args.n), "--dim", "16",
         "--lowq-fraction", "0.3", "--label-noise", "0.3", "--seed", str(args.seed)])
    run(["assess",
         "--manifest", f"{corpus}/manifest.tsv",
         "--images", f"{corpus}/images",
         "--ocr", f"{corpus}/ocr.json",
         "--embeddings", f"{corpus}/emb.image.jsonl",
         "--embeddings", f"{corpus}/emb.text.jsonl",
         "--embeddings", f"{corpus}/emb.aspect.jsonl",
         "--out", assess])
    run(["stats", "--report", f"{assess}/scores.jsonl", "--bins", "10"])
    run(["train",
         "--features", f"{corpus}/features.jsonl",
         "--weights", f"{assess}/weights.csv",
         "--holdout", str(args.n // 3),
         "--out", train])
    run(["eval", "--model", f"{train}/model_weighted.json",
         "--features", f"{corpus}/features.jsonl"])
    print(f"\nartifacts under {args.out}/")


if __name__ == "__main__":
    main()
