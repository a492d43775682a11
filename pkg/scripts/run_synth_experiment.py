#!/usr/bin/env python3
"""Full synthetic experiment driven through the command-line interface.

Builds a deterministic toy gazetteer, indexes it, generates a training and a
held-out corpus, trains the ranker, resolves the held-out corpus, and prints
the evaluation report. Every artifact lands in --workdir so the run can be
inspected or re-evaluated afterwards.
"""

import argparse
from pathlib import Path

from placelink.cli import main as cli
from placelink.gazetteer import write_gazetteer_tsv
from placelink.toygaz import build_toy_gazetteer


def run(argv: list[str]) -> None:
    print("$ placelink " + " ".join(argv))
    rc = cli(argv)
    if rc != 0:
        raise SystemExit(rc)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workdir", default="synth_run", help="artifact directory")
    ap.add_argument("--n-train", type=int, default=2000)
    ap.add_argument("--n-heldout", type=int, default=500)
    ap.add_argument("--epochs", type=int, default=15)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    gaz = work / "toy_gazetteer.tsv"
    entries = build_toy_gazetteer()
    write_gazetteer_tsv(entries, str(gaz))
    print(f"wrote {len(entries)} gazetteer entries -> {gaz}")

    index = str(work / "places.idx")
    train_corpus = str(work / "train.jsonl")
    heldout_corpus = str(work / "heldout.jsonl")
    model = str(work / "ranker.bin")
    records = str(work / "records.jsonl")
    report = str(work / "report.json")

    run(["build-index", "--gazetteer", str(gaz), "--out", index])
    # train and held-out corpora come from disjoint seed streams
    run(
        ["synth", "--gazetteer", str(gaz), "--out", train_corpus,
         "--n", str(args.n_train), "--seed", str(args.seed + 11)]
    )
    run(
        ["synth", "--gazetteer", str(gaz), "--out", heldout_corpus,
         "--n", str(args.n_heldout), "--seed", str(args.seed + 99)]
    )
    run(
        ["train", "--index", index, "--corpus", train_corpus, "--out", model,
         "--epochs", str(args.epochs), "--score-mode", "logit",
         "--embedding-dim", "64", "--multitask-country-weight", "0.3",
         "--seed", str(args.seed)]
    )
    run(["parse", "--index", index, "--model", model, "--corpus", heldout_corpus, "--out", records])
    run(
        ["evaluate", "--records", records, "--index", index,
         "--corpus", heldout_corpus, "--eval-k", "50,500", "--out", report]
    )
    print(f"report JSON -> {report}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
