"""Harness command line: synthesize a test dataset, inspect a sampled
split, or run the full experiment sweep."""

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import (DEFAULT_AUGMENT_SETS, ExperimentConfig,
                     HarnessConfigError, load_experiment)
from .dataset import make_synthetic_dataset, prepare_dataset, write_manifest
from .runner import exceeds_by_2se, run_experiment


def cmd_synth(args) -> int:
    classes = tuple(args.classes.split(","))
    root = make_synthetic_dataset(args.out, classes=classes,
                                  per_class=args.per_class, seed=args.seed)
    print(f"wrote {len(classes)} classes x {args.per_class} clips to {root}")
    return 0


def cmd_prepare(args) -> int:
    config = load_experiment(args.config)
    splits = prepare_dataset(config, args.repeat)
    out = Path(config.work_dir) / f"manifests-rep{args.repeat:02d}"
    for split_name, items in (("train", splits.train), ("val", splits.val),
                              ("test", splits.test)):
        path = write_manifest(items, out / f"{split_name}.txt")
        print(f"{split_name}: {len(items)} items -> {path}")
    return 0


def cmd_run(args) -> int:
    config = load_experiment(args.config)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    results = run_experiment(config)
    print()
    print((Path(config.work_dir) / "summary.md").read_text())
    baseline = results.get("none")
    if baseline is not None:
        for name in ("stft_blur", "spec_blur"):
            if name in results:
                verdict = ("exceeds" if exceeds_by_2se(results[name], baseline)
                           else "does NOT exceed")
                print(f"{name} {verdict} the no-augmentation mean by > 2 "
                      "combined standard errors")
    return 0


def cmd_init(args) -> int:
    """Write a starter experiment config."""
    payload = {
        "source_dir": args.source_dir,
        "work_dir": args.work_dir,
        "classes": args.classes.split(","),
        "examples_per_class": args.per_class,
        "test_per_class": args.test_per_class,
        "repeats": args.repeats,
        "seed": args.seed,
        "augment_sets": DEFAULT_AUGMENT_SETS,
    }
    Path(args.out).write_text(json.dumps(payload, indent=1))
    print(args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tfblur-harness",
        description="Train a small CNN on tfblur features and compare "
                    "augmentation setups (mean accuracy +- standard error).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic keyword dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", default="alpha,bravo,charlie")
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prepare", help="sample and write split manifests")
    p.add_argument("--config", required=True)
    p.add_argument("--repeat", type=int, default=0)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("init", help="write a starter experiment config")
    p.add_argument("--out", required=True)
    p.add_argument("--source-dir", required=True)
    p.add_argument("--work-dir", required=True)
    p.add_argument("--classes", default="alpha,bravo,charlie")
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--test-per-class", type=int, default=200)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("run", help="run the experiment sweep")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HarnessConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
