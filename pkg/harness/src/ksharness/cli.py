"""Command-line entrypoint: finetune-mc, eval-mlm-probe, export-parses."""

from __future__ import annotations

import argparse
import json
import sys

from .config import HarnessConfig
from .finetune import finetune_mc
from .mlm import eval_mlm_probe
from .parse_export import export_parses, load_text_records


def _add_model_args(p):
    p.add_argument("--model-name", default="tiny-bert")
    p.add_argument("--max-seq-len", type=int, default=64)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--learning-rate", type=float, default=5e-4)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden-size", type=int, default=64)
    p.add_argument("--num-layers", type=int, default=2)
    p.add_argument("--num-heads", type=int, default=2)
    p.add_argument("--device", default="cpu")


def _config(args, **overrides) -> HarnessConfig:
    return HarnessConfig(
        model_name=args.model_name, max_seq_len=args.max_seq_len,
        epochs=args.epochs, learning_rate=args.learning_rate,
        batch_size=args.batch_size, seed=args.seed,
        hidden_size=args.hidden_size, num_layers=args.num_layers,
        num_heads=args.num_heads, device=args.device, **overrides,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksharness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune-mc", help="fine-tune a multiple-choice model")
    p.add_argument("--train", required=True, help="emitted train JSONL")
    p.add_argument("--eval", required=True, help="emitted eval JSONL")
    p.add_argument("--log", required=True, help="prediction log output path")
    p.add_argument("--checkpoint-dir", help="save the trained model here")
    p.add_argument("--model-tag", default="mc")
    _add_model_args(p)

    p = sub.add_parser("eval-mlm-probe", help="score MLM probes")
    p.add_argument("--probes", required=True, help="MLM probe JSONL")
    p.add_argument("--log", required=True)
    p.add_argument("--mode", choices=["zero-shot", "fine-tune-curve"],
                   default="zero-shot")
    p.add_argument("--fractions", default="0.01,0.1,1.0",
                   help="comma-separated train fractions for fine-tune-curve")
    p.add_argument("--model-tag", default="mlm")
    _add_model_args(p)

    p = sub.add_parser("export-parses", help="heuristically parse text records")
    p.add_argument("--texts", required=True,
                   help="JSONL of {instance_id, goal, title?, paragraphs?}")
    p.add_argument("--out", required=True, help="parse-exchange output path")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "finetune-mc":
        config = _config(args, train_path=args.train, eval_path=args.eval,
                         log_path=args.log)
        log_path = finetune_mc(config, checkpoint_dir=args.checkpoint_dir,
                               model_tag=args.model_tag)
        print(f"wrote {log_path}")
        return 0
    if args.command == "eval-mlm-probe":
        config = _config(args, eval_path=args.probes, log_path=args.log)
        if args.mode == "zero-shot":
            accuracy, _ = eval_mlm_probe(config, mode="zero-shot",
                                         model_tag=args.model_tag)
            print(json.dumps({"accuracy": accuracy}))
        else:
            fractions = tuple(float(f) for f in args.fractions.split(","))
            points = eval_mlm_probe(config, mode="fine-tune-curve",
                                    fractions=fractions, model_tag=args.model_tag)
            print(json.dumps({"curve": points}))
        return 0
    out = export_parses(load_text_records(args.texts), args.out)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
