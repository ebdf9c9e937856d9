"""Command line entry: create checkpoints, serve the protocol, fine-tune."""

import argparse
import sys

from .model import load_checkpoint, new_checkpoint
from .service import build_app
from .train import fine_tune


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formloop-adapter")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write a freshly initialized checkpoint")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="serve POST /v1/classify from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8500)

    p = sub.add_parser("finetune", help="train on an iteration export directory")
    p.add_argument("--export-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--base", help="checkpoint to continue from")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "init":
            path = new_checkpoint(args.out, seed=args.seed)
            print(f"wrote checkpoint {path}")
        elif args.command == "serve":
            try:
                net = load_checkpoint(args.checkpoint)
            except (FileNotFoundError, ValueError) as err:
                print(f"startup error: {err}", file=sys.stderr)
                return 1
            import uvicorn

            uvicorn.run(build_app(net), host=args.host, port=args.port, log_level="warning")
        else:
            path, losses = fine_tune(
                args.export_dir,
                args.out,
                base_checkpoint=args.base,
                epochs=args.epochs,
                lr=args.lr,
                seed=args.seed,
            )
            print(f"wrote checkpoint {path} ({len(losses)} steps, "
                  f"loss {losses[0]:.6f} -> {losses[-1]:.6f})")
    except (FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
