"""Command-line driver: ``train`` fits a score model, ``serve`` answers the
wire protocol from a checkpoint or in analytic mode."""

from __future__ import annotations

import argparse
import json
import sys

from .server import AnalyticBackend, CheckpointBackend, serve_forever
from .train import config_from_dict, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ddugm-server", description="Score model trainer and server")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a score model by denoising score matching")
    p.add_argument("--config", help="JSON file with TrainConfig fields")
    p.add_argument("--domain", choices=["image", "kspace"])
    p.add_argument("--data", nargs="+", help="dataset tensor files (.ddt)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--curve", help="training curve CSV path")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("serve", help="serve scores over the wire protocol")
    p.add_argument("--port", type=int, default=7761)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--domain", choices=["image", "kspace"], default="image")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint", help="trained model checkpoint")
    group.add_argument("--analytic", metavar="MEAN,TAU", help="analytic gaussian mode, e.g. 0.25,0.5")
    p.set_defaults(handler=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_train(args) -> int:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for key, value in (
        ("domain", args.domain),
        ("dataset", args.data),
        ("epochs", args.epochs),
        ("batch_size", args.batch),
        ("seed", args.seed),
    ):
        if value is not None:
            data[key] = value
    cfg = config_from_dict(data)
    print(json.dumps({"command": "train", "config": data | {"out": args.out}}, indent=2, sort_keys=True))
    checkpoint = train(cfg, args.out, curve_path=args.curve)
    print(f"final loss: {checkpoint['final_loss']:.6g}")
    return 0


def _cmd_serve(args) -> int:
    if args.analytic:
        try:
            mean_text, tau_text = args.analytic.split(",")
            backend = AnalyticBackend(float(mean_text), float(tau_text))
        except ValueError:
            raise ValueError(f"--analytic expects MEAN,TAU, got {args.analytic!r}") from None
        domain = args.domain
    else:
        backend = CheckpointBackend(args.checkpoint)
        domain = backend.domain
        if args.domain and args.domain != domain:
            raise ValueError(f"checkpoint was trained for domain {domain!r}, not {args.domain!r}")
    serve_forever(backend, domain, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
