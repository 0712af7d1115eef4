"""``dfs`` command line: gen / train / eval / gradcheck / bench.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
``DFS_SEED`` overrides ``--seed`` wherever a seed is accepted.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DFSError, NumericsError
from .metrics import EvalReport, balanced_accuracy, top1_accuracy

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("dfshift")


def _seed(args_seed):
    env = os.environ.get("DFS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"DFS_SEED must be an integer, got {env!r}")
    return args_seed


def cmd_gen(args) -> int:
    from .synthdata import MANIFEST_NAME, GenConfig, generate_dataset

    gc = GenConfig(
        mode=args.mode,
        samples_per_class=args.per_class,
        seed=_seed(args.seed),
        frames=args.t,
        hw=args.hw,
        noise_std=args.noise,
    )
    generate_dataset(gc, args.out)
    print(Path(args.out) / MANIFEST_NAME)
    return EXIT_OK


def _load_xy(data_dir):
    from .model import stack_samples
    from .synthdata import load_dataset

    manifest, samples = load_dataset(data_dir)
    if not samples:
        raise ConfigError(f"dataset {data_dir} is empty")
    return manifest, stack_samples(samples), np.array([s.label for s in samples])


def cmd_train(args) -> int:
    from .model import init_params, save_model, train
    from .runconfig import RunConfig

    rc = RunConfig.load(args.config)
    data_dir = args.data or rc.data.get("dir")
    if not data_dir:
        raise ConfigError("no dataset: pass --data or set data.dir in the config")
    manifest, x, y = _load_xy(data_dir)
    if rc.data.get("mode") and rc.data["mode"] != manifest.mode:
        raise ConfigError(f"config expects {rc.data['mode']!r} data, dataset is {manifest.mode!r}")
    n_mod, _, t, c, h, w = x.shape
    if n_mod != rc.network.get("modalities", n_mod):
        raise ConfigError(f"config expects {rc.network['modalities']} modalities, data has {n_mod}")
    rc.network["modalities"] = n_mod
    cfg = rc.network_config(in_channels=c, num_classes=len(manifest.classes), frames=t, height=h, width=w)
    tc = rc.train_config(epochs=args.epochs, seed=_seed(args.seed))
    log_path = Path(args.log) if args.log else Path(f"{args.out}.log.jsonl")
    lines = []

    def on_epoch(rec):
        line = json.dumps(rec.as_dict())
        lines.append(line)
        print(line, flush=True)

    params = init_params(cfg, tc.seed, rc.init_scheme)
    params, _ = train(cfg, tc, x, y, params=params, on_epoch=on_epoch)
    save_model(params, cfg, args.out)
    log_path.write_text("".join(l + "\n" for l in lines))
    return EXIT_OK


def cmd_eval(args) -> int:
    from .model import evaluate, load_model
    from .synthdata import MANIFEST_NAME

    params, cfg = load_model(args.model)
    manifest, x, y = _load_xy(args.data)
    n_mod, _, t, c, h, w = x.shape
    if n_mod != cfg.modalities or c != cfg.in_channels or len(manifest.classes) != cfg.num_classes:
        raise ConfigError(
            f"model expects N={cfg.modalities}, C={cfg.in_channels}, {cfg.num_classes} classes; "
            f"data has N={n_mod}, C={c}, {len(manifest.classes)} classes"
        )
    cfg = cfg.with_input(frames=t, height=h, width=w)
    cm = evaluate(cfg, params, x, y)
    report = EvalReport.from_confusion(cm, args.model, Path(args.data) / MANIFEST_NAME, manifest.seed)
    Path(args.report).write_text(report.to_json() + "\n")
    print(f"top1 {top1_accuracy(cm):.4f}  balanced {balanced_accuracy(cm):.4f}  (n={cm.total})")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .gradcheck import MICRO_CONFIGS, run_gradcheck

    seed = _seed(args.seed)
    names = [args.config] if args.config else list(MICRO_CONFIGS)
    worst = None
    print(f"{'config':26s} {'block':22s} {'max rel err':>12s}  result")
    for name in names:
        for r in run_gradcheck(MICRO_CONFIGS[name](), seed, args.eps, args.tol,
                               skip_shift_adjoint=args.skip_shift_adjoint):
            print(f"{name:26s} {r.name:22s} {r.max_rel_err:12.3e}  {'pass' if r.passed else 'FAIL'}")
            if worst is None or r.max_rel_err > worst[2]:
                worst = (name, r.name, r.max_rel_err)
    ok = worst is None or worst[2] <= args.tol
    if not ok:
        print(f"gradcheck FAILED: worst {worst[0]}/{worst[1]} rel err {worst[2]:.3e} > tol {args.tol:g}")
        return EXIT_FAIL
    print(f"gradcheck passed (worst rel err {worst[2]:.3e} <= {args.tol:g})")
    return EXIT_OK


def _shape(text: str) -> tuple[int, int, int, int]:
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must be C,T,H,W integers, got {text!r}")
    if len(dims) != 4 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"shape must be four positive integers C,T,H,W, got {text!r}")
    return dims


def cmd_bench(args) -> int:
    from .bench import run_bench

    if args.iters < 1:
        raise ConfigError("--iters must be >= 1")
    report = run_bench(args.shape, args.iters, args.warmup)
    Path(args.report).write_text(json.dumps(report, indent=1) + "\n")
    print(f"{'kernel':16s} {'backend':8s} {'mean ms':>9s} {'min ms':>9s} {'bytes':>10s} {'mults':>10s}")
    for t in report["timings"]:
        print(f"{t['kernel']:16s} {t['backend']:8s} {t['mean_ms']:9.4f} {t['min_ms']:9.4f} "
              f"{t['bytes_moved']:10d} {t['mult_ops']:10d}")
    for name, acc in report["networks"].items():
        print(f"{name:16s} params {acc['param_count']:>8d}  MACs {acc['mac_count']:>10d}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dfs", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--mode", choices=["direction", "sync", "full"], required=True)
    g.add_argument("--per-class", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--t", type=int, default=8)
    g.add_argument("--hw", type=int, default=16)
    g.add_argument("--noise", type=float, default=0.05)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train a model with SGD")
    t.add_argument("--config", required=True)
    t.add_argument("--data")
    t.add_argument("--out", required=True)
    t.add_argument("--epochs", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--log", help="JSON-lines training log (default: <out>.log.jsonl)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a model on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--report", required=True)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--eps", type=float, default=1e-5)
    c.add_argument("--tol", type=float, default=1e-4)
    c.add_argument("--config", help="run only one micro config")
    c.add_argument("--skip-shift-adjoint", action="store_true", help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_gradcheck)

    b = sub.add_parser("bench", help="kernel and network efficiency benchmark")
    b.add_argument("--shape", type=_shape, default=(64, 8, 16, 16))
    b.add_argument("--iters", type=int, default=50)
    b.add_argument("--warmup", type=int, default=5)
    b.add_argument("--report", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "config", None) and args.command == "gradcheck":
        from .gradcheck import MICRO_CONFIGS

        if args.config not in MICRO_CONFIGS:
            parser.error(f"unknown micro config {args.config!r}; choose from {sorted(MICRO_CONFIGS)}")
    try:
        return args.func(args)
    except NumericsError as exc:
        print(f"dfs {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (DFSError, OSError) as exc:
        print(f"dfs {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
