"""Command-line frontend: train, bench, decode, inspect-code.

Every subcommand reads defaults from an optional flat key=value config file
(``--config``); command-line flags override file values.  Subcommands that
write an output directory capture the fully resolved configuration there,
so a run is reproducible from its output alone.  The VCDC_THREADS
environment variable caps bench worker count.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench, codes
from .bp import BpConfig
from .channel import LLR_CLAMP, LlrWord
from .codebook import load_alist, syndrome
from .denoiser import load_checkpoint, save_checkpoint
from .train import TrainConfig, train, write_loss_curve


def _read_config(path):
    values = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _capture_config(out_dir, name, values):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{name}.config")
    with open(path, "w", encoding="ascii") as fh:
        for key in sorted(values):
            fh.write(f"{key}={values[key]}\n")
    return path


def _load_code(path):
    path = str(path)
    if not os.path.exists(path) and os.path.sep not in path:
        try:
            return codes.load(path.removesuffix(".alist"))
        except FileNotFoundError:
            pass
    return load_alist(path)


def _resolve(args, file_cfg, defaults):
    """defaults < config file < explicit flags."""
    resolved = dict(defaults)
    for key, raw in file_cfg.items():
        if key not in defaults:
            raise ValueError(f"unknown config key {key!r}")
        kind = type(defaults[key])
        resolved[key] = (raw.lower() in ("1", "true", "yes")) if kind is bool else kind(raw)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


TRAIN_DEFAULTS = {
    "code": "", "out": "train_out", "seed": 0, "iterations": 20000, "batch_size": 256,
    "learning_rate": 0.001, "csnr_low": 4.0, "csnr_high": 6.0, "all_zero": False,
}

BENCH_DEFAULTS = {
    "code": "", "out": "bench_out", "seed": 0, "decoders": "bp", "csnr": "4,5,6",
    "checkpoint": "", "timesteps": "20", "step_db": 0.5, "bp_iters": 5,
    "bp_variant": "sum-product", "stop_errors": 100, "max_frames": 0, "batch_frames": 512,
}

DECODE_DEFAULTS = {
    "code": "", "llr": "", "decoder": "bp", "checkpoint": "", "csnr": 4.0,
    "timesteps": 20, "step_db": 0.5, "bp_iters": 5, "bp_variant": "sum-product",
}


def cmd_train(args):
    file_cfg = _read_config(args.config) if args.config else {}
    cfg = _resolve(args, file_cfg, TRAIN_DEFAULTS)
    if not cfg["code"]:
        raise ValueError("train requires --code")
    h = _load_code(cfg["code"])
    _capture_config(cfg["out"], "train", cfg)
    result = train(h, TrainConfig(
        learning_rate=cfg["learning_rate"], batch_size=cfg["batch_size"],
        iterations=cfg["iterations"], csnr_low_db=cfg["csnr_low"],
        csnr_high_db=cfg["csnr_high"], seed=cfg["seed"],
        all_zero_codewords=cfg["all_zero"]))
    ckpt_path = os.path.join(cfg["out"], "weights.vcdc")
    with open(ckpt_path, "wb") as fh:
        fh.write(save_checkpoint(result.weights))
    write_loss_curve(os.path.join(cfg["out"], "loss.csv"), result)
    print(f"trained {h.num_checks} weights on ({h.n},{h.k}); "
          f"final smoothed loss {result.final_smoothed():.6f}")
    print(f"checkpoint: {ckpt_path}")
    return 0


def cmd_bench(args):
    file_cfg = _read_config(args.config) if args.config else {}
    cfg = _resolve(args, file_cfg, BENCH_DEFAULTS)
    if not cfg["code"]:
        raise ValueError("bench requires --code")
    h = _load_code(cfg["code"])
    _capture_config(cfg["out"], "bench", cfg)
    code_id = os.path.splitext(os.path.basename(cfg["code"]))[0]
    decoder_ids = [d.strip() for d in cfg["decoders"].split(",") if d.strip()]
    csnrs = [float(s) for s in str(cfg["csnr"]).split(",") if s.strip()]
    timesteps = [int(t) for t in str(cfg["timesteps"]).split(",") if t.strip()]

    decoders = []
    for choice in decoder_ids:
        if choice == "bp":
            decoders.append(bench.BpDecoder(h, BpConfig(max_iters=cfg["bp_iters"],
                                                        variant=cfg["bp_variant"])))
        elif choice == "vcdc":
            if not cfg["checkpoint"]:
                raise ValueError("decoder 'vcdc' requires --checkpoint")
            with open(cfg["checkpoint"], "rb") as fh:
                weights = load_checkpoint(fh.read())
            weights.check_code(h)
            decoders.extend(bench.VcdcDecoder(h, weights, timesteps=t,
                                              step_db=cfg["step_db"]) for t in timesteps)
        elif choice == "identity":
            decoders.append(bench.IdentityDecoder(h))
        else:
            raise ValueError(f"unknown decoder {choice!r}")

    runs = []
    max_frames = cfg["max_frames"] if cfg["max_frames"] > 0 else None
    for decoder in decoders:
        for csnr in csnrs:
            run = bench.run_ber(h, decoder, csnr, stop_errors=cfg["stop_errors"],
                                max_frames=max_frames, seed=cfg["seed"], code_id=code_id,
                                batch_frames=cfg["batch_frames"])
            runs.append(run)
            print(f"{code_id} {decoder.name} {csnr:g} dB: ber={run.ber:.4e} "
                  f"-ln={bench.neg_ln_ber(run):.3f} frames={run.frames_simulated}"
                  f"{' censored' if run.censored else ''}")
    paths = bench.emit_results(runs, cfg["out"])
    print(f"wrote {', '.join(paths)}")
    return 0


def cmd_decode(args):
    file_cfg = _read_config(args.config) if args.config else {}
    cfg = _resolve(args, file_cfg, DECODE_DEFAULTS)
    if not cfg["code"] or not cfg["llr"]:
        raise ValueError("decode requires --code and --llr")
    h = _load_code(cfg["code"])
    with open(cfg["llr"], "r", encoding="ascii") as fh:
        values = np.array([float(tok) for tok in fh.read().split()])
    if values.size != h.n:
        raise ValueError(f"LLR file has {values.size} values, code needs {h.n}")

    if cfg["decoder"] == "bp":
        from .bp import decode_bp
        result = decode_bp(h, values, BpConfig(max_iters=cfg["bp_iters"],
                                               variant=cfg["bp_variant"]))
    elif cfg["decoder"] == "vcdc":
        if not cfg["checkpoint"]:
            raise ValueError("decoder 'vcdc' requires --checkpoint")
        with open(cfg["checkpoint"], "rb") as fh:
            weights = load_checkpoint(fh.read())
        from .denoiser import decode_vcdc
        from .diffusion import build_schedule
        sched = build_schedule(cfg["csnr"], cfg["timesteps"], cfg["step_db"], h.rate)
        word = LlrWord(values=np.clip(values, -LLR_CLAMP, LLR_CLAMP), csnr_db=cfg["csnr"])
        result = decode_vcdc(h, weights, sched, word)
    else:
        raise ValueError(f"unknown decoder {cfg['decoder']!r}")

    print("".join(str(b) for b in result.bits))
    print(f"syndrome: {'zero' if result.syndrome_zero else 'nonzero'} "
          f"({result.parity_errors} parity errors, {result.steps_used} steps)")
    return 0 if result.syndrome_zero else 1


def cmd_inspect_code(args):
    h = _load_code(args.code)
    chk_degs = sorted({len(a) for a in h.chk_adjacency})
    var_degs = sorted({len(a) for a in h.var_adjacency})
    _, nerr = syndrome(h, np.zeros(h.n, dtype=np.uint8))
    print(f"n={h.n} k={h.k} rate={h.rate:.4f} checks={h.num_checks} edges={h.num_edges}")
    print(f"check degrees: {chk_degs}")
    print(f"variable degrees: {var_degs}")
    print(f"zero-word syndrome errors: {nerr}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="vcdc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train block weights, write checkpoint + loss CSV")
    p_train.add_argument("--config")
    p_train.add_argument("--code")
    p_train.add_argument("--out")
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--iterations", type=int)
    p_train.add_argument("--batch-size", dest="batch_size", type=int)
    p_train.add_argument("--learning-rate", dest="learning_rate", type=float)
    p_train.add_argument("--csnr-low", dest="csnr_low", type=float)
    p_train.add_argument("--csnr-high", dest="csnr_high", type=float)
    p_train.add_argument("--all-zero", dest="all_zero", action="store_const", const=True)
    p_train.set_defaults(func=cmd_train)

    p_bench = sub.add_parser("bench", help="Monte-Carlo BER runs, results CSV + plot data")
    p_bench.add_argument("--config")
    p_bench.add_argument("--code")
    p_bench.add_argument("--out")
    p_bench.add_argument("--seed", type=int)
    p_bench.add_argument("--decoders", help="comma list: bp,vcdc,identity")
    p_bench.add_argument("--csnr", help="comma list of dB levels")
    p_bench.add_argument("--checkpoint")
    p_bench.add_argument("--timesteps", help="comma list of reverse timesteps for vcdc")
    p_bench.add_argument("--step-db", dest="step_db", type=float)
    p_bench.add_argument("--bp-iters", dest="bp_iters", type=int)
    p_bench.add_argument("--bp-variant", dest="bp_variant")
    p_bench.add_argument("--stop-errors", dest="stop_errors", type=int)
    p_bench.add_argument("--max-frames", dest="max_frames", type=int)
    p_bench.add_argument("--batch-frames", dest="batch_frames", type=int)
    p_bench.set_defaults(func=cmd_bench)

    p_dec = sub.add_parser("decode", help="decode one LLR word from a file")
    p_dec.add_argument("--config")
    p_dec.add_argument("--code")
    p_dec.add_argument("--llr")
    p_dec.add_argument("--decoder", help="bp or vcdc")
    p_dec.add_argument("--checkpoint")
    p_dec.add_argument("--csnr", type=float)
    p_dec.add_argument("--timesteps", type=int)
    p_dec.add_argument("--step-db", dest="step_db", type=float)
    p_dec.add_argument("--bp-iters", dest="bp_iters", type=int)
    p_dec.add_argument("--bp-variant", dest="bp_variant")
    p_dec.set_defaults(func=cmd_decode)

    p_ins = sub.add_parser("inspect-code", help="print code parameters and degree profile")
    p_ins.add_argument("--code", required=True)
    p_ins.set_defaults(func=cmd_inspect_code)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
