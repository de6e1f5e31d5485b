"""Batch command-line interface.

Three subcommands: ``extract`` runs the prior pipeline on PNGs and
writes tensor sidecars plus previews, ``sample`` runs the implicit
sampler against an analytic denoiser conditioned on a saved stack, and
``metrics`` prints a one-line quality record for an image pair.

Exit codes are stable: 0 success, 2 I/O failure, 3 numerical
non-convergence, 4 shape/validation error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fileio
from .diffusion import (
    BlurDenoiser,
    OracleDenoiser,
    ZeroDenoiser,
    ddim_sample,
    gaussian_noise,
    linear_schedule,
)
from .illum import SolverConvergenceError
from .losses import loss_chrom, loss_illum, loss_ssim, psnr, ssim_metric
from .priors import CONDITION_CHANNELS, extract_priors, stack_condition

EXIT_OK = 0
EXIT_IO = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4


def _load_run_config(args) -> fileio.RunConfig:
    config = fileio.load_config(args.config) if args.config else fileio.RunConfig()
    if args.seed is not None:
        config = replace(config, sampler=replace(config.sampler, seed=args.seed))
    return config


def _extract_one(input_path: Path, out_dir: Path, config: fileio.RunConfig) -> None:
    img = fileio.load_png(input_path)
    bundle = extract_priors(img, config.illum, config.shadow)
    stack = stack_condition(bundle)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "t_ref": bundle.t_ref,
        "r": bundle.r,
        "s3ch": bundle.s3ch,
        "phi": bundle.phi,
        "stack": stack,
    }
    for name, data in outputs.items():
        fileio.write_tensor(out_dir / f"{name}.scem", data)
        preview = data[:, :, :3] if name == "stack" else data
        fileio.save_png(out_dir / f"{name}.png", preview)


def cmd_extract(args) -> int:
    config = _load_run_config(args)
    inputs = [Path(p) for p in args.inputs]
    out_root = Path(args.output_dir)
    # fail before writing anything if any input is unreadable
    for p in inputs:
        if not p.is_file():
            raise OSError(f"cannot read image: {p}")
    if len(inputs) == 1:
        targets = [(inputs[0], out_root)]
    else:
        targets = [(p, out_root / p.stem) for p in inputs]
    if args.jobs > 1 and len(targets) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_extract_one, p, d, config) for p, d in targets
            ]
            for f in futures:
                f.result()
    else:
        for p, d in targets:
            _extract_one(p, d, config)
    return EXIT_OK


def _build_denoiser(name: str, sched):
    if name == "zero":
        return ZeroDenoiser()
    if name == "blur":
        return BlurDenoiser()
    if name.startswith("oracle:"):
        target = fileio.load_png(name.split(":", 1)[1])
        return OracleDenoiser(target, sched)
    raise ValueError(
        f"unknown denoiser {name!r}; expected zero, blur or oracle:<target.png>"
    )


def cmd_sample(args) -> int:
    config = _load_run_config(args)
    stack = fileio.read_tensor(args.stack).astype(np.float64)
    if stack.shape[2] != CONDITION_CHANNELS:
        raise ValueError(
            f"condition stack has {stack.shape[2]} channels, "
            f"expected {CONDITION_CHANNELS}"
        )
    sched = linear_schedule(config.t_max, config.beta_start, config.beta_end)
    denoiser = _build_denoiser(args.denoiser, sched)
    shape = (stack.shape[0], stack.shape[1], 3)
    init = gaussian_noise(shape, config.sampler.seed)
    result = ddim_sample(denoiser, stack, config.sampler, sched, init)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fileio.write_tensor(out_dir / "out.scem", result)
    fileio.save_png(out_dir / "out.png", result)
    return EXIT_OK


def cmd_metrics(args) -> int:
    _load_run_config(args)  # validates the config file even when unused
    a = fileio.load_png(args.image_a)
    b = fileio.load_png(args.image_b)
    if a.shape != b.shape:
        raise ValueError(f"image sizes differ: {a.shape} vs {b.shape}")
    record = (
        f"psnr={psnr(a, b):.6f} "
        f"ssim={ssim_metric(a, b):.6f} "
        f"l_illum={loss_illum(a, b):.6f} "
        f"l_chrom={loss_chrom(a, b):.6f} "
        f"l_ssim={loss_ssim(a, b):.6f}"
    )
    print(record)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scem",
        description="Structured-prior extraction and implicit diffusion sampling",
    )
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument(
        "--seed", type=int, help="noise seed (overrides the config file)"
    )
    parser.add_argument(
        "--jobs", type=int, default=1, help="parallel workers for batch extract"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract priors from PNG images")
    p_extract.add_argument("inputs", nargs="+", help="8- or 16-bit PNG inputs")
    p_extract.add_argument("output_dir", help="directory for tensors and previews")
    p_extract.set_defaults(func=cmd_extract)

    p_sample = sub.add_parser("sample", help="run the implicit sampler")
    p_sample.add_argument("stack", help="13-channel condition stack (.scem)")
    p_sample.add_argument(
        "--denoiser",
        default="zero",
        help="zero | blur | oracle:<target.png>",
    )
    p_sample.add_argument("-o", "--output-dir", default=".", help="output directory")
    p_sample.set_defaults(func=cmd_sample)

    p_metrics = sub.add_parser("metrics", help="print quality metrics for a pair")
    p_metrics.add_argument("image_a")
    p_metrics.add_argument("image_b")
    p_metrics.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
