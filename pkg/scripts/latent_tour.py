#!/usr/bin/env python3
"""Run every traversal experiment against one generator and summarise.

Writes one output directory per kind under --out, each holding the tiles,
the grid, and a manifest, then prints where the extrapolation's largest
adjacent image jump landed. Point it at an existing .lgw1 file with --model,
or let it initialise a fresh random generator first.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from latentscope.engine import dcgan64_architecture
from latentscope.errors import LatentScopeError
from latentscope.experiment import ExperimentSpec, run_experiment
from latentscope.weights import save_model

KINDS = ("samples", "interpolate", "extrapolate", "circular", "slerp")


def parse_args() -> argparse.Namespace:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--model", help="generator weights; omitted = init a random one")
    p.add_argument("--out", default="tour_out", help="output root (default tour_out)")
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--n", type=int, default=16, help="points per traversal (default 16)")
    p.add_argument(
        "--scale",
        type=float,
        default=1 / 16,
        help="channel width for an initialised model (default 1/16)",
    )
    return p.parse_args()


def main() -> int:
    args = parse_args()
    out_root = Path(args.out)

    model_path = args.model
    if model_path is None:
        out_root.mkdir(parents=True, exist_ok=True)
        model_path = out_root / "generator.lgw1"
        save_model(dcgan64_architecture(args.seed, channel_scale=args.scale), model_path)
        print(f"initialised {model_path}")

    for kind in KINDS:
        spec = ExperimentSpec(
            kind=kind,
            model_path=str(model_path),
            output_dir=str(out_root / kind),
            seed=args.seed,
            n=args.n,
        )
        manifest = run_experiment(spec)
        print(f"{kind}: {len(manifest.files)} files in {out_root / kind}")
        if kind == "extrapolate":
            lo, hi = manifest.report["max_jump_between_tiles"]
            jump = max(manifest.report["adjacent_image_l2"])
            print(
                f"  largest adjacent image jump {jump:.1f} between tiles "
                f"{lo} and {hi}; the traversal switches sides after tile {args.n // 2}"
            )
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except LatentScopeError as e:
        print(f"error[{e.code}]: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
