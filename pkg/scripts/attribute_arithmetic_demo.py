#!/usr/bin/env python3
"""Anchor-set arithmetic end to end, without the browser UI.

Samples a pool of latents, groups three exemplars per anchor set (stand-ins
for the hand-picked selections the explorer UI is for), stores them, then
evaluates A - B + C and decodes the operand means next to the result. With
--set-b-equals-c the B and C sets share members, so the result image must be
byte-identical to mean(A)'s image; the script verifies that.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from latentscope.anchors import AnchorStore
from latentscope.engine import dcgan64_architecture
from latentscope.errors import LatentScopeError
from latentscope.experiment import ExperimentSpec, run_experiment
from latentscope.latent import AnchorSet, sample_latents
from latentscope.weights import load_model, save_model


def parse_args() -> argparse.Namespace:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--model", help="generator weights; omitted = init a random one")
    p.add_argument("--out", default="arith_out", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument(
        "--set-b-equals-c",
        action="store_true",
        help="make B and C identical and check the cancellation",
    )
    return p.parse_args()


def main() -> int:
    args = parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    model_path = args.model
    if model_path is None:
        model_path = out / "generator.lgw1"
        save_model(dcgan64_architecture(args.seed, channel_scale=1 / 16), model_path)
        print(f"initialised {model_path}")
    model = load_model(model_path)

    pool = sample_latents(model.input_space, model.input_dim, 9, args.seed)
    store_path = out / "anchors.json"
    store = AnchorStore(store_path)
    store.put(AnchorSet(name="set_a", members=tuple(pool[0:3])), overwrite=True)
    store.put(AnchorSet(name="set_b", members=tuple(pool[3:6])), overwrite=True)
    c_members = pool[3:6] if args.set_b_equals_c else pool[6:9]
    store.put(AnchorSet(name="set_c", members=tuple(c_members)), overwrite=True)

    spec = ExperimentSpec(
        kind="arithmetic",
        model_path=str(model_path),
        output_dir=str(out / "run"),
        expression="+set_a -set_b +set_c",
        store_path=str(store_path),
    )
    manifest = run_experiment(spec)
    print(f"wrote {len(manifest.files)} files to {out / 'run'}")
    print(f"result latent: {out / 'run' / 'arithmetic_result.lat'}")

    if args.set_b_equals_c:
        mean_a = (out / "run" / "arithmetic_01.png").read_bytes()
        result = (out / "run" / "arithmetic_04.png").read_bytes()
        if mean_a != result:
            print("cancellation check FAILED: result differs from mean(A)", file=sys.stderr)
            return 1
        print("cancellation check passed: result image is byte-identical to mean(A)")
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except LatentScopeError as e:
        print(f"error[{e.code}]: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
