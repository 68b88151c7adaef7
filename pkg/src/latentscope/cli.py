"""Command-line front end.

Every experiment subcommand is sugar over one ExperimentSpec; `--emit-spec`
prints the constructed spec instead of running it, and `run` executes a spec
file directly, so any CLI invocation can be captured and replayed exactly.

Exit codes: 0 success, 2 usage, 3 validation, 4 format/I/O, 5 numeric.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .engine import dcgan64_architecture
from .errors import FormatError, LatentScopeError
from .experiment import ExperimentSpec, rerun_check, run_experiment
from .weights import load_model, model_info, save_model

_CONFIG_KEYS = {"jobs", "store", "host", "port", "state_dir", "frontend"}


def _config_path() -> Path:
    base = Path(os.environ.get("XDG_CONFIG_HOME", "~/.config")).expanduser()
    return base / "latentscope" / "config.json"


def load_config() -> dict:
    path = _config_path()
    if not path.is_file():
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise FormatError(f"config file {path} must hold a JSON object")
    return {k: v for k, v in data.items() if k in _CONFIG_KEYS}


def _use_color() -> bool:
    return sys.stderr.isatty() and not os.environ.get("NO_COLOR")


def _fail(err: LatentScopeError) -> int:
    prefix = f"error[{err.code}]"
    if _use_color():
        prefix = f"\x1b[31m{prefix}\x1b[0m"
    print(f"{prefix}: {err}", file=sys.stderr)
    if err.detail:
        print(f"  {err.detail}", file=sys.stderr)
    return err.exit_code


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="generator weights (.lgw1)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    p.add_argument("--n", type=int, default=16, help="number of points (default 16)")
    p.add_argument("--cols", type=int, default=4, help="grid columns (default 4)")
    p.add_argument("--jobs", type=int, default=None, help="parallel decode workers")
    p.add_argument(
        "--emit-spec",
        action="store_true",
        help="print the spec JSON instead of running",
    )


def _add_endpoints(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument(
        "--seeds",
        nargs=2,
        type=int,
        metavar=("A", "B"),
        help="draw each endpoint from its own seed",
    )
    g.add_argument(
        "--endpoints",
        nargs=2,
        metavar=("FILE_A", "FILE_B"),
        help="read endpoints from latent files",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentscope",
        description="Inspect a generator's latent space: samples, traversals, "
        "vector arithmetic.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="decode a seeded batch of latents")
    _add_common(p)

    for name, help_text in (
        ("interpolate", "walk the straight segment between two latents"),
        ("extrapolate", "walk outward from both ends of the segment"),
        ("slerp", "walk the great-circle arc between two latents"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        _add_endpoints(p)

    p = sub.add_parser("circle", help="semicircular sweep in the first two components")
    _add_common(p)
    _add_endpoints(p)
    p.add_argument("--radius", type=float, default=1.0, help="sweep radius (default 1)")

    p = sub.add_parser("arith", help="evaluate signed anchor-set means, e.g. A - B + C")
    p.add_argument("--model", required=True, help="generator weights (.lgw1)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--store", required=True, help="anchor store JSON file")
    p.add_argument(
        "--expr",
        required=True,
        help='whitespace-separated signed set names, e.g. "+setA -setB +setC"',
    )
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--emit-spec", action="store_true")

    p = sub.add_parser("run", help="execute a spec file")
    p.add_argument("spec", help="experiment spec JSON path")

    p = sub.add_parser("rerun-check", help="verify a finished run is reproducible")
    p.add_argument("manifest", help="run manifest JSON path")

    p = sub.add_parser("model", help="model file utilities")
    msub = p.add_subparsers(dest="model_command", required=True)
    mv = msub.add_parser("validate", help="check a weights file end to end")
    mv.add_argument("path")
    mi = msub.add_parser("info", help="print a model summary as JSON")
    mi.add_argument("path")
    mn = msub.add_parser("init", help="write a randomly initialised 64x64 generator")
    mn.add_argument("--out", required=True)
    mn.add_argument("--seed", type=int, default=0)
    mn.add_argument(
        "--scale",
        type=float,
        default=1.0,
        help="channel-width multiplier in (0, 1] (default 1.0)",
    )

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default=None, help="listen address (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=None, help="listen port (default 8765)")
    p.add_argument("--state-dir", default=None, help="model/image/session state dir")
    p.add_argument("--store", default=None, help="anchor store JSON file")
    p.add_argument("--frontend", default=None, help="built UI directory to serve at /")

    return parser


def _spec_from_args(args: argparse.Namespace, config: dict) -> ExperimentSpec:
    kind = {
        "sample": "samples",
        "interpolate": "interpolate",
        "extrapolate": "extrapolate",
        "circle": "circular",
        "slerp": "slerp",
        "arith": "arithmetic",
    }[args.command]
    jobs = args.jobs if args.jobs is not None else int(config.get("jobs", 1))
    if kind == "arithmetic":
        return ExperimentSpec(
            kind=kind,
            model_path=args.model,
            output_dir=args.out,
            expression=args.expr,
            store_path=args.store,
            jobs=jobs,
        )
    fields: dict = dict(
        kind=kind,
        model_path=args.model,
        output_dir=args.out,
        seed=args.seed,
        n=args.n,
        grid_cols=args.cols,
        jobs=jobs,
    )
    if getattr(args, "seeds", None) is not None:
        fields["endpoint_seeds"] = tuple(args.seeds)
    if getattr(args, "endpoints", None) is not None:
        fields["endpoint_files"] = tuple(args.endpoints)
    return ExperimentSpec(**fields)


def _run_spec(spec: ExperimentSpec) -> int:
    run_experiment(spec)
    manifest = Path(spec.output_dir) / f"{spec.kind}_manifest.json"
    print(manifest.resolve())
    return 0


def _resolve(flag_value, env_key: str, config: dict, config_key: str, default):
    if flag_value is not None:
        return flag_value
    if env_key in os.environ:
        return os.environ[env_key]
    return config.get(config_key, default)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config()

        if args.command in ("sample", "interpolate", "extrapolate", "circle", "slerp", "arith"):
            spec = _spec_from_args(args, config)
            if args.emit_spec:
                print(spec.to_json())
                return 0
            return _run_spec(spec)

        if args.command == "run":
            raw = Path(args.spec)
            try:
                text = raw.read_text(encoding="utf-8")
            except OSError as e:
                raise FormatError(f"cannot read spec {raw}: {e}") from e
            return _run_spec(ExperimentSpec.from_json(text))

        if args.command == "rerun-check":
            report = rerun_check(args.manifest)
            print(json.dumps(report.to_dict(), indent=2))
            return 0 if report.reproducible else 3

        if args.command == "model":
            if args.model_command == "validate":
                model = load_model(args.path)
                info = model_info(model)
                print(
                    f"ok: {info['layer_count']} layers, "
                    f"{info['parameters']} parameters, "
                    f"{info['input_dim']}-d {info['input_space']} input, "
                    f"output {tuple(info['output_shape'])}"
                )
                return 0
            if args.model_command == "info":
                print(json.dumps(model_info(load_model(args.path)), indent=2))
                return 0
            # init
            model = dcgan64_architecture(args.seed, channel_scale=args.scale)
            save_model(model, args.out)
            print(args.out)
            return 0

        # serve
        from .service import create_app

        host = _resolve(args.host, "LATENTSCOPE_HOST", config, "host", "127.0.0.1")
        port = int(_resolve(args.port, "LATENTSCOPE_PORT", config, "port", 8765))
        state_dir = _resolve(
            args.state_dir,
            "LATENTSCOPE_STATE_DIR",
            config,
            "state_dir",
            Path("~/.local/state/latentscope").expanduser(),
        )
        store = _resolve(args.store, "LATENTSCOPE_STORE", config, "store", None)
        frontend = _resolve(
            args.frontend, "LATENTSCOPE_FRONTEND", config, "frontend", None
        )
        import uvicorn

        app = create_app(state_dir, store_path=store, frontend_dir=frontend)
        uvicorn.run(app, host=host, port=port, log_level="info")
        return 0
    except LatentScopeError as e:
        return _fail(e)


if __name__ == "__main__":
    sys.exit(main())
