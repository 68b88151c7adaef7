"""Declarative experiment runner: spec in, image grid + manifest out.

A run resolves every latent before touching the filesystem, so validation
failures never leave partial outputs. The manifest records the spec, the
resolved latents, and a content hash for every written file, which makes a
finished run bitwise re-verifiable on the same platform.
"""

from __future__ import annotations

import hashlib
import json
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .anchors import AnchorStore
from .engine import GeneratorModel, Tensor, forward
from .errors import (
    FormatError,
    InvalidArgumentError,
    IOFailureError,
    ValidationError,
)
from .image import ImageBuffer, atomic_write_bytes, compose_grid, encode_png_bytes, tensor_to_image
from .latent import (
    LatentVector,
    average_anchors,
    ArithmeticExpression,
    circular_interpolation,
    evaluate_arithmetic,
    extrapolate_two_sided,
    lerp,
    load_latents,
    parse_expression_terms,
    sample_latents,
    serialize_latent,
    slerp,
)

TRAVERSAL_KINDS = ("interpolate", "extrapolate", "circular", "slerp")
ALL_KINDS = ("samples",) + TRAVERSAL_KINDS + ("arithmetic",)

_TRAVERSAL_FNS = {
    "interpolate": lerp,
    "extrapolate": extrapolate_two_sided,
    "slerp": slerp,
}


@dataclass
class ExperimentSpec:
    """Declarative description of one experiment."""

    kind: str
    model_path: str
    output_dir: str
    seed: int = 0
    n: int = 16
    grid_cols: int = 4
    endpoint_seeds: tuple[int, int] | None = None
    endpoint_files: tuple[str, str] | None = None
    radius: float = 1.0
    expression: str | None = None
    store_path: str | None = None
    jobs: int = 1

    _FIELDS = {
        "kind",
        "model_path",
        "output_dir",
        "seed",
        "n",
        "grid_cols",
        "endpoint_seeds",
        "endpoint_files",
        "radius",
        "expression",
        "store_path",
        "jobs",
    }

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValidationError(
                f"unknown experiment kind {self.kind!r}; expected one of {ALL_KINDS}"
            )
        if not self.model_path:
            raise ValidationError("model_path is required")
        if not self.output_dir:
            raise ValidationError("output_dir is required")
        if self.kind in TRAVERSAL_KINDS and self.n < 2:
            raise ValidationError(f"traversals need n >= 2, got {self.n}")
        if self.kind == "samples" and self.n < 1:
            raise ValidationError(f"samples needs n >= 1, got {self.n}")
        if self.kind == "extrapolate" and self.n % 2 != 0:
            raise ValidationError(f"extrapolation needs an even n, got {self.n}")
        if self.grid_cols < 1:
            raise ValidationError(f"grid_cols must be >= 1, got {self.grid_cols}")
        if self.jobs < 1:
            raise ValidationError(f"jobs must be >= 1, got {self.jobs}")
        if self.endpoint_seeds is not None:
            self.endpoint_seeds = tuple(self.endpoint_seeds)  # type: ignore[assignment]
            if len(self.endpoint_seeds) != 2:
                raise ValidationError("endpoint_seeds needs exactly two seeds")
        if self.endpoint_files is not None:
            self.endpoint_files = tuple(self.endpoint_files)  # type: ignore[assignment]
            if len(self.endpoint_files) != 2:
                raise ValidationError("endpoint_files needs exactly two paths")
        if self.endpoint_seeds is not None and self.endpoint_files is not None:
            raise ValidationError("give endpoint_seeds or endpoint_files, not both")
        if self.kind == "arithmetic":
            if not self.expression:
                raise ValidationError("arithmetic needs an expression")
            if not self.store_path:
                raise ValidationError("arithmetic needs a store_path")
            parse_expression_terms(self.expression)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        if not isinstance(d, dict):
            raise ValidationError("experiment spec must be a JSON object")
        unknown = set(d) - cls._FIELDS
        if unknown:
            raise ValidationError(
                f"unknown spec fields {sorted(unknown)}; specs are strict to keep "
                "runs reproducible"
            )
        for key in ("kind", "model_path", "output_dir"):
            if key not in d:
                raise ValidationError(f"spec missing required field {key!r}")
        try:
            return cls(**d)
        except TypeError as e:
            raise ValidationError(f"bad spec field types: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise FormatError(f"spec is not valid JSON: {e}") from e

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "model_path": self.model_path,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "n": self.n,
            "grid_cols": self.grid_cols,
            "jobs": self.jobs,
        }
        if self.endpoint_seeds is not None:
            d["endpoint_seeds"] = list(self.endpoint_seeds)
        if self.endpoint_files is not None:
            d["endpoint_files"] = list(self.endpoint_files)
        if self.kind == "circular":
            d["radius"] = self.radius
        if self.kind == "arithmetic":
            d["expression"] = self.expression
            d["store_path"] = self.store_path
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class RunManifest:
    spec: dict
    engine_version: str
    latents: list[str]
    files: list[dict]  # {"name", "sha256"}
    duration_seconds: float
    report: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "engine_version": self.engine_version,
            "latents": self.latents,
            "files": self.files,
            "duration_seconds": self.duration_seconds,
            "report": self.report,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        try:
            return cls(
                spec=d["spec"],
                engine_version=d["engine_version"],
                latents=list(d["latents"]),
                files=list(d["files"]),
                duration_seconds=float(d["duration_seconds"]),
                report=dict(d.get("report", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"malformed run manifest: {e}") from e


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _resolve_endpoints(
    spec: ExperimentSpec, model: GeneratorModel
) -> tuple[LatentVector, LatentVector]:
    if spec.endpoint_files is not None:
        pair = []
        for path in spec.endpoint_files:
            vs = load_latents(path)
            if len(vs) != 1:
                raise ValidationError(
                    f"endpoint file {path} must hold exactly one latent record, "
                    f"found {len(vs)}"
                )
            pair.append(vs[0])
        return pair[0], pair[1]
    if spec.endpoint_seeds is not None:
        s1, s2 = spec.endpoint_seeds
        (a,) = sample_latents(model.input_space, model.input_dim, 1, s1)
        (b,) = sample_latents(model.input_space, model.input_dim, 1, s2)
        return a, b
    # default: both endpoints from a single seed, mirroring a script that
    # draws its two random vectors back to back
    a, b = sample_latents(model.input_space, model.input_dim, 2, spec.seed)
    return a, b


def _resolve_arithmetic(
    spec: ExperimentSpec,
) -> tuple[ArithmeticExpression, list[tuple[int, str]]]:
    terms = parse_expression_terms(spec.expression)
    store = AnchorStore(spec.store_path)
    resolved = tuple((sign, store.get(name)) for sign, name in terms)
    return ArithmeticExpression(terms=resolved), terms


def _forward_all(
    model: GeneratorModel, zs: list[LatentVector], jobs: int
) -> list[Tensor]:
    if jobs <= 1 or len(zs) <= 1:
        return [forward(model, z) for z in zs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda z: forward(model, z), zs))


def _adjacent_image_jumps(images: list[ImageBuffer]) -> dict:
    """Euclidean distance between adjacent tiles, in 8-bit pixel space."""
    jumps = []
    for left, right in zip(images, images[1:]):
        d = left.as_array().astype(np.float64) - right.as_array().astype(np.float64)
        jumps.append(float(np.sqrt(np.sum(d * d))))
    max_idx = int(np.argmax(jumps)) + 1  # 1-based: jump between tile i and i+1
    return {
        "adjacent_image_l2": jumps,
        "max_jump_between_tiles": [max_idx, max_idx + 1],
    }


def run_experiment(spec: ExperimentSpec, model: GeneratorModel | None = None) -> RunManifest:
    """Execute a spec: resolve latents, decode, write tiles, grid, manifest.

    The manifest is written last; any validation failure happens before the
    first write.
    """
    from .weights import load_model

    start = time.monotonic()
    if model is None:
        model = load_model(spec.model_path)

    # -- resolve every latent up front (no writes yet) --
    result_latent: LatentVector | None = None
    if spec.kind == "samples":
        zs = sample_latents(model.input_space, model.input_dim, spec.n, spec.seed)
    elif spec.kind in TRAVERSAL_KINDS:
        a, b = _resolve_endpoints(spec, model)
        if a.dim != model.input_dim:
            raise ValidationError(
                f"endpoint dim {a.dim} does not match model input dim {model.input_dim}"
            )
        if spec.kind == "circular":
            seq = circular_interpolation(a, b, spec.n, radius=spec.radius)
        else:
            seq = _TRAVERSAL_FNS[spec.kind](a, b, spec.n)
        zs = list(seq.points)
    else:  # arithmetic
        expr, _ = _resolve_arithmetic(spec)
        for _, anchor_set in expr.terms:
            if anchor_set.dim != model.input_dim:
                raise ValidationError(
                    f"anchor set {anchor_set.name!r} has dim {anchor_set.dim}, "
                    f"model expects {model.input_dim}"
                )
        operand_means = [average_anchors(s) for _, s in expr.terms]
        result_latent = evaluate_arithmetic(expr)
        zs = operand_means + [result_latent]

    if any(z.dim != model.input_dim for z in zs):
        raise ValidationError("resolved latent dim does not match the model")

    tensors = _forward_all(model, zs, spec.jobs)
    images = [tensor_to_image(t) for t in tensors]
    grid_cols = len(images) if spec.kind == "arithmetic" else spec.grid_cols
    grid = compose_grid(images, cols=grid_cols)

    # -- write everything, manifest last --
    out_dir = Path(spec.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IOFailureError(f"cannot create output dir {out_dir}: {e}") from e

    files: list[dict] = []

    def write(name: str, data: bytes):
        atomic_write_bytes(out_dir / name, data)
        files.append({"name": name, "sha256": _sha256(data)})

    for i, img in enumerate(images, start=1):
        write(f"{spec.kind}_{i:02d}.png", encode_png_bytes(img))
    write(f"{spec.kind}_grid.png", encode_png_bytes(grid))
    if result_latent is not None:
        write(
            f"{spec.kind}_result.lat",
            (serialize_latent(result_latent) + "\n").encode("utf-8"),
        )

    report: dict = {}
    if spec.kind == "extrapolate":
        report = _adjacent_image_jumps(images)
        gaps = [
            float(np.linalg.norm(l.values - r.values))
            for l, r in zip(zs, zs[1:])
        ]
        report["adjacent_latent_l2"] = gaps

    manifest = RunManifest(
        spec=spec.to_dict(),
        engine_version=__version__,
        latents=[serialize_latent(z) for z in zs],
        files=files,
        duration_seconds=time.monotonic() - start,
        report=report,
    )
    atomic_write_bytes(
        out_dir / f"{spec.kind}_manifest.json",
        (json.dumps(manifest.to_dict(), indent=2) + "\n").encode("utf-8"),
    )
    return manifest


def load_manifest(path) -> RunManifest:
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except OSError as e:
        raise IOFailureError(f"cannot read manifest {p}: {e}") from e
    try:
        return RunManifest.from_dict(json.loads(raw))
    except json.JSONDecodeError as e:
        raise FormatError(f"manifest {p} is not valid JSON: {e}") from e


@dataclass
class RerunReport:
    checked: int
    missing: list[str]
    changed_on_disk: list[str]
    divergent_on_rerun: list[str]

    @property
    def reproducible(self) -> bool:
        return not (self.missing or self.changed_on_disk or self.divergent_on_rerun)

    def to_dict(self) -> dict:
        return {
            "reproducible": self.reproducible,
            "checked": self.checked,
            "missing": self.missing,
            "changed_on_disk": self.changed_on_disk,
            "divergent_on_rerun": self.divergent_on_rerun,
        }


def rerun_check(manifest_path) -> RerunReport:
    """Verify a finished run: files still match, and a re-execution agrees.

    Re-executes the recorded spec into a scratch directory and compares
    fresh hashes against the recorded ones, and also re-hashes the original
    outputs next to the manifest.
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    out_dir = manifest_path.parent

    missing: list[str] = []
    changed: list[str] = []
    for rec in manifest.files:
        p = out_dir / rec["name"]
        if not p.exists():
            missing.append(rec["name"])
            continue
        if _sha256(p.read_bytes()) != rec["sha256"]:
            changed.append(rec["name"])

    with tempfile.TemporaryDirectory(prefix="rerun-") as scratch:
        spec_dict = dict(manifest.spec)
        spec_dict["output_dir"] = scratch
        spec = ExperimentSpec.from_dict(spec_dict)
        fresh = run_experiment(spec)
        fresh_hashes = {rec["name"]: rec["sha256"] for rec in fresh.files}

    divergent: list[str] = []
    for rec in manifest.files:
        fresh_hash = fresh_hashes.get(rec["name"])
        if fresh_hash != rec["sha256"]:
            divergent.append(rec["name"])

    return RerunReport(
        checked=len(manifest.files),
        missing=missing,
        changed_on_disk=changed,
        divergent_on_rerun=divergent,
    )
