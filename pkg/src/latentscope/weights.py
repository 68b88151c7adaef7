"""LGW1 portable weight files.

Layout: 8-byte magic ``LATGENW1``; a little-endian u32 length prefix and a
UTF-8 JSON manifest (input_dim, input_space, output_shape, ordered layer
entries with hyperparameters, tensor shapes and byte offsets); then the raw
tensor payloads, contiguous float32 little-endian, row-major, in manifest
order. Offsets are relative to the start of the payload region. Readers
reject unknown magic and anything that fails shape-chain or finiteness
validation.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, IOFailureError, ValidationError
from .engine import (
    Activation,
    ActivationKind,
    BatchNormInfer,
    FullyConnected,
    GeneratorModel,
    LayerSpec,
    Reshape,
    TransposedConv,
    validate_shape_chain,
)
from .latent import LatentSpace

MAGIC = b"LATGENW1"

_ACTIVATION_NAMES = {k.value: k for k in ActivationKind}


def _tensor_entry(arr: np.ndarray, offset: int) -> tuple[dict, bytes, int]:
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    entry = {"shape": list(arr.shape), "offset": offset}
    return entry, payload, offset + len(payload)


def save_model_bytes(model: GeneratorModel) -> bytes:
    """Serialize a model to LGW1 bytes."""
    layers_json: list[dict] = []
    chunks: list[bytes] = []
    offset = 0
    for layer in model.layers:
        if isinstance(layer, FullyConnected):
            entry = {
                "kind": "fully_connected",
                "in_features": layer.in_features,
                "out_features": layer.out_features,
            }
            for name in ("weights", "bias"):
                tensor_entry, payload, offset = _tensor_entry(getattr(layer, name), offset)
                entry[name] = tensor_entry
                chunks.append(payload)
        elif isinstance(layer, TransposedConv):
            entry = {
                "kind": "transposed_conv",
                "in_channels": layer.in_channels,
                "out_channels": layer.out_channels,
                "kernel": list(layer.kernel_size),
                "stride": layer.stride,
                "padding": layer.padding,
                "output_padding": layer.output_padding,
            }
            for name in ("weights", "bias"):
                tensor_entry, payload, offset = _tensor_entry(getattr(layer, name), offset)
                entry[name] = tensor_entry
                chunks.append(payload)
        elif isinstance(layer, BatchNormInfer):
            entry = {
                "kind": "batchnorm",
                "channels": layer.channels,
                "epsilon": layer.epsilon,
            }
            for name in ("gamma", "beta", "running_mean", "running_var"):
                tensor_entry, payload, offset = _tensor_entry(getattr(layer, name), offset)
                entry[name] = tensor_entry
                chunks.append(payload)
        elif isinstance(layer, Activation):
            entry = {
                "kind": "activation",
                "activation": layer.kind.value,
                "alpha": layer.alpha,
            }
        elif isinstance(layer, Reshape):
            entry = {"kind": "reshape", "target_shape": list(layer.target_shape)}
        else:
            raise ValidationError(f"cannot serialize layer type {type(layer).__name__}")
        layers_json.append(entry)

    manifest = {
        "input_dim": model.input_dim,
        "input_space": model.input_space.value,
        "output_shape": list(model.output_shape),
        "layers": layers_json,
    }
    manifest_bytes = json.dumps(manifest, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<I", len(manifest_bytes)) + manifest_bytes + b"".join(chunks)


def save_model(model: GeneratorModel, path) -> None:
    from .image import atomic_write_bytes

    atomic_write_bytes(path, save_model_bytes(model))


def _read_tensor(payload: bytes, entry, layer_idx: int, name: str) -> np.ndarray:
    if not isinstance(entry, dict) or "shape" not in entry or "offset" not in entry:
        raise FormatError(f"layer {layer_idx}: malformed tensor entry for {name!r}")
    shape = entry["shape"]
    offset = entry["offset"]
    if (
        not isinstance(shape, list)
        or not all(isinstance(s, int) and s > 0 for s in shape)
        or not isinstance(offset, int)
        or offset < 0
    ):
        raise FormatError(f"layer {layer_idx}: bad shape/offset for {name!r}")
    count = int(np.prod(shape))
    end = offset + 4 * count
    if end > len(payload):
        raise FormatError(
            f"layer {layer_idx}: tensor {name!r} needs bytes [{offset}, {end}) "
            f"but payload holds {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset)
    arr = arr.reshape(shape).copy()
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"layer {layer_idx}: tensor {name!r} contains NaN/Inf")
    return arr


def _require(entry: dict, key: str, typ, layer_idx: int):
    if key not in entry:
        raise FormatError(f"layer {layer_idx}: missing field {key!r}")
    val = entry[key]
    if typ is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise FormatError(f"layer {layer_idx}: field {key!r} must be a number")
        return float(val)
    if not isinstance(val, typ) or isinstance(val, bool):
        raise FormatError(f"layer {layer_idx}: field {key!r} has wrong type")
    return val


def load_model_bytes(data: bytes) -> GeneratorModel:
    """Parse and validate LGW1 bytes into a model."""
    if len(data) < len(MAGIC) + 4:
        raise FormatError("file too short to hold the LGW1 header")
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError(
            f"bad magic {data[:len(MAGIC)]!r}; expected {MAGIC.decode('ascii')}"
        )
    (manifest_len,) = struct.unpack_from("<I", data, len(MAGIC))
    manifest_start = len(MAGIC) + 4
    manifest_end = manifest_start + manifest_len
    if manifest_end > len(data):
        raise FormatError(
            f"manifest declares {manifest_len} bytes but only "
            f"{len(data) - manifest_start} remain"
        )
    try:
        manifest = json.loads(data[manifest_start:manifest_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"manifest is not valid UTF-8 JSON: {e}") from e
    if not isinstance(manifest, dict):
        raise FormatError("manifest must be a JSON object")
    for key in ("input_dim", "input_space", "output_shape", "layers"):
        if key not in manifest:
            raise FormatError(f"manifest missing field {key!r}")
    input_dim = manifest["input_dim"]
    if not isinstance(input_dim, int) or input_dim < 1:
        raise FormatError(f"bad input_dim {input_dim!r}")
    try:
        input_space = LatentSpace(manifest["input_space"])
    except ValueError as e:
        raise FormatError(f"unknown input_space {manifest['input_space']!r}") from e
    output_shape = manifest["output_shape"]
    if not (
        isinstance(output_shape, list)
        and all(isinstance(s, int) and s > 0 for s in output_shape)
    ):
        raise FormatError(f"bad output_shape {output_shape!r}")
    if not isinstance(manifest["layers"], list):
        raise FormatError("manifest 'layers' must be a list")

    payload = data[manifest_end:]
    layers: list[LayerSpec] = []
    for idx, entry in enumerate(manifest["layers"]):
        if not isinstance(entry, dict):
            raise FormatError(f"layer {idx}: entry must be a JSON object")
        kind = entry.get("kind")
        try:
            if kind == "fully_connected":
                layer: LayerSpec = FullyConnected(
                    weights=_read_tensor(payload, entry.get("weights"), idx, "weights"),
                    bias=_read_tensor(payload, entry.get("bias"), idx, "bias"),
                )
                if (
                    layer.in_features != _require(entry, "in_features", int, idx)
                    or layer.out_features != _require(entry, "out_features", int, idx)
                ):
                    raise ValidationError(
                        f"layer {idx}: declared features do not match tensor shape "
                        f"{layer.weights.shape}"
                    )
            elif kind == "transposed_conv":
                layer = TransposedConv(
                    weights=_read_tensor(payload, entry.get("weights"), idx, "weights"),
                    bias=_read_tensor(payload, entry.get("bias"), idx, "bias"),
                    stride=_require(entry, "stride", int, idx),
                    padding=_require(entry, "padding", int, idx),
                    output_padding=_require(entry, "output_padding", int, idx),
                )
                declared = (
                    _require(entry, "in_channels", int, idx),
                    _require(entry, "out_channels", int, idx),
                    tuple(_require(entry, "kernel", list, idx)),
                )
                actual = (layer.in_channels, layer.out_channels, layer.kernel_size)
                if declared != actual:
                    raise ValidationError(
                        f"layer {idx}: declared channels/kernel {declared} do not "
                        f"match tensor shape {layer.weights.shape}"
                    )
            elif kind == "batchnorm":
                layer = BatchNormInfer(
                    gamma=_read_tensor(payload, entry.get("gamma"), idx, "gamma"),
                    beta=_read_tensor(payload, entry.get("beta"), idx, "beta"),
                    running_mean=_read_tensor(
                        payload, entry.get("running_mean"), idx, "running_mean"
                    ),
                    running_var=_read_tensor(
                        payload, entry.get("running_var"), idx, "running_var"
                    ),
                    epsilon=_require(entry, "epsilon", float, idx),
                )
                if layer.channels != _require(entry, "channels", int, idx):
                    raise ValidationError(
                        f"layer {idx}: declared channels do not match tensors"
                    )
            elif kind == "activation":
                name = _require(entry, "activation", str, idx)
                if name not in _ACTIVATION_NAMES:
                    raise FormatError(f"layer {idx}: unknown activation {name!r}")
                layer = Activation(
                    kind=_ACTIVATION_NAMES[name],
                    alpha=float(entry.get("alpha", 0.2)),
                )
            elif kind == "reshape":
                layer = Reshape(
                    target_shape=tuple(_require(entry, "target_shape", list, idx))
                )
            else:
                raise FormatError(f"layer {idx}: unknown layer kind {kind!r}")
        except ValidationError as e:
            raise ValidationError(f"layer {idx}: {e}" if str(e)[:5] != "layer" else str(e)) from e
        layers.append(layer)

    model = GeneratorModel(
        input_dim=input_dim,
        input_space=input_space,
        layers=tuple(layers),
        output_shape=tuple(output_shape),
    )
    validate_shape_chain(model)
    return model


def load_model(path) -> GeneratorModel:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as e:
        raise IOFailureError(f"cannot read model file {p}: {e}") from e
    return load_model_bytes(data)


def model_info(model: GeneratorModel) -> dict:
    """Summary dict used by the CLI and the HTTP service."""
    shapes = validate_shape_chain(model)
    layer_rows = []
    shape: tuple[int, ...] = (model.input_dim,)
    for idx, (layer, out_shape) in enumerate(zip(model.layers, shapes)):
        params = 0
        if isinstance(layer, (FullyConnected, TransposedConv)):
            params = int(layer.weights.size + layer.bias.size)
        elif isinstance(layer, BatchNormInfer):
            params = int(4 * layer.channels)
        layer_rows.append(
            {
                "index": idx,
                "kind": type(layer).__name__,
                "output_shape": list(out_shape),
                "parameters": params,
            }
        )
        shape = out_shape
    return {
        "input_dim": model.input_dim,
        "input_space": model.input_space.value,
        "output_shape": list(model.output_shape),
        "layer_count": len(model.layers),
        "parameters": sum(r["parameters"] for r in layer_rows),
        "layers": layer_rows,
    }
