"""From-scratch forward pass for deconvolutional generators.

Layers operate on single-sample channel-major arrays ([C] or [C, H, W]).
Weights are stored float32 (the on-disk precision); every accumulation runs
in float64 so deep stacks stay well inside the oracle tolerances. All
functions are pure and a loaded model is immutable, so concurrent forward
calls on one model are safe.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError, NumericError, ShapeError, ValidationError
from .latent import LatentSpace, LatentVector


class SpaceTagMismatchWarning(UserWarning):
    """Latent fed to a model whose input space tag differs.

    Arithmetic and extrapolation results intentionally leave the sampling
    support, so this is a warning rather than an error.
    """


@dataclass(frozen=True)
class Tensor:
    """Shape plus flat real buffer; single sample, channel-major."""

    shape: tuple[int, ...]
    data: np.ndarray  # flat float64, length prod(shape)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64).reshape(-1)
        expected = int(np.prod(self.shape)) if self.shape else 0
        if arr.size != expected:
            raise ShapeError(
                f"tensor data length {arr.size} does not match shape {self.shape}"
            )
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Tensor":
        a = np.asarray(arr, dtype=np.float64)
        return cls(shape=a.shape, data=a.reshape(-1))

    def as_array(self) -> np.ndarray:
        return self.data.reshape(self.shape)


class ActivationKind(Enum):
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"
    TANH = "tanh"


def _param(arr, shape=None) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(arr, dtype=np.float32))
    if shape is not None and a.shape != tuple(shape):
        raise ValidationError(f"parameter shape {a.shape} != expected {tuple(shape)}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FullyConnected:
    weights: np.ndarray  # [out, in]
    bias: np.ndarray  # [out]

    def __post_init__(self):
        w = _param(self.weights)
        if w.ndim != 2:
            raise ValidationError(f"fully-connected weights must be 2-D, got {w.shape}")
        b = _param(self.bias, (w.shape[0],))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_features(self) -> int:
        return self.weights.shape[1]

    @property
    def out_features(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class TransposedConv:
    weights: np.ndarray  # [in_ch, out_ch, kH, kW]
    bias: np.ndarray  # [out_ch]
    stride: int = 1
    padding: int = 0
    output_padding: int = 0

    def __post_init__(self):
        w = _param(self.weights)
        if w.ndim != 4:
            raise ValidationError(f"transposed-conv weights must be 4-D, got {w.shape}")
        b = _param(self.bias, (w.shape[1],))
        if self.stride < 1:
            raise ValidationError(f"stride must be >= 1, got {self.stride}")
        if self.padding < 0:
            raise ValidationError(f"padding must be >= 0, got {self.padding}")
        if not 0 <= self.output_padding < self.stride:
            raise ValidationError(
                f"output_padding must satisfy 0 <= op < stride, got {self.output_padding}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def out_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_size(self) -> tuple[int, int]:
        return (self.weights.shape[2], self.weights.shape[3])


@dataclass(frozen=True)
class BatchNormInfer:
    """Inference-only batchnorm: running statistics, no batch statistics."""

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    epsilon: float = 1e-5

    def __post_init__(self):
        g = _param(self.gamma)
        if g.ndim != 1:
            raise ValidationError("batchnorm parameters must be 1-D")
        c = g.shape[0]
        b = _param(self.beta, (c,))
        m = _param(self.running_mean, (c,))
        v = _param(self.running_var, (c,))
        if np.any(v < 0):
            raise ValidationError("running_var components must be >= 0")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        for name, a in (("gamma", g), ("beta", b), ("running_mean", m), ("running_var", v)):
            object.__setattr__(self, name, a)

    @property
    def channels(self) -> int:
        return self.gamma.shape[0]


@dataclass(frozen=True)
class Activation:
    kind: ActivationKind
    alpha: float = 0.2  # leaky-relu slope; ignored by other kinds

    def __post_init__(self):
        if not isinstance(self.kind, ActivationKind):
            raise ValidationError(f"unknown activation {self.kind!r}")


@dataclass(frozen=True)
class Reshape:
    target_shape: tuple[int, ...]

    def __post_init__(self):
        shape = tuple(int(s) for s in self.target_shape)
        if not shape or any(s < 1 for s in shape):
            raise ValidationError(f"bad reshape target {self.target_shape}")
        object.__setattr__(self, "target_shape", shape)


LayerSpec = FullyConnected | TransposedConv | BatchNormInfer | Activation | Reshape


@dataclass(frozen=True)
class GeneratorModel:
    """Ordered layer stack G mapping latent vectors to image tensors."""

    input_dim: int
    input_space: LatentSpace
    layers: tuple[LayerSpec, ...]
    output_shape: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "output_shape", tuple(int(s) for s in self.output_shape))


# --- single-layer operations ---------------------------------------------


def conv_transpose(x: np.ndarray, layer: TransposedConv) -> np.ndarray:
    """Fractionally-strided convolution by scatter-add.

    Each input element (c, i, j) adds value * weights[c, o] into the output
    window anchored at (i*stride - padding, j*stride - padding); bias last.
    Output spatial size: (H-1)*stride - 2*padding + kH + output_padding.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError(f"transposed conv expects [C, H, W] input, got shape {x.shape}")
    cin, h, w = x.shape
    if cin != layer.in_channels:
        raise ShapeError(
            f"input has {cin} channels but layer expects {layer.in_channels}"
        )
    kh, kw = layer.kernel_size
    s, p, op = layer.stride, layer.padding, layer.output_padding
    hout = (h - 1) * s - 2 * p + kh + op
    wout = (w - 1) * s - 2 * p + kw + op
    if hout < 1 or wout < 1:
        raise ShapeError(
            f"computed output size {hout}x{wout} is not positive "
            f"(input {h}x{w}, kernel {kh}x{kw}, stride {s}, padding {p})"
        )
    wts = layer.weights.astype(np.float64)
    out = np.zeros((layer.out_channels, hout, wout), dtype=np.float64)
    rows_base = np.arange(h) * s - p
    cols_base = np.arange(w) * s - p
    for di in range(kh):
        rows = rows_base + di
        rsel = (rows >= 0) & (rows < hout)
        if not rsel.any():
            continue
        for dj in range(kw):
            cols = cols_base + dj
            csel = (cols >= 0) & (cols < wout)
            if not csel.any():
                continue
            # contribution of kernel tap (di, dj) at every input position
            contrib = np.tensordot(wts[:, :, di, dj], x, axes=([0], [0]))
            out[:, rows[rsel][:, None], cols[csel][None, :]] += contrib[:, rsel][:, :, csel]
    out += layer.bias.astype(np.float64)[:, None, None]
    return out


def batchnorm_infer(x: np.ndarray, layer: BatchNormInfer) -> np.ndarray:
    """Per channel: gamma*(x - running_mean)/sqrt(running_var + eps) + beta."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError(f"batchnorm expects [C, H, W] input, got shape {x.shape}")
    if x.shape[0] != layer.channels:
        raise ShapeError(
            f"input has {x.shape[0]} channels but batchnorm has {layer.channels}"
        )
    g = layer.gamma.astype(np.float64)[:, None, None]
    b = layer.beta.astype(np.float64)[:, None, None]
    m = layer.running_mean.astype(np.float64)[:, None, None]
    denom = np.sqrt(layer.running_var.astype(np.float64) + layer.epsilon)[:, None, None]
    return g * (x - m) / denom + b


def apply_activation(
    x: np.ndarray, kind: ActivationKind, alpha: float = 0.2
) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if kind == ActivationKind.RELU:
        return np.maximum(x, 0.0)
    if kind == ActivationKind.LEAKY_RELU:
        return np.where(x >= 0.0, x, alpha * x)
    if kind == ActivationKind.TANH:
        return np.tanh(x)
    raise InvalidArgumentError(f"unknown activation kind {kind!r}")


def fully_connected(x: np.ndarray, layer: FullyConnected) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"fully-connected expects a 1-D input, got shape {x.shape}")
    if x.shape[0] != layer.in_features:
        raise ShapeError(
            f"input has {x.shape[0]} features but layer expects {layer.in_features}"
        )
    return layer.weights.astype(np.float64) @ x + layer.bias.astype(np.float64)


def _apply_layer(x: np.ndarray, layer: LayerSpec) -> np.ndarray:
    if isinstance(layer, FullyConnected):
        return fully_connected(x, layer)
    if isinstance(layer, TransposedConv):
        return conv_transpose(x, layer)
    if isinstance(layer, BatchNormInfer):
        return batchnorm_infer(x, layer)
    if isinstance(layer, Activation):
        return apply_activation(x, layer.kind, layer.alpha)
    if isinstance(layer, Reshape):
        if int(np.prod(x.shape)) != int(np.prod(layer.target_shape)):
            raise ShapeError(
                f"cannot reshape {x.shape} ({int(np.prod(x.shape))} elements) "
                f"to {layer.target_shape}"
            )
        return x.reshape(layer.target_shape)
    raise ValidationError(f"unknown layer type {type(layer).__name__}")


def layer_output_shape(shape: tuple[int, ...], layer: LayerSpec) -> tuple[int, ...]:
    """Shape a layer produces for the given input shape; raises ShapeError."""
    if isinstance(layer, FullyConnected):
        if len(shape) != 1 or shape[0] != layer.in_features:
            raise ShapeError(
                f"fully-connected expects [{layer.in_features}], got {shape}"
            )
        return (layer.out_features,)
    if isinstance(layer, TransposedConv):
        if len(shape) != 3 or shape[0] != layer.in_channels:
            raise ShapeError(
                f"transposed conv expects [{layer.in_channels}, H, W], got {shape}"
            )
        kh, kw = layer.kernel_size
        s, p, op = layer.stride, layer.padding, layer.output_padding
        hout = (shape[1] - 1) * s - 2 * p + kh + op
        wout = (shape[2] - 1) * s - 2 * p + kw + op
        if hout < 1 or wout < 1:
            raise ShapeError(f"non-positive output size {hout}x{wout}")
        return (layer.out_channels, hout, wout)
    if isinstance(layer, BatchNormInfer):
        if len(shape) != 3 or shape[0] != layer.channels:
            raise ShapeError(f"batchnorm expects [{layer.channels}, H, W], got {shape}")
        return shape
    if isinstance(layer, Activation):
        return shape
    if isinstance(layer, Reshape):
        if int(np.prod(shape)) != int(np.prod(layer.target_shape)):
            raise ShapeError(f"cannot reshape {shape} to {layer.target_shape}")
        return layer.target_shape
    raise ValidationError(f"unknown layer type {type(layer).__name__}")


def validate_shape_chain(model: GeneratorModel) -> list[tuple[int, ...]]:
    """Walk the layer stack symbolically; returns the shape after each layer.

    Raises ValidationError naming the offending layer index on any break,
    and requires a Tanh tail for image-shaped (rank-3) outputs.
    """
    shape: tuple[int, ...] = (model.input_dim,)
    shapes = []
    for idx, layer in enumerate(model.layers):
        try:
            shape = layer_output_shape(shape, layer)
        except ShapeError as e:
            raise ValidationError(f"layer {idx} breaks the shape chain: {e}") from e
        shapes.append(shape)
    if shape != model.output_shape:
        raise ValidationError(
            f"final shape {shape} does not match declared output_shape {model.output_shape}"
        )
    if len(model.output_shape) == 3:
        last = model.layers[-1] if model.layers else None
        if not (isinstance(last, Activation) and last.kind == ActivationKind.TANH):
            raise ValidationError("image models must end with a Tanh activation")
    return shapes


def forward(model: GeneratorModel, z: LatentVector, validate: bool = False) -> Tensor:
    """Apply the layer stack to a latent vector.

    A space-tag mismatch warns rather than fails: arithmetic and
    extrapolation intentionally feed latents from outside the sampling
    support. With ``validate=True``, every intermediate activation is
    checked for finiteness.
    """
    if z.dim != model.input_dim:
        raise ShapeError(f"latent dim {z.dim} != model input dim {model.input_dim}")
    if z.space != model.input_space:
        warnings.warn(
            f"latent space tag {z.space.value} differs from model input space "
            f"{model.input_space.value}",
            SpaceTagMismatchWarning,
            stacklevel=2,
        )
    x = z.values
    for idx, layer in enumerate(model.layers):
        try:
            x = _apply_layer(x, layer)
        except ShapeError as e:
            raise ShapeError(f"layer {idx}: {e}") from e
        if validate and not np.all(np.isfinite(x)):
            raise NumericError(f"non-finite activation after layer {idx}")
    if tuple(x.shape) != model.output_shape:
        raise ShapeError(
            f"forward produced shape {tuple(x.shape)} but model declares {model.output_shape}"
        )
    return Tensor.from_array(x)


# --- reference architecture ----------------------------------------------

DCGAN64_STAGE_CHANNELS = (512, 256, 128, 64)


def dcgan64_architecture(seed: int, channel_scale: float = 1.0) -> GeneratorModel:
    """Randomly initialised 64x64 RGB generator in the classic DCGAN layout.

    100-d uniform-cube input, project/reshape to 4x4, then four stride-2
    kernel-4 pad-1 transposed convolutions (4->8->16->32->64) with
    batchnorm+ReLU between and Tanh last. ``channel_scale`` shrinks every
    stage's channel count for desk-scale tests while keeping the exact
    shape arithmetic of the full model.

    Init convention (the toolkit never trains, so these are fixed): conv
    and fully-connected weights N(0, 0.02^2), biases 0, batchnorm gamma
    N(1, 0.02^2), beta 0, running stats (0, 1), epsilon 1e-5.
    """
    if not (isinstance(channel_scale, (int, float)) and 0.0 < channel_scale <= 1.0):
        raise InvalidArgumentError(
            f"channel_scale must be in (0, 1], got {channel_scale}"
        )
    channels = [int(round(c * channel_scale)) for c in DCGAN64_STAGE_CHANNELS]
    if any(c < 1 for c in channels):
        raise InvalidArgumentError(
            f"channel_scale {channel_scale} collapses a stage to zero channels: {channels}"
        )
    rng = np.random.default_rng(seed)

    def normal32(*shape):
        return rng.normal(0.0, 0.02, size=shape).astype(np.float32)

    def bn(c):
        return BatchNormInfer(
            gamma=rng.normal(1.0, 0.02, size=c).astype(np.float32),
            beta=np.zeros(c, dtype=np.float32),
            running_mean=np.zeros(c, dtype=np.float32),
            running_var=np.ones(c, dtype=np.float32),
            epsilon=1e-5,
        )

    c0, c1, c2, c3 = channels
    layers: list[LayerSpec] = [
        FullyConnected(weights=normal32(c0 * 16, 100), bias=np.zeros(c0 * 16, np.float32)),
        Reshape((c0, 4, 4)),
        bn(c0),
        Activation(ActivationKind.RELU),
    ]
    stage_io = [(c0, c1), (c1, c2), (c2, c3)]
    for cin, cout in stage_io:
        layers += [
            TransposedConv(
                weights=normal32(cin, cout, 4, 4),
                bias=np.zeros(cout, np.float32),
                stride=2,
                padding=1,
            ),
            bn(cout),
            Activation(ActivationKind.RELU),
        ]
    layers += [
        TransposedConv(
            weights=normal32(c3, 3, 4, 4),
            bias=np.zeros(3, np.float32),
            stride=2,
            padding=1,
        ),
        Activation(ActivationKind.TANH),
    ]
    model = GeneratorModel(
        input_dim=100,
        input_space=LatentSpace.UNIFORM_CUBE,
        layers=tuple(layers),
        output_shape=(3, 64, 64),
    )
    validate_shape_chain(model)
    return model


def iter_layer_params(model: GeneratorModel):
    """Yield (layer_index, param_name, array) for every weight tensor."""
    for idx, layer in enumerate(model.layers):
        if isinstance(layer, FullyConnected):
            yield idx, "weights", layer.weights
            yield idx, "bias", layer.bias
        elif isinstance(layer, TransposedConv):
            yield idx, "weights", layer.weights
            yield idx, "bias", layer.bias
        elif isinstance(layer, BatchNormInfer):
            yield idx, "gamma", layer.gamma
            yield idx, "beta", layer.beta
            yield idx, "running_mean", layer.running_mean
            yield idx, "running_var", layer.running_var
