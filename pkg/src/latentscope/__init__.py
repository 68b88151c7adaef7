"""Latent-space inspection toolkit for small deconvolutional image generators.

Pure NumPy inference plus the classic latent-space probes: seeded sampling,
linear/spherical interpolation, two-sided extrapolation, a semicircular
sweep through the first two latent components, and anchor-set vector
arithmetic. Ships a declarative experiment runner, a compact weights format,
an HTTP service, and a CLI.
"""

__version__ = "0.1.0"

from .errors import (
    ConflictError,
    DegenerateGeometryError,
    FormatError,
    InvalidArgumentError,
    IOFailureError,
    LatentScopeError,
    NotFoundError,
    NumericError,
    ShapeError,
    ValidationError,
)
from .latent import (
    AnchorSet,
    ArithmeticExpression,
    LatentSpace,
    LatentVector,
    TraversalKind,
    TraversalSequence,
    average_anchors,
    circular_interpolation,
    evaluate_arithmetic,
    extrapolate_two_sided,
    lerp,
    load_latents,
    parse_expression_terms,
    parse_latent,
    sample_latents,
    save_latents,
    serialize_latent,
    slerp,
)
from .engine import (
    Activation,
    ActivationKind,
    BatchNormInfer,
    FullyConnected,
    GeneratorModel,
    Reshape,
    SpaceTagMismatchWarning,
    Tensor,
    TransposedConv,
    conv_transpose,
    dcgan64_architecture,
    forward,
    validate_shape_chain,
)
from .weights import load_model, load_model_bytes, model_info, save_model, save_model_bytes
from .image import ImageBuffer, compose_grid, decode_png, encode_png, tensor_to_image
from .anchors import AnchorStore
from .experiment import ExperimentSpec, RunManifest, rerun_check, run_experiment

__all__ = [
    "__version__",
    "LatentScopeError",
    "InvalidArgumentError",
    "ShapeError",
    "ValidationError",
    "DegenerateGeometryError",
    "NotFoundError",
    "ConflictError",
    "FormatError",
    "IOFailureError",
    "NumericError",
    "LatentSpace",
    "TraversalKind",
    "LatentVector",
    "TraversalSequence",
    "AnchorSet",
    "ArithmeticExpression",
    "sample_latents",
    "lerp",
    "extrapolate_two_sided",
    "circular_interpolation",
    "slerp",
    "average_anchors",
    "evaluate_arithmetic",
    "parse_expression_terms",
    "serialize_latent",
    "parse_latent",
    "save_latents",
    "load_latents",
    "Tensor",
    "ActivationKind",
    "FullyConnected",
    "TransposedConv",
    "BatchNormInfer",
    "Activation",
    "Reshape",
    "GeneratorModel",
    "SpaceTagMismatchWarning",
    "conv_transpose",
    "forward",
    "validate_shape_chain",
    "dcgan64_architecture",
    "save_model",
    "save_model_bytes",
    "load_model",
    "load_model_bytes",
    "model_info",
    "ImageBuffer",
    "tensor_to_image",
    "compose_grid",
    "encode_png",
    "decode_png",
    "AnchorStore",
    "ExperimentSpec",
    "RunManifest",
    "run_experiment",
    "rerun_check",
]
