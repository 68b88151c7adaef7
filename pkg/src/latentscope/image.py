"""Tanh-range tensors to 8-bit RGB images, grid composition, PNG I/O.

Quantization is round-half-up on the scaled value (so 0.0 maps to 128),
grids place tiles row-major from the top left, and PNG writes are atomic
(temp file + rename) so an interrupted run never leaves partial outputs.
"""

from __future__ import annotations

import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidArgumentError, IOFailureError, NumericError, ShapeError
from .engine import Tensor


@dataclass(frozen=True)
class ImageBuffer:
    """Row-major interleaved 8-bit RGB pixels."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError(
                f"image dimensions must be positive, got {self.width}x{self.height}"
            )
        if len(self.pixels) != self.width * self.height * 3:
            raise InvalidArgumentError(
                f"pixel buffer has {len(self.pixels)} bytes, expected "
                f"{self.width * self.height * 3}"
            )

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, 3
        )


def tensor_to_image(t: Tensor) -> ImageBuffer:
    """Map a [3, H, W] tensor from [-1, 1] to 8-bit RGB.

    u = clamp(round((v+1)/2 * 255), 0, 255) with round-half-up; values
    outside the nominal range clamp rather than fail.
    """
    if len(t.shape) != 3 or t.shape[0] != 3:
        raise ShapeError(f"expected a [3, H, W] tensor, got shape {t.shape}")
    v = t.as_array()
    if not np.all(np.isfinite(v)):
        raise NumericError("tensor contains NaN/Inf; cannot quantize")
    scaled = (v + 1.0) / 2.0 * 255.0
    u = np.clip(np.floor(scaled + 0.5), 0.0, 255.0).astype(np.uint8)
    interleaved = np.ascontiguousarray(u.transpose(1, 2, 0))
    return ImageBuffer(width=t.shape[2], height=t.shape[1], pixels=interleaved.tobytes())


def compose_grid(
    images: list[ImageBuffer], cols: int, pad_px: int = 0, pad_value: int = 0
) -> ImageBuffer:
    """Tile images row-major from the top left into ceil(k/cols) rows.

    Trailing empty cells and inter-tile spacing are filled with pad_value.
    Input pixels are copied verbatim (no resampling).
    """
    if not images:
        raise InvalidArgumentError("grid needs at least one image")
    if cols < 1:
        raise InvalidArgumentError(f"cols must be >= 1, got {cols}")
    if pad_px < 0:
        raise InvalidArgumentError(f"pad_px must be >= 0, got {pad_px}")
    if not 0 <= pad_value <= 255:
        raise InvalidArgumentError(f"pad_value must be a byte, got {pad_value}")
    w, h = images[0].width, images[0].height
    for i, img in enumerate(images):
        if img.width != w or img.height != h:
            raise InvalidArgumentError(
                f"image {i} is {img.width}x{img.height}, expected {w}x{h}"
            )
    k = len(images)
    rows = math.ceil(k / cols)
    canvas_h = rows * h + (rows - 1) * pad_px
    canvas_w = cols * w + (cols - 1) * pad_px
    canvas = np.full((canvas_h, canvas_w, 3), pad_value, dtype=np.uint8)
    for i, img in enumerate(images):
        r, c = divmod(i, cols)
        y0 = r * (h + pad_px)
        x0 = c * (w + pad_px)
        canvas[y0 : y0 + h, x0 : x0 + w] = img.as_array()
    return ImageBuffer(width=canvas_w, height=canvas_h, pixels=canvas.tobytes())


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the target directory + rename."""
    p = Path(path)
    tmp_name = None
    try:
        fd, tmp_name = tempfile.mkstemp(dir=p.parent, prefix=f".{p.name}.", suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, p)
        tmp_name = None
    except OSError as e:
        raise IOFailureError(f"cannot write {p}: {e}") from e
    finally:
        if tmp_name is not None:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass


def encode_png_bytes(img: ImageBuffer) -> bytes:
    pil = Image.frombytes("RGB", (img.width, img.height), img.pixels)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def encode_png(img: ImageBuffer, path) -> None:
    """Write an 8-bit RGB PNG atomically; decode gives back the same pixels."""
    atomic_write_bytes(path, encode_png_bytes(img))


def decode_png(path) -> ImageBuffer:
    p = Path(path)
    try:
        with Image.open(p) as pil:
            rgb = pil.convert("RGB")
            return ImageBuffer(
                width=rgb.width, height=rgb.height, pixels=rgb.tobytes()
            )
    except OSError as e:
        raise IOFailureError(f"cannot read PNG {p}: {e}") from e
