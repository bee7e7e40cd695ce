"""Floating-point image representation, codecs, color conversion and sampling.

Images are held as float64 samples in [0, 1], shape (height, width, channels)
with channels 1 (grayscale) or 3 (RGB).  Quantization to 8-bit happens only
on export, so warping and blending never accumulate integer rounding error.
Pixel centers sit at integer coordinates: (x, y) = (0, 0) is the center of
the top-left pixel and (width-1, height-1) the center of the bottom-right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import CodecError, DataError

# Luma weights, ITU-R BT.601.
_LUMA = np.array([0.299, 0.587, 0.114])

# RGB -> YCbCr (full range, BT.601 weights), applied as M @ rgb + offset.
_YCBCR_MATRIX = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.299 / 1.772, -0.587 / 1.772, (1.0 - 0.114) / 1.772],
        [(1.0 - 0.299) / 1.402, -0.587 / 1.402, -0.114 / 1.402],
    ]
)
_YCBCR_OFFSET = np.array([0.0, 0.5, 0.5])


@dataclass
class Raster:
    """Image with float64 samples, shape (height, width, channels)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise DataError(f"raster must be (h, w, 1|3), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"raster must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("raster contains non-finite samples")
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def copy(self) -> "Raster":
        return Raster(self.data.copy())

    def to_bytes(self) -> np.ndarray:
        """Quantize to uint8, clamping to [0, 1] first."""
        return np.rint(np.clip(self.data, 0.0, 1.0) * 255.0).astype(np.uint8)


def load_png(path) -> Raster:
    """Read an 8-bit RGB or grayscale PNG; samples become byte/255 exactly.

    Palette, 16-bit, and alpha variants are rejected with CodecError.
    """
    try:
        with Image.open(path) as im:
            im.load()
            if im.format != "PNG":
                raise CodecError(f"{path}: not a PNG file (format={im.format})")
            if im.mode not in ("L", "RGB"):
                raise CodecError(
                    f"{path}: unsupported PNG mode {im.mode!r} "
                    "(only 8-bit grayscale or RGB)"
                )
            arr = np.asarray(im, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise CodecError(f"{path}: file not found") from exc
    except (OSError, SyntaxError) as exc:
        raise CodecError(f"{path}: cannot decode PNG ({exc})") from exc
    return Raster(arr.astype(np.float64) / 255.0)


def save_png(img: Raster, path) -> None:
    """Write an 8-bit PNG (grayscale for 1-channel, RGB for 3-channel)."""
    b = img.to_bytes()
    if img.channels == 1:
        pil = Image.fromarray(b[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(b, mode="RGB")
    pil.save(path, format="PNG")


def save_ppm(img: Raster, path) -> None:
    """Write a binary PPM (P6) debug dump; grayscale is replicated to RGB."""
    b = img.to_bytes()
    if img.channels == 1:
        b = np.repeat(b, 3, axis=2)
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + b.tobytes())


def to_grayscale(img: Raster) -> Raster:
    """BT.601 luma conversion; grayscale input is returned unchanged (copy)."""
    if img.channels == 1:
        return img.copy()
    luma = img.data @ _LUMA
    return Raster(luma[:, :, np.newaxis])


def convert_color(img: Raster, space: str) -> Raster:
    """Convert an RGB raster to HSV or YCbCr, every channel scaled to [0, 1].

    HSV follows the usual hexcone model with hue divided by 360.  YCbCr uses
    BT.601 weights with chroma offset to 0.5 so achromatic pixels map to
    (luma, 0.5, 0.5).
    """
    if img.channels != 3:
        raise DataError("convert_color requires an RGB raster")
    space = space.upper()
    if space == "YCBCR":
        out = img.data @ _YCBCR_MATRIX.T + _YCBCR_OFFSET
        return Raster(out)
    if space == "HSV":
        r, g, b = img.data[:, :, 0], img.data[:, :, 1], img.data[:, :, 2]
        v = np.max(img.data, axis=2)
        c = v - np.min(img.data, axis=2)
        s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            hr = np.where(c > 0, ((g - b) / c) % 6.0, 0.0)
            hg = np.where(c > 0, (b - r) / c + 2.0, 0.0)
            hb = np.where(c > 0, (r - g) / c + 4.0, 0.0)
        h = np.select([v == r, v == g], [hr, hg], default=hb)
        h = np.where(c > 0, h / 6.0, 0.0)
        return Raster(np.stack([h, s, v], axis=2))
    raise DataError(f"unknown color space {space!r} (expected HSV or YCbCr)")


def _sample_bilinear_arr(data: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear sampling of (h, w, c) data at float coords, edge-clamped."""
    h, w = data.shape[:2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[..., np.newaxis]
    fy = (ys - y0)[..., np.newaxis]
    top = data[y0, x0] * (1.0 - fx) + data[y0, x1] * fx
    bot = data[y1, x0] * (1.0 - fx) + data[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def sample_bilinear(img: Raster, x: float, y: float) -> np.ndarray:
    """Bilinearly interpolated sample vector at (x, y); out-of-bounds clamps."""
    return _sample_bilinear_arr(img.data, np.float64(x), np.float64(y))


def resize_bilinear(img: Raster, width: int, height: int) -> Raster:
    """Bilinear resize using the half-pixel coordinate mapping."""
    if width < 1 or height < 1:
        raise DataError("resize target must be at least 1x1")
    xs = (np.arange(width) + 0.5) * (img.width / width) - 0.5
    ys = (np.arange(height) + 0.5) * (img.height / height) - 0.5
    gx, gy = np.meshgrid(xs, ys)
    return Raster(_sample_bilinear_arr(img.data, gx, gy))


def blend(a: Raster, b: Raster, alpha: float) -> Raster:
    """Elementwise cross-dissolve (1-alpha)*a + alpha*b."""
    if a.shape != b.shape:
        raise DataError(f"blend shape mismatch: {a.shape} vs {b.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise DataError(f"alpha must be in [0, 1], got {alpha}")
    return Raster((1.0 - alpha) * a.data + alpha * b.data)
