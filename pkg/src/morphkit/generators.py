"""Generator contracts: map a latent code to an image.

Two capability levels: every generator can synthesize, and differentiable
generators additionally expose forward/backward hooks so the embedding
optimizer can chain gradients through them.  The toy reshape generator keeps
that chain exactly linear, which makes optimizer behavior easy to verify;
real generators can be driven out of process through a command template.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import tempfile
from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np

from .errors import DataError
from .latent import as_latent, save_latent
from .raster import Raster, load_png


class Generator(ABC):
    """Anything that can turn a (layers, dims) latent into an image."""

    generator_id: str
    latent_layers: int
    latent_dims: int

    @abstractmethod
    def synthesize(self, latent) -> Raster:
        ...

    def check_latent(self, latent) -> np.ndarray:
        arr = as_latent(latent)
        want = (self.latent_layers, self.latent_dims)
        if arr.shape != want:
            raise DataError(
                f"latent shape {arr.shape} does not match generator "
                f"{self.generator_id!r} expecting {want}"
            )
        return arr


class DifferentiableGenerator(Generator):
    """Generator with gradient hooks for embedding by optimization."""

    @abstractmethod
    def forward(self, latent) -> np.ndarray:
        """Latent -> image data array (h, w, c)."""

    @abstractmethod
    def backward(self, latent, grad_image: np.ndarray) -> np.ndarray:
        """Pull an image-space gradient back to latent space."""


class ToyReshapeGenerator(DifferentiableGenerator):
    """Linear toy generator: the latent is literally the flattened image.

    Requires layers * dims == height * width * channels.  Useful for
    exercising the embedding loop with a known exact optimum.
    """

    def __init__(self, height: int = 48, width: int = 64, channels: int = 3,
                 layers: int = 18, dims: int = 512):
        if layers * dims != height * width * channels:
            raise DataError(
                f"latent size {layers}x{dims} != image size "
                f"{height}x{width}x{channels}"
            )
        self.latent_layers = layers
        self.latent_dims = dims
        self.height = height
        self.width = width
        self.channels = channels
        self.generator_id = (
            f"toy-reshape-{layers}x{dims}-{height}x{width}x{channels}"
        )

    def forward(self, latent) -> np.ndarray:
        arr = self.check_latent(latent)
        return arr.reshape(self.height, self.width, self.channels)

    def backward(self, latent, grad_image: np.ndarray) -> np.ndarray:
        return np.asarray(grad_image, dtype=np.float64).reshape(
            self.latent_layers, self.latent_dims
        )

    def synthesize(self, latent) -> Raster:
        return Raster(np.clip(self.forward(latent), 0.0, 1.0))


class ExternalCommandGenerator(Generator):
    """Drive an out-of-process generator through a command template.

    The template is a shell-style string whose tokens may contain {latent}
    and {output} placeholders; the command must read the latent file written
    by this object and produce an 8-bit PNG at the output path.  No gradient
    hooks, so it supports synthesis only.
    """

    def __init__(self, command_template: str, layers: int, dims: int,
                 generator_id: str = "external"):
        if "{latent}" not in command_template or "{output}" not in command_template:
            raise DataError(
                "command template must contain {latent} and {output} placeholders"
            )
        self.command_template = command_template
        self.latent_layers = int(layers)
        self.latent_dims = int(dims)
        self.generator_id = generator_id

    def synthesize(self, latent) -> Raster:
        arr = self.check_latent(latent)
        with tempfile.TemporaryDirectory(prefix="morphkit-gen-") as tmp:
            latent_path = Path(tmp) / "latent.bin"
            out_path = Path(tmp) / "out.png"
            save_latent(latent_path, arr, self.generator_id)
            argv = [
                tok.format(latent=str(latent_path), output=str(out_path))
                for tok in shlex.split(self.command_template)
            ]
            proc = subprocess.run(argv, capture_output=True, text=True)
            if proc.returncode != 0:
                tail = (proc.stderr or proc.stdout or "").strip()[-500:]
                raise DataError(
                    f"generator command failed with exit {proc.returncode}: {tail}"
                )
            if not out_path.exists():
                raise DataError("generator command produced no output image")
            return load_png(out_path)


def toy_generator_from_id(generator_id: str) -> ToyReshapeGenerator:
    """Rebuild a toy reshape generator from its id string.

    Inverse of the id written by ToyReshapeGenerator, so a latent file's
    sidecar is enough to re-synthesize the image it encodes.
    """
    m = re.fullmatch(
        r"toy-reshape-(\d+)x(\d+)-(\d+)x(\d+)x(\d+)", str(generator_id)
    )
    if m is None:
        raise DataError(
            f"generator id {generator_id!r} does not name a toy reshape "
            "generator"
        )
    layers, dims, h, w, c = (int(g) for g in m.groups())
    return ToyReshapeGenerator(h, w, c, layers=layers, dims=dims)
