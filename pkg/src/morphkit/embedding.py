"""Latent embedding by optimization, and latent-space morph generation.

An image is embedded by minimizing the multi-scale perceptual loss between
the generator's output and the target, with a hand-rolled Adam loop over the
latent.  The optimizer tracks the best iterate seen, so the returned loss is
never worse than the loss of the random initialization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError, NumericalError
from .generators import DifferentiableGenerator, Generator
from .latent import combine_latents
from .percept import default_feature_stack, extract_features, perceptual_loss
from .raster import Raster


@dataclass
class EmbedConfig:
    """Optimizer settings for embedding; defaults favor a low-momentum Adam."""

    steps: int = 500
    lr: float = 0.01
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    init_sigma: float = 0.01

    def validate(self) -> None:
        if self.steps < 1:
            raise DataError(f"steps must be >= 1, got {self.steps}")
        if not (np.isfinite(self.lr) and self.lr > 0):
            raise DataError(f"lr must be positive, got {self.lr}")
        for name, b in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not (0.0 <= b < 1.0):
                raise DataError(f"{name} must be in [0, 1), got {b}")
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise DataError(f"eps must be positive, got {self.eps}")
        if not (np.isfinite(self.init_sigma) and self.init_sigma >= 0):
            raise DataError(f"init_sigma must be non-negative, got {self.init_sigma}")


class Adam:
    """Plain Adam with bias correction; operates on one array of parameters."""

    def __init__(self, shape, lr: float, beta1: float, beta2: float, eps: float):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class EmbedResult:
    latent: np.ndarray
    loss: float
    step: int
    initial_loss: float
    history: np.ndarray
    generator_id: str


def embed_image(
    target: Raster,
    generator: DifferentiableGenerator,
    extractors: Optional[list] = None,
    config: Optional[EmbedConfig] = None,
    seed: int = 0,
) -> EmbedResult:
    """Find a latent whose synthesis perceptually matches the target image.

    The latent starts at seeded Gaussian noise (scale config.init_sigma) and
    follows Adam on the perceptual loss for config.steps updates; the best
    iterate over the whole run (including the initialization) is returned.
    """
    if not isinstance(generator, DifferentiableGenerator):
        raise DataError(
            f"generator {getattr(generator, 'generator_id', '?')!r} has no "
            "gradient hooks; embedding needs a differentiable generator"
        )
    cfg = config or EmbedConfig()
    cfg.validate()
    stack = default_feature_stack() if extractors is None else extractors

    rng = np.random.default_rng(seed)
    z = cfg.init_sigma * rng.standard_normal(
        (generator.latent_layers, generator.latent_dims)
    )

    probe = generator.forward(z)
    if probe.shape != target.shape:
        raise DataError(
            f"generator output shape {probe.shape} does not match "
            f"target {target.shape}"
        )
    target_feats = extract_features(target.data, stack)

    opt = Adam(z.shape, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    history = np.empty(cfg.steps + 1)
    best_z, best_loss, best_step = z.copy(), np.inf, 0

    for t in range(cfg.steps + 1):
        img = generator.forward(z) if t else probe
        loss, grad_img = perceptual_loss(img, target_feats, stack)
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite loss at optimization step {t}")
        history[t] = loss
        if loss < best_loss:
            best_z, best_loss, best_step = z.copy(), loss, t
        if t == cfg.steps:
            break
        grad_z = generator.backward(z, grad_img)
        if not np.all(np.isfinite(grad_z)):
            raise NumericalError(f"non-finite gradient at optimization step {t}")
        z = opt.step(z, grad_z)

    return EmbedResult(
        latent=best_z,
        loss=float(best_loss),
        step=best_step,
        initial_loss=float(history[0]),
        history=history,
        generator_id=generator.generator_id,
    )


@dataclass
class LatentMorphResult:
    latent: np.ndarray
    image: Raster
    embed_a: EmbedResult
    embed_b: EmbedResult
    weights: tuple

    def metadata(self) -> dict:
        return {
            "weights": list(self.weights),
            "loss_a": self.embed_a.loss,
            "loss_b": self.embed_b.loss,
            "generator_id": self.embed_a.generator_id,
        }


def generate_latent_morph(
    img_a: Raster,
    img_b: Raster,
    generator: Generator,
    extractors: Optional[list] = None,
    config: Optional[EmbedConfig] = None,
    w1: float = 0.5,
    w2: float = 0.5,
    seed: int = 0,
    literal_halving: bool = False,
) -> LatentMorphResult:
    """Embed both images, combine the latents, synthesize the morph.

    The two embeddings use seeds seed and seed + 1 so the pair is fully
    reproducible from one integer.
    """
    res_a = embed_image(img_a, generator, extractors, config, seed=seed)
    res_b = embed_image(img_b, generator, extractors, config, seed=seed + 1)
    z = combine_latents(res_a.latent, res_b.latent, w1, w2,
                        literal_halving=literal_halving)
    return LatentMorphResult(
        latent=z,
        image=generator.synthesize(z),
        embed_a=res_a,
        embed_b=res_b,
        weights=(float(w1), float(w2)),
    )
