"""Multi-scale perceptual distance between images.

The loss is sum_j (w_j / N_j) * ||F_j(x) - F_j(t)||^2 over a stack of
feature extractors, each mapping an image to a flat vector of length N_j.
The default stack is a four-level box-filter pyramid (identity plus three
2x halvings), so the distance penalizes disagreement at several scales while
staying exactly linear, which keeps analytic gradients trivial to verify.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import DataError


class FeatureExtractor(ABC):
    """Image (h, w, c) float array -> flat feature vector, with a pullback."""

    @abstractmethod
    def forward(self, data: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def backward(self, data: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Map a feature-space gradient back to an image-shaped gradient."""


class FlattenFeatures(FeatureExtractor):
    def forward(self, data):
        return np.asarray(data, dtype=np.float64).ravel()

    def backward(self, data, grad):
        return np.asarray(grad, dtype=np.float64).reshape(data.shape)


def _halve(data: np.ndarray) -> np.ndarray:
    h, w = data.shape[:2]
    if h % 2 or w % 2:
        raise DataError(f"box pyramid needs even dimensions, got {h}x{w}")
    return 0.25 * (
        data[0::2, 0::2] + data[1::2, 0::2] + data[0::2, 1::2] + data[1::2, 1::2]
    )


def _unhalve(grad: np.ndarray) -> np.ndarray:
    return 0.25 * np.repeat(np.repeat(grad, 2, axis=0), 2, axis=1)


class BoxPyramidFeatures(FeatureExtractor):
    """Features at 1/2^level resolution via repeated 2x2 box averaging."""

    def __init__(self, level: int):
        if level < 1:
            raise DataError("pyramid level must be >= 1")
        self.level = int(level)

    def forward(self, data):
        out = np.asarray(data, dtype=np.float64)
        for _ in range(self.level):
            out = _halve(out)
        return out.ravel()

    def backward(self, data, grad):
        h, w = data.shape[0] >> self.level, data.shape[1] >> self.level
        out = np.asarray(grad, dtype=np.float64).reshape(h, w, data.shape[2])
        for _ in range(self.level):
            out = _unhalve(out)
        return out


def default_feature_stack() -> list:
    """Four scales: full resolution plus 1/2, 1/4, 1/8 box-filtered copies."""
    return [FlattenFeatures(), BoxPyramidFeatures(1), BoxPyramidFeatures(2),
            BoxPyramidFeatures(3)]


def feature_stack_for(height: int, width: int, max_level: int = 3) -> list:
    """Default stack truncated to the levels the image dimensions divide.

    A level-L box pyramid halves each axis L times, so both dimensions must
    be multiples of 2**L; images with odd or shallowly even sizes just get
    fewer scales.
    """
    stack: list = [FlattenFeatures()]
    for level in range(1, max_level + 1):
        step = 1 << level
        if height % step or width % step:
            break
        stack.append(BoxPyramidFeatures(level))
    return stack


def extract_features(data: np.ndarray, extractors) -> list:
    return [ex.forward(data) for ex in extractors]


def perceptual_loss(data, target_features, extractors, weights=None):
    """Loss and its gradient with respect to the image.

    target_features must come from extract_features with the same stack.
    Returns (loss, grad) where grad has the image's shape.
    """
    data = np.asarray(data, dtype=np.float64)
    if weights is None:
        weights = [1.0] * len(extractors)
    if len(weights) != len(extractors) or len(target_features) != len(extractors):
        raise DataError("extractor, weight and target-feature counts must match")
    if any(w < 0 or not np.isfinite(w) for w in weights):
        raise DataError("feature weights must be finite and non-negative")
    loss = 0.0
    grad = np.zeros_like(data)
    for ex, tgt, w in zip(extractors, target_features, weights):
        feat = ex.forward(data)
        tgt = np.asarray(tgt, dtype=np.float64)
        if feat.shape != tgt.shape:
            raise DataError(
                f"target feature length {tgt.shape} does not match {feat.shape}"
            )
        diff = feat - tgt
        n = diff.size
        loss += (w / n) * float(diff @ diff)
        if w != 0.0:
            grad += ex.backward(data, (2.0 * w / n) * diff)
    return loss, grad
