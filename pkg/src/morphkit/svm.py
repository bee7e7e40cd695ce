"""Linear SVM trained with Pegasos-style stochastic subgradient descent.

Training is bitwise deterministic for a fixed config: the only randomness is
the per-epoch shuffle drawn from a seeded generator, and all arithmetic runs
in a fixed order.  Labels are -1 (bonafide) and +1 (attack); the decision
value w.x + b grows with attack evidence.  The regularizer lambda = 1/(C*n)
shrinks the weights each step with learning rate 1/(lambda*t); the bias is
updated on margin violations only and never regularized.
"""

from __future__ import annotations

import base64
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DataError

_STD_FLOOR = 1e-12


@dataclass
class SvmConfig:
    C: float = 1.0
    epochs: int = 10
    seed: int = 0
    standardize: bool = True

    def validate(self) -> None:
        if not (np.isfinite(self.C) and self.C > 0):
            raise DataError(f"C must be positive, got {self.C}")
        if self.epochs < 1:
            raise DataError(f"epochs must be >= 1, got {self.epochs}")


def _b64(arr: np.ndarray) -> str:
    return base64.b64encode(np.asarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _unb64(text: str, n: int, what: str) -> np.ndarray:
    try:
        raw = base64.b64decode(text.encode("ascii"), validate=True)
    except Exception as exc:
        raise DataError(f"model {what} is not valid base64 ({exc})")
    if len(raw) != 8 * n:
        raise DataError(f"model {what} has {len(raw)} bytes, expected {8 * n}")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64)


@dataclass
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    feature_name: str
    mean: Optional[np.ndarray]
    scale: Optional[np.ndarray]
    config: SvmConfig

    def decision(self, features) -> np.ndarray:
        """Decision values for a (n, d) feature matrix or a single vector."""
        x = np.asarray(features, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[np.newaxis, :]
        if x.ndim != 2 or x.shape[1] != self.weights.size:
            raise DataError(
                f"feature dim {x.shape} does not match model "
                f"dim {self.weights.size}"
            )
        if self.mean is not None:
            x = (x - self.mean) / self.scale
        out = x @ self.weights + self.bias
        return out[0] if single else out

    def save(self, path) -> None:
        doc = {
            "kind": "linear-svm",
            "feature": self.feature_name,
            "dim": int(self.weights.size),
            "bias": float(self.bias),
            "weights": _b64(self.weights),
            "mean": None if self.mean is None else _b64(self.mean),
            "scale": None if self.scale is None else _b64(self.scale),
            "config": asdict(self.config),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LinearSvmModel":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise DataError(f"{path}: model file not found")
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed model JSON ({exc})")
        for key in ("kind", "feature", "dim", "bias", "weights", "config"):
            if key not in doc:
                raise DataError(f"{path}: model missing field {key!r}")
        if doc["kind"] != "linear-svm":
            raise DataError(f"{path}: unsupported model kind {doc['kind']!r}")
        dim = int(doc["dim"])
        weights = _unb64(doc["weights"], dim, "weights")
        mean = scale = None
        if doc.get("mean") is not None:
            mean = _unb64(doc["mean"], dim, "mean")
            scale = _unb64(doc.get("scale"), dim, "scale")
        cfg = SvmConfig(**doc["config"])
        cfg.validate()
        return cls(
            weights=weights,
            bias=float(doc["bias"]),
            feature_name=str(doc["feature"]),
            mean=mean,
            scale=scale,
            config=cfg,
        )


def train_svm(features, labels, config: Optional[SvmConfig] = None,
              feature_name: str = "") -> LinearSvmModel:
    """Fit the linear SVM on (n, d) features with labels in {-1, +1}."""
    cfg = config or SvmConfig()
    cfg.validate()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError(f"features must be (n>=2, d), got shape {x.shape}")
    if y.size != x.shape[0]:
        raise DataError(f"{y.size} labels for {x.shape[0]} samples")
    if not np.all(np.isfinite(x)):
        raise DataError("features contain non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise DataError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise DataError("training needs both classes present")

    mean = scale = None
    if cfg.standardize:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        scale = np.where(std < _STD_FLOOR, 1.0, std)
        x = (x - mean) / scale

    n, d = x.shape
    lam = 1.0 / (cfg.C * n)
    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(d)
    b = 0.0
    t = 0
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            violated = y[i] * (x[i] @ w + b) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += (eta * y[i]) * x[i]
                b += eta * y[i]

    return LinearSvmModel(
        weights=w,
        bias=b,
        feature_name=feature_name,
        mean=mean,
        scale=scale,
        config=cfg,
    )
