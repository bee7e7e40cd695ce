"""Detection error tradeoff metrics for morph attack detectors.

Detectors emit scores that grow with attack evidence; a sample is called an
attack when score > tau.  APCER(tau) is the fraction of attacks missed
(score <= tau) and BPCER(tau) the fraction of bonafide samples flagged
(score > tau).  Sweeping tau over the observed scores yields the DET curve;
the equal error rate interpolates between the two adjacent operating points
where APCER crosses BPCER, working purely on the discrete operating points
so any strictly increasing transform of the scores leaves it unchanged.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError


def _scores(arr, what: str) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64).ravel()
    if out.size == 0:
        raise DataError(f"no {what} scores supplied")
    if not np.all(np.isfinite(out)):
        raise DataError(f"{what} scores contain non-finite values")
    return out


@dataclass
class DetCurve:
    taus: np.ndarray
    apcer: np.ndarray
    bpcer: np.ndarray


def compute_det(attack, bonafide) -> DetCurve:
    """Operating points at every distinct observed score.

    A synthetic leading point below the minimum score pins the curve's
    (APCER 0, BPCER 1) end so the APCER-BPCER crossing always exists.
    """
    a = _scores(attack, "attack")
    b = _scores(bonafide, "bonafide")
    cand = np.unique(np.concatenate([a, b]))
    taus = np.concatenate([[cand[0] - 1.0], cand])
    a_sorted = np.sort(a)
    b_sorted = np.sort(b)
    apcer = np.searchsorted(a_sorted, taus, side="right") / a.size
    bpcer = (b.size - np.searchsorted(b_sorted, taus, side="right")) / b.size
    return DetCurve(taus=taus, apcer=apcer, bpcer=bpcer)


def d_eer(curve: DetCurve) -> float:
    """Equal error rate, interpolated between adjacent operating points."""
    d = curve.apcer - curve.bpcer
    i = int(np.searchsorted(d, 0.0, side="left"))
    if d[i] == 0.0:
        return float(0.5 * (curve.apcer[i] + curve.bpcer[i]))
    f = -d[i - 1] / (d[i] - d[i - 1])
    ap = curve.apcer[i - 1] + f * (curve.apcer[i] - curve.apcer[i - 1])
    bp = curve.bpcer[i - 1] + f * (curve.bpcer[i] - curve.bpcer[i - 1])
    return float(0.5 * (ap + bp))


def bpcer_at_apcer(curve: DetCurve, target: float) -> float:
    """BPCER at the largest threshold whose APCER still meets the target."""
    if not 0.0 <= target < 1.0:
        raise DataError(f"target APCER must be in [0, 1), got {target}")
    ok = np.nonzero(curve.apcer <= target)[0]
    if ok.size == 0:
        # even the lowest threshold misses too many attacks
        return 1.0
    return float(curve.bpcer[ok[-1]])


@dataclass
class DetReport:
    eer: float
    bpcer_at_apcer5: float
    bpcer_at_apcer10: float
    n_attack: int
    n_bonafide: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def evaluate_detection(attack, bonafide) -> DetReport:
    curve = compute_det(attack, bonafide)
    return DetReport(
        eer=d_eer(curve),
        bpcer_at_apcer5=bpcer_at_apcer(curve, 0.05),
        bpcer_at_apcer10=bpcer_at_apcer(curve, 0.10),
        n_attack=int(np.asarray(attack).size),
        n_bonafide=int(np.asarray(bonafide).size),
    )
