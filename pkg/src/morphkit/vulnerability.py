"""Morph vulnerability metrics over comparison-score tables.

All accept decisions use the strict comparison score > tau.  The threshold
is either calibrated from impostor (nonmated) scores at a target false
accept rate, or fixed to a vendor-supplied operating point.

fmmpmr treats every probe attempt as its own trial: in aligned mode attempt
index p of every contributing subject forms one joint trial and the morph
counts a success at p only if all subjects pass; cartesian mode forms trials
from every combination of attempts across subjects.  Both divide by the
number of joint trials actually evaluated.  mmpmr is the classic min-max
rate: a morph counts once if the weakest subject's best attempt passes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError
from .scores import ScoreTable

DEFAULT_TARGET_FAR = 0.001


def _finite_scores(scores, what: str) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64).ravel()
    if arr.size == 0:
        raise DataError(f"no {what} scores supplied")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{what} scores contain non-finite values")
    return arr


def far_at(nonmated, tau: float) -> float:
    """Observed false accept rate: fraction of impostor scores above tau."""
    arr = _finite_scores(nonmated, "nonmated")
    return float(np.count_nonzero(arr > tau)) / arr.size


def tar_at(mated, tau: float) -> float:
    """Observed true accept rate: fraction of genuine scores above tau."""
    arr = _finite_scores(mated, "mated")
    return float(np.count_nonzero(arr > tau)) / arr.size


def calibrate_threshold(nonmated, target_far: float = DEFAULT_TARGET_FAR) -> float:
    """Smallest observed score whose strict-> acceptance FAR is <= target.

    Candidate thresholds are the observed impostor scores themselves; the
    largest always yields FAR 0, so a solution exists.
    """
    arr = _finite_scores(nonmated, "nonmated")
    if not 0.0 <= target_far < 1.0:
        raise DataError(f"target FAR must be in [0, 1), got {target_far}")
    s = np.sort(arr)
    n = s.size
    # number of scores strictly above each candidate
    above = n - np.searchsorted(s, s, side="right")
    ok = (above / n) <= target_far
    return float(s[np.argmax(ok)])


def _check_matrix(morph_scores) -> dict:
    if not morph_scores:
        raise DataError("no morph trials supplied")
    out = {}
    for morph_id, subjects in morph_scores.items():
        if len(subjects) < 2:
            raise DataError(
                f"morph {morph_id!r} needs scores for at least two subjects"
            )
        rows = []
        for i, attempts in enumerate(subjects):
            arr = np.asarray(attempts, dtype=np.float64).ravel()
            if arr.size == 0:
                raise DataError(
                    f"morph {morph_id!r} subject {i} has no attempts"
                )
            if not np.all(np.isfinite(arr)):
                raise DataError(
                    f"morph {morph_id!r} subject {i} has non-finite scores"
                )
            rows.append(arr)
        out[morph_id] = rows
    return out


def fmmpmr(morph_scores, tau: float, mode: str = "aligned") -> float:
    """Fully multiple-attempt morph acceptance rate.

    morph_scores maps morph_id -> list (per subject) of attempt-score lists,
    as produced by ScoreTable.morph_matrix.
    """
    mat = _check_matrix(morph_scores)
    hits = 0
    trials = 0
    if mode == "aligned":
        for morph_id, rows in mat.items():
            counts = {r.size for r in rows}
            if len(counts) != 1:
                raise DataError(
                    f"morph {morph_id!r}: aligned mode needs equal attempt "
                    f"counts per subject, got {sorted(counts)}"
                )
            grid = np.vstack(rows)
            hits += int(np.all(grid > tau, axis=0).sum())
            trials += grid.shape[1]
    elif mode == "cartesian":
        for rows in mat.values():
            combos = 1
            passing = 1
            for r in rows:
                combos *= r.size
                passing *= int(np.count_nonzero(r > tau))
            hits += passing
            trials += combos
    else:
        raise DataError(f"unknown fmmpmr mode {mode!r}")
    return hits / trials


def mmpmr(morph_scores, tau: float) -> float:
    """Min-max morph acceptance rate: weakest subject's best attempt > tau."""
    mat = _check_matrix(morph_scores)
    hits = 0
    for rows in mat.values():
        if min(r.max() for r in rows) > tau:
            hits += 1
    return hits / len(mat)


def rmmr(mmpmr_value: float, tar_value: float) -> float:
    """Relative morph acceptance: 1 + mmpmr - tar, deliberately unclamped."""
    return 1.0 + float(mmpmr_value) - float(tar_value)


@dataclass
class VulnReport:
    tau: float
    tau_source: str
    target_far: float
    far: float
    fmmpmr: float
    mmpmr: float
    tar: float
    rmmr: float
    mode: str
    n_morphs: int
    n_trials: int
    n_nonmated: int
    n_mated: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def evaluate_vulnerability(
    table: ScoreTable,
    tau: float | None = None,
    target_far: float = DEFAULT_TARGET_FAR,
    mode: str = "aligned",
) -> VulnReport:
    """Score-table -> metric report.

    With tau None the threshold is calibrated from the table's nonmated
    scores; a fixed tau (vendor operating point) skips calibration.  Without
    mated scores the true accept rate is assumed perfect (TAR = 1), which
    makes rmmr collapse to mmpmr.
    """
    nonmated = table.scores("nonmated")
    if tau is None:
        t = calibrate_threshold(nonmated, target_far)
        tau_source = "calibrated"
    else:
        t = float(tau)
        tau_source = "fixed"
    mat = table.morph_matrix()
    f = fmmpmr(mat, t, mode=mode)
    m = mmpmr(mat, t)
    mated = table.scores("mated")
    tar_value = tar_at(mated, t) if mated.size else 1.0
    observed_far = far_at(nonmated, t) if nonmated.size else 0.0

    if mode == "aligned":
        n_trials = sum(len(rows[0]) for rows in mat.values())
    else:
        n_trials = sum(
            int(np.prod([len(r) for r in rows])) for rows in mat.values()
        )
    return VulnReport(
        tau=t,
        tau_source=tau_source,
        target_far=float(target_far),
        far=observed_far,
        fmmpmr=f,
        mmpmr=m,
        tar=tar_value,
        rmmr=rmmr(m, tar_value),
        mode=mode,
        n_morphs=len(mat),
        n_trials=n_trials,
        n_nonmated=int(nonmated.size),
        n_mated=int(mated.size),
    )


def export_scatter(path, table: ScoreTable, tau: float) -> None:
    """Dump aligned per-trial subject scores for plotting.

    First line records the threshold as '# tau=<repr>'; every following line
    is 'morph_id attempt s0 s1 ...' with one score per contributing subject.
    """
    mat = table.morph_matrix()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# tau={float(tau)!r}\n")
        fh.write("# morph_id attempt scores-per-subject\n")
        for morph_id, rows in mat.items():
            n_attempts = min(len(r) for r in rows)
            for p in range(n_attempts):
                vals = " ".join(repr(float(r[p])) for r in rows)
                fh.write(f"{morph_id} {p} {vals}\n")
