"""Comparison-score tables and their CSV format.

One table holds every score kind the protocol produces:

  morph      similarity of a contributing subject's probe against a morph
             (keyed by morph_id, subject_index, attempt)
  nonmated   impostor comparison used for threshold calibration
  mated      genuine comparison used for the true accept rate
  attack     detection score of a morph presented to a morph detector
  bonafide   detection score of a genuine image presented to a detector

The CSV serialization is one header plus one row per score; score values are
written with repr so reading them back is bit-exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

KINDS = ("morph", "nonmated", "mated", "attack", "bonafide")
_HEADER = ["kind", "morph_id", "subject_index", "attempt", "score"]


@dataclass(frozen=True)
class ScoreRow:
    kind: str
    morph_id: str
    subject_index: int
    attempt: int
    score: float

    def key(self):
        return (self.kind, self.morph_id, self.subject_index, self.attempt)


@dataclass
class ScoreTable:
    rows: list = field(default_factory=list)

    def __post_init__(self):
        self._keys = set()
        self._counts = {}
        for r in self.rows:
            self._index(r)

    def _index(self, row: ScoreRow) -> None:
        if row.key() in self._keys:
            raise DataError(f"duplicate score row {row.key()}")
        self._keys.add(row.key())
        group = (row.kind, row.morph_id, row.subject_index)
        self._counts[group] = self._counts.get(group, 0) + 1

    def add(self, kind: str, score: float, morph_id: str = "",
            subject_index: int = -1, attempt: int | None = None) -> None:
        if kind not in KINDS:
            raise DataError(f"unknown score kind {kind!r}")
        score = float(score)
        if not math.isfinite(score):
            raise DataError(f"score must be finite, got {score}")
        if attempt is None:
            attempt = self._counts.get((kind, str(morph_id), int(subject_index)), 0)
        row = ScoreRow(kind, str(morph_id), int(subject_index), int(attempt), score)
        self._index(row)
        self.rows.append(row)

    def scores(self, kind: str) -> np.ndarray:
        if kind not in KINDS:
            raise DataError(f"unknown score kind {kind!r}")
        return np.array([r.score for r in self.rows if r.kind == kind])

    def morph_matrix(self) -> dict:
        """Group morph rows: morph_id -> per-subject lists of attempt scores.

        Subjects are ordered by subject_index and attempts by attempt index,
        so two tables with the same rows produce identical structures.
        """
        per_morph: dict = {}
        for r in self.rows:
            if r.kind != "morph":
                continue
            if r.subject_index < 0:
                raise DataError(
                    f"morph row for {r.morph_id!r} needs subject_index >= 0"
                )
            per_morph.setdefault(r.morph_id, {}).setdefault(
                r.subject_index, []
            ).append((r.attempt, r.score))
        out = {}
        for morph_id in sorted(per_morph):
            subjects = []
            for s_idx in sorted(per_morph[morph_id]):
                attempts = sorted(per_morph[morph_id][s_idx])
                subjects.append([score for _, score in attempts])
            out[morph_id] = subjects
        return out

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_HEADER)
            for r in self.rows:
                writer.writerow(
                    [r.kind, r.morph_id, r.subject_index, r.attempt, repr(r.score)]
                )

    @classmethod
    def load(cls, path) -> "ScoreTable":
        table = cls()
        try:
            fh = open(path, "r", encoding="utf-8", newline="")
        except FileNotFoundError:
            raise DataError(f"{path}: score file not found")
        with fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != _HEADER:
                raise DataError(
                    f"{path}: bad header {header!r}, expected {_HEADER!r}"
                )
            for lineno, parts in enumerate(reader, start=2):
                if not parts:
                    continue
                if len(parts) != 5:
                    raise DataError(f"{path}:{lineno}: expected 5 fields")
                kind, morph_id, s_idx, attempt, score = parts
                if kind not in KINDS:
                    raise DataError(f"{path}:{lineno}: unknown kind {kind!r}")
                try:
                    row = ScoreRow(kind, morph_id, int(s_idx), int(attempt),
                                   float(score))
                except ValueError:
                    raise DataError(f"{path}:{lineno}: malformed numeric field")
                if not math.isfinite(row.score):
                    raise DataError(f"{path}:{lineno}: non-finite score")
                try:
                    table._index(row)
                except DataError:
                    raise DataError(f"{path}:{lineno}: duplicate row {row.key()}")
                table.rows.append(row)
        return table
