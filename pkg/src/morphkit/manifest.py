"""Dataset protocol planning: subject manifests and morph pair plans.

A manifest lists subjects (id, gender tag, image records); a plan splits the
subjects into disjoint train/test sets and pairs them within split and
gender.  Pairing is gender-constrained seeded rotation: appearance-similarity
pairing would need a recognition system, which this toolkit deliberately does
not include, so random same-gender pairing is the stand-in.

Both documents are JSON.  Plans are fully determined by (manifest, ratio,
seed, pairs_per_subject), so re-planning is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError

METHODS = ("landmark", "latent")
SPLITS = ("train", "test")


@dataclass
class ImageRecord:
    path: str
    session: str = ""
    landmarks: Optional[str] = None


@dataclass
class Subject:
    subject_id: str
    gender: str
    images: list

    def __post_init__(self):
        if not self.subject_id:
            raise DataError("subject with empty id")
        if not self.gender:
            raise DataError(f"subject {self.subject_id!r} has empty gender tag")
        if not self.images:
            raise DataError(f"subject {self.subject_id!r} has no images")


@dataclass
class SubjectManifest:
    subjects: list

    def __post_init__(self):
        seen = set()
        for s in self.subjects:
            if s.subject_id in seen:
                raise DataError(f"duplicate subject id {s.subject_id!r}")
            seen.add(s.subject_id)

    def by_gender(self) -> dict:
        """Gender tag -> subject list, manifest order preserved."""
        out: dict = {}
        for s in self.subjects:
            out.setdefault(s.gender, []).append(s)
        return out

    def check_files(self, root) -> None:
        """Fail fast if any referenced image or landmark file is missing."""
        root = Path(root)
        missing = []
        for s in self.subjects:
            for rec in s.images:
                if not (root / rec.path).exists():
                    missing.append(rec.path)
                if rec.landmarks and not (root / rec.landmarks).exists():
                    missing.append(rec.landmarks)
        if missing:
            raise DataError(
                "manifest references missing files: " + ", ".join(missing[:10])
            )


def load_manifest(path) -> SubjectManifest:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed manifest JSON {path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("subjects"), list):
        raise DataError(f"{path}: manifest must be an object with a subjects list")
    subjects = []
    for i, entry in enumerate(doc["subjects"]):
        if not isinstance(entry, dict):
            raise DataError(f"{path}: subject {i} is not an object")
        try:
            sid = str(entry["subject_id"])
            gender = str(entry["gender"])
            images = entry["images"]
        except KeyError as exc:
            raise DataError(f"{path}: subject {i} missing field {exc}") from exc
        if not isinstance(images, list):
            raise DataError(f"{path}: subject {sid!r} images must be a list")
        recs = []
        for rec in images:
            if not isinstance(rec, dict) or "path" not in rec:
                raise DataError(
                    f"{path}: subject {sid!r} has an image record without a path"
                )
            recs.append(ImageRecord(
                path=str(rec["path"]),
                session=str(rec.get("session", "")),
                landmarks=(None if rec.get("landmarks") is None
                           else str(rec["landmarks"])),
            ))
        subjects.append(Subject(subject_id=sid, gender=gender, images=recs))
    return SubjectManifest(subjects=subjects)


@dataclass
class MorphPair:
    morph_id: str
    split: str
    gender: str
    subject_a: str
    subject_b: str
    image_a: str
    image_b: str
    landmarks_a: Optional[str]
    landmarks_b: Optional[str]
    method: str
    alpha: float

    def to_dict(self) -> dict:
        return {
            "morph_id": self.morph_id,
            "split": self.split,
            "gender": self.gender,
            "subject_a": self.subject_a,
            "subject_b": self.subject_b,
            "image_a": self.image_a,
            "image_b": self.image_b,
            "landmarks_a": self.landmarks_a,
            "landmarks_b": self.landmarks_b,
            "method": self.method,
            "alpha": self.alpha,
        }


@dataclass
class MorphPlan:
    pairs: list
    splits: dict
    seed: int
    split_ratio: float
    pairs_per_subject: int
    method: str
    alpha: float
    counts: dict = field(default_factory=dict)

    def validate(self) -> None:
        train = set(self.splits.get("train", ()))
        test = set(self.splits.get("test", ()))
        overlap = train & test
        if overlap:
            raise DataError(f"subjects in both splits: {sorted(overlap)}")
        members = {"train": train, "test": test}
        seen = set()
        for p in self.pairs:
            if p.subject_a == p.subject_b:
                raise DataError(f"{p.morph_id}: self-pair {p.subject_a!r}")
            if p.morph_id in seen:
                raise DataError(f"duplicate morph id {p.morph_id!r}")
            seen.add(p.morph_id)
            pool = members.get(p.split)
            if pool is None:
                raise DataError(f"{p.morph_id}: unknown split {p.split!r}")
            if p.subject_a not in pool or p.subject_b not in pool:
                raise DataError(
                    f"{p.morph_id}: subjects outside the {p.split} split"
                )

    def to_dict(self) -> dict:
        return {
            "kind": "morph-plan",
            "seed": self.seed,
            "split_ratio": self.split_ratio,
            "pairs_per_subject": self.pairs_per_subject,
            "method": self.method,
            "alpha": self.alpha,
            "splits": self.splits,
            "counts": self.counts,
            "pairs": [p.to_dict() for p in self.pairs],
        }


def save_plan(path, plan: MorphPlan) -> None:
    Path(path).write_text(
        json.dumps(plan.to_dict(), sort_keys=True, indent=2) + "\n"
    )


def load_plan(path) -> MorphPlan:
    path = Path(path)
    if not path.exists():
        raise DataError(f"plan file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed plan JSON {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("kind") != "morph-plan":
        raise DataError(f"{path}: not a morph plan document")
    try:
        pairs = [MorphPair(**{k: p[k] for k in (
            "morph_id", "split", "gender", "subject_a", "subject_b",
            "image_a", "image_b", "landmarks_a", "landmarks_b", "method",
            "alpha",
        )}) for p in doc["pairs"]]
        plan = MorphPlan(
            pairs=pairs,
            splits={k: list(v) for k, v in doc["splits"].items()},
            seed=int(doc["seed"]),
            split_ratio=float(doc["split_ratio"]),
            pairs_per_subject=int(doc["pairs_per_subject"]),
            method=str(doc["method"]),
            alpha=float(doc["alpha"]),
            counts=dict(doc.get("counts", {})),
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"{path}: incomplete plan document ({exc})") from exc
    plan.validate()
    return plan


def _rotation_pairs(ids: list, rounds: int) -> list:
    """Unordered ring pairing: offset r joins i with i+r, duplicates dropped.

    Each subject lands in min(2*rounds, k-1) pairs, so a bucket of k yields
    k*rounds pairs until the ring saturates into the complete graph.
    """
    k = len(ids)
    out, seen = [], set()
    for r in range(1, rounds + 1):
        for i in range(k):
            j = (i + r) % k
            if j == i:
                continue
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            out.append((ids[i], ids[j]))
    return out


def plan_pairs(
    manifest: SubjectManifest,
    split_ratio: float = 0.5,
    seed: int = 0,
    pairs_per_subject: int = 1,
    method: str = "landmark",
    alpha: float = 0.5,
    root=None,
) -> MorphPlan:
    """Split subjects by gender bucket, then pair within split and gender.

    The split is stratified: each gender bucket is permuted with the seeded
    rng and cut at round(ratio * bucket size), so both splits keep both
    genders whenever the manifest allows it.  Buckets that end up with fewer
    than two subjects in a split cannot be paired and are reported as errors
    rather than silently skipped.
    """
    if not 0.0 < split_ratio < 1.0:
        raise DataError(f"split ratio must be in (0, 1), got {split_ratio}")
    if pairs_per_subject < 1:
        raise DataError("pairs_per_subject must be >= 1")
    if method not in METHODS:
        raise DataError(f"unknown morph method {method!r}")
    if not 0.0 <= alpha <= 1.0:
        raise DataError(f"alpha must be in [0, 1], got {alpha}")
    if root is not None:
        manifest.check_files(root)

    rng = np.random.default_rng(seed)
    buckets = manifest.by_gender()
    split_members: dict = {"train": [], "test": []}
    bucket_split: dict = {}
    for gender in sorted(buckets):
        subs = buckets[gender]
        order = rng.permutation(len(subs))
        n_train = int(round(split_ratio * len(subs)))
        train = [subs[i] for i in order[:n_train]]
        test = [subs[i] for i in order[n_train:]]
        bucket_split[gender] = {"train": train, "test": test}
        split_members["train"] += [s.subject_id for s in train]
        split_members["test"] += [s.subject_id for s in test]

    thin = [
        f"{split}/{gender} has {len(bucket_split[gender][split])} subject(s)"
        for gender in sorted(bucket_split)
        for split in SPLITS
        if len(bucket_split[gender][split]) < 2
    ]
    if thin:
        raise DataError(
            "gender buckets too small to pair: " + "; ".join(thin)
        )

    pairs = []
    counts: dict = {}
    for split in SPLITS:
        n_pairs = 0
        for gender in sorted(bucket_split):
            subs = bucket_split[gender][split]
            for a, b in _rotation_pairs(subs, pairs_per_subject):
                rec_a, rec_b = a.images[0], b.images[0]
                pairs.append(MorphPair(
                    morph_id=f"{split}-{gender}-{n_pairs:04d}",
                    split=split,
                    gender=gender,
                    subject_a=a.subject_id,
                    subject_b=b.subject_id,
                    image_a=rec_a.path,
                    image_b=rec_b.path,
                    landmarks_a=rec_a.landmarks,
                    landmarks_b=rec_b.landmarks,
                    method=method,
                    alpha=float(alpha),
                ))
                n_pairs += 1
        counts[split] = {
            "subjects": len(split_members[split]),
            "pairs": n_pairs,
        }

    plan = MorphPlan(
        pairs=pairs,
        splits={k: sorted(v) for k, v in split_members.items()},
        seed=int(seed),
        split_ratio=float(split_ratio),
        pairs_per_subject=int(pairs_per_subject),
        method=method,
        alpha=float(alpha),
        counts=counts,
    )
    plan.validate()
    return plan
