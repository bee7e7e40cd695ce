"""Command-line pipeline driver.

One subcommand per pipeline stage: plan pairs, generate morphs, synthesize
from latents, calibrate thresholds, evaluate vulnerability, extract texture
features, train and evaluate the detector, and merge reports.  Every stage
reads and writes only documented file formats (PNG, JSON, CSV, raw float
payloads), and every stage is deterministic given identical inputs and
seeds, so re-runs are byte-identical.

Exit codes: 0 success, 2 usage error, 3 data/format error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .detection import evaluate_detection
from .embedding import EmbedConfig, generate_latent_morph
from .errors import DataError, NumericalError
from .generators import (
    ExternalCommandGenerator,
    ToyReshapeGenerator,
    toy_generator_from_id,
)
from .landmarks import load_landmarks
from .latent import load_latent, save_latent
from .manifest import METHODS, load_manifest, plan_pairs, save_plan
from .morph import generate_landmark_morph
from .percept import feature_stack_for
from .raster import Raster, load_png, resize_bilinear, save_png
from .reporting import load_det_report, load_vuln_report, render_report
from .scores import ScoreTable
from .svm import LinearSvmModel, SvmConfig, train_svm
from .texture import (
    FEATURE_PIPELINES,
    extract_batch,
    load_feature_set,
    save_feature_set,
)
from .vulnerability import (
    DEFAULT_TARGET_FAR,
    calibrate_threshold,
    evaluate_vulnerability,
    export_scatter,
    far_at,
)


def _write_json(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _parse_size(text: str):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise DataError(f"size must look like WIDTHxHEIGHT, got {text!r}")
    if w < 1 or h < 1:
        raise DataError(f"size must be positive, got {text!r}")
    return w, h


def _toy_for(img: Raster) -> ToyReshapeGenerator:
    h, w, c = img.data.shape
    return ToyReshapeGenerator(h, w, c, layers=1, dims=h * w * c)


def _cmd_pair_plan(args) -> int:
    manifest = load_manifest(args.manifest)
    root = None if args.no_check_files else Path(args.manifest).parent
    plan = plan_pairs(
        manifest,
        split_ratio=args.ratio,
        seed=args.seed,
        pairs_per_subject=args.pairs_per_subject,
        method=args.method,
        alpha=args.alpha,
        root=root,
    )
    save_plan(args.output, plan)
    c = plan.counts
    print(
        f"planned {len(plan.pairs)} pairs "
        f"(train {c['train']['pairs']}, test {c['test']['pairs']}) "
        f"over {len(manifest.subjects)} subjects -> {args.output}"
    )
    return 0


def _cmd_morph_landmark(args) -> int:
    img_a = load_png(args.img1)
    img_b = load_png(args.img2)
    lm_a = load_landmarks(args.lm1)
    lm_b = load_landmarks(args.lm2)
    result = generate_landmark_morph(img_a, lm_a, img_b, lm_b, args.alpha)
    save_png(result.image, args.output)
    note = ""
    if result.skipped_triangles:
        note = f" ({result.skipped_triangles} degenerate triangles skipped)"
    print(f"wrote {args.output}{note}")
    return 0


def _cmd_morph_latent(args) -> int:
    img_a = load_png(args.img1)
    img_b = load_png(args.img2)
    if args.size:
        w, h = _parse_size(args.size)
        img_a = resize_bilinear(img_a, w, h)
        img_b = resize_bilinear(img_b, w, h)
    if img_a.data.shape != img_b.data.shape:
        raise DataError(
            f"image dimensions differ: {img_a.data.shape} vs "
            f"{img_b.data.shape} (use --size to unify)"
        )
    generator = _toy_for(img_a)
    config = EmbedConfig(steps=args.steps, lr=args.lr)
    h, w, _ = img_a.data.shape
    result = generate_latent_morph(
        img_a, img_b, generator,
        extractors=feature_stack_for(h, w),
        config=config, w1=args.w1, w2=args.w2, seed=args.seed,
        literal_halving=args.literal_halving,
    )
    save_png(result.image, args.output)
    if args.save_latent:
        save_latent(args.save_latent, result.latent, generator.generator_id)
    meta = result.metadata()
    print(
        f"embedded pair (loss {meta['loss_a']:.3g} / {meta['loss_b']:.3g}) "
        f"-> {args.output}"
    )
    return 0


def _cmd_synth(args) -> int:
    latent, meta = load_latent(args.latent)
    if args.command:
        generator = ExternalCommandGenerator(
            args.command, meta["layers"], meta["dims"],
            generator_id=str(meta["generator_id"]),
        )
    else:
        generator = toy_generator_from_id(meta["generator_id"])
    save_png(generator.synthesize(latent), args.output)
    print(f"synthesized {args.output} via {generator.generator_id}")
    return 0


def _cmd_calibrate(args) -> int:
    table = ScoreTable.load(args.scores)
    nonmated = table.scores("nonmated")
    tau = calibrate_threshold(nonmated, args.far)
    observed = far_at(nonmated, tau)
    if args.output:
        _write_json(args.output, {
            "kind": "calibration",
            "tau": tau,
            "target_far": float(args.far),
            "far": observed,
            "n_nonmated": int(nonmated.size),
        })
    print(f"tau={tau!r} target_far={args.far} observed_far={observed!r}")
    return 0


def _cmd_vuln_eval(args) -> int:
    table = ScoreTable.load(args.scores)
    report = evaluate_vulnerability(
        table, tau=args.tau, target_far=args.far, mode=args.mode,
    )
    Path(args.output).write_text(report.to_json())
    if args.scatter:
        export_scatter(args.scatter, table, report.tau)
    print(
        f"FMMPMR={report.fmmpmr:.4f} MMPMR={report.mmpmr:.4f} "
        f"RMMR={report.rmmr:.4f} tau={report.tau:.6g} -> {args.output}"
    )
    return 0


def _collect_pngs(directory) -> list:
    d = Path(directory)
    if not d.is_dir():
        raise DataError(f"not a directory: {d}")
    files = sorted(d.glob("*.png"))
    if not files:
        raise DataError(f"no .png images in {d}")
    return files


def _cmd_mad_extract(args) -> int:
    attack_files = _collect_pngs(args.attack)
    bonafide_files = _collect_pngs(args.bonafide)
    files = attack_files + bonafide_files
    images = [load_png(p) for p in files]
    features = extract_batch(args.pipeline, images, threads=args.threads)
    labels = [1] * len(attack_files) + [-1] * len(bonafide_files)
    save_feature_set(
        args.output, features, labels, args.pipeline,
        paths=[str(p) for p in files],
    )
    print(
        f"extracted {features.shape[0]} x {features.shape[1]} "
        f"{args.pipeline} features -> {args.output}"
    )
    return 0


def _cmd_mad_train(args) -> int:
    features, labels, meta = load_feature_set(args.features)
    config = SvmConfig(
        C=args.svm_c, epochs=args.epochs, seed=args.seed,
        standardize=not args.no_standardize,
    )
    model = train_svm(features, labels, config,
                      feature_name=str(meta["pipeline"]))
    model.save(args.output)
    print(
        f"trained {meta['pipeline']} svm on {features.shape[0]} samples "
        f"-> {args.output}"
    )
    return 0


def _cmd_mad_eval(args) -> int:
    model = LinearSvmModel.load(args.model)
    features, labels, meta = load_feature_set(args.features)
    if model.feature_name and model.feature_name != meta["pipeline"]:
        raise DataError(
            f"model was trained on {model.feature_name!r} features but the "
            f"set holds {meta['pipeline']!r}"
        )
    scores = model.decision(features)
    attack = scores[labels == 1]
    bonafide = scores[labels == -1]
    if attack.size == 0 or bonafide.size == 0:
        raise DataError("evaluation set needs both attack and bona fide rows")
    report = evaluate_detection(attack, bonafide)
    Path(args.output).write_text(report.to_json())
    print(
        f"D-EER={report.eer:.4f} BPCER@5%={report.bpcer_at_apcer5:.4f} "
        f"BPCER@10%={report.bpcer_at_apcer10:.4f} -> {args.output}"
    )
    return 0


def _cmd_report(args) -> int:
    if not args.vuln and not args.det:
        raise DataError("nothing to report: pass --vuln and/or --det files")
    vuln = [(Path(p).stem, load_vuln_report(p)) for p in args.vuln]
    det = [(Path(p).stem, load_det_report(p)) for p in args.det]
    Path(args.output).write_text(render_report(vuln, det))
    print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morphkit",
        description="Face morphing pipeline: generation, vulnerability "
                    "metrics, and attack detection.",
    )
    parser.add_argument("--version", action="version",
                        version=f"morphkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pair-plan",
                       help="split subjects and plan same-gender morph pairs")
    p.add_argument("--manifest", required=True, help="subject manifest JSON")
    p.add_argument("--ratio", type=float, default=0.5,
                   help="train fraction of each gender bucket (default 0.5)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs-per-subject", type=int, default=1,
                   help="ring-pairing rounds per gender bucket (default 1)")
    p.add_argument("--method", choices=METHODS, default="landmark")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--no-check-files", action="store_true",
                   help="skip existence checks for referenced files")
    p.add_argument("-o", "--output", required=True, help="plan JSON path")
    p.set_defaults(func=_cmd_pair_plan)

    p = sub.add_parser("morph", help="generate one morph image")
    morph_sub = p.add_subparsers(dest="morph_method", required=True)

    m = morph_sub.add_parser("landmark",
                             help="triangulation warp + alpha blend")
    m.add_argument("--img1", required=True)
    m.add_argument("--lm1", required=True, help="landmark file for img1")
    m.add_argument("--img2", required=True)
    m.add_argument("--lm2", required=True, help="landmark file for img2")
    m.add_argument("--alpha", type=float, default=0.5)
    m.add_argument("-o", "--output", required=True, help="output PNG")
    m.set_defaults(func=_cmd_morph_landmark)

    m = morph_sub.add_parser(
        "latent",
        help="embed both images into the toy generator's latent space, "
             "average, re-synthesize",
    )
    m.add_argument("--img1", required=True)
    m.add_argument("--img2", required=True)
    m.add_argument("--w1", type=float, default=0.5)
    m.add_argument("--w2", type=float, default=0.5)
    m.add_argument("--steps", type=int, default=500)
    m.add_argument("--lr", type=float, default=0.01)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--size", default=None,
                   help="resize both inputs to WIDTHxHEIGHT first")
    m.add_argument("--literal-halving", action="store_true",
                   help="divide the latent sum by 2 instead of normalizing")
    m.add_argument("--save-latent", default=None,
                   help="also write the combined latent here")
    m.add_argument("-o", "--output", required=True, help="output PNG")
    m.set_defaults(func=_cmd_morph_latent)

    p = sub.add_parser("synth", help="latent file -> image")
    p.add_argument("--latent", required=True, help="latent payload path")
    p.add_argument("--command", default=None,
                   help="external generator template with {latent} and "
                        "{output} placeholders (default: toy reshape from "
                        "the sidecar's generator id)")
    p.add_argument("-o", "--output", required=True, help="output PNG")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("calibrate",
                       help="pick the decision threshold from non-mated "
                            "scores at a FAR target")
    p.add_argument("--scores", required=True, help="score table CSV")
    p.add_argument("--far", type=float, default=DEFAULT_TARGET_FAR)
    p.add_argument("-o", "--output", default=None,
                   help="optional calibration JSON")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("vuln-eval",
                       help="morph acceptance metrics from a score table")
    p.add_argument("--scores", required=True, help="score table CSV")
    p.add_argument("--tau", type=float, default=None,
                   help="fixed threshold (default: calibrate at --far)")
    p.add_argument("--far", type=float, default=DEFAULT_TARGET_FAR)
    p.add_argument("--mode", choices=("aligned", "cartesian"),
                   default="aligned")
    p.add_argument("--scatter", default=None,
                   help="optional per-morph score scatter dump")
    p.add_argument("-o", "--output", required=True, help="report JSON")
    p.set_defaults(func=_cmd_vuln_eval)

    p = sub.add_parser("mad-extract",
                       help="texture features for attack/bona fide folders")
    p.add_argument("--attack", required=True, help="folder of morph PNGs")
    p.add_argument("--bonafide", required=True,
                   help="folder of bona fide PNGs")
    p.add_argument("--pipeline", choices=sorted(FEATURE_PIPELINES),
                   required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", required=True,
                   help="feature payload path (sidecar JSON added)")
    p.set_defaults(func=_cmd_mad_extract)

    p = sub.add_parser("mad-train", help="train the linear detector")
    p.add_argument("--features", required=True, help="training feature set")
    p.add_argument("--C", dest="svm_c", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("-o", "--output", required=True, help="model JSON")
    p.set_defaults(func=_cmd_mad_train)

    p = sub.add_parser("mad-eval",
                       help="detector error rates on a held-out feature set")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--features", required=True, help="evaluation feature set")
    p.add_argument("-o", "--output", required=True, help="report JSON")
    p.set_defaults(func=_cmd_mad_eval)

    p = sub.add_parser("report",
                       help="merge evaluation JSONs into one Markdown file")
    p.add_argument("--vuln", action="append", default=[],
                   help="vulnerability report JSON (repeatable)")
    p.add_argument("--det", action="append", default=[],
                   help="detection report JSON (repeatable)")
    p.add_argument("-o", "--output", required=True, help="Markdown path")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
