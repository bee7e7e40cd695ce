"""morphkit: face morph generation, vulnerability metrics, and morph detection."""

from .delaunay import Triangulation, delaunay
from .detection import (
    DetCurve,
    DetReport,
    bpcer_at_apcer,
    compute_det,
    d_eer,
    evaluate_detection,
)
from .embedding import (
    Adam,
    EmbedConfig,
    EmbedResult,
    LatentMorphResult,
    embed_image,
    generate_latent_morph,
)
from .errors import CodecError, DataError, MorphkitError, NumericalError
from .generators import (
    DifferentiableGenerator,
    ExternalCommandGenerator,
    Generator,
    ToyReshapeGenerator,
    toy_generator_from_id,
)
from .landmarks import (
    augment_boundary,
    average_landmarks,
    clamp_landmarks,
    frame_points,
    load_landmarks,
    save_landmarks,
)
from .latent import combine_latents, load_latent, save_latent
from .manifest import (
    MorphPair,
    MorphPlan,
    SubjectManifest,
    load_manifest,
    load_plan,
    plan_pairs,
    save_plan,
)
from .morph import LandmarkMorphResult, generate_landmark_morph
from .percept import (
    BoxPyramidFeatures,
    FlattenFeatures,
    default_feature_stack,
    feature_stack_for,
    perceptual_loss,
)
from .raster import (
    Raster,
    blend,
    convert_color,
    load_png,
    resize_bilinear,
    sample_bilinear,
    save_png,
    save_ppm,
    to_grayscale,
)
from .reporting import load_det_report, load_vuln_report, render_report
from .scores import ScoreRow, ScoreTable
from .svm import LinearSvmModel, SvmConfig, train_svm
from .texture import (
    color_lbp_features,
    extract_batch,
    extract_feature,
    feature_dim,
    hog_features,
    lbp_features,
    load_feature_set,
    save_feature_set,
)
from .vulnerability import (
    VulnReport,
    calibrate_threshold,
    evaluate_vulnerability,
    far_at,
    fmmpmr,
    mmpmr,
    rmmr,
    tar_at,
)
from .warp import AffineMap2D, triangle_area, warp_triangle

__all__ = [
    "Adam",
    "AffineMap2D",
    "BoxPyramidFeatures",
    "CodecError",
    "DataError",
    "DetCurve",
    "DetReport",
    "DifferentiableGenerator",
    "EmbedConfig",
    "EmbedResult",
    "ExternalCommandGenerator",
    "FlattenFeatures",
    "Generator",
    "LandmarkMorphResult",
    "LatentMorphResult",
    "LinearSvmModel",
    "MorphPair",
    "MorphPlan",
    "MorphkitError",
    "NumericalError",
    "Raster",
    "ScoreRow",
    "ScoreTable",
    "SubjectManifest",
    "SvmConfig",
    "ToyReshapeGenerator",
    "Triangulation",
    "VulnReport",
    "augment_boundary",
    "average_landmarks",
    "blend",
    "bpcer_at_apcer",
    "calibrate_threshold",
    "clamp_landmarks",
    "color_lbp_features",
    "combine_latents",
    "compute_det",
    "convert_color",
    "d_eer",
    "default_feature_stack",
    "delaunay",
    "embed_image",
    "evaluate_detection",
    "evaluate_vulnerability",
    "extract_batch",
    "extract_feature",
    "far_at",
    "feature_dim",
    "feature_stack_for",
    "fmmpmr",
    "frame_points",
    "generate_landmark_morph",
    "generate_latent_morph",
    "hog_features",
    "lbp_features",
    "load_det_report",
    "load_feature_set",
    "load_landmarks",
    "load_latent",
    "load_manifest",
    "load_plan",
    "load_png",
    "load_vuln_report",
    "mmpmr",
    "perceptual_loss",
    "plan_pairs",
    "render_report",
    "resize_bilinear",
    "rmmr",
    "sample_bilinear",
    "save_feature_set",
    "save_landmarks",
    "save_latent",
    "save_plan",
    "save_png",
    "save_ppm",
    "tar_at",
    "to_grayscale",
    "toy_generator_from_id",
    "train_svm",
    "triangle_area",
    "warp_triangle",
]

__version__ = "0.1.0"
