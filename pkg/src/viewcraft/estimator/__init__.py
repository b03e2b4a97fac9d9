"""Pose estimation: synthetic dataset, trainable regressor, eval protocol."""

from .dataset import (PoseSample, dataset_object_specs, load_manifest,
                      load_sample_image, make_object_spec, make_synthetic_dataset)
from .evaluate import error_metrics, evaluate, evaluate_samples
from .features import ARCHITECTURES, ConvLayerSpec, ExtractorSpec, get_extractor
from .model import (EstimatorParameters, PoseEstimate, PoseNet, decode_output,
                    estimate, prepare_image)
from .train import Adam, TrainConfig, pose_target, train

__all__ = [
    "ARCHITECTURES", "Adam", "ConvLayerSpec", "EstimatorParameters",
    "ExtractorSpec", "PoseEstimate", "PoseNet", "PoseSample", "TrainConfig",
    "dataset_object_specs", "decode_output", "error_metrics", "estimate",
    "evaluate", "evaluate_samples", "get_extractor", "load_manifest",
    "load_sample_image", "make_object_spec", "make_synthetic_dataset",
    "pose_target", "prepare_image", "train",
]
