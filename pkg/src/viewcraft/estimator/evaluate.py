"""MAE/RMSE evaluation protocol for pose estimates.

Angle errors are reported per spherical component in degrees, azimuth
differences wrapped to (-180, 180]; the aggregate is the mean over the two
angle components.  Translation error is reported separately in scene units
because the two live on different scales.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import EmptySplit
from ..geometry import spherical_to_pose, wrap_angle_diff
from .dataset import PoseSample, load_manifest, load_sample_image
from .features import get_extractor
from .model import EstimatorParameters, PoseNet, decode_output, prepare_image


def _stats(errors: np.ndarray) -> dict:
    return {"mae": float(np.abs(errors).mean()),
            "rmse": float(np.sqrt((errors * errors).mean()))}


def error_metrics(pred_az, pred_el, label_az, label_el) -> dict:
    """Vector metric core; also the oracle target for independent checks."""
    pred_az = np.asarray(pred_az, dtype=np.float64)
    label_az = np.asarray(label_az, dtype=np.float64)
    d_az = np.array([wrap_angle_diff(p, t) for p, t in zip(pred_az, label_az)])
    d_el = np.asarray(pred_el, dtype=np.float64) - np.asarray(label_el, dtype=np.float64)
    az, el = _stats(d_az), _stats(d_el)
    return {
        "azimuth": az,
        "elevation": el,
        "aggregate": {"mae": (az["mae"] + el["mae"]) / 2.0,
                      "rmse": (az["rmse"] + el["rmse"]) / 2.0},
        "n": int(d_az.shape[0]),
    }


def evaluate_samples(manifest_path: str | Path, samples: list[PoseSample],
                     params: EstimatorParameters) -> dict:
    """Run the estimator over the samples and compute the metric table."""
    if not samples:
        raise EmptySplit("no samples to evaluate")
    manifest_path = Path(manifest_path)
    spec = get_extractor(params.feature_extractor_id)
    net = PoseNet(spec)
    x = np.stack([prepare_image(load_sample_image(manifest_path, s), spec.input_size)
                  for s in samples])
    raw = net.predict(params.weights, x)

    pred_az, pred_el = [], []
    t_err = []
    for row, sample in zip(raw, samples):
        est = decode_output(row)
        pred_az.append(est.spherical.azimuth)
        pred_el.append(est.spherical.elevation)
        t_true = np.asarray(spherical_to_pose(sample.label).translation)
        t_err.append(float(np.linalg.norm(np.asarray(est.pose.translation) - t_true)))

    metrics = error_metrics(pred_az, pred_el,
                            [s.label.azimuth for s in samples],
                            [s.label.elevation for s in samples])
    metrics["translation"] = _stats(np.asarray(t_err))
    return metrics


def evaluate(manifest_path: str | Path, params: EstimatorParameters,
             split: str = "test") -> dict:
    """Evaluate one manifest split; raises EmptySplit when it has no rows."""
    samples, _meta = load_manifest(manifest_path)
    rows = [s for s in samples if s.split == split]
    if not rows:
        raise EmptySplit(f"split {split!r} holds no samples")
    return evaluate_samples(manifest_path, rows, params)
