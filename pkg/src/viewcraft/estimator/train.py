"""Seeded training loop for the pose regressor."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import DivergedLoss, EmptyTrainSplit
from ..geometry import spherical_to_pose
from .dataset import PoseSample, load_manifest, load_sample_image
from .evaluate import evaluate_samples
from .features import get_extractor
from .model import OUTPUT_DIM, EstimatorParameters, PoseNet, prepare_image

REPORT_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class TrainConfig:
    feature_extractor_id: str = "conv-small"
    epochs: int = 40
    learning_rate: float = 1e-3
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("learning_rate must be > 0 and batch_size >= 1")

    def to_json(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        canon = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class Adam:
    """Standard Adam; parameters updated in sorted-name order."""

    def __init__(self, params: dict, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for name in sorted(params):
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            m_hat = self.m[name] / b1t
            v_hat = self.v[name] / b2t
            params[name] = params[name] - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def pose_target(label) -> np.ndarray:
    """Flattened 12-entry supervision target for one view label."""
    pose = spherical_to_pose(label)
    return np.concatenate([np.asarray(pose.rotation).reshape(9),
                           np.asarray(pose.translation)])


def _load_split(manifest_path: Path, samples: list[PoseSample], split: str,
                input_size: int):
    rows = [s for s in samples if s.split == split]
    if not rows:
        return rows, None, None
    x = np.stack([prepare_image(load_sample_image(manifest_path, s), input_size)
                  for s in rows])
    y = np.stack([pose_target(s.label) for s in rows])
    return rows, x, y


def train(manifest_path: str | Path, config: TrainConfig):
    """Returns (EstimatorParameters, report dict)."""
    manifest_path = Path(manifest_path)
    samples, _meta = load_manifest(manifest_path)
    spec = get_extractor(config.feature_extractor_id)

    train_rows, x_train, y_train = _load_split(manifest_path, samples, "train",
                                               spec.input_size)
    if not train_rows:
        raise EmptyTrainSplit("manifest has no train samples")
    test_rows, x_test, _y_test = _load_split(manifest_path, samples, "test",
                                             spec.input_size)

    net = PoseNet(spec)
    params = net.init_params(config.seed)
    optimizer = Adam(params, config.learning_rate)
    shuffle_rng = np.random.default_rng(config.seed + 1)

    n = x_train.shape[0]
    epoch_losses = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        total, steps = 0.0, 0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = net.loss_and_grads(params, x_train[idx], y_train[idx])
            if not np.isfinite(loss):
                raise DivergedLoss(epoch, steps)
            optimizer.step(params, grads)
            total += loss * len(idx)
            steps += 1
        epoch_losses.append({"epoch": epoch, "train_loss": total / n})

    trained = EstimatorParameters(
        weights=params,
        feature_extractor_id=config.feature_extractor_id,
        head_shape=net.head_shape,
        training_config_digest=config.digest(),
    )

    held_out = None
    if test_rows:
        held_out = evaluate_samples(manifest_path, test_rows, trained)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config.to_json(),
        "config_digest": config.digest(),
        "n_train": len(train_rows),
        "n_test": len(test_rows),
        "epochs": epoch_losses,
        "held_out": held_out,
    }
    return trained, report
