"""Pose regression network: conv feature extractor + 12-way linear head.

Implemented directly on numpy so training is dependency-light and
bit-reproducible per seed.  The head regresses all nine rotation entries
plus translation and is trained with plain L2 against the flattened pose;
projection onto SO(3) happens only at inference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import PoleDegenerate
from ..geometry import (Pose, SphericalView, normalize_azimuth, pose_to_spherical,
                        project_rotation)
from ..imagebuf import ImageBuffer
from .features import ExtractorSpec, get_extractor

OUTPUT_DIM = 12  # 9 rotation entries + 3 translation entries
# Head bias starts at the flattened default pose (identity R, unit-radius T)
# so untrained estimates decode to a valid camera instead of a degenerate one.
_DEFAULT_POSE_FLAT = np.array([1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1], dtype=np.float64)

SPHERICAL_CONSISTENCY_DEG = 1e-6


def _im2col(x: np.ndarray, k: int, stride: int):
    b, c, h, w = x.shape
    oh = (h - k) // stride + 1
    ow = (w - k) // stride + 1
    cols = np.empty((b, c, k, k, oh, ow), dtype=x.dtype)
    for i in range(k):
        for j in range(k):
            cols[:, :, i, j] = x[:, :, i:i + oh * stride:stride,
                                 j:j + ow * stride:stride]
    return cols.reshape(b, c * k * k, oh * ow), oh, ow


def _col2im(dcols: np.ndarray, x_shape, k: int, stride: int, oh: int, ow: int):
    b, c, h, w = x_shape
    dc = dcols.reshape(b, c, k, k, oh, ow)
    dx = np.zeros(x_shape, dtype=dcols.dtype)
    for i in range(k):
        for j in range(k):
            dx[:, :, i:i + oh * stride:stride, j:j + ow * stride:stride] += dc[:, :, i, j]
    return dx


class PoseNet:
    """Forward/backward passes for one extractor architecture."""

    def __init__(self, spec: ExtractorSpec):
        self.spec = spec

    @property
    def head_shape(self) -> str:
        return f"{self.spec.fc_dim}->{OUTPUT_DIM}"

    def init_params(self, seed: int) -> dict[str, np.ndarray]:
        rng = np.random.default_rng(seed)
        params: dict[str, np.ndarray] = {}
        c_in = self.spec.in_channels
        for idx, layer in enumerate(self.spec.convs):
            fan_in = c_in * layer.kernel * layer.kernel
            params[f"conv{idx}_w"] = rng.normal(
                0.0, np.sqrt(2.0 / fan_in), (layer.out_channels, fan_in))
            params[f"conv{idx}_b"] = np.zeros(layer.out_channels)
            c_in = layer.out_channels
        flat = self.spec.flat_dim
        params["fc_w"] = rng.normal(0.0, np.sqrt(2.0 / flat),
                                    (self.spec.fc_dim, flat))
        params["fc_b"] = np.zeros(self.spec.fc_dim)
        params["head_w"] = rng.normal(0.0, 0.01, (OUTPUT_DIM, self.spec.fc_dim))
        params["head_b"] = _DEFAULT_POSE_FLAT.copy()
        return params

    def forward(self, params: dict, x: np.ndarray):
        """x (B, C, S, S) -> predictions (B, 12) plus the backward cache."""
        cache = {"x_shapes": [], "cols": [], "pre_relu": []}
        out = x
        for idx, layer in enumerate(self.spec.convs):
            cols, oh, ow = _im2col(out, layer.kernel, layer.stride)
            cache["x_shapes"].append((out.shape, layer.kernel, layer.stride, oh, ow))
            cache["cols"].append(cols)
            w, b = params[f"conv{idx}_w"], params[f"conv{idx}_b"]
            pre = (np.matmul(w, cols) + b[:, None]).reshape(
                out.shape[0], layer.out_channels, oh, ow)
            cache["pre_relu"].append(pre)
            out = np.maximum(pre, 0.0)
        flat = out.reshape(out.shape[0], -1)
        cache["flat"] = flat
        fc_pre = flat @ params["fc_w"].T + params["fc_b"]
        cache["fc_pre"] = fc_pre
        feats = np.maximum(fc_pre, 0.0)
        cache["feats"] = feats
        pred = feats @ params["head_w"].T + params["head_b"]
        return pred, cache

    def backward(self, params: dict, cache: dict, dpred: np.ndarray) -> dict:
        grads: dict[str, np.ndarray] = {}
        grads["head_w"] = dpred.T @ cache["feats"]
        grads["head_b"] = dpred.sum(axis=0)
        dfeats = dpred @ params["head_w"]
        dfc_pre = dfeats * (cache["fc_pre"] > 0.0)
        grads["fc_w"] = dfc_pre.T @ cache["flat"]
        grads["fc_b"] = dfc_pre.sum(axis=0)
        dflat = dfc_pre @ params["fc_w"]

        channels, side = self.spec.conv_output_shape()
        dout = dflat.reshape(-1, channels, side, side)
        for idx in reversed(range(len(self.spec.convs))):
            dout = dout * (cache["pre_relu"][idx] > 0.0)
            b, f = dout.shape[0], dout.shape[1]
            dflat2 = dout.reshape(b, f, -1)
            cols = cache["cols"][idx]
            grads[f"conv{idx}_w"] = np.einsum("bfp,bcp->fc", dflat2, cols)
            grads[f"conv{idx}_b"] = dflat2.sum(axis=(0, 2))
            dcols = np.matmul(params[f"conv{idx}_w"].T, dflat2)
            x_shape, k, stride, oh, ow = cache["x_shapes"][idx]
            dout = _col2im(dcols, x_shape, k, stride, oh, ow)
        return grads

    def loss_and_grads(self, params: dict, x: np.ndarray, target: np.ndarray):
        """Mean per-sample squared error over the 12 pose entries."""
        pred, cache = self.forward(params, x)
        diff = pred - target
        loss = float((diff * diff).sum() / x.shape[0])
        grads = self.backward(params, cache, 2.0 * diff / x.shape[0])
        return loss, grads

    def predict(self, params: dict, x: np.ndarray) -> np.ndarray:
        pred, _ = self.forward(params, x)
        return pred


@dataclass(frozen=True)
class EstimatorParameters:
    """Trained weights plus the identity needed to reuse them correctly."""

    weights: dict
    feature_extractor_id: str
    head_shape: str
    training_config_digest: str

    def save(self, path) -> None:
        meta = np.array([self.feature_extractor_id, self.head_shape,
                         self.training_config_digest])
        np.savez(path, __meta__=meta,
                 **{k: np.asarray(v) for k, v in self.weights.items()})

    @staticmethod
    def load(path) -> "EstimatorParameters":
        with np.load(path, allow_pickle=False) as data:
            meta = data["__meta__"]
            weights = {k: data[k].copy() for k in data.files if k != "__meta__"}
        return EstimatorParameters(weights, str(meta[0]), str(meta[1]), str(meta[2]))


@dataclass(frozen=True)
class PoseEstimate:
    """SO(3)-projected pose with its spherical reading."""

    pose: Pose
    spherical: SphericalView
    confidence: float | None = None
    raw_output: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        derived = pose_to_spherical(self.pose)
        d_az = abs(normalize_azimuth(derived.azimuth - self.spherical.azimuth))
        d_el = abs(derived.elevation - self.spherical.elevation)
        if max(d_az, d_el) > SPHERICAL_CONSISTENCY_DEG:
            raise ValueError("pose and spherical fields disagree beyond tolerance")


def prepare_image(image: ImageBuffer, size: int) -> np.ndarray:
    """Letterbox to square on white, resize, scale to [0, 1], CHW layout."""
    rgb = image.to_rgb().pixels
    h, w = rgb.shape[:2]
    if h != w:
        side = max(h, w)
        canvas = np.full((side, side, 3), 255, dtype=np.uint8)
        oy, ox = (side - h) // 2, (side - w) // 2
        canvas[oy:oy + h, ox:ox + w] = rgb
        rgb = canvas
    chw = np.empty((3, size, size), dtype=np.float64)
    for ch in range(3):
        resized = kernels.bilinear_resize(rgb[..., ch].astype(np.float64), size, size)
        chw[ch] = resized / 255.0
    return chw


def decode_output(raw: np.ndarray) -> PoseEstimate:
    """Raw 12-vector -> PoseEstimate; rotation snapped onto SO(3)."""
    raw = np.asarray(raw, dtype=np.float64).reshape(OUTPUT_DIM)
    rotation = project_rotation(raw[:9].reshape(3, 3))
    pose = Pose(rotation, raw[9:])
    try:
        spherical = pose_to_spherical(pose)
    except PoleDegenerate as exc:
        raise PoleDegenerate(exc.elevation, raw_output=raw) from None
    return PoseEstimate(pose, spherical, raw_output=raw)


def estimate(image: ImageBuffer, params: EstimatorParameters) -> PoseEstimate:
    """Single-image pose estimate with the stored extractor and weights."""
    spec = get_extractor(params.feature_extractor_id)
    net = PoseNet(spec)
    x = prepare_image(image, spec.input_size)[None, ...]
    raw = net.predict(params.weights, x)[0]
    return decode_output(raw)
