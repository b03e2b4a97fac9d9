"""Feature-extractor comparison for the pose regressor.

Trains and evaluates each locally available extractor on one manifest and
tabulates parameter count, MAE, and RMSE.  Published numbers for large
pretrained backbones ride along as footer context only: that benchmark used
a private 48.6k-image dataset and GPU-scale encoders, neither of which this
harness reproduces.
"""

from __future__ import annotations

from dataclasses import replace

from ..errors import ViewcraftError
from ..estimator.evaluate import evaluate
from ..estimator.features import get_extractor
from ..estimator.model import PoseNet
from ..estimator.train import TrainConfig, train
from .report import BenchReport

# name, params, GFLOPs, MAE deg, RMSE deg -- external reference results,
# not produced by this code.
REFERENCE_ROWS = (
    ("ResNet-50", "26.20 M", "4.13 G", 4.31, 7.45),
    ("CLIP", "87.88 M", "4.37 G", 3.28, 10.59),
    ("ViT", "86.34 M", "16.86 G", 1.65, 6.56),
    ("DINO-v2", "85.61 M", "21.96 G", 0.80, 5.01),
)

REFERENCE_FOOTER = tuple(
    ["Reference context -- large pretrained backbones on a private 48.6k-render",
     "benchmark (NOT reproduced by this harness; different data and scale):"]
    + [f"  {name:<10} {params:>8} {flops:>8}  MAE {mae:.2f}  RMSE {rmse:.2f}"
       for name, params, flops, mae, rmse in REFERENCE_ROWS])


def parameter_count(extractor_id: str) -> int:
    """Trainable parameter count of the built-in net with this extractor."""
    net = PoseNet(get_extractor(extractor_id))
    params = net.init_params(seed=0)
    return int(sum(v.size for v in params.values()))


def bench_backbones(manifest_path, extractor_ids=("conv-small",), *,
                    base_config: TrainConfig | None = None,
                    split: str = "test") -> BenchReport:
    """Train/evaluate each extractor; failures become rows, not crashes."""
    if not extractor_ids:
        raise ValueError("bench_backbones needs at least one extractor id")
    base = base_config or TrainConfig()
    rows = []
    for extractor_id in extractor_ids:
        config = replace(base, feature_extractor_id=extractor_id)
        try:
            params, _report = train(manifest_path, config)
            result = evaluate(manifest_path, params, split=split)
            rows.append({
                "backbone": extractor_id,
                "params": parameter_count(extractor_id),
                "mae_deg": round(result["aggregate"]["mae"], 4),
                "rmse_deg": round(result["aggregate"]["rmse"], 4),
                "epochs": config.epochs,
                "n": result["n"],
            })
        except (ViewcraftError, ValueError) as exc:
            rows.append({"backbone": extractor_id, "params": None,
                         "mae_deg": None, "rmse_deg": None,
                         "epochs": config.epochs, "n": 0,
                         "error": f"{type(exc).__name__}: {exc}"})
    return BenchReport(
        kind="backbones",
        columns=("backbone", "params", "mae_deg", "rmse_deg", "epochs", "n"),
        rows=tuple(rows),
        metadata={"manifest": str(manifest_path), "split": split,
                  "config_digest": base.digest()},
        footer=REFERENCE_FOOTER,
    )
