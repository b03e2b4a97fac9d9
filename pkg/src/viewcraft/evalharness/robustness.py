"""View-error robustness: how synthesis degrades as the target view drifts.

Each sample perturbs the target view's azimuth by an error drawn from a
bucket's range, runs the full pipeline, and scores the silhouette IoU of the
raw synthesis output against the same scene's zero-error run.  IoU is a
machine-checkable proxy for the "does the object still sit naturally" human
judgment; reports label it as such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..backends.stubs import WHITE_THRESHOLD
from ..errors import ViewcraftError
from ..imagebuf import ImageBuffer
from ..pipeline.config import PipelineConfig
from ..pipeline.orchestrator import (EditOptions, EditRequest, Orchestrator)
from .report import BenchReport


@dataclass(frozen=True)
class RobustnessBucket:
    """Half-open range of injected view error, in degrees."""

    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError(f"bad bucket range [{self.lo}, {self.hi})")

    def sample(self, rng: np.random.Generator) -> float:
        """Error magnitude in [lo, hi); the degenerate [x, x] yields x."""
        if self.lo == self.hi:
            return float(self.lo)
        value = self.lo + (self.hi - self.lo) * float(rng.random())
        if value >= self.hi:  # guard against float rounding onto the bound
            value = float(np.nextafter(self.hi, self.lo))
        return value

    def contains(self, magnitude: float) -> bool:
        if self.lo == self.hi:
            return magnitude == self.lo
        return self.lo <= magnitude < self.hi


BUCKETS = (
    RobustnessBucket("perfect", 0.0, 0.0),
    RobustnessBucket("slight", 0.0, 20.0),
    RobustnessBucket("moderate", 20.0, 40.0),
    RobustnessBucket("severe", 40.0, 90.0),
)


@dataclass(frozen=True)
class RobustnessScene:
    """One benchmark scene: a source image and the rotation to apply."""

    name: str
    source_image: ImageBuffer
    instruction: str
    seed: int = 0


def silhouette_iou(a: ImageBuffer, b: ImageBuffer) -> float:
    """IoU of non-white-background foregrounds; 1.0 when both are empty."""
    fa = (a.to_rgb().pixels[..., :3] < WHITE_THRESHOLD).any(axis=2)
    fb = (b.to_rgb().pixels[..., :3] < WHITE_THRESHOLD).any(axis=2)
    if fa.shape != fb.shape:
        raise ValueError(f"silhouette shapes differ: {fa.shape} vs {fb.shape}")
    union = int((fa | fb).sum())
    if union == 0:
        return 1.0
    return float((fa & fb).sum() / union)


def pixel_diff(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean absolute pixel difference, normalized to [0, 1]."""
    pa = a.to_rgb().pixels.astype(np.float64)
    pb = b.to_rgb().pixels.astype(np.float64)
    return float(np.abs(pa - pb).mean() / 255.0)


def bench_robustness(config: PipelineConfig, scenes, *,
                     buckets=BUCKETS, n_per_bucket: int = 5,
                     seed: int = 0,
                     orchestrator: Orchestrator | None = None) -> BenchReport:
    """Per-bucket mean silhouette IoU and output pixel diff across scenes.

    Per-sample stage failures are recorded, not fatal; they are excluded from
    the means and counted in the row's ``errors`` cell.
    """
    if not scenes:
        raise ValueError("bench_robustness needs at least one scene")
    orch = orchestrator or Orchestrator(config)
    rng = np.random.default_rng(seed)

    baselines = {}
    for scene in scenes:
        result = orch.run_edit(_request(scene, 0.0))
        if result.status != "ok":
            raise ViewcraftError(
                f"zero-error baseline failed for scene {scene.name!r}: "
                f"{result.failure}")
        baselines[scene.name] = result

    rows = []
    for bucket in buckets:
        ious, diffs, errors, samples = [], [], 0, []
        for i in range(n_per_bucket):
            for scene in scenes:
                magnitude = bucket.sample(rng)
                sign = 1.0 if rng.random() < 0.5 else -1.0
                injected = sign * magnitude
                try:
                    result = orch.run_edit(_request(scene, injected))
                    if result.status != "ok":
                        raise ViewcraftError(result.failure["detail"])
                except ViewcraftError as exc:
                    errors += 1
                    samples.append({"scene": scene.name,
                                    "error_deg": round(injected, 6),
                                    "failed": type(exc).__name__})
                    continue
                base = baselines[scene.name]
                iou = silhouette_iou(result.artifacts["nvs"],
                                     base.artifacts["nvs"])
                diff = pixel_diff(result.output, base.output)
                ious.append(iou)
                diffs.append(diff)
                samples.append({"scene": scene.name,
                                "error_deg": round(injected, 6),
                                "iou": round(iou, 6),
                                "pixel_diff": round(diff, 6)})
        rows.append({
            "bucket": bucket.name,
            "range_deg": f"[{bucket.lo:g}, {bucket.hi:g})" if bucket.lo != bucket.hi
                         else f"[{bucket.lo:g}, {bucket.hi:g}]",
            "mean_iou": round(float(np.mean(ious)), 6) if ious else None,
            "mean_pixel_diff": round(float(np.mean(diffs)), 6) if diffs else None,
            "errors": errors,
            "n": len(ious),
            "samples": samples,
        })

    return BenchReport(
        kind="robustness",
        columns=("bucket", "range_deg", "mean_iou", "mean_pixel_diff",
                 "errors", "n"),
        rows=tuple(rows),
        metadata={"seed": seed, "n_per_bucket": n_per_bucket,
                  "n_scenes": len(scenes), "config_digest": config.digest(),
                  "metric": "silhouette IoU vs zero-error run (proxy metric)"},
    )


def _request(scene: RobustnessScene, injected: float) -> EditRequest:
    return EditRequest(
        source_image=scene.source_image,
        instruction=scene.instruction,
        seed=scene.seed,
        options=EditOptions(inject_view_error_deg=injected,
                            keep_artifacts=True),
    )


def demo_setup():
    """Built-in stub scenes so the bench runs with no external fixtures.

    Returns (config, scenes, orchestrator) wired to an in-memory registry;
    everything is deterministic.
    """
    from ..backends.render import render
    from ..backends.scene import SceneObject, SceneRegistry
    from ..backends.types import PrimitivePart, ProceduralObjectSpec
    from ..geometry import SphericalView
    from ..pipeline.config import PoseConfig, SceneConfig

    registry = SceneRegistry()
    box = SceneObject(
        ProceduralObjectSpec("cuboid", (1.3, 0.8, 0.9), ((170, 80, 60),),
                             texture_seed=3),
        base_view=SphericalView(15, 10, 1.0))
    tower = SceneObject(
        ProceduralObjectSpec(
            "composite", (1.0, 1.0, 1.0), ((120, 120, 190),), texture_seed=9,
            parts=(PrimitivePart("cuboid", (1.0, 0.7, 0.5), ((120, 120, 190),)),
                   PrimitivePart("cylinder", (0.3, 0.3, 0.7), ((190, 160, 60),),
                                 offset=(0.1, 0.0, 0.6)))),
        base_view=SphericalView(-25, 20, 1.0))
    registry.register("obj-box", box)
    registry.register("obj-tower", tower)

    config = PipelineConfig.default(
        pose=PoseConfig(provider="oracle"),
        scene=SceneConfig(objects={"box": "obj-box", "tower": "obj-tower"}))
    orchestrator = Orchestrator(config, registry=registry)
    scenes = (
        RobustnessScene("box", render(box.spec, box.base_view, box.render_size),
                        "turn the box right 25 degrees", seed=4),
        RobustnessScene("tower",
                        render(tower.spec, tower.base_view, tower.render_size),
                        "turn the tower left 30 degrees", seed=5),
    )
    return config, scenes, orchestrator
