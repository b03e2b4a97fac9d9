"""Synthetic pose dataset: procedural objects rendered at random views.

Every generated object carries two fixed-color beacon masts (red on its +x
side, blue on +y) protruding above the body.  Bodies vary per object; the
beacons are shared vocabulary, which is what lets a pose model trained on
some objects read the azimuth of objects it never saw.  Without such a cue
the task is ill-posed for symmetric bodies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..backends.render import render
from ..backends.types import PrimitivePart, ProceduralObjectSpec
from ..errors import RenderFailure
from ..geometry import SphericalView
from ..imagebuf import ImageBuffer

MANIFEST_SCHEMA_VERSION = "1"
TRAIN_FRACTION = 0.8
ELEVATION_RANGE = (-10.0, 60.0)
DATASET_RADIUS = 1.0
DEFAULT_IMAGE_SIZE = (128, 128)

BEACON_RED = (200, 40, 40)
BEACON_BLUE = (40, 60, 200)
# Beacon size is a compromise: thick enough to survive the downsample to the
# extractor input, small enough not to occlude the body.
BEACON_SECTION = 0.14
BEACON_HEIGHT = 0.6
BEACON_OFFSET = 0.35
# Objects (body + beacon tips) span about +/-1.15 scene units; 48 px/unit
# fills a 128 px frame without clipping any sampled view.
DATASET_SCALE = 48.0

_BODY_SHAPES = ("cuboid", "cylinder", "cone")


@dataclass(frozen=True)
class PoseSample:
    """One manifest row: image path (relative), its view label, split."""

    image_path: str
    object_id: str
    split: str
    label: SphericalView

    def to_json(self) -> dict:
        return {"image": self.image_path, "object_id": self.object_id,
                "split": self.split, "label": self.label.to_json()}

    @staticmethod
    def from_json(obj: dict) -> "PoseSample":
        return PoseSample(obj["image"], obj["object_id"], obj["split"],
                          SphericalView.from_json(obj["label"]))


def _random_color(rng: np.random.Generator) -> tuple[int, int, int]:
    return tuple(int(v) for v in rng.integers(40, 201, size=3))


def make_object_spec(rng: np.random.Generator) -> ProceduralObjectSpec:
    """One random beacon-carrying composite object."""
    body_shape = _BODY_SHAPES[int(rng.integers(0, len(_BODY_SHAPES)))]
    dims = tuple(float(v) for v in rng.uniform(0.5, 0.9, size=3))
    body = PrimitivePart(body_shape, dims,
                         (_random_color(rng), _random_color(rng), _random_color(rng)))
    parts = [body]
    if rng.random() < 0.5:
        cap_shape = _BODY_SHAPES[int(rng.integers(0, len(_BODY_SHAPES)))]
        cap_dims = tuple(float(v) for v in rng.uniform(0.2, 0.4, size=3))
        parts.append(PrimitivePart(
            cap_shape, cap_dims, (_random_color(rng),),
            offset=(0.0, 0.0, dims[2] / 2 + cap_dims[2] / 2)))
    mast_z = dims[2] / 2 + BEACON_HEIGHT / 2 - 0.05
    mast_dims = (BEACON_SECTION, BEACON_SECTION, BEACON_HEIGHT)
    parts.append(PrimitivePart("cuboid", mast_dims, (BEACON_RED,),
                               offset=(BEACON_OFFSET, 0.0, mast_z)))
    parts.append(PrimitivePart("cuboid", mast_dims, (BEACON_BLUE,),
                               offset=(0.0, BEACON_OFFSET, mast_z)))
    texture_seed = int(rng.integers(0, 2**31))
    return ProceduralObjectSpec("composite", dims, (parts[0].colors[0],),
                                texture_seed=texture_seed, parts=tuple(parts))


def make_synthetic_dataset(out_dir: str | Path, n_objects: int,
                           views_per_object: int, seed: int,
                           image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE,
                           scale: float | None = None) -> Path:
    """Render the dataset and write manifest + metadata; returns manifest path.

    Splits whole objects 8:2 (train:test); identical arguments produce
    byte-identical outputs.  When fewer than five objects exist, the test
    split is empty and the metadata carries ``warning_no_test_objects``.
    """
    if n_objects < 1:
        raise ValueError("n_objects must be >= 1")
    if views_per_object < 2:
        raise ValueError("views_per_object must be >= 2")
    if scale is None:
        scale = DATASET_SCALE
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)

    specs = [make_object_spec(rng) for _ in range(n_objects)]
    order = rng.permutation(n_objects)
    # round before flooring: (1 - 0.8) * 5 is 0.999... in binary
    n_test = int(np.floor(round((1.0 - TRAIN_FRACTION) * n_objects, 9)))
    test_ids = {int(i) for i in order[n_objects - n_test:]}

    samples: list[PoseSample] = []
    objects_meta = []
    for idx, spec in enumerate(specs):
        object_id = f"obj-{idx:03d}"
        split = "test" if idx in test_ids else "train"
        objects_meta.append({"object_id": object_id, "split": split,
                             "spec": spec.to_json()})
        img_dir = out_dir / "images" / object_id
        img_dir.mkdir(parents=True, exist_ok=True)
        for v in range(views_per_object):
            azimuth = float(rng.uniform(-180.0, 180.0))
            elevation = float(rng.uniform(*ELEVATION_RANGE))
            view = SphericalView(azimuth, elevation, DATASET_RADIUS)
            try:
                image = render(spec, view, size=image_size, scale=scale)
            except RenderFailure as exc:
                raise RenderFailure(str(exc), object_id=object_id, view=view) from exc
            rel = f"images/{object_id}/view-{v:04d}.png"
            (out_dir / rel).write_bytes(image.to_png())
            samples.append(PoseSample(rel, object_id, split, view))

    manifest_path = out_dir / "manifest.jsonl"
    with manifest_path.open("w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample.to_json(), sort_keys=True) + "\n")

    meta = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "n_objects": n_objects,
        "views_per_object": views_per_object,
        "seed": seed,
        "image_size": list(image_size),
        "scale": scale,
        "radius": DATASET_RADIUS,
        "elevation_range": list(ELEVATION_RANGE),
        "n_train_objects": n_objects - n_test,
        "n_test_objects": n_test,
        "warning_no_test_objects": n_test == 0,
        "objects": objects_meta,
    }
    (out_dir / "manifest.meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return manifest_path


def load_manifest(manifest_path: str | Path) -> tuple[list[PoseSample], dict]:
    manifest_path = Path(manifest_path)
    samples = [PoseSample.from_json(json.loads(line))
               for line in manifest_path.read_text().splitlines() if line.strip()]
    meta_path = manifest_path.parent / "manifest.meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return samples, meta


def load_sample_image(manifest_path: str | Path, sample: PoseSample) -> ImageBuffer:
    path = Path(manifest_path).parent / sample.image_path
    return ImageBuffer.from_png(path.read_bytes())


def dataset_object_specs(meta: dict) -> dict[str, ProceduralObjectSpec]:
    """object_id -> spec map recovered from manifest metadata."""
    return {entry["object_id"]: ProceduralObjectSpec.from_json(entry["spec"])
            for entry in meta.get("objects", ())}
