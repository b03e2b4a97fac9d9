"""Registry mapping object ids to renderable scene state.

The view-synthesis stub cannot infer 3D structure from pixels; instead the
pipeline registers each synthetic object's spec and base view here, keyed by
an opaque ``object_id`` carried in requests as a side channel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ObjectNotFound
from ..geometry import DEFAULT_VIEW, SphericalView
from .types import ProceduralObjectSpec


@dataclass(frozen=True)
class SceneObject:
    """Everything needed to re-render one object deterministically."""

    spec: ProceduralObjectSpec
    base_view: SphericalView = DEFAULT_VIEW
    render_size: tuple[int, int] = (256, 256)
    render_scale: float | None = None

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "base_view": self.base_view.to_json(),
            "render_size": list(self.render_size),
            "render_scale": self.render_scale,
        }

    @staticmethod
    def from_json(obj: dict) -> "SceneObject":
        return SceneObject(
            ProceduralObjectSpec.from_json(obj["spec"]),
            SphericalView.from_json(obj["base_view"]),
            tuple(obj.get("render_size", (256, 256))),
            obj.get("render_scale"),
        )


@dataclass
class SceneRegistry:
    """Mutable id -> SceneObject map with JSON persistence."""

    objects: dict[str, SceneObject] = field(default_factory=dict)

    def register(self, object_id: str, entry: SceneObject) -> None:
        self.objects[object_id] = entry

    def lookup(self, object_id: str) -> SceneObject:
        try:
            return self.objects[object_id]
        except KeyError:
            raise ObjectNotFound(object_id) from None

    def __contains__(self, object_id: str) -> bool:
        return object_id in self.objects

    def to_json(self) -> dict:
        return {oid: entry.to_json() for oid, entry in sorted(self.objects.items())}

    @staticmethod
    def from_json(obj: dict) -> "SceneRegistry":
        return SceneRegistry({oid: SceneObject.from_json(e) for oid, e in obj.items()})

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @staticmethod
    def load(path: str | Path) -> "SceneRegistry":
        return SceneRegistry.from_json(json.loads(Path(path).read_text()))
