"""Shared backend domain types: endpoints and procedural object specs."""

from __future__ import annotations

from dataclasses import dataclass, field

BACKEND_KINDS = ("segment", "nvs", "inpaint", "llm", "score")

_PRIMITIVES = ("cuboid", "cylinder", "cone")
_SHAPES = _PRIMITIVES + ("composite",)
MAX_COMPOSITE_PARTS = 4


@dataclass(frozen=True)
class BackendEndpoint:
    """Where a model service lives: an HTTP base URL or a registered stub.

    ``target`` is either ``"stub:<name>"`` or a base URL like
    ``"http://host:port"``.
    """

    kind: str
    target: str
    timeout: float = 10.0
    auth_token_ref: str | None = None

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if not (self.is_stub or self.target.startswith("http")):
            raise ValueError(f"target {self.target!r} is neither stub:<name> nor a URL")

    @property
    def is_stub(self) -> bool:
        return self.target.startswith("stub:")

    @property
    def stub_name(self) -> str:
        return self.target.split(":", 1)[1]

    def to_json(self) -> dict:
        return {"kind": self.kind, "target": self.target, "timeout": self.timeout}

    @staticmethod
    def from_json(obj: dict) -> "BackendEndpoint":
        return BackendEndpoint(obj["kind"], obj["target"], obj.get("timeout", 10.0),
                               obj.get("auth_token_ref"))


# Shading can brighten a base color by up to 1.08 (texture jitter) at full
# intensity; capping bases at 220 keeps every object pixel below the white
# background threshold used by the segmentation stub (220 * 1.08 < 250).
MAX_BASE_COLOR = 220


def _color_tuple(c) -> tuple[int, int, int]:
    r, g, b = (int(v) for v in c)
    for v in (r, g, b):
        if not 0 <= v <= MAX_BASE_COLOR:
            raise ValueError(f"color component {v} outside [0, {MAX_BASE_COLOR}]")
    return (r, g, b)


@dataclass(frozen=True)
class PrimitivePart:
    """One convex primitive inside a composite object, in object frame."""

    shape: str
    dimensions: tuple[float, float, float]
    colors: tuple[tuple[int, int, int], ...]
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.shape not in _PRIMITIVES:
            raise ValueError(f"part shape must be one of {_PRIMITIVES}, got {self.shape!r}")
        dims = tuple(float(d) for d in self.dimensions)
        if any(d <= 0 for d in dims):
            raise ValueError(f"dimensions must be positive, got {dims}")
        object.__setattr__(self, "dimensions", dims)
        colors = tuple(_color_tuple(c) for c in self.colors)
        if not colors:
            raise ValueError("at least one face color required")
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "offset", tuple(float(v) for v in self.offset))

    def to_json(self) -> dict:
        return {"shape": self.shape, "dimensions": list(self.dimensions),
                "colors": [list(c) for c in self.colors],
                "offset": list(self.offset)}

    @staticmethod
    def from_json(obj: dict) -> "PrimitivePart":
        return PrimitivePart(obj["shape"], tuple(obj["dimensions"]),
                             tuple(tuple(c) for c in obj["colors"]),
                             tuple(obj.get("offset", (0.0, 0.0, 0.0))))


@dataclass(frozen=True)
class ProceduralObjectSpec:
    """Deterministic test object: a primitive or a composite of up to 4 parts."""

    shape: str
    dimensions: tuple[float, float, float]
    face_colors: tuple[tuple[int, int, int], ...]
    texture_seed: int = 0
    parts: tuple[PrimitivePart, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}, got {self.shape!r}")
        dims = tuple(float(d) for d in self.dimensions)
        if any(d <= 0 for d in dims):
            raise ValueError(f"dimensions must be positive, got {dims}")
        object.__setattr__(self, "dimensions", dims)
        colors = tuple(_color_tuple(c) for c in self.face_colors)
        if not colors:
            raise ValueError("at least one face color required")
        object.__setattr__(self, "face_colors", colors)
        object.__setattr__(self, "parts", tuple(self.parts))
        if self.shape == "composite":
            if not 1 <= len(self.parts) <= MAX_COMPOSITE_PARTS:
                raise ValueError(
                    f"composite needs 1..{MAX_COMPOSITE_PARTS} parts, got {len(self.parts)}")
        elif self.parts:
            raise ValueError("Only composite specs carry parts")

    def as_parts(self) -> tuple[PrimitivePart, ...]:
        """Uniform view: a primitive spec is a single part at the origin."""
        if self.shape == "composite":
            return self.parts
        return (PrimitivePart(self.shape, self.dimensions, self.face_colors),)

    def to_json(self) -> dict:
        obj = {"shape": self.shape, "dimensions": list(self.dimensions),
               "face_colors": [list(c) for c in self.face_colors],
               "texture_seed": self.texture_seed}
        if self.parts:
            obj["parts"] = [p.to_json() for p in self.parts]
        return obj

    @staticmethod
    def from_json(obj: dict) -> "ProceduralObjectSpec":
        return ProceduralObjectSpec(
            obj["shape"], tuple(obj["dimensions"]),
            tuple(tuple(c) for c in obj["face_colors"]),
            obj.get("texture_seed", 0),
            tuple(PrimitivePart.from_json(p) for p in obj.get("parts", ())),
        )
