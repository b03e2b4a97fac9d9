"""Pipeline configuration: backend endpoints, stage defaults, paths.

Loaded from YAML or built programmatically; every field has a working stub
default so ``PipelineConfig.default()`` drives the whole pipeline offline.
The config digest identifies a run setup in reports and provenance.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..align import ASPECT_TOLERANCE, COLOR_CELL, EDGE_HIGH, EDGE_LOW
from ..backends.types import BACKEND_KINDS, BackendEndpoint
from ..backends.wire import canonical_json
from ..errors import ConfigError
from ..planner.plan import PLANNER_MODES, PlannerBackendSpec

REQUIRED_KINDS = ("segment", "nvs", "inpaint", "llm")
POSE_PROVIDERS = ("default", "oracle", "model")

INSERT_PROMPT = "a {object_label}, photorealistic, matching scene lighting"
REMOVAL_PROMPT = "an empty background, seamless continuation of the scene"


@dataclass(frozen=True)
class PoseConfig:
    """How the source object's view gets estimated.

    ``default`` assumes the canonical view (zero-shot fallback), ``oracle``
    reads the true base view from the scene registry (stub scenes only), and
    ``model`` runs trained regressor weights loaded from ``params_path``.
    """

    provider: str = "default"
    params_path: str | None = None

    def __post_init__(self):
        if self.provider not in POSE_PROVIDERS:
            raise ConfigError(
                f"pose provider must be one of {POSE_PROVIDERS}, got {self.provider!r}")
        if self.provider == "model" and not self.params_path:
            raise ConfigError("pose provider 'model' requires params_path")

    def to_dict(self) -> dict:
        return {"provider": self.provider, "params_path": self.params_path}


@dataclass(frozen=True)
class AlignDefaults:
    """Tunables for the alignment and control-signal stages."""

    edge_low: int = EDGE_LOW
    edge_high: int = EDGE_HIGH
    color_cell: int = COLOR_CELL
    aspect_tolerance: float = ASPECT_TOLERANCE

    def __post_init__(self):
        if not 0 <= self.edge_low <= self.edge_high <= 255:
            raise ConfigError(
                f"edge thresholds must satisfy 0 <= low <= high <= 255, "
                f"got ({self.edge_low}, {self.edge_high})")
        if self.color_cell < 1:
            raise ConfigError("color_cell must be a positive pixel count")
        if self.aspect_tolerance < 0:
            raise ConfigError("aspect_tolerance must be non-negative")

    def to_dict(self) -> dict:
        return {"edge_low": self.edge_low, "edge_high": self.edge_high,
                "color_cell": self.color_cell,
                "aspect_tolerance": self.aspect_tolerance}


@dataclass(frozen=True)
class SceneConfig:
    """Side-channel wiring for stub scenes.

    ``registry`` points at a saved scene registry; ``objects`` maps the
    labels instructions use to registered object ids so the view-synthesis
    stub and the oracle pose provider can find them.
    """

    registry: str | None = None
    objects: dict = field(default_factory=dict)

    def __post_init__(self):
        for label, oid in self.objects.items():
            if not isinstance(label, str) or not isinstance(oid, str):
                raise ConfigError("scene.objects must map label strings to id strings")

    def object_id(self, label: str) -> str | None:
        return self.objects.get(label)

    def to_dict(self) -> dict:
        return {"registry": self.registry, "objects": dict(sorted(self.objects.items()))}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything run_edit needs beyond the request itself."""

    backends: dict = field(default_factory=dict)
    planner_mode: str = "grammar"
    planner_template_id: str = "plan_v1"
    planner_max_retries: int = 3
    pose: PoseConfig = field(default_factory=PoseConfig)
    align: AlignDefaults = field(default_factory=AlignDefaults)
    scene: SceneConfig = field(default_factory=SceneConfig)
    insert_prompt: str = INSERT_PROMPT
    removal_prompt: str = REMOVAL_PROMPT
    sessions_dir: str = "sessions"

    def __post_init__(self):
        if self.planner_mode not in PLANNER_MODES:
            raise ConfigError(f"planner_mode must be one of {PLANNER_MODES}")
        for kind in REQUIRED_KINDS:
            if kind not in self.backends:
                raise ConfigError(f"missing required backend endpoint: {kind!r}")
        for kind, endpoint in self.backends.items():
            if kind not in BACKEND_KINDS:
                raise ConfigError(f"unknown backend kind {kind!r}")
            if endpoint.kind != kind:
                raise ConfigError(
                    f"endpoint under {kind!r} declares kind {endpoint.kind!r}")

    @staticmethod
    def default(**overrides) -> "PipelineConfig":
        """All-stub configuration; runs offline with no scene registry."""
        backends = {kind: BackendEndpoint(kind, f"stub:{kind}")
                    for kind in BACKEND_KINDS}
        return PipelineConfig(backends=backends, **overrides)

    def planner_spec(self) -> PlannerBackendSpec:
        return PlannerBackendSpec(
            mode=self.planner_mode,
            endpoint=self.backends["llm"],
            prompt_template_id=self.planner_template_id,
            max_retries=self.planner_max_retries)

    def to_dict(self) -> dict:
        return {
            "schema_version": "1",
            "backends": {kind: ep.to_json()
                         for kind, ep in sorted(self.backends.items())},
            "planner": {"mode": self.planner_mode,
                        "template_id": self.planner_template_id,
                        "max_retries": self.planner_max_retries},
            "pose": self.pose.to_dict(),
            "align": self.align.to_dict(),
            "scene": self.scene.to_dict(),
            "prompts": {"insert": self.insert_prompt,
                        "removal": self.removal_prompt},
            "sessions_dir": str(self.sessions_dir),
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()[:16]


def _parse_endpoint(kind: str, value) -> BackendEndpoint:
    if isinstance(value, str):
        return BackendEndpoint(kind, value)
    if isinstance(value, dict):
        target = value.get("target") or value.get("url")
        if not target:
            raise ConfigError(f"backend {kind!r} entry needs a target/url")
        return BackendEndpoint(kind, target,
                               float(value.get("timeout", 10.0)),
                               value.get("auth_token_ref"))
    raise ConfigError(f"backend {kind!r} must be a string or mapping")


_TOP_KEYS = {"schema_version", "backends", "planner", "pose", "align", "scene",
             "prompts", "sessions_dir"}


def config_from_dict(obj: dict, base_dir: str | Path | None = None) -> PipelineConfig:
    """Build a config from parsed YAML; relative paths resolve against base_dir."""
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = Path(base_dir) if base_dir is not None else None

    def _path(value: str | None) -> str | None:
        if value is None:
            return None
        p = Path(value)
        if base is not None and not p.is_absolute():
            p = base / p
        return str(p)

    backends = {kind: _parse_endpoint(kind, value)
                for kind, value in (obj.get("backends") or {}).items()}
    planner = obj.get("planner") or {}
    pose = obj.get("pose") or {}
    align = obj.get("align") or {}
    scene = obj.get("scene") or {}
    prompts = obj.get("prompts") or {}
    return PipelineConfig(
        backends=backends,
        planner_mode=planner.get("mode", "grammar"),
        planner_template_id=planner.get("template_id", "plan_v1"),
        planner_max_retries=int(planner.get("max_retries", 3)),
        pose=PoseConfig(pose.get("provider", "default"),
                        _path(pose.get("params_path"))),
        align=AlignDefaults(
            int(align.get("edge_low", EDGE_LOW)),
            int(align.get("edge_high", EDGE_HIGH)),
            int(align.get("color_cell", COLOR_CELL)),
            float(align.get("aspect_tolerance", ASPECT_TOLERANCE))),
        scene=SceneConfig(_path(scene.get("registry")),
                          dict(scene.get("objects") or {})),
        insert_prompt=prompts.get("insert", INSERT_PROMPT),
        removal_prompt=prompts.get("removal", REMOVAL_PROMPT),
        sessions_dir=_path(obj.get("sessions_dir", "sessions")),
    )


def load_config(path: str | Path) -> PipelineConfig:
    """Load a YAML config file; relative paths resolve against its directory."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        obj = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from None
    return config_from_dict(obj or {}, base_dir=path.parent)
