"""Structured edit plans and planner backend configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError
from ..geometry import SphericalView, ViewDelta, apply_view_delta

ACTIONS = ("replace", "rotate")
PLANNER_MODES = ("grammar", "llm")


@dataclass(frozen=True)
class EditPlan:
    """What an instruction asks for: an action, object names, a view delta.

    ``provenance`` records which path produced the plan (and how many
    retries the LLM route burned); it is metadata and never compared or
    serialized with the plan itself.
    """

    action: str
    source_object: str
    reference_object: str | None = None
    view_delta: ViewDelta | None = None
    raw_instruction: str = ""
    provenance: dict | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ValueError(f"action must be one of {ACTIONS}, got {self.action!r}")
        if not self.source_object or not self.source_object.strip():
            raise ValueError("source_object must be a nonempty label")
        if self.action == "replace" and not self.reference_object:
            raise ValueError("replace plans require a reference_object")
        if self.action == "rotate":
            if self.view_delta is None or self.view_delta.is_zero():
                raise ValueError("rotate plans require a nonzero view_delta")

    def to_json(self) -> dict:
        return {
            "action": self.action,
            "source_object": self.source_object,
            "reference_object": self.reference_object,
            "view_delta": None if self.view_delta is None else self.view_delta.to_json(),
            "raw_instruction": self.raw_instruction,
        }

    @staticmethod
    def from_json(obj: dict, provenance: dict | None = None) -> "EditPlan":
        delta = obj.get("view_delta")
        return EditPlan(
            action=obj["action"],
            source_object=obj["source_object"],
            reference_object=obj.get("reference_object"),
            view_delta=None if delta is None else ViewDelta.from_json(delta),
            raw_instruction=obj.get("raw_instruction", ""),
            provenance=provenance,
        )


@dataclass(frozen=True)
class PlannerBackendSpec:
    """How to plan: pure grammar, or a remote LLM with repair retries."""

    mode: str = "grammar"
    endpoint: object | None = None
    prompt_template_id: str = "plan_v1"
    max_retries: int = 3

    def __post_init__(self):
        if self.mode not in PLANNER_MODES:
            raise ConfigError(f"planner mode must be one of {PLANNER_MODES}")
        if self.mode == "llm" and self.endpoint is None:
            raise ConfigError("llm planner mode requires an endpoint")
        if self.max_retries < 1:
            raise ConfigError("max_retries must be at least 1")


def plan_to_target_view(plan: EditPlan, estimated: SphericalView) -> SphericalView:
    """Target camera view implied by a plan at the current estimate.

    Rotations are relative to the estimated view; replacements keep it, the
    substitute object being synthesized at the source object's pose.
    """
    if plan.action == "rotate":
        return apply_view_delta(estimated, plan.view_delta)
    return estimated
