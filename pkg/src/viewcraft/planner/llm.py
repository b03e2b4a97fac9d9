"""LLM-backed planning: prompt templates plus schema-repair retries.

The remote side renders a versioned prompt template and must answer with a
single JSON object; anything else is re-asked with the validation error as
feedback, up to ``max_retries`` total attempts.
"""

from __future__ import annotations

from importlib import resources

from ..backends.client import PlanClient, make_transport
from ..backends.stubs import StubHub
from ..errors import ConfigError, EmptyInstruction
from .grammar import parse_instruction
from .plan import EditPlan, PlannerBackendSpec


def load_template(template_id: str) -> str:
    """Versioned prompt text shipped with the package."""
    ref = resources.files(__package__) / "templates" / f"{template_id}.txt"
    try:
        return ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"unknown prompt template {template_id!r}") from None


def render_prompt(template_id: str, instruction: str) -> str:
    # str.replace, not str.format: the template body contains JSON braces.
    return load_template(template_id).replace("{instruction}", instruction)


def llm_plan(text: str, spec: PlannerBackendSpec, *,
             plan_client: PlanClient | None = None,
             hub: StubHub | None = None) -> EditPlan:
    """Plan via the LLM wire protocol; returns a validated EditPlan."""
    if spec.mode != "llm":
        raise ConfigError(f"llm_plan called with planner mode {spec.mode!r}")
    if text is None or not text.strip():
        raise EmptyInstruction("instruction text is blank")
    load_template(spec.prompt_template_id)  # fail fast on unknown templates
    client = plan_client or PlanClient(
        spec.endpoint, make_transport(spec.endpoint, hub=hub))
    result = client.plan(text, spec.prompt_template_id,
                         max_attempts=spec.max_retries,
                         validate=EditPlan.from_json)
    return EditPlan.from_json(result.plan, provenance={
        "backend_id": result.provenance["backend_id"],
        "retry_count": result.attempts - 1,
        "template_id": spec.prompt_template_id,
    })


def plan_instruction(text: str, spec: PlannerBackendSpec | None = None, *,
                     plan_client: PlanClient | None = None,
                     hub: StubHub | None = None) -> EditPlan:
    """Dispatch to the grammar or LLM path per the backend spec."""
    spec = spec or PlannerBackendSpec()
    if spec.mode == "grammar":
        return parse_instruction(text)
    return llm_plan(text, spec, plan_client=plan_client, hub=hub)
