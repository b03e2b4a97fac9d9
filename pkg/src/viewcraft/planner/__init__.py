"""Instruction planning: grammar parser and LLM-backed path."""

from .grammar import GRAMMAR_BACKEND_ID, parse_instruction
from .llm import llm_plan, load_template, plan_instruction, render_prompt
from .plan import (ACTIONS, EditPlan, PlannerBackendSpec, plan_to_target_view)

__all__ = [
    "ACTIONS", "EditPlan", "GRAMMAR_BACKEND_ID", "PlannerBackendSpec",
    "llm_plan", "load_template", "parse_instruction", "plan_instruction",
    "plan_to_target_view", "render_prompt",
]
