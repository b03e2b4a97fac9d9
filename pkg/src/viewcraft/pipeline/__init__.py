"""Pipeline assembly: configuration, orchestration, sessions, HTTP service."""

from .config import (AlignDefaults, PipelineConfig, PoseConfig, SceneConfig,
                     config_from_dict, load_config)
from .orchestrator import (EditOptions, EditRequest, EditResult, Orchestrator,
                           StageRecord, run_edit, run_edit_two_stage,
                           stage_names)
from .service import create_app, serve
from .session import SessionStore

__all__ = [
    "AlignDefaults", "EditOptions", "EditRequest", "EditResult",
    "Orchestrator", "PipelineConfig", "PoseConfig", "SceneConfig",
    "SessionStore", "StageRecord", "config_from_dict", "create_app",
    "load_config", "run_edit", "run_edit_two_stage", "serve", "stage_names",
]
