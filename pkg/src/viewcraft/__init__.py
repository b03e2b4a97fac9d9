"""View-conditioned object editing: geometry, planning, pose, composition."""

from .align import (ControlSignals, ObjectCrop, align_to_bbox, crop_object,
                    make_control_signals, pad_to_aspect, resize_to_bbox)
from .errors import (AspectMismatch, BackendUnavailable, ConfigError,
                     DimensionMismatch, EmptyInstruction, EmptyMask,
                     ObjectNotFound, PlanImageMismatch, PoleDegenerate,
                     ProtocolError, RenderFailure, SchemaViolationExhausted,
                     SessionNotFound, UnparsableInstruction, UnsupportedView,
                     ViewcraftError)
from .geometry import (DEFAULT_VIEW, BoundingBox, Pose, SphericalView,
                       apply_view_delta, normalize_azimuth, relative_pose,
                       spherical_to_pose, view_difference)
from .imagebuf import ImageBuffer
from .pipeline import (EditOptions, EditRequest, EditResult, Orchestrator,
                       PipelineConfig, SessionStore, load_config, run_edit,
                       run_edit_two_stage)
from .planner import EditPlan, plan_instruction

__version__ = "0.1.0"

__all__ = [
    "AspectMismatch", "BackendUnavailable", "BoundingBox", "ConfigError",
    "ControlSignals", "DEFAULT_VIEW", "DimensionMismatch", "EditOptions",
    "EditPlan", "EditRequest", "EditResult", "EmptyInstruction", "EmptyMask",
    "ImageBuffer", "ObjectCrop", "ObjectNotFound", "Orchestrator",
    "PipelineConfig", "PlanImageMismatch", "PoleDegenerate", "Pose",
    "ProtocolError", "RenderFailure", "SchemaViolationExhausted",
    "SessionNotFound", "SessionStore", "SphericalView",
    "UnparsableInstruction", "UnsupportedView", "ViewcraftError",
    "align_to_bbox", "apply_view_delta", "crop_object", "load_config",
    "make_control_signals", "normalize_azimuth", "pad_to_aspect",
    "plan_instruction", "relative_pose", "resize_to_bbox", "run_edit",
    "run_edit_two_stage", "spherical_to_pose", "view_difference",
    "__version__",
]
