"""Exception taxonomy shared across the toolkit.

Every error a stage can raise is typed so the orchestrator and the HTTP
service can map failures without string matching.
"""

from __future__ import annotations


class ViewcraftError(Exception):
    """Base class for all library errors."""


# --- geometry ---------------------------------------------------------------

class PoleDegenerate(ViewcraftError):
    """Camera sits on the vertical axis; azimuth is ambiguous.

    Carries the offending elevation (degrees) and, when raised from the
    estimator, the raw regression output for auditing.
    """

    def __init__(self, elevation: float, raw_output=None):
        super().__init__(f"camera at elevation {elevation:.6f} deg: azimuth undefined")
        self.elevation = elevation
        self.raw_output = raw_output


# --- planner ----------------------------------------------------------------

class EmptyInstruction(ViewcraftError):
    """Blank instruction text."""


class UnparsableInstruction(ViewcraftError):
    """No grammar rule matched; carries the longest-matched prefix."""

    def __init__(self, text: str, matched_prefix: str):
        super().__init__(f"cannot parse {text!r} (matched up to {matched_prefix!r})")
        self.text = text
        self.matched_prefix = matched_prefix


class SchemaViolationExhausted(ViewcraftError):
    """LLM backend never produced a schema-valid plan within max_retries."""

    def __init__(self, attempts: int, last_response: str, last_error: str):
        super().__init__(
            f"no valid plan after {attempts} attempts (last error: {last_error})"
        )
        self.attempts = attempts
        self.last_response = last_response
        self.last_error = last_error


# --- backends ---------------------------------------------------------------

class BackendUnavailable(ViewcraftError):
    """Transport-level failure talking to a model backend."""

    def __init__(self, kind: str, detail: str):
        super().__init__(f"{kind} backend unavailable: {detail}")
        self.kind = kind
        self.detail = detail


class ProtocolError(ViewcraftError):
    """Malformed request or response on the backend wire protocol."""


class ObjectNotFound(ViewcraftError):
    """Segmentation found no region matching the object label."""

    def __init__(self, label: str):
        super().__init__(f"no region matching {label!r}")
        self.label = label


class UnsupportedView(ViewcraftError):
    """The view-synthesis backend declares the requested view out of range."""


class DimensionMismatch(ViewcraftError):
    """Image dimensions do not match the region they must fill."""


class RenderFailure(ViewcraftError):
    """Procedural render failed; carries object/view identity."""

    def __init__(self, detail: str, object_id: str | None = None, view=None):
        super().__init__(detail)
        self.object_id = object_id
        self.view = view


# --- align-compose ----------------------------------------------------------

class EmptyMask(ViewcraftError):
    """Mask has no set pixels inside the region of interest."""


class AspectMismatch(ViewcraftError):
    """Crop aspect differs from the target bounding box beyond tolerance."""

    def __init__(self, crop_aspect: float, target_aspect: float, tolerance: float):
        super().__init__(
            f"crop aspect {crop_aspect:.4f} vs target {target_aspect:.4f} "
            f"exceeds tolerance {tolerance:.2%}"
        )
        self.crop_aspect = crop_aspect
        self.target_aspect = target_aspect
        self.tolerance = tolerance


# --- pose estimator ---------------------------------------------------------

class EmptyTrainSplit(ViewcraftError):
    """Manifest has no training objects."""


class EmptySplit(ViewcraftError):
    """Requested evaluation split holds no samples."""


class DivergedLoss(ViewcraftError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, step: int):
        super().__init__(f"non-finite loss at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step


# --- orchestrator -----------------------------------------------------------

class PlanImageMismatch(ViewcraftError):
    """Plan action and supplied images disagree (e.g. replace without x_r)."""


class ConfigError(ViewcraftError):
    """Invalid or incomplete pipeline configuration."""


class SessionNotFound(ViewcraftError):
    """No editing session under the requested id."""

    def __init__(self, session_id: str):
        super().__init__(f"unknown session {session_id!r}")
        self.session_id = session_id


class StageFailure(ViewcraftError):
    """A pipeline stage failed; wraps the typed cause with stage identity."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
