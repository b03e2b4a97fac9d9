"""The end-to-end edit pipeline.

One edit runs a fixed stage sequence: plan the instruction, segment the
object to edit, estimate its current view, derive the target view, synthesize
the object at that view, align the synthesis into the source bounding box,
extract edge/color control signals, and inpaint the box.  Each executed stage
leaves exactly one provenance record, in order; a stage failure returns a
``failed`` result carrying the records accumulated so far.

Validation problems (unparsable instruction, plan/image mismatch) and
unreachable backends raise instead: the caller can fix those, whereas a stage
failure is a property of this particular edit.
"""

from __future__ import annotations

import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..align import (ObjectCrop, align_to_bbox, crop_object,
                     make_control_signals)
from ..backends.client import BackendSet
from ..backends.scene import SceneRegistry
from ..backends.stubs import WHITE_THRESHOLD, default_stub_hub
from ..backends.wire import HEALTH_PATH, canonical_json
from ..errors import (BackendUnavailable, ConfigError, ObjectNotFound,
                      PlanImageMismatch, ViewcraftError)
from ..estimator.model import EstimatorParameters, estimate
from ..geometry import (DEFAULT_VIEW, BoundingBox, Pose, SphericalView,
                        relative_pose, spherical_to_pose, view_difference)
from ..imagebuf import ImageBuffer
from ..planner.llm import plan_instruction
from ..planner.plan import plan_to_target_view
from .config import PipelineConfig

RESULT_SCHEMA_VERSION = "1"

# Stage names in execution order per action.  Two-stage synthesis swaps the
# final "inpaint" for a remove/insert pair.
ROTATE_STAGES = ("plan", "segment", "pose", "target-view", "nvs", "align",
                 "control", "inpaint")
REPLACE_STAGES = ("plan", "segment", "segment-reference", "pose", "target-view",
                  "nvs", "align", "control", "inpaint")
TWO_STAGE_TAIL = ("inpaint-remove", "inpaint-insert")

NVS_CACHE_CAP = 64


def stage_names(action: str, two_stage: bool) -> tuple[str, ...]:
    """The exact provenance record names a successful run must produce."""
    stages = REPLACE_STAGES if action == "replace" else ROTATE_STAGES
    if two_stage:
        stages = stages[:-1] + TWO_STAGE_TAIL
    return stages


@dataclass(frozen=True)
class EditOptions:
    """Per-edit knobs.

    ``keep_artifacts`` retains deterministic intermediates (synthesis
    output, aligned object, control maps) on the result for harnesses and
    debugging; the default drops them to keep results small.
    """

    two_stage: bool = False
    inject_view_error_deg: float = 0.0
    keep_artifacts: bool = False

    def to_json(self) -> dict:
        return {"two_stage": self.two_stage,
                "inject_view_error_deg": float(self.inject_view_error_deg),
                "keep_artifacts": self.keep_artifacts}

    @staticmethod
    def from_json(obj: dict) -> "EditOptions":
        return EditOptions(bool(obj.get("two_stage", False)),
                           float(obj.get("inject_view_error_deg", 0.0)),
                           bool(obj.get("keep_artifacts", False)))


@dataclass(frozen=True)
class EditRequest:
    """One edit: a source image, an instruction, and knobs."""

    source_image: ImageBuffer
    instruction: str
    reference_image: ImageBuffer | None = None
    source_bbox: BoundingBox | None = None
    seed: int = 0
    options: EditOptions = field(default_factory=EditOptions)

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed))
        if not isinstance(self.instruction, str):
            raise ValueError("instruction must be a string")


@dataclass(frozen=True)
class StageRecord:
    """What one pipeline stage did.

    ``elapsed_ms`` and ``diagnostics`` (e.g. cache hits) are excluded from
    equality and from canonical serialization: two runs of the same edit must
    produce bit-identical canonical provenance.
    """

    stage: str
    backend_id: str | None = None
    seed: int | None = None
    detail: dict = field(default_factory=dict)
    elapsed_ms: float = field(default=0.0, compare=False)
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_json(self, include_timings: bool = False) -> dict:
        obj = {"stage": self.stage, "backend_id": self.backend_id,
               "seed": self.seed, "detail": self.detail}
        if include_timings:
            obj["elapsed_ms"] = round(self.elapsed_ms, 3)
            obj["diagnostics"] = self.diagnostics
        return obj


@dataclass(frozen=True)
class EditResult:
    """Output image plus the ordered stage records that produced it.

    ``status`` is ``ok`` for a complete run and ``failed`` when a stage
    raised (``failure`` then names the stage and error; ``provenance`` stops
    at the last completed stage and ``output`` echoes the source).
    ``partial`` is reserved for runs with degraded optional stages.
    """

    output: ImageBuffer
    provenance: tuple
    status: str
    failure: dict | None = None
    artifacts: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if self.status not in ("ok", "partial", "failed"):
            raise ValueError(f"unknown result status {self.status!r}")
        if (self.failure is None) != (self.status != "failed"):
            raise ValueError("failure info present iff status is 'failed'")

    @property
    def stages(self) -> tuple:
        return tuple(r.stage for r in self.provenance)

    def record(self, stage: str) -> StageRecord:
        for rec in self.provenance:
            if rec.stage == stage:
                return rec
        raise KeyError(f"no provenance record for stage {stage!r}")

    def to_json(self, include_timings: bool = False) -> dict:
        from ..backends import wire

        return {
            "schema_version": RESULT_SCHEMA_VERSION,
            "status": self.status,
            "output": wire.image_to_wire(self.output),
            "provenance": [r.to_json(include_timings) for r in self.provenance],
            "failure": self.failure,
            "artifacts": {name: wire.image_to_wire(img)
                          for name, img in sorted(self.artifacts.items())},
        }

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(canonical_json(self.to_json()).encode()).hexdigest()


class _Abort(Exception):
    """Internal: stage failure that becomes a failed EditResult."""

    def __init__(self, stage: str, cause: ViewcraftError):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


def _mask_digest(mask: np.ndarray) -> str:
    import hashlib

    h = hashlib.sha256()
    h.update(f"{mask.shape[0]}x{mask.shape[1]}:".encode())
    h.update(np.packbits(mask.astype(bool), axis=None).tobytes())
    return h.hexdigest()[:16]


def _foreground_mask(image: ImageBuffer) -> np.ndarray:
    """Non-background pixels of a white-backdrop synthesis result."""
    return (image.pixels[..., :3] < WHITE_THRESHOLD).any(axis=2)


def _place_in_frame(crop: ObjectCrop, width: int, height: int,
                    bbox: BoundingBox) -> ImageBuffer:
    """The aligned object alone on a white frame of the source geometry."""
    canvas = np.zeros((height, width, 4), dtype=np.uint8)
    canvas[bbox.y0:bbox.y1, bbox.x0:bbox.x1] = crop.image.pixels
    return ImageBuffer.from_array(canvas).to_rgb()


def _background_patch(source: ImageBuffer, bbox: BoundingBox) -> ObjectCrop:
    """Flat fill for removal passes: median color of the box's border ring.

    The ring sits just outside the box where possible (that is what the
    hole should blend into), falling back to the box's own border at image
    edges.
    """
    px = source.pixels[..., :3]
    h, w = px.shape[:2]
    x0, y0 = max(bbox.x0 - 1, 0), max(bbox.y0 - 1, 0)
    x1, y1 = min(bbox.x1 + 1, w), min(bbox.y1 + 1, h)
    ring = np.concatenate([
        px[y0, x0:x1], px[y1 - 1, x0:x1],
        px[y0:y1, x0], px[y0:y1, x1 - 1],
    ], axis=0).astype(np.float64)
    color = np.floor(np.median(ring, axis=0) + 0.5).astype(np.uint8)
    tile = np.empty((bbox.height, bbox.width, 4), dtype=np.uint8)
    tile[..., :3] = color
    tile[..., 3] = 255
    mask = np.ones((bbox.height, bbox.width), dtype=bool)
    return ObjectCrop(ImageBuffer.from_array(tile), mask, bbox)


class Orchestrator:
    """Wires config, backends, and scene state; runs edits and health checks.

    Thread-safe for concurrent edits: per-run state is local, and the view
    synthesis cache (keyed by input digest, delta, seed, and object id) is
    locked.
    """

    def __init__(self, config: PipelineConfig, *,
                 backends: BackendSet | None = None,
                 hub=None, registry: SceneRegistry | None = None):
        self.config = config
        self.registry = registry
        if self.registry is None and config.scene.registry:
            self.registry = SceneRegistry.load(config.scene.registry)
        self.hub = hub
        if backends is None:
            needs_hub = any(ep.is_stub for ep in config.backends.values())
            if needs_hub and self.hub is None:
                self.hub = default_stub_hub(self.registry)
            backends = BackendSet.from_endpoints(config.backends, hub=self.hub)
        self.backends = backends
        self.planner_spec = config.planner_spec()
        if config.pose.provider == "oracle" and self.registry is None:
            raise ConfigError("oracle pose provider needs a scene registry")
        self._params: EstimatorParameters | None = None
        if config.pose.provider == "model":
            try:
                self._params = EstimatorParameters.load(config.pose.params_path)
            except (OSError, KeyError) as exc:
                raise ConfigError(
                    f"cannot load estimator params "
                    f"{config.pose.params_path!r}: {exc}") from None
        self._nvs_cache: OrderedDict = OrderedDict()
        self._cache_lock = threading.Lock()

    # -- public API ----------------------------------------------------------

    def run_edit(self, request: EditRequest) -> EditResult:
        return self._run(request, request.options.two_stage)

    def run_edit_two_stage(self, request: EditRequest) -> EditResult:
        """The remove-then-insert ablation arm of the same pipeline."""
        if not request.options.two_stage:
            return self.run_edit(request)
        return self._run(request, True)

    def health(self) -> dict:
        """Reachability of every configured backend, by kind."""
        import httpx

        matrix = {}
        for kind, ep in sorted(self.config.backends.items()):
            if ep.is_stub:
                reachable = (self.hub is not None
                             and ep.stub_name in self.hub.handlers)
            else:
                url = ep.target.rstrip("/") + HEALTH_PATH
                try:
                    reachable = httpx.get(
                        url, timeout=min(2.0, ep.timeout)).status_code == 200
                except httpx.HTTPError:
                    reachable = False
            matrix[kind] = {"endpoint": ep.target, "reachable": bool(reachable)}
        return matrix

    # -- stage execution -----------------------------------------------------

    def _run(self, request: EditRequest, two_stage: bool) -> EditResult:
        records: list[StageRecord] = []
        artifacts: dict[str, ImageBuffer] = {}
        try:
            self._execute(request, two_stage, records, artifacts)
        except _Abort as abort:
            return EditResult(
                output=request.source_image,
                provenance=records,
                status="failed",
                failure={"stage": abort.stage,
                         "error_type": type(abort.cause).__name__,
                         "detail": str(abort.cause)},
            )
        output = artifacts.pop("__output__")
        return EditResult(output=output, provenance=records, status="ok",
                          artifacts=artifacts)

    def _stage(self, records: list, stage: str, fn, *, backend_id=None,
               seed=None, **diagnostics):
        """Run one stage body; record it, or abort with its typed failure."""
        t0 = time.perf_counter()
        try:
            detail, extra = fn()
        except BackendUnavailable:
            raise
        except ViewcraftError as exc:
            raise _Abort(stage, exc) from exc
        elapsed = (time.perf_counter() - t0) * 1000.0
        bid = extra.pop("backend_id", backend_id) if extra else backend_id
        diag = dict(diagnostics)
        if extra:
            diag.update(extra)
        records.append(StageRecord(stage=stage, backend_id=bid, seed=seed,
                                   detail=detail, elapsed_ms=elapsed,
                                   diagnostics=diag))
        return detail

    def _execute(self, request: EditRequest, two_stage: bool,
                 records: list, artifacts: dict) -> None:
        cfg = self.config
        source = request.source_image.to_rgb()
        seed = request.seed

        # Planning failures (unparsable text, exhausted repairs) raise: the
        # request itself is at fault, not this run.
        plan = plan_instruction(request.instruction, self.planner_spec,
                                hub=self.hub)
        if plan.action == "replace" and request.reference_image is None:
            raise PlanImageMismatch(
                f"instruction {request.instruction!r} replaces "
                f"{plan.source_object!r} but no reference image was given")
        if plan.action == "rotate" and request.reference_image is not None:
            raise PlanImageMismatch(
                f"instruction {request.instruction!r} rotates in place; "
                "a reference image does not apply")
        records.append(StageRecord(
            stage="plan",
            backend_id=(plan.provenance or {}).get("backend_id"),
            detail={"plan": plan.to_json(), "mode": self.planner_spec.mode,
                    "retry_count": (plan.provenance or {}).get("retry_count", 0)},
        ))

        # Segment the object under edit; a user bbox narrows the edit region
        # but the mask still comes from the backend.
        state: dict = {}

        def _segment():
            res = self.backends.segment.segment(source, plan.source_object)
            bbox = request.source_bbox or res.bbox
            state["bbox"] = bbox
            state["source_crop"] = crop_object(source, res.mask, bbox)
            return ({"label": plan.source_object, "bbox": res.bbox.to_json(),
                     "effective_bbox": bbox.to_json(),
                     "n_candidates": res.n_candidates,
                     "mask_digest": _mask_digest(res.mask)},
                    {"backend_id": res.provenance.get("backend_id")})

        self._stage(records, "segment", _segment)

        if plan.action == "replace":
            def _segment_reference():
                ref = request.reference_image.to_rgb()
                res = self.backends.segment.segment(ref, plan.reference_object)
                state["reference_crop"] = crop_object(ref, res.mask, res.bbox)
                return ({"label": plan.reference_object,
                         "bbox": res.bbox.to_json(),
                         "n_candidates": res.n_candidates,
                         "mask_digest": _mask_digest(res.mask)},
                        {"backend_id": res.provenance.get("backend_id")})

            self._stage(records, "segment-reference", _segment_reference)

        def _pose():
            view, pose, extra = self._estimate_source_view(
                request.source_image, plan.source_object)
            state["source_view"] = view
            detail = {"provider": cfg.pose.provider, "pose": pose.to_json(),
                      "spherical": view.to_json()}
            detail.update(extra)
            return detail, {}

        self._stage(records, "pose", _pose)

        def _target_view():
            planned = plan_to_target_view(plan, state["source_view"])
            err = float(request.options.inject_view_error_deg)
            target = planned
            if err != 0.0:
                target = SphericalView(planned.azimuth + err,
                                       planned.elevation, planned.radius)
            state["target_view"] = target
            return ({"view": target.to_json(), "planned_view": planned.to_json(),
                     "injected_error_deg": err, "clamped": planned.clamped}, {})

        self._stage(records, "target-view", _target_view)

        def _nvs():
            if plan.action == "rotate":
                nvs_input = state["source_crop"].image
                base_view = state["source_view"]
                label = plan.source_object
            else:
                # Reference imagery is assumed shot from the canonical view;
                # the synthesis moves it onto the source object's pose.
                nvs_input = state["reference_crop"].image
                base_view = DEFAULT_VIEW
                label = plan.reference_object
            delta = view_difference(state["target_view"], base_view)
            delta_pose = relative_pose(spherical_to_pose(base_view),
                                       spherical_to_pose(state["target_view"]))
            object_id = cfg.scene.object_id(label)
            image, provenance, cached = self._synthesize(
                nvs_input, delta, delta_pose, seed, object_id)
            state["nvs_image"] = image
            if request.options.keep_artifacts:
                artifacts["nvs"] = image
            return ({"delta": delta.to_json(), "base_view": base_view.to_json(),
                     "object_id": object_id, "image_digest": image.digest()},
                    {"backend_id": provenance.get("backend_id"),
                     "cache_hit": cached})

        self._stage(records, "nvs", _nvs, seed=seed)

        def _align():
            synth = state["nvs_image"].to_rgb()
            fg = _foreground_mask(synth)
            full = BoundingBox(0, 0, synth.width, synth.height)
            tight = crop_object(synth, fg, full)
            aligned = align_to_bbox(tight, state["bbox"],
                                    tolerance=cfg.align.aspect_tolerance)
            state["aligned"] = aligned
            if request.options.keep_artifacts:
                artifacts["aligned"] = aligned.image
            return ({"bbox": state["bbox"].to_json(),
                     "synth_bbox": tight.origin_bbox.to_json(),
                     "o_r_digest": aligned.image.digest()}, {})

        self._stage(records, "align", _align)

        def _control():
            frame = _place_in_frame(state["aligned"], source.width,
                                    source.height, state["bbox"])
            signals = make_control_signals(frame, cfg.align.color_cell,
                                           cfg.align.edge_low,
                                           cfg.align.edge_high)
            state["signals"] = signals
            if request.options.keep_artifacts:
                artifacts["edge"] = signals.edge_image()
                artifacts["color"] = signals.color_map
            return ({"edge_digest": signals.edge_image().digest(),
                     "color_digest": signals.color_map.digest(),
                     "cell": cfg.align.color_cell,
                     "thresholds": [cfg.align.edge_low, cfg.align.edge_high]},
                    {})

        self._stage(records, "control", _control)

        label = (plan.reference_object if plan.action == "replace"
                 else plan.source_object)
        prompt = cfg.insert_prompt.replace("{object_label}", label)
        bbox = state["bbox"]

        if not two_stage:
            def _inpaint():
                res = self.backends.inpaint.inpaint(
                    source, bbox, state["aligned"].image,
                    state["signals"].edge_image(), state["signals"].color_map,
                    prompt, seed)
                artifacts["__output__"] = res.image
                return ({"prompt": prompt, "bbox": bbox.to_json(),
                         "output_digest": res.image.digest()},
                        {"backend_id": res.provenance.get("backend_id")})

            self._stage(records, "inpaint", _inpaint, seed=seed)
            return

        def _remove():
            patch = _background_patch(source, bbox)
            frame = _place_in_frame(patch, source.width, source.height, bbox)
            signals = make_control_signals(frame, cfg.align.color_cell,
                                           cfg.align.edge_low,
                                           cfg.align.edge_high)
            res = self.backends.inpaint.inpaint(
                source, bbox, patch.image, signals.edge_image(),
                signals.color_map, cfg.removal_prompt, seed)
            state["mid_image"] = res.image
            artifacts["two_stage_mid"] = res.image
            return ({"prompt": cfg.removal_prompt, "bbox": bbox.to_json(),
                     "output_digest": res.image.digest()},
                    {"backend_id": res.provenance.get("backend_id")})

        self._stage(records, "inpaint-remove", _remove, seed=seed)

        def _insert():
            res = self.backends.inpaint.inpaint(
                state["mid_image"].to_rgb(), bbox, state["aligned"].image,
                state["signals"].edge_image(), state["signals"].color_map,
                prompt, seed + 1)
            artifacts["two_stage_final"] = res.image
            artifacts["__output__"] = res.image
            return ({"prompt": prompt, "bbox": bbox.to_json(),
                     "output_digest": res.image.digest()},
                    {"backend_id": res.provenance.get("backend_id")})

        self._stage(records, "inpaint-insert", _insert, seed=seed + 1)

    # -- helpers -------------------------------------------------------------

    def _estimate_source_view(self, image: ImageBuffer, label: str):
        provider = self.config.pose.provider
        if provider == "default":
            view = DEFAULT_VIEW
            return view, spherical_to_pose(view), {}
        if provider == "oracle":
            object_id = self.config.scene.object_id(label)
            if object_id is None:
                raise ObjectNotFound(label)
            view = self.registry.lookup(object_id).base_view
            return view, spherical_to_pose(view), {"object_id": object_id}
        est = estimate(image, self._params)
        return est.spherical, est.pose, {
            "extractor": self._params.feature_extractor_id}

    def _synthesize(self, image: ImageBuffer, delta, delta_pose: Pose,
                    seed: int, object_id: str | None):
        key = (image.digest(), canonical_json(delta.to_json()), seed, object_id)
        with self._cache_lock:
            hit = self._nvs_cache.get(key)
            if hit is not None:
                self._nvs_cache.move_to_end(key)
                return hit[0], hit[1], True
        res = self.backends.nvs.synthesize(image, delta, delta_pose, seed,
                                           object_id=object_id)
        with self._cache_lock:
            self._nvs_cache[key] = (res.image, res.provenance)
            while len(self._nvs_cache) > NVS_CACHE_CAP:
                self._nvs_cache.popitem(last=False)
        return res.image, res.provenance, False


# -- module-level conveniences ----------------------------------------------

def run_edit(request: EditRequest, config: PipelineConfig | None = None,
             **orchestrator_kwargs) -> EditResult:
    """One-shot edit with a throwaway orchestrator."""
    orch = Orchestrator(config or PipelineConfig.default(),
                        **orchestrator_kwargs)
    return orch.run_edit(request)


def run_edit_two_stage(request: EditRequest,
                       config: PipelineConfig | None = None,
                       **orchestrator_kwargs) -> EditResult:
    orch = Orchestrator(config or PipelineConfig.default(),
                        **orchestrator_kwargs)
    return orch.run_edit_two_stage(request)
