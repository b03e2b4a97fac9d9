"""Deterministic in-process stand-ins for the model backends.

Each stub consumes and produces the same wire payloads a remote model server
would, so the pipeline code cannot tell them apart from real backends.  All
stubs report ``latency_ms: 0`` to keep response bytes reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import DimensionMismatch, ObjectNotFound, ProtocolError
from ..geometry import BoundingBox, ViewDelta, apply_view_delta
from ..imagebuf import ImageBuffer, luminance_u8
from .render import render
from .scene import SceneRegistry
from . import wire

# Pixels with every channel at or above this are background white; rendered
# objects stay below it by construction (base colors capped at 220).
WHITE_THRESHOLD = 250
DEFAULT_FEATHER = 8


def _dilate8(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    out[1:, :] |= m[:-1, :]
    out[:-1, :] |= m[1:, :]
    out[:, 1:] |= m[:, :-1]
    out[:, :-1] |= m[:, 1:]
    out[1:, 1:] |= m[:-1, :-1]
    out[1:, :-1] |= m[:-1, 1:]
    out[:-1, 1:] |= m[1:, :-1]
    out[:-1, :-1] |= m[1:, 1:]
    return out


def _components(nonwhite: np.ndarray) -> list[np.ndarray]:
    """8-connected components in discovery (row-major seed) order."""
    remaining = nonwhite.copy()
    comps = []
    while remaining.any():
        seed = int(np.flatnonzero(remaining.ravel())[0])
        comp = np.zeros_like(remaining)
        comp.ravel()[seed] = True
        while True:
            grown = _dilate8(comp) & remaining
            if np.array_equal(grown, comp):
                break
            comp = grown
        comps.append(comp)
        remaining &= ~comp
    return comps


def mask_bbox(mask: np.ndarray) -> BoundingBox:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return BoundingBox(int(cols[0]), int(rows[0]),
                       int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))


@dataclass
class StubSegmenter:
    """Label-agnostic segmenter: picks the largest non-white region.

    Ties go to the component whose first pixel comes earliest in row-major
    order.  ``n_candidates`` in the response exposes ambiguity to callers.
    """

    backend_id: str = "stub-segment-v1"
    kind = "segment"

    def handle(self, payload: dict) -> dict:
        wire.validate_request("segment", payload)
        image = wire.wire_to_image(payload["image"]).to_rgb()
        nonwhite = (image.pixels[..., :3] < WHITE_THRESHOLD).any(axis=2)
        if not nonwhite.any():
            raise ObjectNotFound(payload["label"])
        comps = _components(nonwhite)
        best = comps[0]
        for comp in comps[1:]:
            if comp.sum() > best.sum():
                best = comp
        body = {
            "mask": wire.mask_to_wire(best),
            "bbox": mask_bbox(best).to_json(),
            "n_candidates": len(comps),
        }
        return wire.make_response(body, wire.make_provenance(self.backend_id, None))


@dataclass
class StubViewSynthesizer:
    """Re-renders a registered object at the delta-shifted view.

    Real view synthesis works from pixels; this stand-in needs the scene
    registry side channel (``object_id``) because no 3D lifting happens here.
    """

    registry: SceneRegistry
    backend_id: str = "stub-nvs-v1"
    kind = "nvs"

    def handle(self, payload: dict) -> dict:
        wire.validate_request("nvs", payload)
        object_id = payload.get("object_id")
        if not object_id:
            raise ObjectNotFound(
                "view-synthesis stub requires a registered object_id")
        entry = self.registry.lookup(object_id)
        delta = ViewDelta.from_json(payload["delta_spherical"])
        target = apply_view_delta(entry.base_view, delta)
        image = render(entry.spec, target, entry.render_size, entry.render_scale)
        body = {"image": wire.image_to_wire(image)}
        seed = int(payload["seed"])
        return wire.make_response(body, wire.make_provenance(self.backend_id, seed))


@dataclass
class StubInpainter:
    """Feathered composite of the reference into the source bounding box.

    Pixels outside the box are untouched (bit-identical to the source);
    inside, the reference fades in over ``feather`` pixels from the border.
    """

    feather: int = DEFAULT_FEATHER
    backend_id: str = "stub-inpaint-v1"
    kind = "inpaint"

    def handle(self, payload: dict) -> dict:
        wire.validate_request("inpaint", payload)
        source = wire.wire_to_image(payload["source"]).to_rgb()
        reference = wire.wire_to_image(payload["reference"]).to_rgba()
        bbox = BoundingBox.from_json(payload["bbox"])
        if not bbox.fits_image(source.width, source.height):
            raise DimensionMismatch(
                f"bbox {bbox.to_json()} outside source {source.width}x{source.height}")
        if (reference.width, reference.height) != (bbox.width, bbox.height):
            raise DimensionMismatch(
                f"reference {reference.width}x{reference.height} does not fill "
                f"bbox {bbox.width}x{bbox.height}")
        out = kernels.feather_composite(source.pixels, reference.pixels,
                                        bbox.x0, bbox.y0, self.feather)
        body = {"image": wire.image_to_wire(ImageBuffer.from_array(out))}
        seed = int(payload["seed"])
        return wire.make_response(body, wire.make_provenance(self.backend_id, seed))


@dataclass
class StubPlanner:
    """Instruction parser wearing the LLM backend interface.

    ``fail_times`` simulates a model that returns schema-invalid plans for
    the first N attempts of a request, exercising client-side repair
    retries.  The request's ``attempt`` counter drives the simulation so
    behaviour is stateless and reproducible.
    """

    fail_times: int = 0
    backend_id: str = "stub-llm-v1"
    kind = "llm"

    def handle(self, payload: dict) -> dict:
        wire.validate_request("llm", payload)
        attempt = int(payload.get("attempt", 0))
        if attempt < self.fail_times:
            # Schema-invalid on purpose: missing object_label.
            body = {"plan": {"operation": "rotate"}}
            return wire.make_response(body, wire.make_provenance(self.backend_id, None))
        from ..planner.grammar import parse_instruction

        plan = parse_instruction(payload["instruction"])
        body = {"plan": plan.to_json()}
        return wire.make_response(body, wire.make_provenance(self.backend_id, None))


@dataclass
class StubScorer:
    """Deterministic stand-in for a learned aesthetic scorer.

    Rates 1..10 (integers, like the real scorer) from simple image
    statistics: luma spread and subject coverage.  Only useful as a stable
    ranking signal in tests.
    """

    backend_id: str = "stub-score-v1"
    kind = "score"

    def handle(self, payload: dict) -> dict:
        wire.validate_request("score", payload)
        image = wire.wire_to_image(payload["image"]).to_rgb()
        luma = luminance_u8(image).astype(np.float64)
        spread = float(luma.std()) / 128.0
        coverage = float((image.pixels[..., :3] < WHITE_THRESHOLD).any(axis=2).mean())
        raw = 10.0 * (0.6 * spread + 0.4 * coverage)
        score = int(min(10, max(1, int(raw + 0.5))))
        body = {"score": score}
        return wire.make_response(body, wire.make_provenance(self.backend_id, None))


@dataclass
class StubHub:
    """Named stub handlers addressable as ``stub:<name>`` endpoints."""

    handlers: dict[str, object] = field(default_factory=dict)

    def add(self, name: str, handler) -> "StubHub":
        self.handlers[name] = handler
        return self

    def get(self, name: str, kind: str):
        try:
            handler = self.handlers[name]
        except KeyError:
            raise ProtocolError(f"no stub registered under {name!r}") from None
        if handler.kind != kind:
            raise ProtocolError(
                f"stub {name!r} serves kind {handler.kind!r}, not {kind!r}")
        return handler

    def handler_for_path(self, path: str):
        for handler in self.handlers.values():
            if wire.PATHS[handler.kind] == path:
                return handler
        return None


def default_stub_hub(registry: SceneRegistry | None = None,
                     planner_fail_times: int = 0,
                     feather: int = DEFAULT_FEATHER) -> StubHub:
    """The standard five-stub wiring used by tests and the demo config."""
    registry = registry if registry is not None else SceneRegistry()
    hub = StubHub()
    hub.add("segment", StubSegmenter())
    hub.add("nvs", StubViewSynthesizer(registry))
    hub.add("inpaint", StubInpainter(feather=feather))
    hub.add("llm", StubPlanner(fail_times=planner_fail_times))
    hub.add("score", StubScorer())
    return hub
