"""Typed clients over the backend wire protocol.

A client owns request building, schema validation both ways, and decoding
into domain types.  Transports are swappable: in-process stubs for tests and
offline runs, HTTP for real model servers.  Transport failures get exactly
one retry; application errors never do (except the plan-repair loop, which
the protocol defines explicitly).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import httpx
import jsonschema
import numpy as np

from ..errors import BackendUnavailable, ProtocolError, SchemaViolationExhausted
from ..geometry import BoundingBox, Pose, ViewDelta
from ..imagebuf import ImageBuffer
from . import wire
from .stubs import StubHub
from .types import BackendEndpoint


class Transport(Protocol):
    def post(self, endpoint: BackendEndpoint, kind: str, payload: dict) -> dict: ...


class StubTransport:
    """Dispatches to in-process stub handlers; no serialization shortcuts."""

    def __init__(self, hub: StubHub):
        self.hub = hub

    def post(self, endpoint: BackendEndpoint, kind: str, payload: dict) -> dict:
        handler = self.hub.get(endpoint.stub_name, kind)
        return handler.handle(payload)


class HttpTransport:
    """POSTs JSON to ``<target><path>``; one retry on transport failure."""

    def __init__(self, client: httpx.Client | None = None):
        self._client = client or httpx.Client()

    def post(self, endpoint: BackendEndpoint, kind: str, payload: dict) -> dict:
        url = endpoint.target.rstrip("/") + wire.PATHS[kind]
        headers = {"content-type": "application/json"}
        if endpoint.auth_token_ref:
            headers["authorization"] = f"Bearer {endpoint.auth_token_ref}"
        body = wire.canonical_json(payload)
        last_exc: Exception | None = None
        for _ in range(2):
            try:
                resp = self._client.post(url, content=body, headers=headers,
                                         timeout=endpoint.timeout)
                break
            except httpx.TransportError as exc:
                last_exc = exc
        else:
            raise BackendUnavailable(kind, f"{url}: {last_exc}")
        try:
            decoded = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{kind} backend returned non-JSON body") from exc
        if resp.status_code != 200:
            raise wire.decode_error(resp.status_code, decoded, kind)
        return decoded

    def close(self) -> None:
        self._client.close()


def make_transport(endpoint: BackendEndpoint, hub: StubHub | None = None,
                   http: HttpTransport | None = None) -> Transport:
    if endpoint.is_stub:
        if hub is None:
            raise ProtocolError(
                f"endpoint {endpoint.target!r} needs a stub hub to resolve against")
        return StubTransport(hub)
    return http or HttpTransport()


# --- results ----------------------------------------------------------------

@dataclass(frozen=True)
class SegmentResult:
    mask: np.ndarray
    bbox: BoundingBox
    n_candidates: int
    provenance: dict


@dataclass(frozen=True)
class ImageResult:
    image: ImageBuffer
    provenance: dict


@dataclass(frozen=True)
class PlanResult:
    plan: dict
    provenance: dict
    attempts: int


@dataclass(frozen=True)
class ScoreResult:
    score: float
    provenance: dict


# --- clients ----------------------------------------------------------------

class _Client:
    kind: str

    def __init__(self, endpoint: BackendEndpoint, transport: Transport):
        if endpoint.kind != self.kind:
            raise ProtocolError(
                f"endpoint kind {endpoint.kind!r} wired into a {self.kind!r} client")
        self.endpoint = endpoint
        self.transport = transport

    def _call(self, payload: dict) -> dict:
        wire.validate_request(self.kind, payload)
        response = self.transport.post(self.endpoint, self.kind, payload)
        wire.validate_response(self.kind, response)
        return response


class SegmentClient(_Client):
    kind = "segment"

    def segment(self, image: ImageBuffer, label: str) -> SegmentResult:
        resp = self._call(wire.build_segment_request(image, label))
        return SegmentResult(
            mask=wire.wire_to_mask(resp["mask"]),
            bbox=BoundingBox.from_json(resp["bbox"]),
            n_candidates=resp["n_candidates"],
            provenance=resp["provenance"],
        )


class ViewSynthesisClient(_Client):
    kind = "nvs"

    def synthesize(self, image: ImageBuffer, delta: ViewDelta, delta_pose: Pose,
                   seed: int, object_id: str | None = None) -> ImageResult:
        resp = self._call(wire.build_nvs_request(image, delta, delta_pose,
                                                 seed, object_id))
        return ImageResult(wire.wire_to_image(resp["image"]), resp["provenance"])


class InpaintClient(_Client):
    kind = "inpaint"

    def inpaint(self, source: ImageBuffer, bbox: BoundingBox,
                reference: ImageBuffer, edge_map: ImageBuffer,
                color_map: ImageBuffer, prompt: str, seed: int) -> ImageResult:
        resp = self._call(wire.build_inpaint_request(
            source, bbox, reference, edge_map, color_map, prompt, seed))
        return ImageResult(wire.wire_to_image(resp["image"]), resp["provenance"])


class PlanClient(_Client):
    """LLM planning with bounded schema-repair retries.

    A response that parses but violates the plan schema is re-requested with
    an incremented ``attempt`` counter, up to ``max_attempts`` total tries.
    """

    kind = "llm"

    def plan(self, instruction: str, template_id: str, max_attempts: int = 3,
             validate=None) -> PlanResult:
        last_plan, last_error, feedback = None, "no attempts made", None
        for attempt in range(max_attempts):
            resp = self._call(wire.build_plan_request(instruction, template_id,
                                                      attempt, feedback))
            plan = resp["plan"]
            try:
                jsonschema.validate(plan, wire.PLAN_SCHEMA)
                if validate is not None:
                    validate(plan)
            except (jsonschema.ValidationError, ValueError) as exc:
                last_plan = plan
                last_error = getattr(exc, "message", None) or str(exc)
                feedback = f"previous reply violated the plan schema: {last_error}"
                continue
            return PlanResult(plan, resp["provenance"], attempt + 1)
        raise SchemaViolationExhausted(max_attempts, wire.canonical_json(last_plan),
                                       last_error)


class ScoreClient(_Client):
    kind = "score"

    def score(self, image: ImageBuffer) -> ScoreResult:
        resp = self._call(wire.build_score_request(image))
        return ScoreResult(float(resp["score"]), resp["provenance"])


_CLIENT_TYPES = {
    "segment": SegmentClient,
    "nvs": ViewSynthesisClient,
    "inpaint": InpaintClient,
    "llm": PlanClient,
    "score": ScoreClient,
}


@dataclass(frozen=True)
class BackendSet:
    """One client per backend kind, as wired by the pipeline config."""

    segment: SegmentClient
    nvs: ViewSynthesisClient
    inpaint: InpaintClient
    llm: PlanClient
    score: ScoreClient | None = None

    @staticmethod
    def from_endpoints(endpoints: dict[str, BackendEndpoint],
                       hub: StubHub | None = None) -> "BackendSet":
        http = HttpTransport()
        clients = {}
        for kind in ("segment", "nvs", "inpaint", "llm", "score"):
            endpoint = endpoints.get(kind)
            if endpoint is None:
                clients[kind] = None
                continue
            transport = make_transport(endpoint, hub=hub, http=http)
            clients[kind] = _CLIENT_TYPES[kind](endpoint, transport)
        missing = [k for k in ("segment", "nvs", "inpaint", "llm")
                   if clients[k] is None]
        if missing:
            raise ProtocolError(f"missing required backend endpoints: {missing}")
        return BackendSet(**clients)
