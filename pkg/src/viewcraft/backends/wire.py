"""Wire protocol for model backends: canonical JSON + base64 PNG images.

Every backend speaks HTTP POST with a JSON body.  Serialization here is
canonical (sorted keys, compact separators, deterministic PNG bytes) so that
identical requests produce identical bytes, which the golden-transcript
tests rely on.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
from typing import Any

import jsonschema
import numpy as np

from ..errors import ProtocolError
from ..geometry import BoundingBox, Pose, ViewDelta
from ..imagebuf import ImageBuffer

SCHEMA_VERSION = "1"

# One path per backend kind, plus a liveness probe on servers.
PATHS = {
    "segment": "/v1/segment",
    "nvs": "/v1/nvs",
    "inpaint": "/v1/inpaint",
    "llm": "/v1/plan",
    "score": "/v1/score",
}
HEALTH_PATH = "/v1/health"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def payload_digest(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def image_to_wire(image: ImageBuffer) -> str:
    return base64.b64encode(image.to_png()).decode("ascii")


def wire_to_image(data: str) -> ImageBuffer:
    try:
        raw = base64.b64decode(data.encode("ascii"), validate=True)
    except (binascii.Error, UnicodeEncodeError) as exc:
        raise ProtocolError(f"invalid base64 image payload: {exc}") from exc
    try:
        return ImageBuffer.from_png(raw)
    except Exception as exc:
        raise ProtocolError(f"undecodable PNG payload: {exc}") from exc


def mask_to_wire(mask: np.ndarray) -> str:
    """Boolean (h, w) mask as a base64 grayscale PNG (0 or 255)."""
    gray = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    buf = ImageBuffer.from_array(np.stack([gray] * 3, axis=-1))
    return base64.b64encode(buf.to_png()).decode("ascii")


def wire_to_mask(data: str) -> np.ndarray:
    img = wire_to_image(data)
    return np.asarray(img.pixels)[:, :, 0] > 127


_IMAGE = {"type": "string", "minLength": 1}
_BBOX = {
    "type": "object",
    "required": ["x0", "y0", "width", "height"],
    "properties": {
        "x0": {"type": "integer"},
        "y0": {"type": "integer"},
        "width": {"type": "integer", "minimum": 1},
        "height": {"type": "integer", "minimum": 1},
    },
}
_DELTA = {
    "type": "object",
    "properties": {
        "d_azimuth": {"type": "number"},
        "d_elevation": {"type": "number"},
        "d_radius": {"type": "number"},
    },
}
_POSE = {
    "type": "object",
    "required": ["rotation", "translation"],
    "properties": {
        "rotation": {"type": "array", "minItems": 9, "maxItems": 9,
                     "items": {"type": "number"}},
        "translation": {"type": "array", "minItems": 3, "maxItems": 3,
                        "items": {"type": "number"}},
    },
}
_PROVENANCE = {
    "type": "object",
    "required": ["backend_id", "seed", "latency_ms"],
    "properties": {
        "backend_id": {"type": "string"},
        "seed": {"type": ["integer", "null"]},
        "latency_ms": {"type": "number"},
    },
}

PLAN_SCHEMA = {
    "type": "object",
    "required": ["action", "source_object", "raw_instruction"],
    "properties": {
        "action": {"enum": ["replace", "rotate"]},
        "source_object": {"type": "string", "minLength": 1},
        "reference_object": {"type": ["string", "null"]},
        "view_delta": {"anyOf": [{"type": "null"}, _DELTA]},
        "raw_instruction": {"type": "string"},
    },
}

REQUEST_SCHEMAS = {
    "segment": {
        "type": "object",
        "required": ["image", "label"],
        "properties": {"image": _IMAGE, "label": {"type": "string", "minLength": 1}},
    },
    "nvs": {
        "type": "object",
        "required": ["image", "delta_spherical", "delta_pose", "seed"],
        "properties": {
            "image": _IMAGE,
            "delta_spherical": _DELTA,
            "delta_pose": _POSE,
            "seed": {"type": "integer"},
            "object_id": {"type": ["string", "null"]},
        },
    },
    "inpaint": {
        "type": "object",
        "required": ["source", "bbox", "reference", "edge_map", "color_map",
                     "prompt", "seed"],
        "properties": {
            "source": _IMAGE,
            "bbox": _BBOX,
            "reference": _IMAGE,
            "edge_map": _IMAGE,
            "color_map": _IMAGE,
            "prompt": {"type": "string"},
            "seed": {"type": "integer"},
        },
    },
    "llm": {
        "type": "object",
        "required": ["instruction", "template_id"],
        "properties": {
            "instruction": {"type": "string"},
            "template_id": {"type": "string"},
            "attempt": {"type": "integer", "minimum": 0},
            "feedback": {"type": ["string", "null"]},
        },
    },
    "score": {
        "type": "object",
        "required": ["image"],
        "properties": {"image": _IMAGE},
    },
}

_RESPONSE_BODIES = {
    "segment": {
        "required": ["mask", "bbox", "n_candidates"],
        "properties": {"mask": _IMAGE, "bbox": _BBOX,
                       "n_candidates": {"type": "integer", "minimum": 1}},
    },
    "nvs": {"required": ["image"], "properties": {"image": _IMAGE}},
    "inpaint": {"required": ["image"], "properties": {"image": _IMAGE}},
    "llm": {"required": ["plan"], "properties": {"plan": {}}},
    "score": {"required": ["score"],
              "properties": {"score": {"type": "number"}}},
}

RESPONSE_SCHEMAS = {
    kind: {
        "type": "object",
        "required": ["schema_version", "provenance"] + body["required"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "provenance": _PROVENANCE,
            **body["properties"],
        },
    }
    for kind, body in _RESPONSE_BODIES.items()
}


def validate_request(kind: str, payload: dict) -> None:
    _validate(payload, REQUEST_SCHEMAS[kind], f"{kind} request")


def validate_response(kind: str, payload: dict) -> None:
    _validate(payload, RESPONSE_SCHEMAS[kind], f"{kind} response")


def _validate(payload: dict, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise ProtocolError(f"malformed {what}: {exc.message}") from exc


# --- request builders -------------------------------------------------------

def build_segment_request(image: ImageBuffer, label: str) -> dict:
    return {"image": image_to_wire(image), "label": label}


def build_nvs_request(image: ImageBuffer, delta: ViewDelta, delta_pose: Pose,
                      seed: int, object_id: str | None = None) -> dict:
    payload = {
        "image": image_to_wire(image),
        "delta_spherical": delta.to_json(),
        "delta_pose": delta_pose.to_json(),
        "seed": int(seed),
    }
    if object_id is not None:
        payload["object_id"] = object_id
    return payload


def build_inpaint_request(source: ImageBuffer, bbox: BoundingBox,
                          reference: ImageBuffer, edge_map: ImageBuffer,
                          color_map: ImageBuffer, prompt: str, seed: int) -> dict:
    return {
        "source": image_to_wire(source),
        "bbox": bbox.to_json(),
        "reference": image_to_wire(reference),
        "edge_map": image_to_wire(edge_map),
        "color_map": image_to_wire(color_map),
        "prompt": prompt,
        "seed": int(seed),
    }


def build_plan_request(instruction: str, template_id: str, attempt: int = 0,
                       feedback: str | None = None) -> dict:
    payload = {"instruction": instruction, "template_id": template_id,
               "attempt": int(attempt)}
    if feedback is not None:
        payload["feedback"] = feedback
    return payload


def build_score_request(image: ImageBuffer) -> dict:
    return {"image": image_to_wire(image)}


# --- error transport --------------------------------------------------------
#
# Backend failures cross the wire as {"error": {"type", "detail"}} with an
# HTTP status; both sides of the protocol share this table so in-process and
# HTTP transports surface identical typed exceptions.

ERROR_STATUS = {
    "ProtocolError": 400,
    "PlanImageMismatch": 400,
    "EmptyInstruction": 422,
    "UnparsableInstruction": 422,
    "DimensionMismatch": 422,
    "UnsupportedView": 422,
    "EmptyMask": 422,
    "ObjectNotFound": 404,
    "RenderFailure": 500,
}


def encode_error(exc: Exception) -> tuple[int, dict]:
    name = type(exc).__name__
    status = ERROR_STATUS.get(name, 500)
    return status, {"error": {"type": name, "detail": str(exc)}}


def decode_error(status: int, payload: dict, kind: str) -> Exception:
    from .. import errors

    info = payload.get("error") if isinstance(payload, dict) else None
    name = info.get("type", "") if isinstance(info, dict) else ""
    detail = info.get("detail", "") if isinstance(info, dict) else ""
    cls = getattr(errors, name, None)
    if (isinstance(cls, type) and issubclass(cls, errors.ViewcraftError)
            and name in ERROR_STATUS):
        try:
            return cls(detail or name)
        except TypeError:
            # Constructor wants structured args the wire no longer carries;
            # rebuild with just the remote message.
            exc = cls.__new__(cls)
            Exception.__init__(exc, detail or name)
            return exc
    if status >= 500:
        return errors.BackendUnavailable(kind, f"server error {status}: {detail or payload}")
    return ProtocolError(f"{kind} backend returned status {status}: {detail or payload}")


def make_provenance(backend_id: str, seed: int | None, latency_ms: float = 0.0) -> dict:
    return {"backend_id": backend_id, "seed": seed, "latency_ms": latency_ms}


def make_response(body: dict, provenance: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **body, "provenance": provenance}
