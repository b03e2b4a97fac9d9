"""Model backends: wire protocol, clients, stubs, and the test renderer."""

from .client import (BackendSet, HttpTransport, ImageResult, InpaintClient,
                     PlanClient, PlanResult, ScoreClient, ScoreResult,
                     SegmentClient, SegmentResult, StubTransport, Transport,
                     ViewSynthesisClient, make_transport)
from .render import (analytic_silhouette_bbox, build_mesh, projected_bounds,
                     render, silhouette_mask)
from .scene import SceneObject, SceneRegistry
from .server import StubBackendServer
from .stubs import (StubHub, StubInpainter, StubPlanner, StubScorer,
                    StubSegmenter, StubViewSynthesizer, default_stub_hub,
                    mask_bbox)
from .types import BackendEndpoint, PrimitivePart, ProceduralObjectSpec

__all__ = [
    "BackendEndpoint", "BackendSet", "HttpTransport", "ImageResult",
    "InpaintClient", "PlanClient", "PlanResult", "PrimitivePart",
    "ProceduralObjectSpec", "SceneObject", "SceneRegistry", "ScoreClient",
    "ScoreResult", "SegmentClient", "SegmentResult", "StubBackendServer",
    "StubHub", "StubInpainter", "StubPlanner", "StubScorer", "StubSegmenter",
    "StubTransport", "StubViewSynthesizer", "Transport",
    "analytic_silhouette_bbox", "build_mesh", "default_stub_hub", "mask_bbox",
    "make_transport", "projected_bounds", "render", "silhouette_mask",
]
