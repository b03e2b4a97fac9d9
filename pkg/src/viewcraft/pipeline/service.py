"""HTTP shell over the orchestrator and session store.

Every route is a thin translation layer: decode the body, call the library,
encode the result.  Behavior is identical to direct library calls, which is
what the studio UI and the service tests rely on.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..backends import wire
from ..errors import ViewcraftError
from .config import PipelineConfig
from .orchestrator import EditOptions, Orchestrator
from .session import SessionStore

API_SCHEMA_VERSION = "1"

# Typed errors -> HTTP status. Validation problems are 4xx; an unreachable
# model backend is the gateway's fault, hence 502.
SERVICE_STATUS = dict(
    wire.ERROR_STATUS,
    BackendUnavailable=502,
    SessionNotFound=404,
    ConfigError=400,
    SchemaViolationExhausted=422,
    PoleDegenerate=422,
    AspectMismatch=422,
)


class CreateSessionBody(BaseModel):
    source_image: str
    reference_image: str | None = None


class EditBody(BaseModel):
    instruction: str
    seed: int = 0
    two_stage: bool = False
    inject_view_error_deg: float = 0.0


def create_app(config: PipelineConfig | None = None, *,
               orchestrator: Orchestrator | None = None,
               store: SessionStore | None = None) -> FastAPI:
    config = config or PipelineConfig.default()
    orch = orchestrator or Orchestrator(config)
    sessions = store or SessionStore(config.sessions_dir, orch)

    app = FastAPI(title="viewcraft service", version="1.0")
    app.state.orchestrator = orch
    app.state.sessions = sessions

    @app.exception_handler(ViewcraftError)
    def _viewcraft_error(request, exc: ViewcraftError):
        name = type(exc).__name__
        status = SERVICE_STATUS.get(name, 500)
        return JSONResponse({"error": {"type": name, "detail": str(exc)}},
                            status_code=status)

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        source = wire.wire_to_image(body.source_image)
        reference = (wire.wire_to_image(body.reference_image)
                     if body.reference_image else None)
        session = sessions.create(source, reference)
        return {"schema_version": API_SCHEMA_VERSION, "session": session}

    @app.post("/api/sessions/{session_id}/edits", status_code=201)
    def append_edit(session_id: str, body: EditBody):
        options = EditOptions(two_stage=body.two_stage,
                              inject_view_error_deg=body.inject_view_error_deg)
        entry = sessions.run_edit(session_id, body.instruction,
                                  seed=body.seed, options=options)
        return {"schema_version": API_SCHEMA_VERSION, "entry": entry}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return {"schema_version": API_SCHEMA_VERSION,
                "session": sessions.describe(session_id)}

    @app.get("/api/health")
    def health():
        matrix = orch.health()
        ok = all(entry["reachable"] for entry in matrix.values())
        return {"schema_version": API_SCHEMA_VERSION,
                "status": "ok" if ok else "degraded",
                "backends": matrix}

    return app


def serve(config: PipelineConfig | None = None, host: str = "127.0.0.1",
          port: int = 8000, log_level: str = "info") -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level=log_level)
